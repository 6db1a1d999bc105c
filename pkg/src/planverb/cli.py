"""Command-line entry points.

Exit codes: 0 success, 2 parse or config errors, 3 unsolvable goal,
4 bad verbalization size.
"""

from __future__ import annotations

import dataclasses
import json
import sys
from pathlib import Path

import click

from .bench import run_dataset, summary_json
from .config import ConfigError, UnsolvableGoalError, build_from_config, load_model_config
from .mirror import cross_entropy, information_gain
from .pddl import PddlError, ground, parse_domain, parse_problem
from .planner import plan_optimal, plan_to_lines
from .strategies import Strategy, load_template_table, render, select

EXIT_PARSE = 2
EXIT_UNSOLVABLE = 3
EXIT_BAD_SIZE = 4


@click.group()
def main() -> None:
    """Plan verbalization against a second-order observer model."""


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@main.command()
@click.argument("domain", type=click.Path(exists=True, dir_okay=False))
@click.argument("problem", type=click.Path(exists=True, dir_okay=False))
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option("--strategy", "-s", default="informative", help="increasing, decreasing, informative or informative-nested.")
@click.option("--size", "-n", type=int, required=True, help="How many actions to announce.")
@click.option("--templates", type=click.Path(exists=True, dir_okay=False), help="Sentence template file (operator: template lines).")
def verbalize(domain: str, problem: str, config: str, strategy: str, size: int, templates: str | None) -> None:
    """Announce SIZE actions of the optimal plan for PROBLEM, chosen by the
    strategy against the observer model described by CONFIG."""
    try:
        strat = Strategy.parse(strategy)
    except ValueError as exc:
        _fail(EXIT_PARSE, str(exc))
    try:
        model_config = load_model_config(config)
        model_config = dataclasses.replace(
            model_config, domain_path=Path(domain), problem_path=Path(problem)
        )
        model, _, _ = build_from_config(model_config)
    except (ConfigError, PddlError) as exc:
        _fail(EXIT_PARSE, str(exc))
    except UnsolvableGoalError as exc:
        _fail(EXIT_UNSOLVABLE, str(exc))
    n = len(model.distinct_actions())
    if not 1 <= size <= n:
        _fail(EXIT_BAD_SIZE, f"size {size} out of range 1..{n}")
    selection = select(strat, model, size)
    if templates:
        table = load_template_table(templates)
        sentences = render(selection, table)
    else:
        sentences = [str(a) for a in selection.actions]
    for sentence in sentences:
        click.echo(sentence)
    click.echo(
        json.dumps(
            {
                "strategy": strat.value,
                "size": size,
                "actions": [str(a) for a in selection.actions],
                "sentences": sentences,
                "information_gain": information_gain(model, selection),
                "base_entropy": cross_entropy(model),
                "robot_plan": [str(a) for a in model.robot_plan.actions],
            },
            indent=2,
        )
    )


@main.command()
@click.argument("domain", type=click.Path(exists=True, dir_okay=False))
@click.argument("problem", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "-o", type=click.Path(dir_okay=False), help="Write the plan here instead of stdout.")
def plan(domain: str, problem: str, out: str | None) -> None:
    """Print an optimal plan, one action per line."""
    try:
        dom = parse_domain(Path(domain).read_text())
        prob = parse_problem(Path(problem).read_text(), dom)
        instance = ground(dom, prob)
    except PddlError as exc:
        _fail(EXIT_PARSE, str(exc))
    result = plan_optimal(instance)
    if result is None:
        _fail(EXIT_UNSOLVABLE, "the goal is unreachable")
    text = plan_to_lines(result)
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


@main.command()
@click.option("--dataset", type=click.Path(exists=True, file_okay=False), default="datasets", show_default=True)
@click.option("--domains", default="blocks,logistics", show_default=True, help="Comma-separated dataset names.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), default="bench-out", show_default=True)
def bench(dataset: str, domains: str, seed: int, out: str) -> None:
    """Run the strategy benchmark and write per-domain CSV/JSON outputs."""
    names = [d.strip() for d in domains.split(",") if d.strip()]
    try:
        results = run_dataset(Path(dataset), names, seed, Path(out))
    except (PddlError, FileNotFoundError) as exc:
        _fail(EXIT_PARSE, str(exc))
    for name, result in results.items():
        click.echo(f"{name}: {len(result.instances)} instances, {len(result.skipped)} skipped")
        click.echo(summary_json(result), nl=False)


@main.command()
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), default="study-out", show_default=True)
def serve(port: int, host: str, seed: int, out: str) -> None:
    """Serve the browser study over HTTP."""
    import uvicorn

    from .service import create_app

    app = create_app(seed=seed, out_dir=Path(out))
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
