"""Benchmark harness comparing verbalization strategies on PDDL datasets.

Per instance the harness samples a robot goal from the instance's goal pool,
adds three decoy goals with equal prior, makes four init atoms the robot
plan relies on uncertain at probability one half, and builds the observer
model.  It then sweeps announcement sizes as fractions of the plan length
and records, per strategy:

* the observer's remaining cross-entropy after the announcement,
* the entropy gap to the informative strategy (zero for informative itself),
* the goal distance of the newly announced action: how many plan steps
  until the next action that adds a goal atom, normalized by plan length.

Results aggregate into per-fraction rows and serialize as two CSVs per
domain (gap + distance, and raw entropies).
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

from .mirror import (
    BeliefPrior,
    MirrorModel,
    build_model,
    cross_entropy,
    information_gain,
    uncertain_from_plan,
)
from .pddl import (
    Domain,
    GroundAtom,
    PddlValidationError,
    Problem,
    ground,
    parse_atom_set,
    parse_domain,
    parse_problem,
)
from .planner import plan_optimal
from .strategies import Strategy, select

DEFAULT_FRACTIONS = tuple(round(0.1 * i, 1) for i in range(1, 11))

#: column order is part of the output contract
METRICS_COLUMNS = (
    "x",
    "e_gain_inc",
    "e_gain_dec",
    "e_gain_ent",
    "g_dist_inc",
    "g_dist_dec",
    "g_dist_ent",
)
ENTROPY_COLUMNS = ("x", "h_inc", "h_dec", "h_ent")

STRATEGY_KEYS = {
    "inc": Strategy.INCREASING,
    "dec": Strategy.DECREASING,
    "ent": Strategy.INFORMATIVE,
}


class InstanceSkipped(Exception):
    """The instance cannot enter the benchmark (with the reason)."""


class GoalDistance(NamedTuple):
    value: float
    flagged: bool


@dataclass
class BenchConfig:
    domain_path: Path
    instances: tuple[tuple[Path, Path], ...]  # (problem file, goal pool file)
    seed: int = 0
    num_uncertain: int = 4
    num_goals: int = 4
    atom_prob: float = 0.5
    k: int = 1
    tau: float = 1.0
    fractions: tuple[float, ...] = DEFAULT_FRACTIONS


@dataclass
class FractionRecord:
    x: float
    size: int
    entropy: dict[str, float]
    gain_gap: dict[str, float]
    distance: dict[str, float]
    flagged: dict[str, bool]


@dataclass
class InstanceRecord:
    name: str
    seed: int
    plan_length: int
    distinct_count: int
    num_uncertain: int
    base_entropy: float
    fractions: list[FractionRecord] = field(default_factory=list)


@dataclass
class MetricsRow:
    x: float
    e_gain: dict[str, float]
    g_dist: dict[str, float]
    h: dict[str, float]


@dataclass
class BenchResult:
    domain: str
    instances: list[InstanceRecord]
    skipped: list[tuple[str, str]]
    rows: list[MetricsRow]


def load_goal_pool(path: Path, domain: Domain, problem: Problem) -> list[frozenset[GroundAtom]]:
    """One goal per line, atoms separated by commas; validated against the
    domain's predicates and the problem's objects."""
    objects = dict(domain.constants)
    objects.update(problem.objects)
    pool: list[frozenset[GroundAtom]] = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        goal = parse_atom_set(line)
        for atom in goal:
            pred = domain.predicates.get(atom.predicate)
            if pred is None:
                raise PddlValidationError(f"goal pool: undeclared predicate {atom.predicate!r}")
            if pred.arity != len(atom.args):
                raise PddlValidationError(f"goal pool: bad arity in {atom}")
            for arg in atom.args:
                if arg not in objects:
                    raise PddlValidationError(f"goal pool: undeclared object {arg!r}")
        if not goal:
            raise PddlValidationError("goal pool: empty goal line")
        pool.append(goal)
    return pool


def setup_instance(
    domain: Domain,
    problem: Problem,
    goal_pool: list[frozenset[GroundAtom]],
    seed: int,
    *,
    num_uncertain: int = 4,
    num_goals: int = 4,
    atom_prob: float = 0.5,
    k: int = 1,
    tau: float = 1.0,
) -> MirrorModel:
    """Build the observer model for one benchmark instance.

    The robot's goal is drawn from the pool, decoys fill the model's goal
    pool to `num_goals` entries with equal prior, and `num_uncertain` init
    atoms among the plan's preconditions become uncertain.
    """
    if len(goal_pool) < num_goals:
        raise InstanceSkipped(
            f"goal pool holds {len(goal_pool)} goals, need {num_goals}"
        )
    rng = random.Random(seed)
    robot_goal = goal_pool[rng.randrange(len(goal_pool))]
    robot_problem = problem.replace_goal(robot_goal)
    robot_plan = plan_optimal(ground(domain, robot_problem))
    if robot_plan is None:
        raise InstanceSkipped(f"robot goal {sorted(robot_goal)} is unsolvable")
    if not robot_plan.actions:
        raise InstanceSkipped(
            f"robot goal {sorted(robot_goal)} already holds, nothing to announce"
        )

    decoy_candidates = [g for g in goal_pool if g != robot_goal]
    decoys = rng.sample(decoy_candidates, num_goals - 1)
    # keep the pool order deterministic: robot goal first, decoys by pool rank
    decoys.sort(key=lambda g: goal_pool.index(g))
    model_pool = (robot_goal, *decoys)

    uncertain = uncertain_from_plan(robot_plan, problem.init, num_uncertain, rng)
    prior = BeliefPrior(
        base_init=problem.init - set(uncertain),
        uncertain_atoms=uncertain,
        atom_probs=(atom_prob,) * len(uncertain),
        goal_pool=model_pool,
        goal_probs=(1.0 / num_goals,) * num_goals,
    )
    return build_model(
        domain,
        problem,
        prior,
        robot_goal_index=0,
        robot_init_choices=(True,) * len(uncertain),
        k=k,
        tau=tau,
    )


def announcement_size(fraction: float, distinct_count: int) -> int:
    """Round half up, at least one action, never more than the plan has."""
    return min(distinct_count, max(1, math.floor(fraction * distinct_count + 0.5)))


def distance_to_goal(model: MirrorModel, plan_index: int) -> GoalDistance:
    """Steps from `plan_index` to the next action adding a goal atom,
    normalized by plan length.  Zero when that action itself does.
    Flagged when no later action touches the goal (distance to plan end)."""
    plan = model.robot_plan.actions
    if not 0 <= plan_index < len(plan):
        raise ValueError(f"plan index {plan_index} out of range")
    goal = model.robot_belief.goal
    for j in range(plan_index, len(plan)):
        if plan[j].add & goal:
            return GoalDistance((j - plan_index) / len(plan), False)
    return GoalDistance((len(plan) - plan_index) / len(plan), True)


def _first_plan_position(model: MirrorModel, action) -> int:
    for i, a in enumerate(model.robot_plan.actions):
        if a == action:
            return i
    raise ValueError(f"action {action} not in the robot plan")


def run_instance(model: MirrorModel, name: str, seed: int, fractions) -> InstanceRecord:
    base = cross_entropy(model)
    record = InstanceRecord(
        name=name,
        seed=seed,
        plan_length=len(model.robot_plan.actions),
        distinct_count=len(model.distinct_actions()),
        num_uncertain=_uncertain_count(model),
        base_entropy=base,
    )
    n = len(model.distinct_actions())
    prev_sets: dict[str, set] = {key: set() for key in STRATEGY_KEYS}
    prev_distance: dict[str, GoalDistance] = {}
    for x in fractions:
        size = announcement_size(x, n)
        entropy: dict[str, float] = {}
        distance: dict[str, float] = {}
        flagged: dict[str, bool] = {}
        for key, strategy in STRATEGY_KEYS.items():
            selection = select(strategy, model, size)
            entropy[key] = base - information_gain(model, selection)
            new_actions = set(selection) - prev_sets[key]
            if new_actions:
                earliest = min(_first_plan_position(model, a) for a in new_actions)
                dist = distance_to_goal(model, earliest)
            else:
                # same announcement as the previous fraction: carry forward
                dist = prev_distance.get(key, GoalDistance(0.0, False))
            distance[key] = dist.value
            flagged[key] = dist.flagged
            prev_sets[key] = set(selection)
            prev_distance[key] = dist
        gap = {key: entropy[key] - entropy["ent"] for key in STRATEGY_KEYS}
        record.fractions.append(
            FractionRecord(x, size, entropy, gap, distance, flagged)
        )
    return record


def run_benchmark(config: BenchConfig) -> BenchResult:
    domain = parse_domain(Path(config.domain_path).read_text())
    instances: list[InstanceRecord] = []
    skipped: list[tuple[str, str]] = []
    for idx, (problem_path, pool_path) in enumerate(config.instances):
        name = Path(problem_path).stem
        problem = parse_problem(Path(problem_path).read_text(), domain)
        pool = load_goal_pool(pool_path, domain, problem)
        seed = config.seed + idx
        try:
            model = setup_instance(
                domain,
                problem,
                pool,
                seed,
                num_uncertain=config.num_uncertain,
                num_goals=config.num_goals,
                atom_prob=config.atom_prob,
                k=config.k,
                tau=config.tau,
            )
        except InstanceSkipped as exc:
            skipped.append((name, str(exc)))
            continue
        instances.append(run_instance(model, name, seed, config.fractions))
    rows = aggregate(config.fractions, instances)
    return BenchResult(domain.name, instances, skipped, rows)


def _uncertain_count(model: MirrorModel) -> int:
    # the init atoms the surviving beliefs disagree on
    inits = [set(h.belief.init) for h in model.hypotheses]
    union = set().union(*inits)
    common = set.intersection(*inits)
    return len(union - common)


def aggregate(fractions, instances: list[InstanceRecord]) -> list[MetricsRow]:
    rows: list[MetricsRow] = []
    if not instances:
        return rows
    for i, x in enumerate(fractions):
        e_gain = {}
        g_dist = {}
        h = {}
        for key in STRATEGY_KEYS:
            e_gain[key] = sum(r.fractions[i].gain_gap[key] for r in instances) / len(instances)
            g_dist[key] = sum(r.fractions[i].distance[key] for r in instances) / len(instances)
            h[key] = sum(r.fractions[i].entropy[key] for r in instances) / len(instances)
        rows.append(MetricsRow(x, e_gain, g_dist, h))
    return rows


def metrics_csv(result: BenchResult) -> str:
    lines = [",".join(METRICS_COLUMNS)]
    for row in result.rows:
        lines.append(
            ",".join(
                [f"{row.x:.1f}"]
                + [f"{row.e_gain[k]:.6f}" for k in ("inc", "dec", "ent")]
                + [f"{row.g_dist[k]:.6f}" for k in ("inc", "dec", "ent")]
            )
        )
    return "\n".join(lines) + "\n"


def entropy_csv(result: BenchResult) -> str:
    lines = [",".join(ENTROPY_COLUMNS)]
    for row in result.rows:
        lines.append(
            ",".join([f"{row.x:.1f}"] + [f"{row.h[k]:.6f}" for k in ("inc", "dec", "ent")])
        )
    return "\n".join(lines) + "\n"


def summary_json(result: BenchResult) -> str:
    payload = {
        "domain": result.domain,
        "instances": [
            {
                "name": r.name,
                "seed": r.seed,
                "plan_length": r.plan_length,
                "distinct_actions": r.distinct_count,
                "base_entropy": r.base_entropy,
                "flagged_rows": sum(
                    1 for f in r.fractions for v in f.flagged.values() if v
                ),
            }
            for r in result.instances
        ],
        "skipped": [{"name": n, "reason": why} for n, why in result.skipped],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def dataset_config(dataset_dir: Path, domain: str, seed: int, **overrides) -> BenchConfig:
    root = Path(dataset_dir) / domain
    instance_dir = root / "instances"
    goal_dir = root / "goals"
    pairs = []
    for problem_path in sorted(instance_dir.glob("*.pddl")):
        pool_path = goal_dir / f"{problem_path.stem}.txt"
        if not pool_path.exists():
            raise FileNotFoundError(f"no goal pool for {problem_path.name}")
        pairs.append((problem_path, pool_path))
    if not pairs:
        raise FileNotFoundError(f"no instances under {instance_dir}")
    return BenchConfig(root / "domain.pddl", tuple(pairs), seed=seed, **overrides)


def run_dataset(
    dataset_dir: Path, domains: list[str], seed: int, out_dir: Path | None, **overrides
) -> dict[str, BenchResult]:
    """Run every requested domain and optionally write the CSV/JSON outputs."""
    results: dict[str, BenchResult] = {}
    for domain in domains:
        config = dataset_config(dataset_dir, domain, seed, **overrides)
        result = run_benchmark(config)
        results[domain] = result
        if out_dir is not None:
            out = Path(out_dir)
            out.mkdir(parents=True, exist_ok=True)
            (out / f"{domain}_metrics.csv").write_text(metrics_csv(result))
            (out / f"{domain}_entropy.csv").write_text(entropy_csv(result))
            (out / f"{domain}_summary.json").write_text(summary_json(result))
    return results
