"""Observer-model configuration files.

A model config is a JSON document naming the domain, problem and goal-pool
files plus the uncertainty parameters; `build_from_config` turns one into a
ready observer model.  Relative paths resolve against the config file's
directory.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .bench import load_goal_pool
from .mirror import (
    BeliefPrior,
    MirrorModel,
    ModelBuildError,
    build_model,
    uncertain_from_plan,
)
from .pddl import (
    Domain,
    GroundAtom,
    Problem,
    ground,
    parse_domain,
    parse_ground_atom,
    parse_problem,
)
from .planner import plan_optimal


class ConfigError(ValueError):
    """The config document is malformed or inconsistent."""


class UnsolvableGoalError(Exception):
    """The configured robot goal has no plan."""


_KNOWN_KEYS = {
    "domain",
    "problem",
    "goal_pool",
    "robot_goal_index",
    "uncertain_atoms",
    "num_uncertain",
    "atom_probs",
    "goal_probs",
    "k",
    "tau",
    "seed",
}


@dataclass(frozen=True)
class ModelConfig:
    goal_pool_path: Path
    domain_path: Path | None = None
    problem_path: Path | None = None
    robot_goal_index: int = 0
    uncertain_atoms: tuple[GroundAtom, ...] | None = None
    num_uncertain: int | None = None
    atom_probs: tuple[float, ...] | float = 0.5
    goal_probs: tuple[float, ...] | None = None
    k: int = 1
    tau: float = 1.0
    seed: int = 0


def load_model_config(path: str | Path) -> ModelConfig:
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(payload) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "goal_pool" not in payload:
        raise ConfigError("config is missing 'goal_pool'")
    base = path.parent
    uncertain = payload.get("uncertain_atoms")
    if uncertain is not None:
        if payload.get("num_uncertain") is not None:
            raise ConfigError("give uncertain_atoms or num_uncertain, not both")
        uncertain = tuple(parse_ground_atom(a) for a in uncertain)
    atom_probs = payload.get("atom_probs", 0.5)
    if isinstance(atom_probs, list):
        atom_probs = tuple(float(p) for p in atom_probs)
    else:
        atom_probs = float(atom_probs)
    goal_probs = payload.get("goal_probs")
    if goal_probs is not None:
        goal_probs = tuple(float(p) for p in goal_probs)
    return ModelConfig(
        domain_path=base / payload["domain"] if "domain" in payload else None,
        problem_path=base / payload["problem"] if "problem" in payload else None,
        goal_pool_path=base / payload["goal_pool"],
        robot_goal_index=int(payload.get("robot_goal_index", 0)),
        uncertain_atoms=uncertain,
        num_uncertain=(
            int(payload["num_uncertain"])
            if payload.get("num_uncertain") is not None
            else None
        ),
        atom_probs=atom_probs,
        goal_probs=goal_probs,
        k=int(payload.get("k", 1)),
        tau=float(payload.get("tau", 1.0)),
        seed=int(payload.get("seed", 0)),
    )


def build_from_config(config: ModelConfig) -> tuple[MirrorModel, Domain, Problem]:
    """Parse the referenced files and build the observer model.

    The robot holds every uncertain atom true (they are drawn from its real
    initial state); the goal at `robot_goal_index` in the pool is its goal.
    """
    if config.domain_path is None or config.problem_path is None:
        raise ConfigError("config names no domain/problem and none were supplied")
    domain = parse_domain(Path(config.domain_path).read_text())
    problem = parse_problem(Path(config.problem_path).read_text(), domain)
    pool = load_goal_pool(config.goal_pool_path, domain, problem)
    if not 0 <= config.robot_goal_index < len(pool):
        raise ConfigError(
            f"robot_goal_index {config.robot_goal_index} outside pool of {len(pool)}"
        )

    uncertain = config.uncertain_atoms
    if uncertain is None and config.num_uncertain:
        robot_goal = pool[config.robot_goal_index]
        plan = plan_optimal(ground(domain, problem.replace_goal(robot_goal)))
        if plan is None:
            raise UnsolvableGoalError(f"no plan for goal {sorted(robot_goal)}")
        rng = random.Random(config.seed)
        uncertain = uncertain_from_plan(plan, problem.init, config.num_uncertain, rng)
    elif uncertain is None:
        uncertain = ()
    missing = [a for a in uncertain if a not in problem.init]
    if missing:
        raise ConfigError(f"uncertain atoms not in the initial state: {missing}")

    if isinstance(config.atom_probs, tuple):
        atom_probs = config.atom_probs
        if len(atom_probs) != len(uncertain):
            raise ConfigError(
                f"{len(atom_probs)} atom_probs for {len(uncertain)} uncertain atoms"
            )
    else:
        atom_probs = (config.atom_probs,) * len(uncertain)
    goal_probs = config.goal_probs
    if goal_probs is None:
        goal_probs = (1.0 / len(pool),) * len(pool)
    elif len(goal_probs) != len(pool):
        raise ConfigError(f"{len(goal_probs)} goal_probs for {len(pool)} goals")

    try:
        prior = BeliefPrior(
            base_init=problem.init - set(uncertain),
            uncertain_atoms=tuple(uncertain),
            atom_probs=atom_probs,
            goal_pool=tuple(pool),
            goal_probs=goal_probs,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    try:
        model = build_model(
            domain,
            problem,
            prior,
            robot_goal_index=config.robot_goal_index,
            robot_init_choices=(True,) * len(uncertain),
            k=config.k,
            tau=config.tau,
        )
    except ModelBuildError as exc:
        raise UnsolvableGoalError(str(exc)) from exc
    return model, domain, problem
