"""Second-order observer model and informative action selection.

The robot knows its own belief (init and goal) and its plan.  To decide what
to say, it simulates an observer who is *uncertain* about that belief: each
of J init atoms holds independently with some probability, and the goal is
drawn from a finite pool.  Every consistent (init, goal) combination becomes
a hypothesis carrying a prior and a weighted set of plans the robot would be
executing under that belief.

Announcing a subset of plan actions filters the ensemble: a hypothesis/plan
pair survives only if it contains every announced action.  The information
gain of an announcement is the drop in the observer's cross-entropy against
the robot's actual belief and plan, and the best announcement of a given
size maximizes that gain.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .pddl import Domain, GroundAction, GroundAtom, GroundInstance, Problem, ground
from .planner import (
    DEFAULT_HEURISTIC,
    DEFAULT_MAX_EXPANSIONS,
    Plan,
    SearchSpace,
    WeightedPlanSet,
    topk_in_space,
)

MAX_UNCERTAIN_ATOMS = 16


class ModelBuildError(Exception):
    """The hypothesis ensemble cannot be built as requested."""


@dataclass(frozen=True)
class Belief:
    """One fully determined world the observer considers possible."""

    init: frozenset[GroundAtom]
    goal: frozenset[GroundAtom]


@dataclass(frozen=True)
class BeliefPrior:
    """Factored uncertainty over the robot's belief.

    Init atoms in `uncertain_atoms` hold independently with the matching
    probability in `atom_probs`; everything in `base_init` holds for sure.
    The goal is a categorical draw from `goal_pool` with `goal_probs`.
    """

    base_init: frozenset[GroundAtom]
    uncertain_atoms: tuple[GroundAtom, ...]
    atom_probs: tuple[float, ...]
    goal_pool: tuple[frozenset[GroundAtom], ...]
    goal_probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.uncertain_atoms) != len(self.atom_probs):
            raise ValueError("one probability per uncertain atom required")
        if len(set(self.uncertain_atoms)) != len(self.uncertain_atoms):
            raise ValueError("uncertain atoms must be distinct")
        if any(a in self.base_init for a in self.uncertain_atoms):
            raise ValueError("uncertain atoms cannot also be certain")
        if any(not (0.0 <= p <= 1.0) for p in self.atom_probs):
            raise ValueError("atom probabilities must lie in [0, 1]")
        if not self.goal_pool:
            raise ValueError("goal pool cannot be empty")
        if len(set(self.goal_pool)) != len(self.goal_pool):
            raise ValueError("goal pool entries must be distinct")
        if any(not g for g in self.goal_pool):
            raise ValueError("goals cannot be empty")
        if len(self.goal_pool) != len(self.goal_probs):
            raise ValueError("one probability per goal required")
        if any(p < 0.0 for p in self.goal_probs):
            raise ValueError("goal probabilities must be non-negative")
        if abs(sum(self.goal_probs) - 1.0) > 1e-9:
            raise ValueError("goal probabilities must sum to 1")


@dataclass(frozen=True)
class Hypothesis:
    """A belief, its (renormalized) prior, and the plans it would produce."""

    belief: Belief
    prior: float
    plans: WeightedPlanSet


@dataclass(frozen=True)
class Verbalization:
    """An ordered, duplicate-free selection of plan actions to announce."""

    actions: tuple[GroundAction, ...]

    def __post_init__(self):
        if len(set(self.actions)) != len(self.actions):
            raise ValueError("verbalized actions must be distinct")

    def __len__(self) -> int:
        return len(self.actions)

    def __iter__(self):
        return iter(self.actions)


class AllEliminated:
    """Sentinel: the announcement is inconsistent with every hypothesis."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "AllEliminated"


ALL_ELIMINATED = AllEliminated()


@dataclass
class Posterior:
    """Joint distribution over (hypothesis, plan) pairs after filtering."""

    model: "MirrorModel"
    table: dict[tuple[int, int], float]

    def probability(self, hyp_index: int, plan_index: int) -> float:
        return self.table.get((hyp_index, plan_index), 0.0)

    def goal_marginals(self) -> dict[frozenset[GroundAtom], float]:
        out: dict[frozenset[GroundAtom], float] = {}
        for (hi, _), p in self.table.items():
            goal = self.model.hypotheses[hi].belief.goal
            out[goal] = out.get(goal, 0.0) + p
        return out

    def belief_marginals(self) -> dict[Belief, float]:
        out: dict[Belief, float] = {}
        for (hi, _), p in self.table.items():
            belief = self.model.hypotheses[hi].belief
            out[belief] = out.get(belief, 0.0) + p
        return out


@dataclass
class MirrorModel:
    """The observer's hypothesis ensemble plus the robot's ground truth."""

    hypotheses: tuple[Hypothesis, ...]
    robot_index: int
    robot_plan: Plan
    instance: GroundInstance | None = None
    _distinct: tuple[GroundAction, ...] | None = field(default=None, repr=False)

    def __post_init__(self):
        assert self.hypotheses, "a model needs at least one hypothesis"
        assert abs(sum(h.prior for h in self.hypotheses) - 1.0) <= 1e-9
        robot = self.hypotheses[self.robot_index]
        assert any(
            p.actions == self.robot_plan.actions for p in robot.plans.plans
        ), "the robot plan must appear in the robot hypothesis's plan set"

    @property
    def robot_belief(self) -> Belief:
        return self.hypotheses[self.robot_index].belief

    def robot_plan_weight(self) -> float:
        robot = self.hypotheses[self.robot_index]
        for plan, weight in zip(robot.plans.plans, robot.plans.weights):
            if plan.actions == self.robot_plan.actions:
                return weight
        return 0.0

    def distinct_actions(self) -> tuple[GroundAction, ...]:
        """Distinct robot-plan actions in order of first occurrence."""
        if self._distinct is None:
            seen: list[GroundAction] = []
            for action in self.robot_plan.actions:
                if action not in seen:
                    seen.append(action)
            self._distinct = tuple(seen)
        return self._distinct


def build_model(
    domain: Domain,
    problem_template: Problem,
    prior: BeliefPrior,
    robot_goal_index: int,
    robot_init_choices: Sequence[bool],
    k: int = 1,
    tau: float = 1.0,
    *,
    heuristic: str = DEFAULT_HEURISTIC,
    max_expansions: int = DEFAULT_MAX_EXPANSIONS,
) -> MirrorModel:
    """Enumerate the 2^J x m hypothesis ensemble and plan for each member.

    Unsolvable or zero-prior hypotheses are dropped and the remaining priors
    renormalized.  The robot's own hypothesis (selected by `robot_goal_index`
    and the `robot_init_choices` truth vector over the uncertain atoms) must
    survive, otherwise the model is unbuildable.
    """
    uncertain = prior.uncertain_atoms
    if len(uncertain) > MAX_UNCERTAIN_ATOMS:
        raise ModelBuildError(
            f"{len(uncertain)} uncertain atoms exceed the enumeration "
            f"guard of {MAX_UNCERTAIN_ATOMS}"
        )
    if not 0 <= robot_goal_index < len(prior.goal_pool):
        raise ModelBuildError(f"robot goal index {robot_goal_index} out of range")
    if len(robot_init_choices) != len(uncertain):
        raise ModelBuildError("one truth value per uncertain atom required")

    # one grounding covers every hypothesis: init with all uncertain atoms on
    # (a superset of each hypothesis init keeps all their actions reachable)
    # and the union of pool goals keeps every goal atom in the universe
    union_goal = frozenset().union(*prior.goal_pool)
    template = problem_template.replace_init(
        prior.base_init | set(uncertain)
    ).replace_goal(union_goal)
    instance = ground(domain, template)
    space = SearchSpace(instance)
    init_base_mask = space.mask(prior.base_init)
    uncertain_ids = [space.mask([a]) for a in uncertain]
    universe = set(instance.atoms)

    robot_choice = tuple(bool(c) for c in robot_init_choices)
    hypotheses: list[Hypothesis] = []
    robot_idx: int | None = None
    for choices in itertools.product((False, True), repeat=len(uncertain)):
        p_init = 1.0
        init_mask = init_base_mask
        chosen: set[GroundAtom] = set()
        for atom, bit, on, p in zip(uncertain, uncertain_ids, choices, prior.atom_probs):
            p_init *= p if on else (1.0 - p)
            if on:
                init_mask |= bit
                chosen.add(atom)
        for gi, (goal, p_goal) in enumerate(zip(prior.goal_pool, prior.goal_probs)):
            weight = p_init * p_goal
            is_robot = choices == robot_choice and gi == robot_goal_index
            if weight <= 0.0:
                if is_robot:
                    raise ModelBuildError("the robot's own belief has zero prior")
                continue
            if not goal <= universe:
                if is_robot:
                    raise ModelBuildError("the robot's goal is unreachable")
                continue
            plans = topk_in_space(
                space,
                init_mask,
                space.mask(goal),
                k,
                tau,
                heuristic=heuristic,
                max_expansions=max_expansions,
            )
            if plans is None:
                if is_robot:
                    raise ModelBuildError("the robot's own task is unsolvable")
                continue
            belief = Belief(prior.base_init | frozenset(chosen), goal)
            if is_robot:
                robot_idx = len(hypotheses)
            hypotheses.append(Hypothesis(belief, weight, plans))

    if robot_idx is None:
        raise ModelBuildError("the robot's own hypothesis did not survive")
    total = sum(h.prior for h in hypotheses)
    normalized = tuple(
        Hypothesis(h.belief, h.prior / total, h.plans) for h in hypotheses
    )
    robot_plan = normalized[robot_idx].plans.plans[0]
    return MirrorModel(normalized, robot_idx, robot_plan, instance)


def cross_entropy(model: MirrorModel) -> float:
    """Observer's surprise at the robot's actual belief and plan, in nats.

    Zero when the ensemble has collapsed onto the robot's own hypothesis
    and plan; +inf only if the robot pair has no mass, which `build_model`
    rules out.
    """
    robot = model.hypotheses[model.robot_index]
    plan_weight = model.robot_plan_weight()
    if robot.prior <= 0.0 or plan_weight <= 0.0:
        return math.inf
    return -math.log(plan_weight) - math.log(robot.prior)


def posterior(
    model: MirrorModel, observed: Verbalization | Iterable[GroundAction]
) -> Posterior | AllEliminated:
    """Bayes filter: keep (hypothesis, plan) pairs containing every observed
    action, then renormalize.  Observation order does not matter."""
    obs = set(observed)
    table: dict[tuple[int, int], float] = {}
    for hi, hyp in enumerate(model.hypotheses):
        for pi, (plan, weight) in enumerate(zip(hyp.plans.plans, hyp.plans.weights)):
            if obs <= set(plan.actions):
                table[(hi, pi)] = hyp.prior * weight
    total = sum(table.values())
    if total <= 0.0:
        return ALL_ELIMINATED
    return Posterior(model, {k: v / total for k, v in table.items()})


def information_gain(
    model: MirrorModel, observed: Verbalization | Iterable[GroundAction]
) -> float:
    """Cross-entropy drop caused by announcing `observed`.

    Equals -ln of the surviving prior mass when the announcement is part of
    the robot's plan, and -inf when it is not (the observer would rule the
    truth out entirely).
    """
    robot = model.hypotheses[model.robot_index]
    prior_pair = robot.prior * model.robot_plan_weight()
    post = posterior(model, observed)
    if isinstance(post, AllEliminated):
        return -math.inf
    robot_pi = _robot_plan_index(model)
    post_pair = post.probability(model.robot_index, robot_pi)
    if post_pair <= 0.0:
        return -math.inf
    return math.log(post_pair) - math.log(prior_pair)


def _robot_plan_index(model: MirrorModel) -> int:
    robot = model.hypotheses[model.robot_index]
    for pi, plan in enumerate(robot.plans.plans):
        if plan.actions == model.robot_plan.actions:
            return pi
    raise AssertionError("robot plan missing from its own hypothesis")


def _containment_weights(model: MirrorModel) -> dict[int, float]:
    """Aggregate prior mass by which distinct robot-plan actions each
    (hypothesis, plan) pair contains, encoded as a bitmask."""
    distinct = model.distinct_actions()
    table: dict[int, float] = {}
    for hyp in model.hypotheses:
        for plan, weight in zip(hyp.plans.plans, hyp.plans.weights):
            actions = set(plan.actions)
            mask = 0
            for i, a in enumerate(distinct):
                if a in actions:
                    mask |= 1 << i
            table[mask] = table.get(mask, 0.0) + hyp.prior * weight
    return table


def _surviving_mass(table: dict[int, float], selection_mask: int) -> float:
    return sum(w for mask, w in table.items() if selection_mask & ~mask == 0)


def find_most_informative(model: MirrorModel, size: int) -> Verbalization:
    """Exhaustive argmax of information gain over all `size`-subsets of the
    robot's distinct plan actions.

    Ties break toward the earliest actions in plan order (the smallest index
    vector); the result is ordered by plan position.
    """
    distinct = model.distinct_actions()
    n = len(distinct)
    if not 1 <= size <= n:
        raise ValueError(f"subset size {size} out of range 1..{n}")
    table = _containment_weights(model)
    best_combo: tuple[int, ...] | None = None
    best_mass = math.inf
    for combo in itertools.combinations(range(n), size):
        selection_mask = 0
        for i in combo:
            selection_mask |= 1 << i
        mass = _surviving_mass(table, selection_mask)
        # smaller surviving mass = larger gain; strict comparison keeps the
        # lexicographically smallest index vector on ties (tied subsets sum
        # the same table entries, so their masses are float-identical)
        if mass < best_mass:
            best_mass = mass
            best_combo = combo
    assert best_combo is not None
    return Verbalization(tuple(distinct[i] for i in best_combo))


def find_most_informative_nested(model: MirrorModel, size: int) -> Verbalization:
    """Greedy variant: grow the announcement one action at a time, each step
    adding the action with the largest marginal gain (plan order on ties).
    Step n therefore extends step n-1.  Returned in plan order."""
    chain = nested_chain(model, size)
    return chain[-1]


def nested_chain(model: MirrorModel, size: int) -> list[Verbalization]:
    """All prefixes of the greedy announcement, sizes 1..size."""
    distinct = model.distinct_actions()
    n = len(distinct)
    if not 1 <= size <= n:
        raise ValueError(f"subset size {size} out of range 1..{n}")
    table = _containment_weights(model)
    chosen: list[int] = []
    chosen_mask = 0
    out: list[Verbalization] = []
    for _ in range(size):
        best_i = None
        best_mass = math.inf
        for i in range(n):
            if chosen_mask >> i & 1:
                continue
            mass = _surviving_mass(table, chosen_mask | (1 << i))
            if mass < best_mass:
                best_mass = mass
                best_i = i
        assert best_i is not None
        chosen.append(best_i)
        chosen_mask |= 1 << best_i
        out.append(Verbalization(tuple(distinct[i] for i in sorted(chosen))))
    return out


def uncertain_from_plan(
    plan: Plan, init: frozenset[GroundAtom], count: int, rng: random.Random
) -> tuple[GroundAtom, ...]:
    """Sample init atoms the plan actually relies on: positive preconditions
    of its actions that hold initially.  Returns fewer than `count` when the
    plan does not rely on that many."""
    candidates = sorted({a for action in plan.actions for a in action.pre} & init)
    if len(candidates) <= count:
        return tuple(candidates)
    return tuple(sorted(rng.sample(candidates, count)))
