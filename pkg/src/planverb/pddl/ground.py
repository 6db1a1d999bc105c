"""Grounding: instantiate operator schemas over typed objects.

The output is deterministic: atoms and actions are sorted lexicographically,
so the same domain/problem pair always yields the same `GroundInstance`.
By default unreachable actions are pruned with a delete-relaxation fixpoint
and the atom universe is restricted to relaxed-reachable atoms plus the goal;
negative preconditions and deletes on atoms outside the universe are dropped
because such atoms can never become true.
"""

from __future__ import annotations

import itertools

from .model import (
    Domain,
    GroundAction,
    GroundAtom,
    GroundingLimitError,
    GroundInstance,
    Literal,
    Operator,
    PddlValidationError,
    Problem,
)

DEFAULT_MAX_ACTIONS = 10**6


def _bind(lit: Literal, binding: dict[str, str]) -> GroundAtom:
    args = tuple(binding.get(a, a) for a in lit.args)
    return GroundAtom(lit.predicate, args)


def _instantiate(op: Operator, objects: tuple[str, ...]) -> GroundAction:
    binding = dict(zip(op.param_names, objects))
    return GroundAction(
        op.name,
        objects,
        frozenset(_bind(l, binding) for l in op.pre),
        frozenset(_bind(l, binding) for l in op.neg),
        frozenset(_bind(l, binding) for l in op.add),
        frozenset(_bind(l, binding) for l in op.delete),
    )


def _candidate_objects(domain: Domain, problem: Problem) -> dict[str, list[str]]:
    """Objects usable for each parameter type, sorted for determinism."""
    all_objects = dict(domain.constants)
    all_objects.update(problem.objects)
    param_types = {t for op in domain.operators for t in op.param_types}
    by_type: dict[str, list[str]] = {}
    for t in param_types:
        by_type[t] = sorted(
            obj for obj, obj_type in all_objects.items() if domain.is_subtype(obj_type, t)
        )
    return by_type


def _satisfies_equality(op: Operator, binding: dict[str, str]) -> bool:
    for left, right, must_equal in op.eq_constraints:
        lval = binding.get(left, left)
        rval = binding.get(right, right)
        if (lval == rval) != must_equal:
            return False
    return True


def _relaxed_reachable(
    init: frozenset[GroundAtom], actions: list[GroundAction]
) -> tuple[set[GroundAtom], list[GroundAction]]:
    """Delete-relaxation fixpoint: reachable atoms and applicable actions.

    Negative preconditions are ignored, which over-approximates true
    reachability, so pruning against this set is sound.
    """
    reachable = set(init)
    pending = list(actions)
    applicable: list[GroundAction] = []
    changed = True
    while changed:
        changed = False
        still_pending = []
        for action in pending:
            if action.pre <= reachable:
                applicable.append(action)
                new = action.add - reachable
                if new:
                    reachable |= new
                    changed = True
            else:
                still_pending.append(action)
        pending = still_pending
    return reachable, applicable


def ground(
    domain: Domain,
    problem: Problem,
    *,
    reachability: bool = True,
    max_actions: int = DEFAULT_MAX_ACTIONS,
) -> GroundInstance:
    """Ground a lifted task into a `GroundInstance`.

    Raises GroundingLimitError when the number of ground actions would
    exceed `max_actions`.
    """
    by_type = _candidate_objects(domain, problem)

    estimate = 0
    for op in domain.operators:
        count = 1
        for t in op.param_types:
            count *= len(by_type[t])
        estimate += count
    if estimate > 10 * max_actions:
        raise GroundingLimitError(
            f"grounding would enumerate about {estimate} bindings (cap {max_actions})"
        )

    actions: list[GroundAction] = []
    for op in domain.operators:
        pools = [by_type[t] for t in op.param_types]
        for objects in itertools.product(*pools):
            binding = dict(zip(op.param_names, objects))
            if not _satisfies_equality(op, binding):
                continue
            actions.append(_instantiate(op, objects))
            if len(actions) > max_actions:
                raise GroundingLimitError(
                    f"more than {max_actions} ground actions"
                )

    if reachability:
        reachable, actions = _relaxed_reachable(problem.init, actions)
        universe = reachable | problem.goal
        pruned = []
        for a in actions:
            neg = a.neg & universe
            delete = a.delete & universe
            if neg != a.neg or delete != a.delete:
                a = GroundAction(a.name, a.args, a.pre, frozenset(neg), a.add, frozenset(delete))
            pruned.append(a)
        actions = pruned
    else:
        universe = set(problem.init) | set(problem.goal)
        for a in actions:
            universe |= a.pre | a.neg | a.add | a.delete

    missing = problem.init - universe
    if missing:
        # cannot happen with reachability on (init seeds the fixpoint)
        universe |= missing

    actions.sort()
    seen: dict[tuple[str, tuple[str, ...]], GroundAction] = {}
    for a in actions:
        if a.key in seen:
            raise PddlValidationError(f"duplicate ground action {a}")
        seen[a.key] = a

    return GroundInstance(
        atoms=tuple(sorted(universe)),
        actions=tuple(actions),
        init=frozenset(problem.init),
        goal=frozenset(problem.goal),
    )
