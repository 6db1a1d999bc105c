"""Core data model for the STRIPS fragment of PDDL used across the package.

Everything downstream (planning, belief ensembles, benchmarks) works on the
ground representation: `GroundAtom`, `GroundAction` and `GroundInstance`.
Lifted structures (`Domain`, `Problem`) mirror the source files closely and
are produced by the parser.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence


class PddlError(Exception):
    """Base class for everything raised by this subpackage."""


class PddlSyntaxError(PddlError):
    """Malformed input text; carries the source position."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


class PddlValidationError(PddlError):
    """Structurally valid input that violates a declaration or typing rule."""


class UnsupportedPddlError(PddlError):
    """Input using a requirement outside the supported STRIPS fragment."""


class GroundingLimitError(PddlError):
    """Grounding would exceed the configured ground-action cap."""


#: Requirement flags accepted by the parser.  Anything else is rejected
#: rather than silently ignored, so unsupported semantics cannot leak in.
SUPPORTED_REQUIREMENTS = frozenset(
    {":strips", ":typing", ":negative-preconditions", ":equality"}
)

ROOT_TYPE = "object"


@dataclass(frozen=True, order=True)
class GroundAtom:
    """A predicate applied to object names, e.g. ``(on a b)``."""

    predicate: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        if self.args:
            return f"({self.predicate} {' '.join(self.args)})"
        return f"({self.predicate})"


def format_atoms(atoms: Iterable[GroundAtom]) -> str:
    return " ".join(str(a) for a in sorted(atoms))


@dataclass(frozen=True)
class Literal:
    """A possibly-negated predicate over variables and constants.

    Used inside operator schemas; ``args`` entries starting with ``?`` are
    variables, everything else is a constant.
    """

    predicate: str
    args: tuple[str, ...] = ()
    negated: bool = False

    def __str__(self) -> str:
        core = f"({self.predicate} {' '.join(self.args)})" if self.args else f"({self.predicate})"
        return f"(not {core})" if self.negated else core


@dataclass(frozen=True)
class Predicate:
    name: str
    param_names: tuple[str, ...]
    param_types: tuple[str, ...]

    @property
    def arity(self) -> int:
        return len(self.param_names)


@dataclass(frozen=True)
class Operator:
    """A lifted action schema with conjunctive preconditions and effects.

    ``eq_constraints`` holds ``(left, right, must_be_equal)`` triples from
    ``(= x y)`` / ``(not (= x y))`` precondition literals.
    """

    name: str
    param_names: tuple[str, ...]
    param_types: tuple[str, ...]
    pre: tuple[Literal, ...]
    neg: tuple[Literal, ...]
    add: tuple[Literal, ...]
    delete: tuple[Literal, ...]
    eq_constraints: tuple[tuple[str, str, bool], ...] = ()

    @property
    def arity(self) -> int:
        return len(self.param_names)


@dataclass(frozen=True)
class Domain:
    name: str
    requirements: tuple[str, ...]
    # child type -> parent type; every declared type resolves to ROOT_TYPE
    types: dict[str, str] = field(hash=False, default_factory=dict)
    predicates: dict[str, Predicate] = field(hash=False, default_factory=dict)
    operators: tuple[Operator, ...] = ()
    # constants declared in the domain, name -> type
    constants: dict[str, str] = field(hash=False, default_factory=dict)

    def is_subtype(self, child: str, parent: str) -> bool:
        """True when an object of type `child` can fill a `parent` slot."""
        if parent == ROOT_TYPE or child == parent:
            return True
        seen = set()
        cur = child
        while cur in self.types and cur not in seen:
            seen.add(cur)
            cur = self.types[cur]
            if cur == parent:
                return True
        return False


@dataclass(frozen=True)
class Problem:
    name: str
    domain_name: str
    objects: dict[str, str] = field(hash=False, default_factory=dict)
    init: frozenset[GroundAtom] = frozenset()
    goal: frozenset[GroundAtom] = frozenset()

    def replace_goal(self, goal: Iterable[GroundAtom]) -> Problem:
        return Problem(self.name, self.domain_name, self.objects, self.init, frozenset(goal))

    def replace_init(self, init: Iterable[GroundAtom]) -> Problem:
        return Problem(self.name, self.domain_name, self.objects, frozenset(init), self.goal)


class GroundAction:
    """A fully instantiated operator.

    Identity is the ``(name, args)`` pair: two ground actions with the same
    name and arguments compare equal even if their condition sets were pruned
    differently, which is what plan-membership tests rely on.
    """

    __slots__ = ("name", "args", "pre", "neg", "add", "delete", "_hash")

    def __init__(
        self,
        name: str,
        args: tuple[str, ...],
        pre: frozenset[GroundAtom],
        neg: frozenset[GroundAtom],
        add: frozenset[GroundAtom],
        delete: frozenset[GroundAtom],
    ):
        self.name = name
        self.args = args
        self.pre = pre
        self.neg = neg
        # PDDL semantics: an atom both added and deleted ends up true
        self.add = add
        self.delete = delete - add
        self._hash = hash((name, args))

    @property
    def key(self) -> tuple[str, tuple[str, ...]]:
        return (self.name, self.args)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GroundAction):
            return NotImplemented
        return self.name == other.name and self.args == other.args

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: GroundAction) -> bool:
        return self.key < other.key

    def __str__(self) -> str:
        if self.args:
            return f"({self.name} {' '.join(self.args)})"
        return f"({self.name})"

    def __repr__(self) -> str:
        return f"GroundAction{self.key!r}"

    def applicable(self, state: frozenset[GroundAtom] | set[GroundAtom]) -> bool:
        return self.pre <= state and not (self.neg & state)

    def apply(self, state: frozenset[GroundAtom]) -> frozenset[GroundAtom]:
        return (state - self.delete) | self.add


@dataclass(frozen=True)
class GroundInstance:
    """A ground planning task over a fixed atom universe.

    Invariants: atoms are sorted and duplicate-free, actions are sorted by
    ``(name, args)``, and every atom referenced by init, goal or an action
    belongs to the universe.
    """

    atoms: tuple[GroundAtom, ...]
    actions: tuple[GroundAction, ...]
    init: frozenset[GroundAtom]
    goal: frozenset[GroundAtom]

    def has_atoms(self, atoms: Iterable[GroundAtom]) -> bool:
        universe = set(self.atoms)
        return all(a in universe for a in atoms)

    def restate(self, init: Iterable[GroundAtom] | None = None,
                goal: Iterable[GroundAtom] | None = None) -> GroundInstance:
        """Same universe and actions, different init and/or goal.

        Atoms outside the universe are dropped from init (they can never be
        required or produced here); an out-of-universe goal atom raises,
        callers check `has_atoms` first when that is expected.
        """
        universe = set(self.atoms)
        new_init = self.init if init is None else frozenset(a for a in init if a in universe)
        if goal is None:
            new_goal = self.goal
        else:
            new_goal = frozenset(goal)
            missing = new_goal - universe
            if missing:
                raise PddlValidationError(
                    f"goal atom outside the ground universe: {format_atoms(missing)}"
                )
        return GroundInstance(self.atoms, self.actions, new_init, new_goal)


def parse_ground_atom(text: str) -> GroundAtom:
    """Parse a single atom written as ``(pred arg1 arg2)`` or ``pred arg1 arg2``."""
    stripped = text.strip().lower()
    if stripped.startswith("(") and stripped.endswith(")"):
        stripped = stripped[1:-1]
    parts = stripped.split()
    if not parts:
        raise PddlSyntaxError(f"empty atom: {text!r}")
    for part in parts:
        if "(" in part or ")" in part:
            raise PddlSyntaxError(f"malformed atom: {text!r}")
    return GroundAtom(parts[0], tuple(parts[1:]))


def parse_atom_set(text: str) -> frozenset[GroundAtom]:
    """Parse a comma-separated list of atoms, e.g. ``(on a b), (clear c)``."""
    parts = [p for p in (chunk.strip() for chunk in text.split(",")) if p]
    return frozenset(parse_ground_atom(p) for p in parts)


def sort_key(action_or_atom: GroundAction | GroundAtom) -> Sequence:
    if isinstance(action_or_atom, GroundAction):
        return action_or_atom.key
    return (action_or_atom.predicate, action_or_atom.args)
