"""Parsing, validation and grounding for the STRIPS fragment of PDDL."""

from .ground import DEFAULT_MAX_ACTIONS, ground
from .model import (
    Domain,
    GroundAction,
    GroundAtom,
    GroundingLimitError,
    GroundInstance,
    Literal,
    Operator,
    PddlError,
    PddlSyntaxError,
    PddlValidationError,
    Predicate,
    Problem,
    UnsupportedPddlError,
    format_atoms,
    parse_atom_set,
    parse_ground_atom,
)
from .parser import domain_to_pddl, parse_domain, parse_problem, problem_to_pddl

__all__ = [
    "DEFAULT_MAX_ACTIONS",
    "Domain",
    "GroundAction",
    "GroundAtom",
    "GroundInstance",
    "GroundingLimitError",
    "Literal",
    "Operator",
    "PddlError",
    "PddlSyntaxError",
    "PddlValidationError",
    "Predicate",
    "Problem",
    "UnsupportedPddlError",
    "domain_to_pddl",
    "format_atoms",
    "ground",
    "parse_atom_set",
    "parse_domain",
    "parse_problem",
    "problem_to_pddl",
]
