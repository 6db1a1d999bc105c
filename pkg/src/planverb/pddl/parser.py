"""Tokenizer, recursive-descent parser and serializer for the STRIPS fragment.

Supported requirement flags: :strips, :typing, :negative-preconditions and
:equality.  Input is case-insensitive; all names are canonicalized to lower
case.  Comments run from ``;`` to end of line.  Conditions are conjunctions
of literals, effects are conjunctions of add/delete literals, goals are
conjunctions of positive ground atoms.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    ROOT_TYPE,
    SUPPORTED_REQUIREMENTS,
    Domain,
    GroundAtom,
    Literal,
    Operator,
    PddlSyntaxError,
    PddlValidationError,
    Predicate,
    Problem,
    UnsupportedPddlError,
)


@dataclass(frozen=True)
class Token:
    value: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            col += 1
            i += 1
            continue
        if ch in "()":
            tokens.append(Token(ch, line, col))
            col += 1
            i += 1
            continue
        start = i
        start_col = col
        while i < n and not text[i].isspace() and text[i] not in "();":
            i += 1
            col += 1
        tokens.append(Token(text[start:i].lower(), line, start_col))
    return tokens


class _Stream:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        if self.pos >= len(self.tokens):
            raise PddlSyntaxError("unexpected end of input")
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def expect(self, value: str) -> Token:
        tok = self.next()
        if tok.value != value:
            raise PddlSyntaxError(f"expected {value!r}, got {tok.value!r}", tok.line, tok.column)
        return tok

    def expect_name(self) -> Token:
        tok = self.next()
        if tok.value in "()":
            raise PddlSyntaxError(f"expected a name, got {tok.value!r}", tok.line, tok.column)
        return tok

    @property
    def done(self) -> bool:
        return self.pos >= len(self.tokens)


def _parse_typed_list(stream: _Stream, *, variables: bool) -> list[tuple[str, str]]:
    """Parse ``a b - t c d - s`` up to the closing paren (not consumed).

    Returns ``(name, type)`` pairs; items without a type default to ROOT_TYPE.
    """
    out: list[tuple[str, str]] = []
    pending: list[Token] = []
    while stream.peek().value != ")":
        tok = stream.next()
        if tok.value == "-":
            type_tok = stream.expect_name()
            if not pending:
                raise PddlSyntaxError("type with no preceding names", tok.line, tok.column)
            for name_tok in pending:
                out.append((name_tok.value, type_tok.value))
            pending = []
            continue
        if tok.value == "(":
            raise PddlSyntaxError("unexpected '(' in typed list", tok.line, tok.column)
        if variables and not tok.value.startswith("?"):
            raise PddlSyntaxError(f"expected a variable, got {tok.value!r}", tok.line, tok.column)
        if not variables and tok.value.startswith("?"):
            raise PddlSyntaxError(f"unexpected variable {tok.value!r}", tok.line, tok.column)
        pending.append(tok)
    for name_tok in pending:
        out.append((name_tok.value, ROOT_TYPE))
    return out


def _parse_literal_list(stream: _Stream) -> tuple[list[Literal], list[tuple[str, str, bool]]]:
    """Parse a condition: a single literal or ``(and literal*)``.

    Returns plain literals and equality constraints separately.
    """
    literals: list[Literal] = []
    eqs: list[tuple[str, str, bool]] = []

    def parse_one(negated: bool) -> None:
        open_tok = stream.expect("(")
        head = stream.expect_name()
        if head.value == "not":
            if negated:
                raise PddlSyntaxError("double negation is not supported", head.line, head.column)
            parse_one(True)
            stream.expect(")")
            return
        if head.value == "and":
            if negated:
                raise PddlSyntaxError("negated conjunction is not supported", head.line, head.column)
            while stream.peek().value != ")":
                parse_one(False)
            stream.expect(")")
            return
        args = []
        while stream.peek().value != ")":
            args.append(stream.expect_name().value)
        stream.expect(")")
        if head.value == "=":
            if len(args) != 2:
                raise PddlSyntaxError("(=) takes exactly two arguments", open_tok.line, open_tok.column)
            eqs.append((args[0], args[1], not negated))
        else:
            literals.append(Literal(head.value, tuple(args), negated))

    parse_one(False)
    return literals, eqs


def _check_literal(lit: Literal, domain_predicates: dict[str, Predicate], context: str) -> None:
    pred = domain_predicates.get(lit.predicate)
    if pred is None:
        raise PddlValidationError(f"{context}: undeclared predicate {lit.predicate!r}")
    if pred.arity != len(lit.args):
        raise PddlValidationError(
            f"{context}: predicate {lit.predicate!r} takes {pred.arity} arguments, got {len(lit.args)}"
        )


def parse_domain(text: str) -> Domain:
    stream = _Stream(tokenize(text))
    if stream.done:
        raise PddlSyntaxError("empty domain input")
    stream.expect("(")
    stream.expect("define")
    stream.expect("(")
    stream.expect("domain")
    name = stream.expect_name().value
    stream.expect(")")

    requirements: list[str] = []
    types: dict[str, str] = {}
    predicates: dict[str, Predicate] = {}
    operators: list[Operator] = []
    constants: dict[str, str] = {}

    while stream.peek().value != ")":
        stream.expect("(")
        section = stream.expect_name()
        if section.value == ":requirements":
            while stream.peek().value != ")":
                req = stream.expect_name()
                if req.value not in SUPPORTED_REQUIREMENTS:
                    raise UnsupportedPddlError(f"unsupported requirement {req.value!r}")
                requirements.append(req.value)
            stream.expect(")")
        elif section.value == ":types":
            for child, parent in _parse_typed_list(stream, variables=False):
                types[child] = parent
            stream.expect(")")
        elif section.value == ":constants":
            for obj, typ in _parse_typed_list(stream, variables=False):
                constants[obj] = typ
            stream.expect(")")
        elif section.value == ":predicates":
            while stream.peek().value != ")":
                stream.expect("(")
                pname = stream.expect_name().value
                params = []
                while stream.peek().value != ")":
                    params.extend(_parse_typed_list(stream, variables=True))
                    break
                stream.expect(")")
                if pname in predicates:
                    raise PddlValidationError(f"duplicate predicate {pname!r}")
                predicates[pname] = Predicate(
                    pname,
                    tuple(p for p, _ in params),
                    tuple(t for _, t in params),
                )
            stream.expect(")")
        elif section.value == ":action":
            operators.append(_parse_action(stream, predicates))
        else:
            raise UnsupportedPddlError(
                f"unsupported domain section {section.value!r} "
                f"(line {section.line})"
            )
    stream.expect(")")
    if not stream.done:
        tok = stream.peek()
        raise PddlSyntaxError("trailing input after domain", tok.line, tok.column)

    domain = Domain(name, tuple(requirements), types, predicates, tuple(operators), constants)
    _validate_domain(domain)
    return domain


def _parse_action(stream: _Stream, predicates: dict[str, Predicate]) -> Operator:
    name = stream.expect_name().value
    params: list[tuple[str, str]] = []
    pre: list[Literal] = []
    neg: list[Literal] = []
    add: list[Literal] = []
    delete: list[Literal] = []
    eqs: list[tuple[str, str, bool]] = []

    while stream.peek().value != ")":
        key = stream.expect_name()
        if key.value == ":parameters":
            stream.expect("(")
            params = _parse_typed_list(stream, variables=True)
            stream.expect(")")
        elif key.value == ":precondition":
            literals, eqs = _parse_literal_list(stream)
            pre = [l for l in literals if not l.negated]
            neg = [Literal(l.predicate, l.args) for l in literals if l.negated]
        elif key.value == ":effect":
            literals, effect_eqs = _parse_literal_list(stream)
            if effect_eqs:
                raise PddlValidationError(f"action {name!r}: (=) is not allowed in effects")
            add = [l for l in literals if not l.negated]
            delete = [Literal(l.predicate, l.args) for l in literals if l.negated]
        else:
            raise PddlSyntaxError(f"unexpected action section {key.value!r}", key.line, key.column)
    stream.expect(")")

    seen = set()
    for pname, _ in params:
        if pname in seen:
            raise PddlValidationError(f"action {name!r}: duplicate parameter {pname}")
        seen.add(pname)

    op = Operator(
        name,
        tuple(p for p, _ in params),
        tuple(t for _, t in params),
        tuple(pre),
        tuple(neg),
        tuple(add),
        tuple(delete),
        tuple(eqs),
    )
    for lit in (*op.pre, *op.neg, *op.add, *op.delete):
        _check_literal(lit, predicates, f"action {name!r}")
        for arg in lit.args:
            if arg.startswith("?") and arg not in op.param_names:
                raise PddlValidationError(f"action {name!r}: unbound variable {arg}")
    for left, right, _ in op.eq_constraints:
        for arg in (left, right):
            if arg.startswith("?") and arg not in op.param_names:
                raise PddlValidationError(f"action {name!r}: unbound variable {arg}")
    return op


def _validate_domain(domain: Domain) -> None:
    known_types = set(domain.types) | set(domain.types.values()) | {ROOT_TYPE}
    for pred in domain.predicates.values():
        for t in pred.param_types:
            if t not in known_types:
                raise PddlValidationError(f"predicate {pred.name!r}: unknown type {t!r}")
    for op in domain.operators:
        for t in op.param_types:
            if t not in known_types:
                raise PddlValidationError(f"action {op.name!r}: unknown type {t!r}")
    for obj, t in domain.constants.items():
        if t not in known_types:
            raise PddlValidationError(f"constant {obj!r}: unknown type {t!r}")


def parse_problem(text: str, domain: Domain) -> Problem:
    stream = _Stream(tokenize(text))
    if stream.done:
        raise PddlSyntaxError("empty problem input")
    stream.expect("(")
    stream.expect("define")
    stream.expect("(")
    stream.expect("problem")
    name = stream.expect_name().value
    stream.expect(")")

    domain_name: str | None = None
    objects: dict[str, str] = {}
    init: set[GroundAtom] = set()
    goal: frozenset[GroundAtom] | None = None

    while stream.peek().value != ")":
        stream.expect("(")
        section = stream.expect_name()
        if section.value == ":domain":
            domain_name = stream.expect_name().value
            stream.expect(")")
        elif section.value == ":objects":
            for obj, typ in _parse_typed_list(stream, variables=False):
                if obj in objects:
                    raise PddlValidationError(f"duplicate object {obj!r}")
                objects[obj] = typ
            stream.expect(")")
        elif section.value == ":init":
            while stream.peek().value != ")":
                stream.expect("(")
                pname = stream.expect_name()
                args = []
                while stream.peek().value != ")":
                    args.append(stream.expect_name().value)
                stream.expect(")")
                if pname.value == "not":
                    raise UnsupportedPddlError(
                        "negated init atoms are not supported (closed world)"
                    )
                init.add(GroundAtom(pname.value, tuple(args)))
            stream.expect(")")
        elif section.value == ":goal":
            literals, eqs = _parse_literal_list(stream)
            if eqs:
                raise UnsupportedPddlError("equality in goals is not supported")
            if any(l.negated for l in literals):
                raise UnsupportedPddlError("negative goal atoms are not supported")
            goal = frozenset(GroundAtom(l.predicate, l.args) for l in literals)
            stream.expect(")")
        else:
            raise UnsupportedPddlError(f"unsupported problem section {section.value!r}")
    stream.expect(")")
    if not stream.done:
        tok = stream.peek()
        raise PddlSyntaxError("trailing input after problem", tok.line, tok.column)

    if domain_name is not None and domain_name != domain.name:
        raise PddlValidationError(
            f"problem {name!r} names domain {domain_name!r}, expected {domain.name!r}"
        )
    if goal is None or not goal:
        raise PddlValidationError(f"problem {name!r}: goal must be a non-empty conjunction")

    known_types = set(domain.types) | set(domain.types.values()) | {ROOT_TYPE}
    for obj, t in objects.items():
        if t not in known_types:
            raise PddlValidationError(f"object {obj!r}: unknown type {t!r}")
    all_objects = dict(domain.constants)
    all_objects.update(objects)

    problem = Problem(name, domain.name, objects, frozenset(init), goal)
    for atom in sorted(init | goal):
        where = "init" if atom in init else "goal"
        pred = domain.predicates.get(atom.predicate)
        if pred is None:
            raise PddlValidationError(f"{where}: undeclared predicate {atom.predicate!r}")
        if pred.arity != len(atom.args):
            raise PddlValidationError(
                f"{where}: predicate {atom.predicate!r} takes {pred.arity} arguments, "
                f"got {len(atom.args)}"
            )
        for arg, ptype in zip(atom.args, pred.param_types):
            if arg not in all_objects:
                raise PddlValidationError(f"{where}: undeclared object {arg!r} in {atom}")
            if not domain.is_subtype(all_objects[arg], ptype):
                raise PddlValidationError(
                    f"{where}: object {arg!r} of type {all_objects[arg]!r} "
                    f"cannot fill a {ptype!r} slot in {atom}"
                )
    return problem


def _format_typed_list(pairs: list[tuple[str, str]]) -> str:
    parts = []
    for name, typ in pairs:
        parts.append(f"{name} - {typ}")
    return " ".join(parts)


def _format_literal(lit: Literal) -> str:
    return str(lit)


def domain_to_pddl(domain: Domain) -> str:
    """Serialize back to PDDL text; parsing the output reproduces the domain."""
    lines = [f"(define (domain {domain.name})"]
    if domain.requirements:
        lines.append(f"  (:requirements {' '.join(domain.requirements)})")
    if domain.types:
        typed = _format_typed_list(sorted(domain.types.items()))
        lines.append(f"  (:types {typed})")
    if domain.constants:
        typed = _format_typed_list(sorted(domain.constants.items()))
        lines.append(f"  (:constants {typed})")
    if domain.predicates:
        lines.append("  (:predicates")
        for pred in sorted(domain.predicates.values(), key=lambda p: p.name):
            params = _format_typed_list(list(zip(pred.param_names, pred.param_types)))
            inner = f"{pred.name} {params}".strip()
            lines.append(f"    ({inner})")
        lines.append("  )")
    for op in domain.operators:
        params = _format_typed_list(list(zip(op.param_names, op.param_types)))
        lines.append(f"  (:action {op.name}")
        lines.append(f"    :parameters ({params})")
        pre_parts = [_format_literal(l) for l in op.pre]
        pre_parts += [f"(not {_format_literal(l)})" for l in op.neg]
        pre_parts += [
            f"(= {a} {b})" if equal else f"(not (= {a} {b}))"
            for a, b, equal in op.eq_constraints
        ]
        lines.append(f"    :precondition (and {' '.join(pre_parts)})")
        eff_parts = [_format_literal(l) for l in op.add]
        eff_parts += [f"(not {_format_literal(l)})" for l in op.delete]
        lines.append(f"    :effect (and {' '.join(eff_parts)})")
        lines.append("  )")
    lines.append(")")
    return "\n".join(lines) + "\n"


def problem_to_pddl(problem: Problem) -> str:
    """Serialize back to PDDL text; parsing the output reproduces the problem."""
    lines = [
        f"(define (problem {problem.name})",
        f"  (:domain {problem.domain_name})",
    ]
    if problem.objects:
        typed = _format_typed_list(sorted(problem.objects.items()))
        lines.append(f"  (:objects {typed})")
    lines.append("  (:init")
    for atom in sorted(problem.init):
        lines.append(f"    {atom}")
    lines.append("  )")
    goal_atoms = " ".join(str(a) for a in sorted(problem.goal))
    lines.append(f"  (:goal (and {goal_atoms}))")
    lines.append(")")
    return "\n".join(lines) + "\n"
