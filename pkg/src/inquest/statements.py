"""Flat predicate statements with typed variables, and their unification.

This is the smallest language that supports rule-based hypothesis
generation and decomposition: a statement is a conjunction of atoms,
an atom is a predicate over constants and variables, and matching is
syntactic one-way unification (pattern variables bind, statement-side
terms are fixed) with optional type checks against a declared entity
registry.

Text syntax:

    predicate(arg, ...)            atom; arguments are constants or variables
    ?name                          variable
    ?name:type                     typed variable
    a(x) & b(x, ?y)                conjunction

Constants are bare tokens (letters, digits, ``_``, ``-``, ``.``); a
constant's type, when relevant, comes from the entity registry of the
knowledge base.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Optional, Union

from .errors import StatementParseError

__all__ = [
    "Variable",
    "Term",
    "Atom",
    "Statement",
    "Bindings",
    "parse_atom",
    "parse_statement",
    "match_atom",
    "match_any",
    "substitute_atom",
    "substitute",
]


@dataclass(frozen=True)
class Variable:
    name: str
    type: Optional[str] = None

    def render(self) -> str:
        return f"?{self.name}:{self.type}" if self.type else f"?{self.name}"


# Constants are plain strings; variables carry their own marker type.
Term = Union[str, Variable]

# Pattern-variable name -> the term it bound (a constant, or an opaque
# statement-side variable that survives substitution as a variable).
Bindings = Mapping[str, Term]


def _render_term(term: Term) -> str:
    return term.render() if isinstance(term, Variable) else term


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[Term, ...] = ()

    def is_ground(self) -> bool:
        return not any(isinstance(a, Variable) for a in self.args)

    def variables(self) -> tuple[Variable, ...]:
        return tuple(a for a in self.args if isinstance(a, Variable))

    def render(self) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({', '.join(_render_term(a) for a in self.args)})"


@dataclass(frozen=True)
class Statement:
    """A conjunction of atoms; most statements have exactly one."""

    atoms: tuple[Atom, ...]

    def __post_init__(self) -> None:
        if not self.atoms:
            raise StatementParseError("a statement needs at least one atom")

    def is_ground(self) -> bool:
        return all(a.is_ground() for a in self.atoms)

    def variables(self) -> tuple[Variable, ...]:
        seen: dict[str, Variable] = {}
        for atom in self.atoms:
            for var in atom.variables():
                seen.setdefault(var.name, var)
        return tuple(seen.values())

    def render(self) -> str:
        return " & ".join(a.render() for a in self.atoms)


_TOKEN = r"[A-Za-z0-9_][A-Za-z0-9_.-]*"
_ATOM_RE = re.compile(rf"^\s*({_TOKEN})\s*(?:\(\s*(.*?)\s*\))?\s*$")
_VAR_RE = re.compile(rf"^\?({_TOKEN})(?::({_TOKEN}))?$")
_CONST_RE = re.compile(rf"^{_TOKEN}$")


def _parse_term(text: str, context: str) -> Term:
    text = text.strip()
    var = _VAR_RE.match(text)
    if var:
        return Variable(var.group(1), var.group(2))
    if _CONST_RE.match(text):
        return text
    raise StatementParseError(f"bad term {text!r} in {context!r}")


def parse_atom(text: str) -> Atom:
    m = _ATOM_RE.match(text)
    if not m:
        raise StatementParseError(f"bad atom syntax: {text!r}")
    predicate, argtext = m.group(1), m.group(2)
    if argtext is None:
        return Atom(predicate)
    if argtext == "":
        raise StatementParseError(f"empty argument list in {text!r}")
    args = tuple(_parse_term(part, text) for part in argtext.split(","))
    return Atom(predicate, args)


def parse_statement(text: str) -> Statement:
    parts = [p for p in text.split("&")]
    if any(not p.strip() for p in parts):
        raise StatementParseError(f"bad statement syntax: {text!r}")
    return Statement(tuple(parse_atom(p) for p in parts))


def _type_of(term: Term, entity_types: Mapping[str, str]) -> Optional[str]:
    if isinstance(term, Variable):
        return term.type
    return entity_types.get(term)


def match_atom(
    pattern: Atom,
    target: Atom,
    entity_types: Mapping[str, str] | None = None,
    bindings: Bindings | None = None,
) -> Optional[dict[str, Term]]:
    """One-way unification of a pattern atom against a target atom.

    Pattern variables bind to target terms; target-side variables are
    treated as opaque constants (they never bind).  A typed pattern
    variable refuses a constant whose declared entity type differs.
    Returns the extended bindings, or None on mismatch.
    """
    entity_types = entity_types or {}
    if pattern.predicate != target.predicate or len(pattern.args) != len(target.args):
        return None
    out: dict[str, Term] = dict(bindings or {})
    for pat_term, tgt_term in zip(pattern.args, target.args):
        if isinstance(pat_term, Variable):
            if pat_term.type is not None:
                tgt_type = _type_of(tgt_term, entity_types)
                if tgt_type is not None and tgt_type != pat_term.type:
                    return None
            bound = out.get(pat_term.name)
            if bound is None:
                out[pat_term.name] = tgt_term
            elif bound != tgt_term:
                return None
        elif pat_term != tgt_term:
            return None
    return out


def match_any(
    pattern: Atom,
    statement: Statement,
    entity_types: Mapping[str, str] | None = None,
) -> Optional[dict[str, Term]]:
    """Match a pattern against the first unifying atom of a conjunction."""
    for atom in statement.atoms:
        bindings = match_atom(pattern, atom, entity_types)
        if bindings is not None:
            return bindings
    return None


def substitute_atom(atom: Atom, bindings: Bindings) -> Atom:
    """Replace bound variables by their values; unbound variables remain."""
    args = tuple(
        bindings.get(a.name, a) if isinstance(a, Variable) else a for a in atom.args
    )
    return Atom(atom.predicate, args)


def substitute(statement: Statement, bindings: Bindings) -> Statement:
    return Statement(tuple(substitute_atom(a, bindings) for a in statement.atoms))
