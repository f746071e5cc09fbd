"""Sorts, function symbols, terms, equations and substitution.

Terms are immutable and hashable.  All schema-level symbols are unary
(attributes, foreign keys) or 0-ary (generators, literals, typeside
constants), so most code in this package only ever builds chains of
unary applications over constants.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Union

from .errors import SortMismatch, UnboundVariable

TYPE = "type"
ENTITY = "entity"

# symbol flavors
LITERAL = "literal"
GENERATOR = "generator"
ATTRIBUTE = "attribute"
FOREIGN_KEY = "foreign_key"
TYPESIDE = "typeside"


@dataclass(frozen=True)
class Sort:
    name: str
    kind: str  # TYPE or ENTITY

    @property
    def is_entity(self) -> bool:
        return self.kind == ENTITY

    def __repr__(self) -> str:
        return f"Sort({self.name!r}, {self.kind})"


@dataclass(frozen=True)
class FunctionSymbol:
    name: str
    arg_sorts: tuple[Sort, ...]
    out_sort: Sort
    flavor: str

    @property
    def arity(self) -> int:
        return len(self.arg_sorts)

    def __repr__(self) -> str:
        args = ",".join(s.name for s in self.arg_sorts)
        return f"{self.name}:{args}->{self.out_sort.name}"


@dataclass(frozen=True)
class Var:
    name: str
    sort: Sort

    def __repr__(self) -> str:
        return f"?{self.name}:{self.sort.name}"


@dataclass(frozen=True)
class App:
    sym: FunctionSymbol
    args: tuple["Term", ...] = ()

    def __post_init__(self):
        if len(self.args) != self.sym.arity:
            raise SortMismatch(f"{self.sym.name} expects {self.sym.arity} args, got {len(self.args)}")
        for a, s in zip(self.args, self.sym.arg_sorts):
            if term_sort(a) != s:
                raise SortMismatch(f"argument of {self.sym.name} has sort {term_sort(a).name}, expected {s.name}")

    @property
    def sort(self) -> Sort:
        return self.sym.out_sort

    def __repr__(self) -> str:
        return render_term(self)


Term = Union[Var, App]


def term_sort(t: Term) -> Sort:
    return t.sort


def free_vars(t: Term) -> list[Var]:
    """Variables of t in left-to-right occurrence order, deduplicated."""
    out: list[Var] = []

    def walk(u: Term):
        if isinstance(u, Var):
            if u not in out:
                out.append(u)
        else:
            for a in u.args:
                walk(a)

    walk(t)
    return out


def is_ground(t: Term) -> bool:
    return not free_vars(t)


def substitute(t: Term, binding: Mapping[str, Term]) -> Term:
    """Replace every variable of t by its binding.

    Every free variable must be bound, and each binding must match the
    variable's sort.
    """
    if isinstance(t, Var):
        if t.name not in binding:
            raise UnboundVariable(f"variable {t.name} has no binding")
        repl = binding[t.name]
        if term_sort(repl) != t.sort:
            raise SortMismatch(
                f"binding for {t.name} has sort {term_sort(repl).name}, expected {t.sort.name}")
        return repl
    if not t.args:
        return t
    return App(t.sym, tuple(substitute(a, binding) for a in t.args))


def term_depth(t: Term) -> int:
    if isinstance(t, Var):
        return 1
    if not t.args:
        return 1
    return 1 + max(term_depth(a) for a in t.args)


def term_key(t: Term):
    """Total order on terms: depth first, then symbol name, then arguments.

    Constants (generators, literals) therefore come before applications.
    """
    if isinstance(t, Var):
        return (1, 0, t.name, ())
    return (term_depth(t), 1, t.sym.name, tuple(term_key(a) for a in t.args))


def render_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if not t.args:
        return t.sym.name
    return f"{t.sym.name}({', '.join(render_term(a) for a in t.args)})"


def subterms(t: Term) -> Iterable[Term]:
    yield t
    if isinstance(t, App):
        for a in t.args:
            yield from subterms(a)


@dataclass(frozen=True)
class Equation:
    """lhs = rhs with at most one universally quantified variable."""

    free: tuple[Var, ...]
    lhs: Term
    rhs: Term

    def __post_init__(self):
        if term_sort(self.lhs) != term_sort(self.rhs):
            raise SortMismatch(
                f"equation sides have different sorts: {render_term(self.lhs)} = {render_term(self.rhs)}")
        declared = set(self.free)
        for side in (self.lhs, self.rhs):
            for v in free_vars(side):
                if v not in declared:
                    raise UnboundVariable(f"variable {v.name} not quantified in equation")

    @property
    def is_ground(self) -> bool:
        return not self.free

    def instantiate(self, value: Term) -> "Equation":
        """Ground instance at the single quantified variable."""
        assert len(self.free) == 1
        b = {self.free[0].name: value}
        return Equation((), substitute(self.lhs, b), substitute(self.rhs, b))

    def __repr__(self) -> str:
        q = ""
        if self.free:
            q = "forall " + ", ".join(f"{v.name}:{v.sort.name}" for v in self.free) + ". "
        return f"{q}{render_term(self.lhs)} = {render_term(self.rhs)}"


def ground_eq(lhs: Term, rhs: Term) -> Equation:
    return Equation((), lhs, rhs)


# ---------------------------------------------------------------------------
# Built-in literal types

STRING = Sort("String", TYPE)
INT = Sort("Int", TYPE)


def int_literal(value: int) -> App:
    return App(FunctionSymbol(str(int(value)), (), INT, LITERAL))


def string_literal(value: str) -> App:
    return App(FunctionSymbol(value, (), STRING, LITERAL))


def literal(value, sort: Sort) -> App:
    if sort == INT:
        return int_literal(int(value))
    return App(FunctionSymbol(str(value), (), sort, LITERAL))


def parse_int_literal(text: str) -> Optional[int]:
    """Optionally-signed decimal integer, else None."""
    s = text[1:] if text[:1] == "-" else text
    if s.isdigit():
        return int(text)
    return None
