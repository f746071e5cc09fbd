"""The three theory layers: typesides, schemas, and instance presentations.

Each layer extends the previous one with new symbols.  Validation
returns a list of issues (empty list = ok) so callers can report
every problem at once; the DSL elaborator attaches source spans to
these issues.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .terms import (
    ATTRIBUTE,
    ENTITY,
    FOREIGN_KEY,
    GENERATOR,
    INT,
    LITERAL,
    STRING,
    TYPE,
    TYPESIDE,
    App,
    Equation,
    FunctionSymbol,
    Sort,
    Term,
    Var,
    is_ground,
    render_term,
)


@dataclass(frozen=True)
class Issue:
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


@dataclass
class Typeside:
    name: str
    types: list[Sort] = field(default_factory=lambda: [STRING, INT])
    constants: list[FunctionSymbol] = field(default_factory=list)
    equations: list[Equation] = field(default_factory=list)

    def has_type(self, sort: Sort) -> bool:
        return sort in self.types

    def type_named(self, name: str) -> Optional[Sort]:
        for t in self.types:
            if t.name == name:
                return t
        return None

    def constant_named(self, name: str) -> Optional[FunctionSymbol]:
        for c in self.constants:
            if c.name == name:
                return c
        return None


def builtin_typeside(name: str = "Ty") -> Typeside:
    """The default typeside: built-in String and Int with literal syntax."""
    return Typeside(name)


def validate_typeside(ts: Typeside) -> list[Issue]:
    issues: list[Issue] = []
    seen: set[str] = set()
    for t in ts.types:
        if t.kind != TYPE:
            issues.append(Issue("UnknownSort", f"{t.name} declared on a typeside but is not a type"))
        if t.name in seen:
            issues.append(Issue("DuplicateName", f"duplicate type {t.name}"))
        seen.add(t.name)
    for c in ts.constants:
        if c.arity != 0:
            issues.append(Issue("BadConstant", f"constant {c.name} must be 0-ary"))
        if not ts.has_type(c.out_sort):
            issues.append(Issue("UnknownSort", f"constant {c.name} has unknown type {c.out_sort.name}"))
        if c.name in seen:
            issues.append(Issue("DuplicateName", f"duplicate name {c.name}"))
        seen.add(c.name)
    for eq in ts.equations:
        if not eq.is_ground:
            issues.append(Issue("NonGroundTypesideEquation", f"typeside equation must be ground: {eq}"))
    return issues


@dataclass
class Schema:
    name: str
    typeside: Typeside
    entities: list[Sort] = field(default_factory=list)
    attributes: list[FunctionSymbol] = field(default_factory=list)
    foreign_keys: list[FunctionSymbol] = field(default_factory=list)
    constraints: list[Equation] = field(default_factory=list)

    @property
    def symbols(self) -> list[FunctionSymbol]:
        return self.foreign_keys + self.attributes

    def entity_named(self, name: str) -> Optional[Sort]:
        for e in self.entities:
            if e.name == name:
                return e
        return None

    def sort_named(self, name: str) -> Optional[Sort]:
        return self.entity_named(name) or self.typeside.type_named(name)

    def symbol_named(self, name: str) -> Optional[FunctionSymbol]:
        for f in self.symbols:
            if f.name == name:
                return f
        return None

    def symbols_on(self, sort: Sort) -> list[FunctionSymbol]:
        """Foreign keys then attributes applicable to an entity, in declaration order."""
        return [f for f in self.symbols if f.arg_sorts == (sort,)]

    def owns_symbol(self, sym: FunctionSymbol) -> bool:
        if sym.flavor == LITERAL:
            return self.typeside.has_type(sym.out_sort)
        if sym.flavor == TYPESIDE:
            return sym in self.typeside.constants
        return sym in self.symbols


def validate_schema(s: Schema) -> list[Issue]:
    issues = validate_typeside(s.typeside)
    seen = {t.name for t in s.typeside.types} | {c.name for c in s.typeside.constants}
    for e in s.entities:
        if e.kind != ENTITY:
            issues.append(Issue("UnknownSort", f"{e.name} declared as entity but has kind {e.kind}"))
        if e.name in seen:
            issues.append(Issue("DuplicateName", f"duplicate name {e.name}"))
        seen.add(e.name)
    sym_seen: set[str] = set()
    for f in s.foreign_keys:
        if len(f.arg_sorts) != 1 or not f.arg_sorts[0].is_entity or f.arg_sorts[0] not in s.entities:
            issues.append(Issue("TypeToEntityFunction", f"foreign key {f.name} must go from an entity"))
        if not f.out_sort.is_entity or f.out_sort not in s.entities:
            issues.append(Issue("UnknownSort", f"foreign key {f.name} must land in an entity"))
        if f.name in sym_seen:
            issues.append(Issue("DuplicateName", f"duplicate symbol {f.name}"))
        sym_seen.add(f.name)
    for a in s.attributes:
        if len(a.arg_sorts) != 1 or not a.arg_sorts[0].is_entity or a.arg_sorts[0] not in s.entities:
            issues.append(Issue("TypeToEntityFunction", f"attribute {a.name} must go from an entity"))
        if a.out_sort.is_entity or not s.typeside.has_type(a.out_sort):
            issues.append(Issue("UnknownSort", f"attribute {a.name} must land in a type"))
        if a.name in sym_seen:
            issues.append(Issue("DuplicateName", f"duplicate symbol {a.name}"))
        sym_seen.add(a.name)
    for eq in s.constraints:
        if len(eq.free) != 1 or not eq.free[0].sort.is_entity:
            issues.append(Issue(
                "BadConstraintShape",
                f"constraint must have exactly one entity-sorted variable: {eq}"))
        elif eq.free[0].sort not in s.entities:
            issues.append(Issue("UnknownSort", f"constraint variable has unknown entity {eq.free[0].sort.name}"))
        issues.extend(_check_symbols(s, None, eq.lhs))
        issues.extend(_check_symbols(s, None, eq.rhs))
    return issues


@dataclass
class InstancePresentation:
    """A schema extended with 0-ary generators and ground equations."""

    name: str
    schema: Schema
    generators: list[FunctionSymbol] = field(default_factory=list)
    equations: list[Equation] = field(default_factory=list)

    def generator_named(self, name: str) -> Optional[FunctionSymbol]:
        for g in self.generators:
            if g.name == name:
                return g
        return None


def generator(name: str, sort: Sort) -> FunctionSymbol:
    return FunctionSymbol(name, (), sort, GENERATOR)


def _check_symbols(s: Schema, inst: Optional[InstancePresentation], t: Term) -> list[Issue]:
    issues: list[Issue] = []
    if isinstance(t, Var):
        return issues
    sym = t.sym
    known = s.owns_symbol(sym) or (inst is not None and sym in inst.generators)
    if not known:
        issues.append(Issue("UnknownSymbol", f"unknown symbol {sym.name} in {render_term(t)}"))
    for a in t.args:
        issues.extend(_check_symbols(s, inst, a))
    return issues


def validate_instance(i: InstancePresentation) -> list[Issue]:
    issues = validate_schema(i.schema)
    names = {e.name for e in i.schema.entities} | {f.name for f in i.schema.symbols}
    for g in i.generators:
        if g.arity != 0:
            issues.append(Issue("BadGenerator", f"generator {g.name} must be 0-ary"))
        if i.schema.sort_named(g.out_sort.name) != g.out_sort:
            issues.append(Issue("UnknownSort", f"generator {g.name} has unknown sort {g.out_sort.name}"))
        if g.name in names:
            issues.append(Issue("DuplicateName", f"generator {g.name} shadows another declaration"))
        names.add(g.name)
    for eq in i.equations:
        if not eq.is_ground:
            issues.append(Issue("NonGroundEquation", f"instance equation must be ground: {eq}"))
        issues.extend(_check_symbols(i.schema, i, eq.lhs))
        issues.extend(_check_symbols(i.schema, i, eq.rhs))
    return issues


def empty_instance(name: str, schema: Schema) -> InstancePresentation:
    return InstancePresentation(name, schema)


def probe_instance(schema: Schema, entity: Sort, gen_name: str = "_x") -> InstancePresentation:
    """Free instance on one generator at the given entity.

    Used to decide provable equality of open terms with a single
    variable: the terms are equal in every model iff they agree on the
    free probe.
    """
    return InstancePresentation(f"_probe_{schema.name}_{entity.name}", schema,
                                [generator(gen_name, entity)], [])
