"""Saturation of instance presentations into term models (initial algebras).

The engine maintains a union-find over ground terms with congruence
propagation.  Each saturation round (a) closes every entity class under
all applicable attributes and foreign keys, (b) keeps the instance and
typeside equations asserted, and (c) instantiates every schema
constraint at every entity class, repeating to fixpoint or until the
configured limits trip.  Finiteness of the term model is undecidable in
general, so the limits turn potential divergence into an explicit
ResourceLimit error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

from .errors import ResourceLimit, SortMismatch, UnknownSymbol
from .schema import InstancePresentation, Schema
from .terms import (
    GENERATOR,
    LITERAL,
    App,
    FunctionSymbol,
    Sort,
    Term,
    Var,
    render_term,
    term_key,
)


@dataclass(frozen=True)
class SaturationLimits:
    max_classes_per_sort: int = 10000
    max_rounds: int = 1000

    def __post_init__(self):
        if self.max_classes_per_sort <= 0 or self.max_rounds <= 0:
            raise ValueError("saturation limits must be strictly positive")


DEFAULT_LIMITS = SaturationLimits()


@dataclass(frozen=True)
class Collision:
    """Two distinct literals proved equal: the instance is inconsistent."""

    sort: Sort
    lit1: str
    lit2: str
    class_id: int

    def __str__(self) -> str:
        return f"Collision({self.lit1}, {self.lit2}) at sort {self.sort.name}"


class _Engine:
    """Union-find with hash-consing and congruence propagation."""

    def __init__(self):
        self.parent: list[int] = []
        self.node_sym: list[FunctionSymbol] = []
        self.node_children: list[tuple[int, ...]] = []
        self.sort_of: list[Sort] = []
        self.hashcons: dict[tuple, int] = {}
        self.members: dict[int, list[int]] = {}
        self.class_uses: dict[int, list[int]] = {}

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def add(self, sym: FunctionSymbol, children: tuple[int, ...]) -> int:
        key = (sym, tuple(self.find(c) for c in children))
        hit = self.hashcons.get(key)
        if hit is not None:
            return self.find(hit)
        n = len(self.parent)
        self.parent.append(n)
        self.node_sym.append(sym)
        self.node_children.append(key[1])
        self.sort_of.append(sym.out_sort)
        self.hashcons[key] = n
        self.members[n] = [n]
        for c in key[1]:
            self.class_uses.setdefault(c, []).append(n)
        return n

    def lookup(self, sym: FunctionSymbol, children: tuple[int, ...]) -> Optional[int]:
        hit = self.hashcons.get((sym, tuple(self.find(c) for c in children)))
        return None if hit is None else self.find(hit)

    def merge(self, a: int, b: int) -> None:
        work = [(a, b)]
        while work:
            x, y = work.pop()
            rx, ry = self.find(x), self.find(y)
            if rx == ry:
                continue
            if ry < rx:
                rx, ry = ry, rx
            if self.sort_of[rx] != self.sort_of[ry]:
                raise SortMismatch(
                    f"cannot merge classes of sorts {self.sort_of[rx].name} and {self.sort_of[ry].name}")
            self.parent[ry] = rx
            self.members[rx].extend(self.members.pop(ry))
            uses = self.class_uses.pop(ry, [])
            self.class_uses.setdefault(rx, []).extend(uses)
            # re-canonicalize every application over the merged class
            for p in list(self.class_uses.get(rx, ())):
                key = (self.node_sym[p], tuple(self.find(c) for c in self.node_children[p]))
                q = self.hashcons.get(key)
                if q is None:
                    self.hashcons[key] = p
                elif self.find(q) != self.find(p):
                    work.append((p, q))

    def roots(self) -> list[int]:
        return [i for i in range(len(self.parent)) if self.find(i) == i]


class TermModel:
    """The computed initial algebra of an instance presentation.

    Immutable after construction; safe to share across threads.
    """

    def __init__(self, instance: InstancePresentation, engine: _Engine):
        self.instance = instance
        self.schema: Schema = instance.schema
        self._eng = engine
        self.carriers: dict[Sort, list[int]] = {}
        self.canonical: dict[int, Term] = {}
        self.id_label: dict[int, int] = {}
        self.literal_of: dict[int, App] = {}
        self.collisions: list[Collision] = []
        self._freeze()

    # -- construction -------------------------------------------------

    def _freeze(self) -> None:
        eng = self._eng
        roots = eng.roots()
        # minimal canonical term per class under (depth, name, args)
        keys: dict[int, tuple] = {}
        changed = True
        while changed:
            changed = False
            for r in roots:
                for n in eng.members[r]:
                    children = tuple(eng.find(c) for c in eng.node_children[n])
                    if any(c not in self.canonical for c in children):
                        continue
                    t = App(eng.node_sym[n], tuple(self.canonical[c] for c in children))
                    k = term_key(t)
                    if r not in self.canonical or k < keys[r]:
                        self.canonical[r] = t
                        keys[r] = k
                        changed = True
        by_sort: dict[Sort, list[int]] = {}
        for r in roots:
            by_sort.setdefault(eng.sort_of[r], []).append(r)
        sorts = list(self.schema.entities) + list(self.schema.typeside.types)
        for s in sorts:
            cs = sorted(by_sort.get(s, []), key=lambda r: keys[r])
            self.carriers[s] = cs
            if s.is_entity:
                for i, r in enumerate(cs):
                    self.id_label[r] = i + 1
        for r in roots:
            lits = []
            for n in eng.members[r]:
                if eng.node_sym[n].flavor == LITERAL:
                    t = App(eng.node_sym[n])
                    if t not in lits:
                        lits.append(t)
            if lits:
                self.literal_of[r] = min(lits, key=term_key)
                for other in lits:
                    if other != self.literal_of[r]:
                        self.collisions.append(Collision(
                            eng.sort_of[r], self.literal_of[r].sym.name, other.sym.name, r))

    # -- queries -------------------------------------------------------

    def find(self, c: int) -> int:
        return self._eng.find(c)

    def carrier(self, sort: Sort) -> list[int]:
        return self.carriers.get(sort, [])

    def all_classes(self) -> list[int]:
        out: list[int] = []
        for s in list(self.schema.entities) + list(self.schema.typeside.types):
            out.extend(self.carriers.get(s, []))
        return out

    def sort_of(self, c: int) -> Sort:
        return self._eng.sort_of[self.find(c)]

    def op(self, sym: FunctionSymbol, c: int) -> int:
        """Apply a unary symbol's operation table to a class."""
        hit = self._eng.lookup(sym, (c,))
        if hit is None:
            raise UnknownSymbol(f"no {sym.name} application on class {c}")
        return hit

    def eval(self, t: Term, genmap: Optional[Mapping[FunctionSymbol, int]] = None,
             varmap: Optional[Mapping[str, int]] = None) -> Optional[int]:
        """Class denoted by a ground term, or None for a never-seen literal.

        `genmap` re-routes generator symbols to existing classes (used
        when extending morphisms homomorphically); `varmap` binds
        variables of open terms to classes.
        """
        if isinstance(t, Var):
            if varmap is None or t.name not in varmap:
                raise UnknownSymbol(f"unbound variable {t.name}")
            return self.find(varmap[t.name])
        if genmap is not None and t.sym in genmap:
            return self.find(genmap[t.sym])
        args = []
        for a in t.args:
            c = self.eval(a, genmap, varmap)
            if c is None:
                return None
            args.append(c)
        hit = self._eng.lookup(t.sym, tuple(args))
        if hit is None and t.sym.flavor != LITERAL:
            raise UnknownSymbol(f"term {render_term(t)} does not denote in this model")
        return hit

    def decide_equal(self, t1: Term, t2: Term) -> bool:
        if t1.sort != t2.sort:
            raise SortMismatch(
                f"cannot compare {render_term(t1)} : {t1.sort.name} with {render_term(t2)} : {t2.sort.name}")
        c1, c2 = self.eval(t1), self.eval(t2)
        if c1 is None and c2 is None:
            return t1 == t2
        if c1 is None or c2 is None:
            return False
        return c1 == c2

    def class_of(self, sym: FunctionSymbol) -> int:
        """Class of a 0-ary symbol (generator, constant, literal)."""
        c = self.eval(App(sym))
        if c is None:
            raise UnknownSymbol(f"{sym.name} does not denote in this model")
        return c

    def label(self, c: int) -> str:
        """Display string: entity id, literal value, or labeled-null term."""
        c = self.find(c)
        s = self.sort_of(c)
        if s.is_entity:
            return str(self.id_label[c])
        if c in self.literal_of:
            return self.literal_of[c].sym.name
        return self._render_with_ids(self.canonical[c])

    def _render_with_ids(self, t: Term) -> str:
        if isinstance(t, App) and t.sort.is_entity:
            return str(self.id_label[self.eval(t)])
        if isinstance(t, Var):
            return t.name
        if not t.args:
            return t.sym.name
        return f"{t.sym.name}({', '.join(self._render_with_ids(a) for a in t.args)})"

    def __repr__(self) -> str:
        sizes = ", ".join(f"{s.name}:{len(cs)}" for s, cs in self.carriers.items() if cs)
        return f"TermModel({self.instance.name}; {sizes})"


def build_term_model(inst: InstancePresentation, schema: Optional[Schema] = None,
                     limits: SaturationLimits = DEFAULT_LIMITS) -> TermModel:
    """Saturate an instance presentation into its term model."""
    schema = schema or inst.schema
    if schema is not inst.schema and schema != inst.schema:
        raise SortMismatch("instance is not presented over the given schema")
    eng = _Engine()
    for c in schema.typeside.constants:
        eng.add(c, ())
    for g in inst.generators:
        eng.add(g, ())

    def add_term(t: Term, var_cls: Optional[int] = None) -> int:
        if isinstance(t, Var):
            assert var_cls is not None
            return var_cls
        return eng.add(t.sym, tuple(add_term(a, var_cls) for a in t.args))

    for eq in list(schema.typeside.equations) + list(inst.equations):
        eng.merge(add_term(eq.lhs), add_term(eq.rhs))

    rounds = 0
    while True:
        rounds += 1
        if rounds > limits.max_rounds:
            raise ResourceLimit(
                f"saturation of {inst.name} exceeded {limits.max_rounds} rounds")
        changed = False
        snapshot = eng.roots()
        for r in snapshot:
            s = eng.sort_of[r]
            if not s.is_entity:
                continue
            for f in schema.symbols_on(s):
                if eng.lookup(f, (r,)) is None:
                    eng.add(f, (r,))
                    changed = True
        for con in schema.constraints:
            s = con.free[0].sort
            for r in snapshot:
                if eng.find(r) != r or eng.sort_of[r] != s:
                    continue
                lhs = add_term(con.lhs, r)
                rhs = add_term(con.rhs, r)
                if eng.find(lhs) != eng.find(rhs):
                    eng.merge(lhs, rhs)
                    changed = True
        counts: dict[Sort, int] = {}
        for r in eng.roots():
            counts[eng.sort_of[r]] = counts.get(eng.sort_of[r], 0) + 1
        for s, n in counts.items():
            if n > limits.max_classes_per_sort:
                raise ResourceLimit(
                    f"carrier of {s.name} in {inst.name} exceeded {limits.max_classes_per_sort} classes"
                    " (the term model may be infinite)")
        if not changed:
            break
    return TermModel(inst, eng)


def decide_equal(m: TermModel, t1: Term, t2: Term) -> bool:
    """True iff the instance theory proves t1 = t2."""
    return m.decide_equal(t1, t2)


def canonical_label(m: TermModel, c: int) -> str:
    return m.label(c)


def check_consistency(m: TermModel) -> Optional[Collision]:
    """None when no class holds two distinct literals, else one witness."""
    return m.collisions[0] if m.collisions else None
