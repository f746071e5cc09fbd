"""Data migration functors and the adjunction machinery around them.

delta projects a target model back along a mapping (model reduct),
sigma pushes an instance presentation forward by substitution, and pi
builds the limit-style migration from path-indexed families.  The
units, counits and mates of the adjunctions sigma -| delta -| pi are
constructed explicitly, which is what makes round-tripping checkable
at desk scale.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .errors import NoMorphismExists, ResourceLimit, SchemaMismatch
from .mappings import (
    InstanceMorphism,
    Mapping,
    apply_mapping_term,
    compose_mappings,
    identity_mapping,
    mappings_equal,
    morphism_from_genmap,
    open_terms_equal,
    validate_mapping,
)
from .model import (
    DEFAULT_LIMITS,
    Collision,
    SaturationLimits,
    TermModel,
    build_term_model,
    check_consistency,
)
from .schema import InstancePresentation, Schema, generator
from .terms import (
    App,
    Equation,
    FunctionSymbol,
    Sort,
    Term,
    Var,
    free_vars,
    ground_eq,
    render_term,
    substitute,
)

# ---------------------------------------------------------------------------
# Path enumeration


@dataclass(frozen=True)
class PathCaps:
    max_depth: int = 6
    max_paths: int = 256

    def __post_init__(self):
        if self.max_depth <= 0 or self.max_paths <= 0:
            raise ValueError("path caps must be strictly positive")


DEFAULT_CAPS = PathCaps()


@dataclass
class PathSet:
    source: Sort
    target: Sort
    terms: list[Term]
    truncated: bool = False


def enumerate_paths(schema: Schema, frm: Sort, to: Sort,
                    caps: PathCaps = DEFAULT_CAPS,
                    limits: SaturationLimits = DEFAULT_LIMITS) -> PathSet:
    """All one-variable terms from `frm` to `to`, modulo schema constraints.

    Breadth-first over foreign keys, optionally terminated by a single
    attribute when `to` is a type.  Paths provably equal under the
    schema constraints are deduplicated via a free probe model; the
    truncated flag is set when the caps cut the search short.
    """
    use_probe = bool(schema.constraints)

    def equivalent(a: Term, b: Term) -> bool:
        if a == b:
            return True
        if not use_probe:
            return False
        return open_terms_equal(schema, frm, a, b, limits)

    start: Term = Var("p", frm)
    entity_reps: list[Term] = [start]
    frontier: list[Term] = [start]
    truncated = False
    depth = 0
    while frontier:
        if depth >= caps.max_depth or len(entity_reps) > caps.max_paths:
            truncated = True
            break
        depth += 1
        fresh: list[Term] = []
        for u in frontier:
            for fk in schema.foreign_keys:
                if fk.arg_sorts != (u.sort,):
                    continue
                w = App(fk, (u,))
                if not any(equivalent(w, r) for r in entity_reps):
                    entity_reps.append(w)
                    fresh.append(w)
        frontier = fresh

    if to.is_entity:
        terms = [r for r in entity_reps if r.sort == to]
    else:
        terms = []
        for u in entity_reps:
            for att in schema.attributes:
                if att.arg_sorts == (u.sort,) and att.out_sort == to:
                    w = App(att, (u,))
                    if not any(equivalent(w, r) for r in terms):
                        terms.append(w)
    if len(terms) > caps.max_paths:
        terms = terms[: caps.max_paths]
        truncated = True
    return PathSet(frm, to, terms, truncated)


def shortest_path(schema: Schema, frm: Sort, to: Sort,
                  caps: PathCaps = DEFAULT_CAPS) -> Optional[Term]:
    ps = enumerate_paths(schema, frm, to, caps)
    return ps.terms[0] if ps.terms else None


# ---------------------------------------------------------------------------
# Migration results


@dataclass
class MigrationResult:
    kind: str
    mapping: Mapping
    input_name: str
    presentation: InstancePresentation
    model: TermModel


@dataclass
class DeltaResult(MigrationResult):
    input_model: TermModel
    # generator -> class of the input model it was created for
    gen_origin: dict[FunctionSymbol, int]
    # (source entity name, input class) -> output class
    ent_class: dict[tuple[str, int], int]
    # input type class -> output class
    ty_class: dict[int, int]
    # output class -> input class (total)
    to_target: dict[int, int]


@dataclass
class SigmaResult(MigrationResult):
    input_presentation: InstancePresentation
    gen_map: dict[FunctionSymbol, FunctionSymbol]
    collision: Optional[Collision]


@dataclass
class PiResult(MigrationResult):
    input_model: TermModel
    # per target entity name: ordered index of (source entity, open path term)
    index: dict[str, list[tuple[Sort, Term]]]
    # per target entity name: ordered list of family tuples
    families: dict[str, list[tuple[int, ...]]]
    # (target entity name, family tuple) -> output class
    fam_class: dict[tuple[str, tuple[int, ...]], int]
    # output entity class -> (target entity name, family tuple)
    fam_of: dict[int, tuple[str, tuple[int, ...]]]
    # input type class <-> output class
    ty_class: dict[int, int]
    ty_origin: dict[int, int]
    fresh_nulls: set[int] = field(default_factory=set)


def _type_anchors(src: TermModel, prefix: str = ""):
    """Ground terms anchoring every type class of `src` in a new presentation.

    Literal and constant classes are anchored by their own symbols;
    every other class (a labeled null) gets a fresh generator.  The
    returned pinning equations force all anchors to be present (and
    correctly merged) in the saturated output.
    """
    gens: list[FunctionSymbol] = []
    eqs: list[Equation] = []
    term_of: dict[int, Term] = {}
    const_class: dict[int, FunctionSymbol] = {}
    for const in src.schema.typeside.constants:
        const_class.setdefault(src.class_of(const), const)
    for tau in src.schema.typeside.types:
        n = 0
        for c in src.carrier(tau):
            if c in src.literal_of:
                t: Term = src.literal_of[c]
                eqs.append(ground_eq(t, t))
            elif c in const_class:
                t = App(const_class[c])
            else:
                n += 1
                g = generator(f"{prefix}{tau.name}_null{n}", tau)
                gens.append(g)
                t = App(g)
            term_of[c] = t
    for const in src.schema.typeside.constants:
        anchor = term_of[src.class_of(const)]
        if anchor != App(const):
            eqs.append(ground_eq(App(const), anchor))
    return term_of, gens, eqs


# ---------------------------------------------------------------------------
# Delta


def delta(f_map: Mapping, j: TermModel,
          limits: SaturationLimits = DEFAULT_LIMITS) -> DeltaResult:
    """Model reduct: project a target model back along the mapping."""
    if j.schema != f_map.target:
        raise SchemaMismatch(f"{j.instance.name} is not an instance of {f_map.target.name}")
    if j.collisions:
        raise SchemaMismatch(f"input of delta is inconsistent: {j.collisions[0]}")
    src = f_map.source
    gens: list[FunctionSymbol] = []
    eqs: list[Equation] = []
    gen_origin: dict[FunctionSymbol, int] = {}
    ent_gen: dict[tuple[str, int], FunctionSymbol] = {}
    for e in src.entities:
        for c in j.carrier(f_map.entity_image(e)):
            g = generator(f"{e.name}_{j.id_label[c]}", e)
            gens.append(g)
            gen_origin[g] = c
            ent_gen[(e.name, c)] = g
    ty_term, ty_gens, ty_eqs = _type_anchors(j)
    gens.extend(ty_gens)
    eqs.extend(ty_eqs)
    for c, t in ty_term.items():
        if isinstance(t, App) and t.sym in ty_gens:
            gen_origin[t.sym] = c
    for e in src.entities:
        for c in j.carrier(f_map.entity_image(e)):
            g = ent_gen[(e.name, c)]
            for q in src.symbols_on(e):
                img = j.eval(f_map.symbol_map[q],
                             varmap={free_vars(f_map.symbol_map[q])[0].name: c})
                if q.out_sort.is_entity:
                    rhs: Term = App(ent_gen[(q.out_sort.name, img)])
                else:
                    rhs = ty_term[img]
                eqs.append(ground_eq(App(q, (App(g),)), rhs))
    pres = InstancePresentation(f"delta_{f_map.name}_{j.instance.name}", src, gens, eqs)
    model = build_term_model(pres, limits=limits)
    ent_class = {key: model.class_of(g) for key, g in ent_gen.items()}
    ty_class = {c: model.eval(t) for c, t in ty_term.items()}
    to_target: dict[int, int] = {}
    for (e_name, c), out in ent_class.items():
        to_target[out] = c
    for c, out in ty_class.items():
        to_target[out] = c
    return DeltaResult("delta", f_map, j.instance.name, pres, model,
                       j, gen_origin, ent_class, ty_class, to_target)


# ---------------------------------------------------------------------------
# Sigma


def translate_presentation(f_map: Mapping, inst: InstancePresentation,
                           name: Optional[str] = None):
    """Push a presentation across a mapping by substitution."""
    gen_map = {g: generator(g.name, f_map.sort_image(g.out_sort)) for g in inst.generators}
    eqs = [Equation((), apply_mapping_term(f_map, eq.lhs, gen_map),
                    apply_mapping_term(f_map, eq.rhs, gen_map))
           for eq in inst.equations]
    pres = InstancePresentation(name or f"sigma_{f_map.name}_{inst.name}",
                                f_map.target, list(gen_map.values()), eqs)
    return pres, gen_map


def sigma(f_map: Mapping, inst: InstancePresentation,
          limits: SaturationLimits = DEFAULT_LIMITS) -> SigmaResult:
    if inst.schema != f_map.source:
        raise SchemaMismatch(f"{inst.name} is not an instance of {f_map.source.name}")
    pres, gen_map = translate_presentation(f_map, inst)
    model = build_term_model(pres, limits=limits)
    return SigmaResult("sigma", f_map, inst.name, pres, model,
                       inst, gen_map, check_consistency(model))


# ---------------------------------------------------------------------------
# Pi


def _resolve_position(f_map: Mapping, t_ent: Sort, index: list[tuple[Sort, Term]],
                      s_ent: Sort, comp: Term,
                      limits: SaturationLimits) -> int:
    for i, (s, p) in enumerate(index):
        if s != s_ent:
            continue
        if comp == p or open_terms_equal(f_map.target, t_ent, comp, p, limits):
            return i
    raise ResourceLimit(
        f"path {render_term(comp)} missing from the enumerated index at {t_ent.name}")


def pi(f_map: Mapping, i_model: TermModel,
       limits: SaturationLimits = DEFAULT_LIMITS,
       caps: PathCaps = DEFAULT_CAPS) -> PiResult:
    """Limit-style migration: path-indexed families over the input model."""
    if i_model.schema != f_map.source:
        raise SchemaMismatch(f"{i_model.instance.name} is not an instance of {f_map.source.name}")
    if i_model.collisions:
        raise SchemaMismatch(f"input of pi is inconsistent: {i_model.collisions[0]}")
    src, tgt = f_map.source, f_map.target

    index: dict[str, list[tuple[Sort, Term]]] = {}
    for t in tgt.entities:
        idx: list[tuple[Sort, Term]] = []
        for s in src.entities:
            ps = enumerate_paths(tgt, t, f_map.entity_image(s), caps, limits)
            if ps.truncated:
                raise ResourceLimit(
                    f"path set {t.name} -> {f_map.entity_image(s).name} truncated; "
                    "pi is undefined under truncation")
            idx.extend((s, p) for p in ps.terms)
        index[t.name] = idx

    # foreign-key naturality constraints: x[j] == q(x[i]) in the input model
    constraints: dict[str, list[tuple[int, FunctionSymbol, int]]] = {}
    for t in tgt.entities:
        cons = []
        for i, (s, p) in enumerate(index[t.name]):
            for q in src.foreign_keys:
                if q.arg_sorts != (s,):
                    continue
                image = f_map.symbol_map[q]
                comp = substitute(image, {free_vars(image)[0].name: p})
                j = _resolve_position(f_map, t, index[t.name], q.out_sort, comp, limits)
                cons.append((i, q, j))
        constraints[t.name] = cons

    families: dict[str, list[tuple[int, ...]]] = {}
    for t in tgt.entities:
        idx = index[t.name]
        cons = constraints[t.name]
        out: list[tuple[int, ...]] = []

        def extend(pos: int, acc: list[int]):
            if len(out) > limits.max_classes_per_sort:
                raise ResourceLimit(f"family carrier at {t.name} exceeded limits")
            if pos == len(idx):
                out.append(tuple(acc))
                return
            s, _ = idx[pos]
            for c in i_model.carrier(s):
                acc.append(c)
                ok = all(acc[j] == i_model.op(q, acc[i])
                         for (i, q, j) in cons if i <= pos and j <= pos)
                if ok:
                    extend(pos + 1, acc)
                acc.pop()

        extend(0, [])
        families[t.name] = out

    # attribute factorizations through the mapping
    fact: dict[tuple[str, str], list[tuple[int, Term]]] = {}
    for t in tgt.entities:
        for att in tgt.attributes:
            if att.arg_sorts != (t,):
                continue
            att_term = App(att, (Var("p", t),))
            cands: list[tuple[int, Term]] = []
            for i, (s, p) in enumerate(index[t.name]):
                qs = enumerate_paths(src, s, att.out_sort, caps, limits)
                if qs.truncated:
                    raise ResourceLimit(f"source path set {s.name} -> {att.out_sort.name} truncated")
                for q in qs.terms:
                    fq = apply_mapping_term(f_map, q)
                    comp = substitute(fq, {free_vars(fq)[0].name: p})
                    if open_terms_equal(tgt, t, comp, att_term, limits):
                        cands.append((i, q))
            fact[(t.name, att.name)] = cands

    gens: list[FunctionSymbol] = []
    eqs: list[Equation] = []
    fam_gen: dict[tuple[str, tuple[int, ...]], FunctionSymbol] = {}
    for t in tgt.entities:
        for k, x in enumerate(families[t.name]):
            g = generator(f"{t.name}_{k + 1}", t)
            gens.append(g)
            fam_gen[(t.name, x)] = g
    ty_term, ty_gens, ty_eqs = _type_anchors(i_model)
    gens.extend(ty_gens)
    eqs.extend(ty_eqs)

    for t in tgt.entities:
        idx = index[t.name]
        for h in tgt.foreign_keys:
            if h.arg_sorts != (t,):
                continue
            t2 = h.out_sort
            posmap = []
            for (s, p2) in index[t2.name]:
                comp = substitute(p2, {free_vars(p2)[0].name: App(h, (Var("p", t),))})
                posmap.append(_resolve_position(f_map, t, idx, s, comp, limits))
            for x in families[t.name]:
                y = tuple(x[i] for i in posmap)
                if (t2.name, y) not in fam_gen:
                    raise ResourceLimit(
                        f"family image under {h.name} not natural; enumeration incomplete")
                eqs.append(ground_eq(App(h, (App(fam_gen[(t.name, x)]),)),
                                     App(fam_gen[(t2.name, y)])))
        for att in tgt.attributes:
            if att.arg_sorts != (t,):
                continue
            cands = fact[(t.name, att.name)]
            if not cands:
                continue  # value is a fresh labeled null
            for x in families[t.name]:
                i0, q0 = cands[0]
                val = i_model.eval(q0, varmap={free_vars(q0)[0].name: x[i0]})
                for i1, q1 in cands[1:]:
                    other = i_model.eval(q1, varmap={free_vars(q1)[0].name: x[i1]})
                    if other != val:
                        raise ResourceLimit(
                            f"attribute {att.name} is not well-defined across factorizations")
                eqs.append(ground_eq(App(att, (App(fam_gen[(t.name, x)]),)), ty_term[val]))

    pres = InstancePresentation(f"pi_{f_map.name}_{i_model.instance.name}", tgt, gens, eqs)
    model = build_term_model(pres, limits=limits)
    fam_class = {key: model.class_of(g) for key, g in fam_gen.items()}
    fam_of = {cls: key for key, cls in fam_class.items()}
    ty_class = {c: model.eval(t) for c, t in ty_term.items()}
    ty_origin = {out: c for c, out in ty_class.items()}
    fresh = {c for tau in tgt.typeside.types for c in model.carrier(tau)
             if c not in ty_origin}
    return PiResult("pi", f_map, i_model.instance.name, pres, model,
                    i_model, index, families, fam_class, fam_of,
                    ty_class, ty_origin, fresh)


# ---------------------------------------------------------------------------
# Coproducts


def _rename_generators(t: Term, gm: dict[FunctionSymbol, FunctionSymbol]) -> Term:
    if isinstance(t, Var):
        return t
    if t.sym in gm:
        return App(gm[t.sym])
    return App(t.sym, tuple(_rename_generators(a, gm) for a in t.args))


def coproduct(i1: InstancePresentation, i2: InstancePresentation,
              name: Optional[str] = None) -> InstancePresentation:
    """Disjoint union of two presentations on the same schema."""
    if i1.schema != i2.schema:
        raise SchemaMismatch("coproduct requires instances on the same schema")
    gm1 = {g: generator(f"l_{g.name}", g.out_sort) for g in i1.generators}
    gm2 = {g: generator(f"r_{g.name}", g.out_sort) for g in i2.generators}
    eqs = [Equation((), _rename_generators(eq.lhs, gm1), _rename_generators(eq.rhs, gm1))
           for eq in i1.equations]
    eqs += [Equation((), _rename_generators(eq.lhs, gm2), _rename_generators(eq.rhs, gm2))
            for eq in i2.equations]
    return InstancePresentation(name or f"{i1.name}_plus_{i2.name}", i1.schema,
                                list(gm1.values()) + list(gm2.values()), eqs)


# ---------------------------------------------------------------------------
# Morphism enumeration and isomorphism


def _attr_profile(m: TermModel, c: int) -> tuple:
    """Literal fingerprint of an entity class, used to prune searches."""
    out = []
    for f in m.schema.symbols_on(m.sort_of(c)):
        if f.out_sort.is_entity:
            continue
        v = m.op(f, c)
        out.append(m.literal_of[v].sym.name if v in m.literal_of else None)
    return tuple(out)


def _forced_assignments(a: TermModel, b: TermModel) -> Optional[dict[int, int]]:
    forced: dict[int, int] = {}
    for c, lit in a.literal_of.items():
        img = b.eval(lit)
        if img is None:
            return None
        forced[a.find(c)] = img
    for const in a.schema.typeside.constants:
        src_c, tgt_c = a.class_of(const), b.class_of(const)
        if forced.get(src_c, tgt_c) != tgt_c:
            return None
        forced[src_c] = tgt_c
    return forced


def _search_morphisms(a: TermModel, b: TermModel, injective: bool,
                      cap: int, first_only: bool) -> list[InstanceMorphism]:
    if a.schema != b.schema:
        raise SchemaMismatch("morphisms require a common schema")
    forced = _forced_assignments(a, b)
    if forced is None:
        return []
    variables = a.all_classes()
    solutions: list[InstanceMorphism] = []
    assign: dict[int, int] = dict(forced)
    used: dict[int, int] = {}
    for v in assign.values():
        used[v] = used.get(v, 0) + 1
    if injective and any(n > 1 for n in used.values()):
        return []

    def try_assign(c: int, d: int, trail: list[int]) -> bool:
        stack = [(c, d)]
        while stack:
            x, y = stack.pop()
            x, y = a.find(x), b.find(y)
            if a.sort_of(x) != b.sort_of(y):
                return False
            if x in assign:
                if assign[x] != y:
                    return False
                continue
            if injective and used.get(y, 0) > 0:
                return False
            assign[x] = y
            used[y] = used.get(y, 0) + 1
            trail.append(x)
            if a.sort_of(x).is_entity:
                for f in a.schema.symbols_on(a.sort_of(x)):
                    stack.append((a.op(f, x), b.op(f, y)))
        return True

    def undo(trail: list[int]):
        for x in trail:
            used[assign[x]] -= 1
            del assign[x]

    def backtrack(i: int) -> bool:
        if len(solutions) > cap:
            raise ResourceLimit(f"more than {cap} morphisms")
        if i == len(variables):
            solutions.append(InstanceMorphism(a, b, dict(assign)))
            return first_only
        x = variables[i]
        if x in assign:
            return backtrack(i + 1)
        prof = _attr_profile(a, x) if a.sort_of(x).is_entity else None
        for y in b.carrier(a.sort_of(x)):
            if prof is not None and injective and prof != _attr_profile(b, y):
                continue
            trail: list[int] = []
            ok = try_assign(x, y, trail)
            if ok and backtrack(i + 1):
                return True
            undo(trail)
        return False

    backtrack(0)
    return solutions


def enumerate_morphisms(a: TermModel, b: TermModel,
                        cap: int = 100000) -> list[InstanceMorphism]:
    """All instance morphisms a -> b, in a deterministic order."""
    return _search_morphisms(a, b, injective=False, cap=cap, first_only=False)


def instances_isomorphic(a: TermModel, b: TermModel,
                         cap: int = 100000) -> Optional[InstanceMorphism]:
    """A bijective commuting morphism, or None."""
    if a.schema != b.schema:
        raise SchemaMismatch("isomorphism requires a common schema")
    for s in list(a.schema.entities) + list(a.schema.typeside.types):
        if len(a.carrier(s)) != len(b.carrier(s)):
            return None
    if sorted(l.sym.name for l in a.literal_of.values()) != \
            sorted(l.sym.name for l in b.literal_of.values()):
        return None
    found = _search_morphisms(a, b, injective=True, cap=cap, first_only=True)
    return found[0] if found else None


# ---------------------------------------------------------------------------
# Units, counits, mates


def _checked(m: InstanceMorphism) -> InstanceMorphism:
    bad = m.violations()
    if bad:
        raise NoMorphismExists(bad[0])
    return m


def unit_sigma(f_map: Mapping, i_model: TermModel,
               limits: SaturationLimits = DEFAULT_LIMITS) -> InstanceMorphism:
    """I -> delta(sigma(I)): where each class of I is sent by sigma."""
    sres = sigma(f_map, i_model.instance, limits)
    dres = delta(f_map, sres.model, limits)
    cmap: dict[int, int] = {}
    for c in i_model.all_classes():
        w = apply_mapping_term(f_map, i_model.canonical[c], sres.gen_map)
        j = sres.model.eval(w)
        s = i_model.sort_of(c)
        if s.is_entity:
            cmap[c] = dres.ent_class[(s.name, j)]
        else:
            cmap[c] = dres.ty_class[j]
    return _checked(InstanceMorphism(i_model, dres.model, cmap))


def counit_sigma(f_map: Mapping, j_model: TermModel,
                 limits: SaturationLimits = DEFAULT_LIMITS) -> InstanceMorphism:
    """sigma(delta(J)) -> J: where the projected classes originate."""
    dres = delta(f_map, j_model, limits)
    sres = sigma(f_map, dres.presentation, limits)
    genmap = {sres.gen_map[g]: origin for g, origin in dres.gen_origin.items()}
    return _checked(morphism_from_genmap(sres.model, j_model, genmap))


def unit_pi(f_map: Mapping, j_model: TermModel,
            limits: SaturationLimits = DEFAULT_LIMITS,
            caps: PathCaps = DEFAULT_CAPS) -> InstanceMorphism:
    """J -> pi(delta(J))."""
    dres = delta(f_map, j_model, limits)
    pires = pi(f_map, dres.model, limits, caps)
    cmap: dict[int, int] = {}
    for t in f_map.target.entities:
        for c in j_model.carrier(t):
            x = []
            for (s, p) in pires.index[t.name]:
                cj = j_model.eval(p, varmap={free_vars(p)[0].name: c})
                x.append(dres.ent_class[(s.name, cj)])
            cmap[c] = pires.fam_class[(t.name, tuple(x))]
    for tau in f_map.target.typeside.types:
        for c in j_model.carrier(tau):
            cmap[c] = pires.ty_class[dres.ty_class[c]]
    return _checked(InstanceMorphism(j_model, pires.model, cmap))


def _identity_position(index: list[tuple[Sort, Term]], s: Sort) -> int:
    for i, (s2, p) in enumerate(index):
        if s2 == s and isinstance(p, Var):
            return i
    raise NoMorphismExists(f"no identity path for {s.name} in the family index")


def counit_pi(f_map: Mapping, i_model: TermModel,
              limits: SaturationLimits = DEFAULT_LIMITS,
              caps: PathCaps = DEFAULT_CAPS) -> InstanceMorphism:
    """delta(pi(I)) -> I."""
    pires = pi(f_map, i_model, limits, caps)
    dres = delta(f_map, pires.model, limits)
    cmap: dict[int, int] = {}
    for s in f_map.source.entities:
        pos = _identity_position(pires.index[f_map.entity_image(s).name], s)
        for c in pires.model.carrier(f_map.entity_image(s)):
            t_name, x = pires.fam_of[c]
            cmap[dres.ent_class[(s.name, c)]] = x[pos]
    for k, out in dres.ty_class.items():
        if k in pires.ty_origin:
            cmap[out] = pires.ty_origin[k]
    # classes reachable through source attributes are forced by commutation
    for s in f_map.source.entities:
        for d in dres.model.carrier(s):
            for att in f_map.source.attributes:
                if att.arg_sorts != (s,):
                    continue
                v = dres.model.op(att, d)
                want = i_model.op(att, cmap[d])
                if cmap.get(v, want) != want:
                    raise NoMorphismExists(
                        f"counit of pi is inconsistent at attribute {att.name}")
                cmap[v] = want
    for c in dres.model.all_classes():
        if c in cmap:
            continue
        carrier = i_model.carrier(dres.model.sort_of(c))
        if not carrier:
            raise NoMorphismExists(
                f"no image available for unconstrained class at {dres.model.sort_of(c).name}")
        cmap[c] = carrier[0]
    return _checked(InstanceMorphism(dres.model, i_model, cmap))


def transpose_sigma_down(f_map: Mapping, i_model: TermModel, h: InstanceMorphism,
                         limits: SaturationLimits = DEFAULT_LIMITS) -> InstanceMorphism:
    """Mate of h : sigma(I) -> J, namely I -> delta(J)."""
    dres = delta(f_map, h.target, limits)
    gen_map = {g: generator(g.name, f_map.sort_image(g.out_sort))
               for g in i_model.instance.generators}
    cmap: dict[int, int] = {}
    for c in i_model.all_classes():
        w = apply_mapping_term(f_map, i_model.canonical[c], gen_map)
        j = h.apply(h.source.eval(w))
        s = i_model.sort_of(c)
        cmap[c] = dres.ent_class[(s.name, j)] if s.is_entity else dres.ty_class[j]
    return _checked(InstanceMorphism(i_model, dres.model, cmap))


def transpose_sigma_up(f_map: Mapping, hp: InstanceMorphism, j_model: TermModel,
                       limits: SaturationLimits = DEFAULT_LIMITS) -> InstanceMorphism:
    """Mate of hp : I -> delta(J), namely sigma(I) -> J.

    hp's target must be the model produced by delta(f_map, j_model).
    """
    dres = delta(f_map, j_model, limits)
    sres = sigma(f_map, hp.source.instance, limits)
    genmap = {}
    for g in hp.source.instance.generators:
        d = hp.apply(hp.source.class_of(g))
        genmap[sres.gen_map[g]] = dres.to_target[dres.model.find(d)]
    return _checked(morphism_from_genmap(sres.model, j_model, genmap))


def transpose_pi_down(f_map: Mapping, j_model: TermModel, h: InstanceMorphism,
                      limits: SaturationLimits = DEFAULT_LIMITS,
                      caps: PathCaps = DEFAULT_CAPS) -> InstanceMorphism:
    """Mate of h : delta(J) -> I, namely J -> pi(I)."""
    dres = delta(f_map, j_model, limits)
    pires = pi(f_map, h.target, limits, caps)
    cmap: dict[int, int] = {}
    for t in f_map.target.entities:
        for c in j_model.carrier(t):
            x = []
            for (s, p) in pires.index[t.name]:
                cj = j_model.eval(p, varmap={free_vars(p)[0].name: c})
                x.append(h.apply(dres.ent_class[(s.name, cj)]))
            key = (t.name, tuple(x))
            if key not in pires.fam_class:
                raise NoMorphismExists(f"image family at {t.name} is not natural")
            cmap[c] = pires.fam_class[key]
    for tau in f_map.target.typeside.types:
        for c in j_model.carrier(tau):
            cmap[c] = pires.ty_class[h.apply(dres.ty_class[c])]
    return _checked(InstanceMorphism(j_model, pires.model, cmap))


def transpose_pi_up(f_map: Mapping, g: InstanceMorphism, i_model: TermModel,
                    limits: SaturationLimits = DEFAULT_LIMITS,
                    caps: PathCaps = DEFAULT_CAPS) -> InstanceMorphism:
    """Mate of g : J -> pi(I), namely delta(J) -> I.

    g's target must be the model produced by pi(f_map, i_model).
    """
    dres = delta(f_map, g.source, limits)
    pires = pi(f_map, i_model, limits, caps)
    cmap: dict[int, int] = {}
    for s in f_map.source.entities:
        t = f_map.entity_image(s)
        pos = _identity_position(pires.index[t.name], s)
        for (e_name, c), d in dres.ent_class.items():
            if e_name != s.name:
                continue
            img = g.apply(c)
            _, x = pires.fam_of[pires.model.find(img)]
            cmap[d] = x[pos]
    for k, d in dres.ty_class.items():
        img = pires.model.find(g.apply(k))
        if img not in pires.ty_origin:
            raise NoMorphismExists("image hits a fresh null of pi; no mate exists")
        cmap[d] = pires.ty_origin[img]
    return _checked(InstanceMorphism(dres.model, i_model, cmap))


# ---------------------------------------------------------------------------
# Mapping inversion


@dataclass(frozen=True)
class InversionBounds:
    depth: int = 3
    max_candidates: int = 10 ** 6


def invert_mapping(f_map: Mapping, bounds: InversionBounds = InversionBounds(),
                   limits: SaturationLimits = DEFAULT_LIMITS) -> Optional[Mapping]:
    """Exhaustive search for a two-sided inverse mapping.

    Returns None when the (finite) candidate space contains no inverse;
    raises ResourceLimit when the space was truncated by the bounds, so
    absence cannot be concluded.
    """
    src, tgt = f_map.source, f_map.target
    caps = PathCaps(max_depth=bounds.depth, max_paths=bounds.max_candidates)
    id_src = identity_mapping(src)
    id_tgt = identity_mapping(tgt)
    truncated = False
    count = 0
    for images in itertools.product(src.entities, repeat=len(tgt.entities)):
        ent = dict(zip(tgt.entities, images))
        candidate_terms: list[list[Term]] = []
        feasible = True
        for f in tgt.symbols:
            frm = ent[f.arg_sorts[0]]
            to = ent[f.out_sort] if f.out_sort.is_entity else f.out_sort
            ps = enumerate_paths(src, frm, to, caps, limits)
            truncated = truncated or ps.truncated
            if not ps.terms:
                feasible = False
                break
            candidate_terms.append(ps.terms)
        if not feasible:
            continue
        for combo in itertools.product(*candidate_terms):
            count += 1
            if count > bounds.max_candidates:
                raise ResourceLimit("inversion search exceeded the candidate cap")
            g_map = Mapping(f"{f_map.name}_inv", tgt, src, ent,
                            dict(zip(tgt.symbols, combo)))
            if validate_mapping(g_map, limits):
                continue
            try:
                if mappings_equal(compose_mappings(f_map, g_map, limits), id_src, limits) and \
                        mappings_equal(compose_mappings(g_map, f_map, limits), id_tgt, limits):
                    return g_map
            except SchemaMismatch:
                continue
    if truncated:
        raise ResourceLimit("inversion search space truncated by depth bound")
    return None
