"""Schema mappings, composition, equality, and instance morphisms."""

import pytest

from catq import (
    App,
    Equation,
    INT,
    InstancePresentation,
    Mapping,
    Schema,
    SchemaMismatch,
    Var,
    build_term_model,
    builtin_typeside,
    compose_mappings,
    enumerate_morphisms,
    generator,
    ground_eq,
    identity_mapping,
    identity_morphism,
    int_literal,
    mappings_equal,
    morphism_from_genmap,
    validate_mapping,
)
from catq.errors import NoMorphismExists
from catq.mappings import apply_mapping_term, open_terms_equal, render_open_term

from conftest import N, N1, N2, ap, attr, employees_instance, fkey


def test_valid_mapping_passes(mapping_f, mapping_r, mapping_f0):
    assert validate_mapping(mapping_f) == []
    assert validate_mapping(mapping_r) == []
    assert validate_mapping(mapping_f0) == []


def test_missing_and_ill_sorted_images(schema_s, schema_t):
    bad = Mapping("bad", schema_s, schema_t, {N1: N, N2: N}, {})
    assert {"MissingImage"} == {i.code for i in validate_mapping(bad)}
    x = Var("x", N)
    wrong = Mapping("wrong", schema_s, schema_t, {N1: N, N2: N}, {
        schema_s.symbol_named("f"): x,
        schema_s.symbol_named("name"): ap(schema_t.symbol_named("age"), x),  # Int, not String
        schema_s.symbol_named("salary"): ap(schema_t.symbol_named("salary"), x),
        schema_s.symbol_named("age"): ap(schema_t.symbol_named("age"), x),
    })
    assert "SortMismatch" in {i.code for i in validate_mapping(wrong)}


def test_constraint_preservation_is_checked(schema_s, schema_t):
    # source demands age(f(v)) = 30 for every v; the target proves no such law
    x_src = Var("v", N1)
    f, age = schema_s.symbol_named("f"), schema_s.symbol_named("age")
    constrained = Schema("Sc", schema_s.typeside, list(schema_s.entities),
                         list(schema_s.attributes), list(schema_s.foreign_keys),
                         [Equation((x_src,), App(age, (App(f, (x_src,)),)), int_literal(30))])
    x = Var("x", N)
    cand = Mapping("c", constrained, schema_t, {N1: N, N2: N}, {
        f: x,
        constrained.symbol_named("name"): ap(schema_t.symbol_named("name"), x),
        constrained.symbol_named("salary"): ap(schema_t.symbol_named("salary"), x),
        age: ap(schema_t.symbol_named("age"), x),
    })
    assert "EqualityNotPreserved" in {i.code for i in validate_mapping(cand)}


def test_open_terms_equal_uses_schema_constraints():
    ts = builtin_typeside()
    from catq.terms import ENTITY, Sort
    e = Sort("E", ENTITY)
    nxt = fkey("nxt", e, e)
    x = Var("x", e)
    involutive = Schema("C2", ts, [e], [], [nxt],
                        [Equation((x,), App(nxt, (App(nxt, (x,)),)), x)])
    assert open_terms_equal(involutive, e, App(nxt, (App(nxt, (x,)),)), x)
    assert not open_terms_equal(involutive, e, App(nxt, (x,)), x)


def test_compose_and_identity(mapping_f, mapping_r, schema_s):
    ident = identity_mapping(schema_s)
    assert mappings_equal(compose_mappings(ident, mapping_f), mapping_f)
    with pytest.raises(SchemaMismatch):
        compose_mappings(mapping_f, mapping_r)  # T does not match S


def test_composition_translates_images(mapping_r, mapping_f, schema_s, schema_s2, schema_t):
    # S2 -> S undoes the renaming; composing back yields the identity on S
    y1, y2 = Var("y", N1), Var("y", N2)
    back = Mapping("back", schema_s2, schema_s,
                   {schema_s2.entity_named("M1"): N1, schema_s2.entity_named("M2"): N2}, {
                       schema_s2.symbol_named("g"): ap(schema_s.symbol_named("f"), y1),
                       schema_s2.symbol_named("who"): ap(schema_s.symbol_named("name"), y1),
                       schema_s2.symbol_named("pay"): ap(schema_s.symbol_named("salary"), y1),
                       schema_s2.symbol_named("years"): ap(schema_s.symbol_named("age"), y2),
                   })
    assert validate_mapping(back) == []
    assert mappings_equal(compose_mappings(mapping_r, back), identity_mapping(schema_s))


def test_mappings_equal_modulo_provability(mapping_f, schema_s, schema_t):
    # a syntactically different but provably equal image is still equal
    same = Mapping("F2", mapping_f.source, mapping_f.target,
                   dict(mapping_f.entity_map), dict(mapping_f.symbol_map))
    assert mappings_equal(mapping_f, same)
    x = Var("z", N)
    same.symbol_map = dict(same.symbol_map)
    same.symbol_map[schema_s.symbol_named("f")] = x  # alpha-renamed variable
    assert mappings_equal(mapping_f, same)


def test_apply_mapping_term(mapping_f, schema_s, schema_t):
    v = Var("v", N1)
    t = App(schema_s.symbol_named("age"), (App(schema_s.symbol_named("f"), (v,)),))
    out = apply_mapping_term(mapping_f, t)
    assert out == App(schema_t.symbol_named("age"), (Var("v", N),))
    assert render_open_term(out) == "lambda v:N. age(v)"


# ---------------------------------------------------------------------------
# Instance morphisms


def test_identity_morphism_and_violations(model_i):
    h = identity_morphism(model_i)
    assert h.violations() == []
    assert h.is_bijective() and h.is_identity()


def test_morphism_from_genmap_roundtrip(schema_s, model_i):
    other = build_term_model(employees_instance(schema_s, "I2"))
    genmap = {g2: model_i.class_of(g1)
              for g1, g2 in zip(model_i.instance.generators, other.instance.generators)}
    h = morphism_from_genmap(other, model_i, genmap)
    assert h.violations() == [] and h.is_bijective()


def test_morphism_must_fix_literals(schema_s):
    # sending the Alice row onto the Bob row would move literals: no morphism
    from catq import string_literal
    a = InstancePresentation("A", schema_s, [generator("a", N1)], [
        ground_eq(ap(schema_s.symbol_named("name"), generator("a", N1)),
                  string_literal("Alice"))])
    b = InstancePresentation("B", schema_s, [generator("b", N1)], [
        ground_eq(ap(schema_s.symbol_named("name"), generator("b", N1)),
                  string_literal("Bob"))])
    ma, mb = build_term_model(a), build_term_model(b)
    assert enumerate_morphisms(ma, mb) == []
    with pytest.raises(NoMorphismExists):
        morphism_from_genmap(ma, mb, {a.generators[0]: mb.class_of(b.generators[0])})


def test_enumerate_morphisms_counts(schema_s):
    # two free rows can each land on either of two free rows: 4 morphisms
    free2 = InstancePresentation("free2", schema_s,
                                 [generator("a", N1), generator("b", N1)], [])
    m = build_term_model(free2)
    homs = enumerate_morphisms(m, m)
    assert len(homs) == 4
    assert len(set(homs)) == 4
    assert sum(1 for h in homs if h.is_bijective()) == 2
