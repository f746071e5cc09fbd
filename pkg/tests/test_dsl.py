"""The .catq frontend: lexer, parser, elaborator, and renderers."""

import textwrap

import pytest

from catq import (
    build_term_model,
    elaborate,
    parse,
    pretty_print,
    render_mapping,
    render_model,
)
from catq.parser import (
    DerivedDecl,
    Directive,
    InstanceDecl,
    MappingDecl,
    SchemaDecl,
    TypesideDecl,
)

from conftest import N, N1


EXAMPLE = textwrap.dedent("""\
    // running example
    typeside Ty = literal {
    }

    schema S = literal : Ty {
        entities
            N1 N2
        foreign_keys
            f : N1 -> N2
        attributes
            name : N1 -> String
            salary : N1 -> Int
            age : N2 -> Int
    }

    schema T = literal : Ty {
        entities
            N
        attributes
            name : N -> String
            salary : N -> Int
            age : N -> Int
    }

    instance I = literal : S {
        generators
            e1 e2 e3 : N1
        equations
            name(e1) = Alice  salary(e1) = 100  age(f(e1)) = 20
            name(e2) = Bob    salary(e2) = 250  age(f(e2)) = 20
            name(e3) = Sue    salary(e3) = 300  age(f(e3)) = 30
    }

    mapping F = literal : S -> T {
        entities
            N1 -> N
            N2 -> N
        foreign_keys
            f -> lambda x:N. x
        attributes
            name -> lambda x:N. name(x)
            salary -> lambda x:N. salary(x)
            age -> lambda x:N. age(x)
    }

    instance J = sigma F I
    instance K = delta F J

    check I
    match S T
    invert F depth 2
    """)


def parse_ok(text):
    prog, diags = parse(text)
    assert diags == [], diags
    return prog


# ---------------------------------------------------------------------------
# Parsing


def test_parse_example_program_shape():
    prog = parse_ok(EXAMPLE)
    kinds = [type(d).__name__ for d in prog.decls]
    assert kinds == ["TypesideDecl", "SchemaDecl", "SchemaDecl", "InstanceDecl",
                     "MappingDecl", "DerivedDecl", "DerivedDecl",
                     "Directive", "Directive", "Directive"]
    sch = prog.decls[1]
    assert sch.name == "S" and sch.entities == ["N1", "N2"]
    assert list(sch.foreign_keys) == [(["f"], "N1", "N2")]
    inst = prog.decls[3]
    assert inst.schema_ref == "S" and len(inst.equations) == 9
    mp = prog.decls[4]
    assert mp.source_ref == "S" and mp.target_ref == "T"
    der = prog.decls[5]
    assert der.op == "sigma" and der.args == ["F", "I"]
    inv = prog.decls[9]
    assert inv.op == "invert" and inv.args == ["F"] and inv.depth == 2


def test_parse_recovers_with_spans():
    bad = "mapping F = literal : S -> T { entities N1 -> }\nschema Q = literal : Ty { }"
    prog, diags = parse(bad)
    assert diags, "expected a diagnostic for the dangling arrow"
    d = diags[0]
    assert d.span is not None and d.span.line == 1
    # recovery still yields the following declaration
    assert any(isinstance(x, SchemaDecl) and x.name == "Q" for x in prog.decls)


def test_parse_rejects_external_bindings():
    text = 'typeside Ty = literal { java_types s = "java.lang.String" }'
    prog, diags = parse(text)
    assert any("external bindings unsupported; use builtin String/Int" in d.message
               for d in diags)


def test_parse_empty_blocks_and_comments():
    prog = parse_ok("// nothing\ntypeside Ty = literal { }\nschema S = literal : Ty { }\n")
    assert len(prog.decls) == 2
    assert prog.decls[1].entities == []


def test_pretty_print_round_trip():
    prog = parse_ok(EXAMPLE)
    once = pretty_print(prog)
    prog2, diags = parse(once)
    assert diags == []
    assert pretty_print(prog2) == once  # fixed point


# ---------------------------------------------------------------------------
# Elaboration


@pytest.fixture(scope="module")
def example_env():
    env, diags = elaborate(parse_ok(EXAMPLE))
    assert diags == [], diags
    return env


def test_elaborate_builds_environment(example_env):
    env = example_env
    assert set(env.schemas) == {"S", "T"}
    assert set(env.instances) == {"I", "J", "K"}
    assert set(env.mappings) == {"F"}
    assert [d.op for d in env.directives] == ["check", "match", "invert"]


def test_elaborated_literals_and_generators(example_env):
    from catq import App, string_literal
    m = example_env.models["I"]
    sch = example_env.schemas["S"]
    assert len(m.carrier(sch.entity_named("N1"))) == 3
    g = example_env.instances["I"].generator_named("e1")
    assert m.decide_equal(App(sch.symbol_named("name"), (App(g),)),
                          string_literal("Alice"))


def test_derived_instances_match_library_calls(example_env):
    mj = example_env.models["J"]
    sch_t = example_env.schemas["T"]
    n = sch_t.entity_named("N")
    rows = sorted(
        tuple(mj.label(mj.op(sch_t.symbol_named(c), cls)) for c in ("name", "salary", "age"))
        for cls in mj.carrier(n))
    assert rows == [("Alice", "100", "20"), ("Bob", "250", "20"), ("Sue", "300", "30")]
    mk = example_env.models["K"]
    sch_s = example_env.schemas["S"]
    assert len(mk.carrier(sch_s.entity_named("N1"))) == 3


def test_elaborate_reports_name_resolution():
    env, diags = elaborate(parse_ok(
        "typeside Ty = literal { }\n"
        "schema S = literal : Ty { entities E }\n"
        "instance I = literal : Missing { }\n"
        "instance J = sigma Nope I\n"))
    codes = {d.code for d in diags}
    assert "NameResolution" in codes


def test_elaborate_flags_unannotated_constraint_variables():
    env, diags = elaborate(parse_ok(
        "typeside Ty = literal { }\n"
        "schema S = literal : Ty {\n"
        "  entities E\n  foreign_keys k : E -> E\n"
        "  equations forall x. k(k(x)) = x\n}\n"))
    assert diags, "expected a diagnostic for the missing sort annotation"


def test_elaborate_resource_limit_is_a_diagnostic():
    from catq import SaturationLimits
    env, diags = elaborate(parse_ok(
        "typeside Ty = literal { }\n"
        "schema L = literal : Ty { entities E  foreign_keys nxt : E -> E }\n"
        "instance W = literal : L { generators a : E }\n"),
        limits=SaturationLimits(max_classes_per_sort=20))
    assert any(d.code == "ResourceLimit" for d in diags)


# ---------------------------------------------------------------------------
# Rendering


def test_render_markdown_table(example_env):
    out = render_model(example_env.models["J"], "markdown")
    assert "## N" in out
    assert "| ID | name | salary | age |" in out
    assert "| Alice | 100 | 20 |" in out.replace("| 1 ", "| ")


def test_render_shows_labeled_nulls(schema_s):
    from catq import InstancePresentation, generator
    inst = InstancePresentation("lonely", schema_s, [generator("e", N1)], [])
    out = render_model(build_term_model(inst), "markdown")
    assert "name(1)" in out and "salary(1)" in out


def test_render_csv_and_json(example_env):
    csv = render_model(example_env.models["J"], "csv")
    assert csv.startswith("# N\nID,name,salary,age\n")
    assert "Alice,100,20" in csv
    import json
    blob = json.loads(render_model(example_env.models["J"], "json"))
    assert blob["schema"] == "T"
    assert {r["name"] for r in blob["entities"]["N"]} == {"Alice", "Bob", "Sue"}
    assert all(set(r) == {"id", "name", "salary", "age"} for r in blob["entities"]["N"])


def test_render_mapping(example_env):
    txt = render_mapping(example_env.mappings["F"])
    assert txt.splitlines()[0] == "mapping F : S -> T"
    assert "  entity N1 -> N" in txt
    assert "  name -> lambda x:N. name(x)" in txt
