"""End-to-end runs of the catq command line."""

import json

import pytest

from catq.cli import main

from test_dsl import EXAMPLE

COLLIDING = """\
typeside Ty = literal { }
schema C = literal : Ty {
    entities E
    attributes age : E -> Int
}
instance B = literal : C {
    generators a : E
    equations age(a) = 20  age(a) = 30
}
"""

CYCLIC = """\
typeside Ty = literal { }
schema L = literal : Ty {
    entities E
    foreign_keys nxt : E -> E
}
instance W = literal : L { generators a : E }
"""


@pytest.fixture()
def example_file(tmp_path):
    p = tmp_path / "example.catq"
    p.write_text(EXAMPLE, encoding="utf-8")
    return str(p)


def write(tmp_path, text, name="prog.catq"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


# ---------------------------------------------------------------------------
# Exit codes


def test_check_success(example_file, capsys):
    assert main(["check", example_file]) == 0


def test_check_empty_file_succeeds(tmp_path):
    assert main(["check", write(tmp_path, "")]) == 0


def test_syntax_error_exits_1(tmp_path, capsys):
    path = write(tmp_path, "mapping F = literal : S -> T { entities N1 -> }")
    assert main(["check", path]) == 1
    assert "error" in capsys.readouterr().err


def test_missing_file_exits_1(tmp_path, capsys):
    with pytest.raises(SystemExit) as e:
        main(["check", str(tmp_path / "nope.catq")])
    assert e.value.code == 1


def test_resource_limit_exits_2(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("CATQ_MAX_CLASSES", "50")
    assert main(["check", write(tmp_path, CYCLIC)]) == 2


def test_bad_env_var_exits_1(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("CATQ_MAX_CLASSES", "lots")
    with pytest.raises(SystemExit) as e:
        main(["check", write(tmp_path, CYCLIC)])
    assert e.value.code == 1


def test_inconsistent_instance_exits_3(tmp_path, capsys):
    assert main(["check", write(tmp_path, COLLIDING)]) == 3
    assert "Collision(20, 30) at sort Int" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# eval


def test_eval_renders_the_join(example_file, capsys):
    assert main(["eval", example_file, "--show", "J"]) == 0
    out = capsys.readouterr().out
    assert "# instance J" in out
    assert "| ID | name | salary | age |" in out
    for who, pay, age in (("Alice", "100", "20"), ("Bob", "250", "20"),
                          ("Sue", "300", "30")):
        assert f"| {who} | {pay} | {age} |" in out
    # directives run as part of eval
    assert "check I: consistent" in out
    assert "invert F: no inverse exists within the search bounds" in out
    assert "match S T (validated: True):" in out


def test_eval_unknown_instance(example_file, capsys):
    assert main(["eval", example_file, "--show", "Zed"]) == 1


def test_eval_json_format(example_file, capsys):
    assert main(["eval", example_file, "--show", "J", "--format", "json"]) == 0
    out = capsys.readouterr().out
    payload = out.split("# instance J\n", 1)[1].rsplit("check I", 1)[0]
    blob = json.loads(payload)
    assert {r["age"] for r in blob["entities"]["N"]} == {"20", "30"}


def test_eval_is_deterministic(example_file, capsys):
    main(["eval", example_file])
    first = capsys.readouterr().out
    main(["eval", example_file])
    assert capsys.readouterr().out == first


# ---------------------------------------------------------------------------
# match / invert / export


def test_match_command(example_file, capsys):
    assert main(["match", example_file, "--source", "S", "--target", "T"]) == 0
    out = capsys.readouterr().out
    assert "mapping" in out and "entity N1 -> N" in out


def test_match_span_command(example_file, capsys):
    assert main(["match", example_file, "--source", "S", "--target", "T",
                 "--span", "--cutoff", "0.4"]) == 0
    out = capsys.readouterr().out
    assert "match span S T" in out


def test_match_unknown_schema(example_file, capsys):
    assert main(["match", example_file, "--source", "S", "--target", "Zed"]) == 1


def test_invert_finds_renaming_inverse(tmp_path, capsys):
    text = EXAMPLE + """
schema S2 = literal : Ty {
    entities
        M1 M2
    foreign_keys
        g : M1 -> M2
    attributes
        who : M1 -> String
        pay : M1 -> Int
        years : M2 -> Int
}

mapping R = literal : S -> S2 {
    entities
        N1 -> M1
        N2 -> M2
    foreign_keys
        f -> lambda x:M1. g(x)
    attributes
        name -> lambda x:M1. who(x)
        salary -> lambda x:M1. pay(x)
        age -> lambda x:M2. years(x)
}
"""
    path = write(tmp_path, text)
    assert main(["invert", path, "--mapping", "R"]) == 0
    out = capsys.readouterr().out
    assert "invert R:" in out and "entity M1 -> N1" in out
    assert main(["invert", path, "--mapping", "F", "--depth", "2"]) == 0
    assert "no inverse exists" in capsys.readouterr().out


def test_export_writes_files(example_file, tmp_path, capsys):
    out_dir = tmp_path / "out"
    assert main(["export", example_file, "--format", "csv",
                 "--out", str(out_dir)]) == 0
    files = sorted(p.name for p in out_dir.iterdir())
    assert files == ["I.csv", "J.csv", "K.csv"]
    assert "Alice,100,20" in (out_dir / "J.csv").read_text(encoding="utf-8")
