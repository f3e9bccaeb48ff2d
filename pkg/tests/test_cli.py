from __future__ import annotations

import json
from pathlib import Path

import pytest

from ivecdb.cli import main

from test_storage import (UNIV_A_CSV, UNIV_B_CSV, UNIV_C_CS_CSV, UNIV_C_ECE_CSV,
                          _catalog_doc)


@pytest.fixture()
def home(tmp_path) -> Path:
    catalog = tmp_path / "catalog.json"
    catalog.write_text(json.dumps(_catalog_doc(), indent=2), encoding="utf-8")
    data = {
        "univ_A": {"pay-info": ("a.csv", UNIV_A_CSV)},
        "univ_B": {"pay-info": ("b.csv", UNIV_B_CSV)},
        "univ_C": {"CS": ("c1.csv", UNIV_C_CS_CSV), "ece": ("c2.csv", UNIV_C_ECE_CSV)},
    }
    home_dir = tmp_path / "home"
    for db, rels in data.items():
        args = ["--home", str(home_dir), "ingest", "--catalog", str(catalog), "--db", db,
                "--data"]
        for rel, (fname, text) in rels.items():
            path = tmp_path / fname
            path.write_text(text, encoding="utf-8")
            args.append(f"{rel}={path}")
        assert main(args) == 0
    fed = {"members": [
        {"name": db, "catalog": f"home/{db}/catalog.json", "store": f"home/{db}/vector.csv"}
        for db in data]}
    (tmp_path / "fed.json").write_text(json.dumps(fed), encoding="utf-8")
    return tmp_path


def _lines(capsys) -> list[str]:
    return [l for l in capsys.readouterr().out.splitlines() if l]


def test_matter_prints_original_table(home, capsys):
    assert main(["--home", str(home / "home"), "matter", "--db", "univ_A", "pay-info"]) == 0
    lines = _lines(capsys)
    assert lines[0] == "category,dept,avg-sal"
    assert len(lines) == 5
    assert 'Secretary,CS,"35,000"' in lines


def test_view_subcommand(home, capsys):
    assert main(["--home", str(home / "home"), "view", "--db", "univ_A",
                 "--columns", "pay-info.category,pay-info.avg-sal"]) == 0
    lines = _lines(capsys)
    assert lines[0] == "category,avg-sal"
    assert len(lines) == 5


def test_query_filters(home, capsys):
    assert main(["--home", str(home / "home"), "query", "--db", "univ_A",
                 "pay-info WHERE dept = CS"]) == 0
    lines = _lines(capsys)
    assert len(lines) == 4  # header + three CS rows


def test_query_explain_prints_rewritten_term(home, capsys):
    assert main(["--home", str(home / "home"), "query", "--db", "univ_A",
                 "--explain", "pay-info"]) == 0
    captured = capsys.readouterr()
    assert "univ_A WHERE" in captured.err
    assert "r-name = 'pay-info'" in captured.err


def test_rewrite_subcommand(home, capsys):
    assert main(["--home", str(home / "home"), "rewrite", "--db", "univ_A",
                 "pay-info[dept]"]) == 0
    out = capsys.readouterr().out
    assert "a-name = 'dept'" in out
    assert "[dept]" in out


def test_query_json_format(home, capsys):
    assert main(["--home", str(home / "home"), "query", "--db", "univ_A",
                 "--format", "json", "pay-info[dept]"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["columns"][0]["relation"] == "pay-info"
    assert sorted(r[0] for r in doc["rows"]) == ["CS", "Math"]


def test_meta_delta(home, capsys):
    assert main(["meta", "delta", "--fed", str(home / "fed.json")]) == 0
    assert _lines(capsys) == ["db-name", "univ_A", "univ_B", "univ_C"]


def test_meta_rho_with_dbs(home, capsys):
    assert main(["meta", "rho", "--fed", str(home / "fed.json"), "--dbs", "univ_C"]) == 0
    assert _lines(capsys) == ["db-name,r-name", "univ_C,CS", "univ_C,ece"]


def test_meta_alpha(home, capsys):
    assert main(["meta", "alpha", "--fed", str(home / "fed.json"),
                 "--rels", "univ_C.CS"]) == 0
    assert _lines(capsys) == ["db-name,r-name,a-name",
                              "univ_C,CS,avg-sal", "univ_C,CS,category"]


def test_meta_gamma_reproduces_golden_table(home, capsys):
    assert main(["meta", "gamma", "--fed", str(home / "fed.json"),
                 "--pattern", "_->Secretary,_->_"]) == 0
    lines = _lines(capsys)
    assert len(lines) == 6
    body = set(lines[1:])
    assert body == {
        'univ_A,pay-info,category,Secretary,dept,CS',
        'univ_A,pay-info,category,Secretary,category,Secretary',
        'univ_A,pay-info,category,Secretary,avg-sal,"35,000"',
        'univ_C,ece,category,Secretary,category,Secretary',
        'univ_C,ece,category,Secretary,avg-sal,"30,000"',
    }


def test_find_token(home, capsys):
    assert main(["find-token", "--fed", str(home / "fed.json"), "Secretary"]) == 0
    assert _lines(capsys) == ["db-name,r-name", "univ_A,pay-info", "univ_C,ece"]


def test_njoin(home, capsys):
    assert main(["njoin", "--fed", str(home / "fed.json"), "--db", "univ_C",
                 "CS", "ece"]) == 0
    assert _lines(capsys) == ["category,avg-sal"]


def test_slog_run(home, tmp_path, capsys):
    program = home / "q4.slog"
    program.write_text("ans(D, R) :- D::R[T1: A -> 'Secretary'].\n", encoding="utf-8")
    assert main(["slog", "run", str(program), "--query", "ans",
                 "--fed", str(home / "fed.json")]) == 0
    assert _lines(capsys) == ["D,R", "univ_A,pay-info", "univ_C,ece"]


def test_fed_check_ok(home, capsys):
    assert main(["fed", "check", "--fed", str(home / "fed.json")]) == 0
    assert set(_lines(capsys)) == {"univ_A: ok", "univ_B: ok", "univ_C: ok"}


def test_fed_check_detects_corruption(home, capsys):
    store = home / "home" / "univ_A" / "vector.csv"
    text = store.read_text(encoding="utf-8")
    store.write_text(text.replace("Secretary", "Sabotage", 1), encoding="utf-8")
    assert main(["fed", "check", "--fed", str(home / "fed.json")]) == 3
    assert "univ_A: FAILED" in capsys.readouterr().out


def test_exit_code_user_error_on_bad_term(home, capsys):
    assert main(["--home", str(home / "home"), "query", "--db", "univ_A",
                 "pay-info WHERE"]) == 2
    assert "error:" in capsys.readouterr().err


def test_exit_code_user_error_on_unknown_relation(home, capsys):
    assert main(["--home", str(home / "home"), "query", "--db", "univ_A", "ghost"]) == 2


def test_exit_code_data_error_on_bad_ingest(home, tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("category,dept,avg-sal\n,CS,\n", encoding="utf-8")
    code = main(["--home", str(tmp_path / "h2"), "ingest",
                 "--catalog", str(home / "catalog.json"), "--db", "univ_A",
                 "--data", f"pay-info={bad}"])
    assert code == 3
    assert "NOT NULL" in capsys.readouterr().err


def test_ivecdb_home_env_variable(home, capsys, monkeypatch):
    monkeypatch.setenv("IVECDB_HOME", str(home / "home"))
    assert main(["matter", "--db", "univ_C", "ece"]) == 0
    assert len(_lines(capsys)) == 3


def test_run_query_dispatch(home):
    from ivecdb import storage
    from ivecdb.cli import _load_federation, run_query

    schema, store = storage.load_database(home / "home", "univ_A")
    doc = run_query("algebra", "pay-info WHERE dept = CS", db=(schema, store))
    assert len(doc.relation.rows) == 3
    assert doc.provenance == (("pay-info", "category"), ("pay-info", "dept"),
                              ("pay-info", "avg-sal"))
    assert doc.to_csv().splitlines()[0] == "category,dept,avg-sal"

    fed = _load_federation(str(home / "fed.json"))
    assert len(run_query("meta", "delta", fed=fed).relation.rows) == 3
    gamma = run_query("meta", "gamma _->Secretary,_->_", fed=fed)
    assert len(gamma.relation.rows) == 5
    slog = run_query("slog", ("ans(D, R) :- D::R[T1: A -> 'Secretary'].", "ans"), fed=fed)
    assert len(slog.relation.rows) == 2
    assert "rows" in gamma.to_json()
