import csv
import io
import json
import shutil

import pytest

from magiccert import FORMAT_VERSION, __version__
from magiccert.cli import (
    EXIT_BUDGET,
    EXIT_INCONCLUSIVE,
    EXIT_MISSING,
    EXIT_OK,
    PipelineConfig,
    file_sha256,
    main,
)
from magiccert.projalg import build_R


@pytest.fixture
def run(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("MAGICCERT_OUT", str(tmp_path / "out"))

    def invoke(*argv):
        code = main(list(argv))
        out = capsys.readouterr().out
        return code, out

    return invoke


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    out = capsys.readouterr().out
    assert __version__ in out and f"format {FORMAT_VERSION}" in out


def test_gb_then_automaton(run, tmp_path):
    code, out = run("gb", "--n", "4")
    assert code == EXIT_OK
    summary = json.loads(out)
    assert summary["rule_count"] == 78 and summary["terminated"]
    code, out = run("automaton", "--n", "4", "--count", "50", "--growth", "--dot", str(tmp_path / "a.dot"))
    data = json.loads(out)
    assert code == EXIT_OK
    assert data["states"] == 17 and data["counts"]["cumulative"] == "176851"
    assert data["growth"]["kind"] == "polynomial"
    assert [0, [1, 1], data["transitions"][0][2]] == data["transitions"][0]
    assert (tmp_path / "a.dot").read_text().startswith("digraph")
    report = json.loads((tmp_path / "out" / "report-automaton.json").read_text())
    assert str(tmp_path / "a.dot") in report["artifacts"]
    assert not report["warnings"]


def test_characters(run):
    code, out = run("characters")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == EXIT_OK
    assert rows[0] == ["permutation", "p1", "q1", "p2", "q2", "p3", "q3"]
    assert len(rows) == 25 and len({r[0] for r in rows[1:]}) == 24
    assert all(r[1] == "0" for r in rows[1:])
    code, out = run("characters", "--all")
    assert len(out.strip().splitlines()) == 65


def test_certify(run, tmp_path):
    target = tmp_path / "cert.json"
    code, out = run("certify", "--n", "4", "--m", "10", "--out", str(target))
    assert code == EXIT_OK
    cert = json.loads(target.read_text())
    assert cert == json.loads(out)
    assert cert["verdict"] == "no-separating-polynomial"
    assert cert["columns"] == cert["rank_lower_bound"] == "1771"


def test_certify_with_oracle(run):
    code, out = run("certify", "--m", "4", "--oracle", "--threads", "2")
    assert code == EXIT_OK and json.loads(out)["columns"] == "165"


def test_certify_inconclusive(run, tmp_path):
    model = tmp_path / "R.json"
    model.write_text(json.dumps(build_R().to_json()))
    code, out = run("certify", "--m", "2", "--model", str(model))
    assert code == EXIT_INCONCLUSIVE
    assert json.loads(out)["verdict"] == "inconclusive"


def test_exit_codes(run, tmp_path):
    assert run("certify", "--n", "4", "--m", "8", "--max-memory", "1000")[0] == EXIT_BUDGET
    assert run("certify", "--n", "5", "--m", "2")[0] == EXIT_MISSING
    assert run("certify", "--m", "2", "--model", str(tmp_path / "nope.json"))[0] == EXIT_MISSING
    fresh = str(tmp_path / "empty")
    assert run("automaton", "--n", "4", "--no-build", "--out-dir", fresh)[0] == EXIT_MISSING


def test_usage_errors(run):
    with pytest.raises(SystemExit) as info:
        run("certify", "--m", "-1")
    assert info.value.code == 2


def test_dims(run):
    code, out = run("dims", "--n", "4", "--k", "1", "--l", "1", "--cap", "10")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["m", "normal_words", "bound", "crossed"]
    assert rows[-1] == ["1", "10", "3", "1"]


def test_growth(run):
    code, out = run("growth", "--n", "3")
    assert json.loads(out)["kind"] == "finite"


def test_cache_rebuild_is_identical(run, tmp_path):
    run("automaton", "--n", "4")
    cache = tmp_path / "out" / "cache"
    before = {p.name: file_sha256(p) for p in cache.iterdir()}
    shutil.rmtree(cache)
    run("automaton", "--n", "4")
    after = {p.name: file_sha256(p) for p in cache.iterdir()}
    assert before == after and len(before) == 2


def test_order_changes_cache_key(run, tmp_path):
    order = [[j, i] for i in range(1, 5) for j in range(1, 5)]
    path = tmp_path / "order.json"
    path.write_text(json.dumps(order))
    code, out = run("automaton", "--n", "4", "--order", str(path), "--count", "5")
    assert code == EXIT_OK and json.loads(out)["states"] == 17
    assert len(list((tmp_path / "out" / "cache").iterdir())) == 2


def test_config_round_trip():
    cfg = PipelineConfig(n=5, order=[[1, 1]], m=3, max_memory=10, threads=2, out_dir="x")
    assert PipelineConfig.from_json(json.loads(json.dumps(cfg.to_json()))) == cfg
    with pytest.raises(ValueError):
        PipelineConfig(n=4, order=[[1, 1]]).validate()


def test_check(run):
    code, out = run("check")
    assert code == EXIT_OK, out
    assert out.count("PASS") >= 12 and "FAIL" not in out
