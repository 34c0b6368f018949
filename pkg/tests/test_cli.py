import csv
import io
import json
import math

import pytest

from yblab import cli
from yblab.verify import str_campaign
from yblab.weights import EllipticModel


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_specfun_eval_prints_zero(capsys):
    code, out, _ = run(["specfun-eval", "--fn", "theta1", "--z", "0", "--q", "0.3"], capsys)
    assert code == 0 and out.strip() == "0"


def test_specfun_eval_complex(capsys):
    code, out, _ = run(["specfun-eval", "--fn", "log_gamma", "--z", "1+1i"], capsys)
    assert code == 0
    assert complex(out.strip()) == pytest.approx(complex(-0.6509231993018563, -0.3016403204675332), rel=1e-13)


def test_specfun_eval_missing_argument(capsys):
    code, _, err = run(["specfun-eval", "--fn", "theta1", "--z", "0.2"], capsys)
    assert code == 2 and "q" in err


def test_verify_str_report(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, _ = run(["verify-str", "--model", "elliptic", "--p", "0.3", "--q", "0.5",
                      "--count", "3", "--seed", "2", "--out", str(out)], capsys)
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["passed"] is True and len(rep["results"]) == 3
    assert [r["id"] for r in rep["results"]] == [0, 1, 2]
    cfg = rep["config"]
    assert cfg["seed"] == 2 and cfg["tol"] == 1e-8 and cfg["model"] == "elliptic"


def test_json_round_trip_is_bit_exact(tmp_path, capsys):
    out = tmp_path / "r.json"
    run(["verify-str", "--model", "elliptic", "--p", "0.3", "--q", "0.5",
         "--count", "2", "--seed", "5", "--out", str(out)], capsys)
    rep = json.loads(out.read_text())
    direct = str_campaign(EllipticModel.from_nomes(0.3, 0.5), 2, 1e-8, seed=5)
    for item, r in zip(rep["results"], direct):
        assert item["rel_residual"] == r.rel_residual
        assert item["lhs"] == r.lhs and item["rhs"] == r.rhs


def test_same_seed_byte_identical(tmp_path, capsys):
    # the output path is part of the embedded config, so reuse it
    out = tmp_path / "r.json"
    args = ["verify-str", "--model", "hyperbolic", "--b", "1.3", "--count", "2", "--seed", "11", "--out", str(out)]
    run(args, capsys)
    first = out.read_bytes()
    run(args, capsys)
    assert out.read_bytes() == first


def test_csv_summary(tmp_path, capsys):
    out = tmp_path / "r.csv"
    code, _, _ = run(["verify-str", "--model", "elliptic", "--count", "1", "--format", "csv",
                      "--out", str(out)], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert rows[0] == ["id", "lhs", "rhs", "rel_residual", "passed"]
    assert len(rows) == 2 and rows[1][4] == "true"


def test_csv_numbers_have_17_digits():
    text = cli.csv_summary([{"lhs": 1 / 3, "rhs": 1.0, "rel_residual": 2 / 3, "passed": False}])
    row = list(csv.reader(io.StringIO(text)))[1]
    assert row[1] == "0.33333333333333331" and row[4] == "false"
    assert float(row[1]) == 1 / 3


def test_mixed_results_fail(capsys):
    code, _, _ = run(["verify-inversion", "--model", "gamma", "--count", "20", "--tol", "1e-30"], capsys)
    assert code == 1


def test_unattainable_tolerance_exit_1(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, _ = run(["verify-str", "--model", "gamma", "--tol", "1e-30", "--count", "1",
                      "--r-expected", "2", "--out", str(out)], capsys)
    assert code == 1
    rep = json.loads(out.read_text())
    assert all("BudgetExhausted" in r["note"] for r in rep["results"])


def test_config_errors(tmp_path, capsys):
    code, _, err = run(["verify-str", "--model", "potts"], capsys)
    assert code == 2 and "model" in err
    bad = tmp_path / "c.json"
    bad.write_text(json.dumps({"model": "elliptic", "colour": 3}))
    code, _, err = run(["verify-str", "--config", str(bad)], capsys)
    assert code == 2 and "colour" in err
    code, _, err = run(["verify-str", "--model", "gamma", "--beta", "0.5,0.5"], capsys)
    assert code == 2


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"model": "hyperbolic", "b": 1.3, "count": 5, "seed": 3}))
    out = tmp_path / "r.json"
    code, _, _ = run(["verify-str", "--config", str(cfg), "--count", "1", "--out", str(out)], capsys)
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["config"]["model"] == "hyperbolic" and rep["config"]["count"] == 1
    assert rep["config"]["seed"] == 3 and len(rep["results"]) == 1


def test_threads_env(monkeypatch, capsys, tmp_path):
    monkeypatch.setenv("YBLAB_THREADS", "zero")
    code, _, err = run(["verify-str", "--model", "elliptic", "--count", "1"], capsys)
    assert code == 2 and "YBLAB_THREADS" in err
    monkeypatch.setenv("YBLAB_THREADS", "3")
    a = tmp_path / "a.json"
    assert run(["verify-str", "--model", "elliptic", "--count", "3", "--out", str(a)], capsys)[0] == 0
    monkeypatch.setenv("YBLAB_THREADS", "1")
    b = tmp_path / "b.json"
    run(["verify-str", "--model", "elliptic", "--count", "3", "--out", str(b)], capsys)
    ja, jb = json.loads(a.read_text()), json.loads(b.read_text())
    assert ja["results"] == jb["results"]


def test_io_error_exit_2(capsys, tmp_path):
    target = tmp_path / "taken"
    target.mkdir()
    code, _, err = run(["verify-str", "--model", "elliptic", "--count", "1", "--out", str(target)], capsys)
    assert code == 2 and "I/O" in err
    assert [p.name for p in tmp_path.iterdir()] == ["taken"]


def test_output_directories_are_created(capsys, tmp_path):
    out = tmp_path / "new" / "r.json"
    assert run(["verify-str", "--model", "elliptic", "--count", "1", "--out", str(out)], capsys)[0] == 0
    assert json.loads(out.read_text())["passed"] is True


def test_verify_limit_both_kinds(capsys):
    for kind in ("hyperbolic", "strong"):
        code, out, _ = run(["verify-limit", "--kind", kind], capsys)
        assert code == 0
        assert json.loads(out)["passed"] is True


def test_verify_limit_printed_forms_fail(capsys):
    assert run(["verify-limit", "--kind", "strong", "--form", "printed"], capsys)[0] == 1
    assert run(["verify-limit", "--kind", "hyperbolic", "--form", "printed"], capsys)[0] == 1


def test_verify_inversion_pointwise(capsys):
    code, out, _ = run(["verify-inversion", "--model", "hyperbolic", "--b", "1.3", "--count", "30"], capsys)
    assert code == 0 and len(json.loads(out)["results"]) == 30


def test_weak_inversion_needs_elliptic(capsys):
    code, _, err = run(["verify-inversion", "--mode", "weak", "--model", "gamma"], capsys)
    assert code == 2 and "elliptic" in err


def test_lattice_exact(capsys):
    code, out, _ = run(["lattice-exact", "--model", "elliptic", "--rows", "3", "--cols", "4"], capsys)
    assert code == 0
    item = json.loads(out)["results"][0]
    assert item["method"] == "Exact" and item["internal_sites"] == 2 and math.isfinite(item["log_z"])


def test_lattice_mc_outputs(tmp_path, capsys):
    out, per = tmp_path / "mc.json", tmp_path / "mc.csv"
    code, _, _ = run(["lattice-mc", "--model", "gamma", "--rows", "3", "--cols", "3", "--sweeps", "80",
                      "--burn-in", "20", "--chains", "2", "--n-step-prob", "0.5", "--x-step", "0.6",
                      "--seed", "4", "--out", str(out), "--csv", str(per)], capsys)
    assert code in (0, 1)
    rep = json.loads(out.read_text())
    assert rep["config"]["sweeps"] == 80 and rep["config"]["seed"] == 4
    rows = list(csv.reader(io.StringIO(per.read_text())))
    assert rows[0][0] == "sweep" and len(rows) == 61
    assert code == (0 if not rep["results"][0]["warnings"] else 1)


def test_lattice_mc_rejects_elliptic(capsys):
    code, _, err = run(["lattice-mc", "--model", "elliptic"], capsys)
    assert code == 2


def test_defaults_match_acceptance_values():
    assert cli.STR_DEFAULTS == {
        "gamma": {"count": 50, "tol": 1e-6},
        "elliptic": {"count": 20, "tol": 1e-8},
        "hyperbolic": {"count": 20, "tol": 1e-6},
    }
    assert cli.POINTWISE_DRAWS == 1000 and cli.POINTWISE_TOL == 1e-9
    assert cli.WEAK_TOL == 1e-3 and len(cli.WEAK_POINTS) == 5
    assert cli.HYPERBOLIC_LIMIT_EPS == (0.2, 0.1, 0.05) and cli.HYPERBOLIC_LIMIT_TOL == 0.01
    assert cli.STRONG_LIMIT_DELTA == (0.3, 0.2, 0.1)
    assert len(cli.HYPERBOLIC_LIMIT_PROBES) == 3 and len(cli.STRONG_LIMIT_PROBES) == 3


def test_emit_report_refuses_empty():
    with pytest.raises(cli.ConfigError):
        cli.emit_report({"results": []}, None, "json")


def test_dumps_is_deterministic_and_lossless():
    obj = {"b": [0.1, float("nan"), 1e-300], "a": complex(1, -2), "c": True}
    text = cli.dumps(obj)
    assert text == cli.dumps(dict(reversed(list(obj.items()))))
    back = json.loads(text)
    assert back["b"][0] == 0.1 and math.isnan(back["b"][1]) and back["a"] == {"re": 1.0, "im": -2.0}
