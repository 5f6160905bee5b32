import json
import subprocess
import sys

import pytest

from polyinvar.cli import main
from polyinvar.harness import TrialConfig
from polyinvar.monomials import IndexSet
from polyinvar.polynomial import Polynomial
from polyinvar.solvers import FitResult, PenaltySpec


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj), encoding="utf-8")
    return str(path)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def model(monomials, family="none", terms=(), arity=None):
    return {
        "arity": arity or len(monomials[0]),
        "monomials": monomials,
        "loss": {"g": "identity", "penalty": {"family": family,
                                              "terms": [{"exp": e, "lambda": l} for e, l in terms]}},
    }


QUAD_CSV = "x1,y\n0,0\n1,1\n2,4\n"


def test_fit_ols(tmp_path, capsys):
    data = write(tmp_path, "d.csv", QUAD_CSV)
    spec = write(tmp_path, "m.json", model([[0], [1], [2]]))
    code, out, _ = run(capsys, "fit", data, spec)
    assert code == 0
    res = FitResult.from_json(json.loads(out))
    assert [round(c, 12) + 0.0 for c in res.model.terms.values()] == [0.0, 0.0, 1.0]
    assert res.converged


def test_fit_ridge_matches_oracle(tmp_path, capsys):
    data = write(tmp_path, "d.csv", QUAD_CSV)
    spec = write(tmp_path, "m.json", model([[0], [1], [2]], "ridge", [([2], 1.0)]))
    out_path = tmp_path / "fit.json"
    code, out, _ = run(capsys, "fit", data, spec, "--out", out_path)
    assert code == 0 and out == ""
    coefs = [t["coef"] for t in json.loads(out_path.read_text())["coefficients"]]
    assert coefs == pytest.approx([-0.2, 1.2, 0.4], abs=1e-9)


def test_fit_pretty(tmp_path, capsys):
    data = write(tmp_path, "d.csv", QUAD_CSV)
    spec = write(tmp_path, "m.json", model([[0], [1], [2]]))
    code, out, _ = run(capsys, "fit", data, spec, "--pretty")
    assert code == 0 and "coefficient" in out and "converged=True" in out


@pytest.mark.parametrize("csv_text", ["x1,y\n0,\n", "a,b\n1,2\n", "x1,x2,y\n1,2,3\n"])
def test_fit_malformed_csv(tmp_path, capsys, csv_text):
    data = write(tmp_path, "d.csv", csv_text)
    spec = write(tmp_path, "m.json", model([[0], [1]]))
    code, _, err = run(capsys, "fit", data, spec)
    assert code == 64 and "error" in err


def test_fit_rank_deficient(tmp_path, capsys):
    data = write(tmp_path, "d.csv", "x1,y\n1,1\n1,2\n1,3\n")
    spec = write(tmp_path, "m.json", model([[0], [1], [2]]))
    code, _, err = run(capsys, "fit", data, spec)
    assert code == 2 and "no unique solution" in err


def test_fit_bad_model(tmp_path, capsys):
    data = write(tmp_path, "d.csv", QUAD_CSV)
    for bad in ["{not json", json.dumps({"arity": 1}),
                json.dumps(model([[0], [1]], "ridge", [([2], 1.0)]))]:
        spec = write(tmp_path, "m.json", bad)
        assert run(capsys, "fit", data, spec)[0] == 64
    assert run(capsys, "fit", data, tmp_path / "missing.json")[0] == 64


def test_audit(tmp_path, capsys):
    ok = write(tmp_path, "a.json", model([[0, 0], [1, 0], [0, 1], [1, 1]], "ridge", [([1, 1], 1.0)]))
    code, out, _ = run(capsys, "audit", ok)
    assert code == 0 and json.loads(out)["compliant"] is True

    nongreatest = write(tmp_path, "b.json", model([[0, 0], [1, 0], [0, 1], [1, 1]], "ridge", [([1, 0], 1.0)]))
    code, out, _ = run(capsys, "audit", nongreatest)
    assert code == 1 and json.loads(out)["repairs"]["offending_penalized"] == [[1, 0]]

    notclosed = write(tmp_path, "c.json", model([[0, 0], [1, 1]], "ridge", [([1, 1], 1.0)]))
    code, out, _ = run(capsys, "audit", notclosed)
    assert code == 1 and json.loads(out)["repairs"]["missing_divisors"] == [[0, 1], [1, 0]]


def test_shift(tmp_path, capsys):
    poly = write(tmp_path, "p.json", Polynomial(1, {(2,): 1.0}).to_json())
    code, out, _ = run(capsys, "shift", poly, "--by", "1")
    assert code == 0
    assert Polynomial.from_json(json.loads(out)).terms == {(0,): 1.0, (1,): 2.0, (2,): 1.0}

    code, out, _ = run(capsys, "shift", poly, "--by", "0")
    assert Polynomial.from_json(json.loads(out)) == Polynomial(1, {(2,): 1.0})


def test_shift_round_trip(tmp_path, capsys):
    f = Polynomial(2, {(2, 1): 1.5, (1, 0): -0.25, (0, 0): 3.0})
    p = write(tmp_path, "p.json", f.to_json())
    run(capsys, "shift", p, "--by", "1.5", "-2.25", "--out", tmp_path / "g.json")
    run(capsys, "shift", tmp_path / "g.json", "--by", "-1.5", "2.25", "--out", tmp_path / "h.json")
    h = Polynomial.from_json(json.loads((tmp_path / "h.json").read_text()))
    for m in set(h.terms) | set(f.terms):
        assert abs(h.coef(m) - f.coef(m)) <= 1e-9


def test_shift_dimension_mismatch(tmp_path, capsys):
    poly = write(tmp_path, "p.json", Polynomial(2, {(1, 1): 1.0}).to_json())
    assert run(capsys, "shift", poly, "--by", "1")[0] == 64


def test_greatest_and_closure(tmp_path, capsys):
    spec = write(tmp_path, "m.json", model([[2, 0], [1, 1], [0, 0], [1, 0]]))
    code, out, _ = run(capsys, "greatest", spec)
    assert code == 0 and json.loads(out) == [[1, 1], [2, 0]]
    code, out, _ = run(capsys, "closure", spec)
    assert code == 0 and IndexSet(json.loads(out)) == IndexSet([(0, 0), (0, 1), (1, 0), (1, 1), (2, 0)])


def check_config(penalized, family="ridge", lam=1.0, **kw):
    cfg = TrialConfig(IndexSet([(0,), (1,), (2,)]), PenaltySpec(family, {tuple(penalized): lam}, 1), **kw)
    return cfg.to_json()


def test_check_compliant(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", check_config([2], trials=20))
    code, out, _ = run(capsys, "check", cfg)
    rep = json.loads(out)
    assert code == 0 and rep["verdict"] == "invariant" and rep["mode"] == "invariance"
    assert "trials" not in rep
    code, out, _ = run(capsys, "check", cfg, "--details", "--seed", "4")
    assert code == 0 and len(json.loads(out)["trials"]) == 20


def test_check_counterexample(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", check_config([1], shift_range=(1.0, 5.0), trials=10))
    code, out, _ = run(capsys, "check", cfg, "--mode", "counterexample")
    rep = json.loads(out)
    assert code == 0 and rep["result"] == "violated" and rep["violation"]["rel_discrepancy"] > 1e-3
    # auto mode dispatches to the search as well
    assert run(capsys, "check", cfg)[0] == 0


def test_check_invalid_mode_combinations(tmp_path, capsys):
    compliant = write(tmp_path, "a.json", check_config([2]))
    code, _, err = run(capsys, "check", compliant, "--mode", "counterexample")
    assert code == 64 and "vacuous" in err
    noncompliant = write(tmp_path, "b.json", check_config([1]))
    assert run(capsys, "check", noncompliant, "--mode", "invariance")[0] == 64
    assert run(capsys, "check", compliant, "--mode", "bogus")[0] == 64


def test_check_inconclusive(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", check_config([1], shift_range=(0.0, 0.0), trials=3))
    code, out, _ = run(capsys, "check", cfg)
    assert code == 2 and json.loads(out)["result"] == "inconclusive"


def test_check_pretty(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", check_config([2], trials=5))
    code, out, _ = run(capsys, "check", cfg, "--pretty")
    assert code == 0 and "verdict:" in out


def test_emitted_json_reparses(tmp_path, capsys):
    data = write(tmp_path, "d.csv", QUAD_CSV)
    spec = write(tmp_path, "m.json", model([[0], [1], [2]], "lasso", [([2], 0.3)]))
    _, out, _ = run(capsys, "fit", data, spec)
    res = FitResult.from_json(json.loads(out))
    assert json.loads(json.dumps(res.to_json())) == json.loads(out)


def test_usage_errors(capsys):
    assert main([]) == 64
    assert main(["nonsense"]) == 64
    assert main(["--help"]) == 0
    capsys.readouterr()


def test_module_entry_point(tmp_path):
    spec = write(tmp_path, "m.json", model([[0], [1], [2]], "ridge", [([2], 1.0)]))
    proc = subprocess.run([sys.executable, "-m", "polyinvar", "audit", spec], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["compliant"]
