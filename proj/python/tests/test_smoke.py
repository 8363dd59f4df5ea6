import json
import pathlib

import jsonschema
import numpy as np
import pytest

import tensorreg

SCHEMA = pathlib.Path(__file__).resolve().parents[2] / "tests" / "schema" / "rate_report.schema.json"


def test_norms_match_numpy():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((3, 4, 5))
    assert tensorreg.reg_eval("EntryL1", a) == pytest.approx(np.abs(a).sum())
    assert tensorreg.reg_dual("EntryL1", a) == pytest.approx(np.abs(a).max())
    # fibers along mode 0
    assert tensorreg.reg_eval("FiberGroup:0", a) == pytest.approx(np.linalg.norm(a, axis=0).sum())
    # slices spanned by axes (0, 1), indexed by axis 2
    nuc = sum(np.linalg.norm(a[:, :, k], "nuc") for k in range(5))
    assert tensorreg.reg_eval("SliceNuclear:0:1", a) == pytest.approx(nuc)
    unf = [np.moveaxis(a, k, 0).reshape(a.shape[k], -1) for k in range(3)]
    r6 = sum(np.linalg.norm(m, "nuc") for m in unf) / 3
    assert tensorreg.reg_eval("MatricizedNuclearSum", a) == pytest.approx(r6)


def test_prox_entry_l1_is_soft_threshold():
    z = np.array([[[3.0, -0.5], [1.2, -2.0]]])
    out = tensorreg.prox("EntryL1", z, 1.0)
    np.testing.assert_allclose(out, np.sign(z) * np.maximum(np.abs(z) - 1.0, 0.0))
    assert out.shape == z.shape


def test_errors_are_translated():
    with pytest.raises(tensorreg.TensorregError):
        tensorreg.prox("MatricizedNuclearSum", np.zeros((2, 2, 2)), 1.0)
    with pytest.raises(ValueError):
        tensorreg.reg_eval("NoSuchNorm", np.zeros((2, 2, 2)))


def test_generate_and_solve():
    truth = tensorreg.gen_truth({"class": "Theta1", "param": 3, "shape": [4, 4, 4]}, 1)
    assert np.count_nonzero(truth) == 3
    x, y = tensorreg.gen_problem(truth, 400, 3, 0.1, 2)
    assert x.shape == (400, 4, 4, 4) and y.shape == (400,)
    res = tensorreg.solve(x, y, "EntryL1", 0.02)
    assert res["status"] == "Converged"
    assert np.sum((res["estimate"] - truth) ** 2) < 0.1 * np.sum(truth**2)
    at_est = tensorreg.objective(x, y, "EntryL1", 0.02, res["estimate"])
    assert at_est <= tensorreg.objective(x, y, "EntryL1", 0.02, truth) + 1e-12


def test_width_estimate():
    w = tensorreg.gaussian_width("FiberGroup:0", [5, 4, 4], draws=500, seed=3)
    assert w["draws"] == 500
    assert 2.0 < w["mean"] < 6.0


def test_var_extrema_closed_form():
    mu_min, mu_max = tensorreg.var_spectral_extrema([0.5 * np.eye(2)])
    assert mu_min == pytest.approx(0.25, abs=1e-6)
    assert mu_max == pytest.approx(2.25, abs=1e-6)


def test_tns_round_trip(tmp_path):
    a = np.arange(24, dtype=float).reshape(2, 3, 4)
    path = tmp_path / "a.tns"
    tensorreg.write_tns(str(path), a)
    assert path.read_bytes()[:4] == b"TNS1"
    np.testing.assert_array_equal(tensorreg.read_tns(str(path)), a)


def test_rate_report_matches_schema():
    cfg = {
        "model": {"class": "Theta1", "param": 2, "shape": [4, 4, 4]},
        "regularizer": "EntryL1",
        "n_grid": [40, 100, 200, 400],
        "replications": 10,
        "seed": 5,
        "width_draws": 100,
    }
    report = tensorreg.run_experiment("rate", cfg)
    jsonschema.validate(report, json.loads(SCHEMA.read_text()))
    assert {c["data"] for c in report["cells"]} == {"samples", "moments"}
    assert report == tensorreg.run_experiment("rate", json.dumps(cfg))


def test_cli_in_process():
    code, out, _ = tensorreg.cli("--seed", 1, "var-extrema", "--random-m", 2, "--random-p", 1, "--random-scale", 0.2)
    assert code == 0
    assert "extrema" in json.loads(out)
    code, _, err = tensorreg.cli("rate", "--config", "/nonexistent.json")
    assert code == 2 and err
