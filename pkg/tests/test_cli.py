import csv
import json

import numpy as np
import pytest

from qteleport.cli import main
from qteleport.experiments import EXPERIMENTS, ExperimentConfig, run
from qteleport.io import save_state
from qteleport.states import noisy_singlet

FAST = {"--samples": "500", "--trials": "5"}


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def invoke(tmp_path, name, *extra, **flags):
    out = tmp_path / name
    args = [name, "--seed", "7", "--out", str(out)]
    for k, v in {**FAST, **flags}.items():
        args += [k, v]
    return main(args + list(extra)), out


@pytest.mark.parametrize("name", sorted(EXPERIMENTS))
def test_every_experiment_runs(tmp_path, name):
    extra = ["--trials", "200"] if name == "rho-threshold" else []
    code, out = invoke(tmp_path, name, *extra)
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["experiment"] == name
    assert manifest["seed"] == 7
    for f in manifest["outputs"]:
        assert (out / f).exists()


def test_fidelity_sweep_table(tmp_path):
    code, out = invoke(tmp_path, "fidelity-theorem-sweep", "--d", "3")
    rows = read_csv(out / "fidelity_theorem_sweep.csv")
    assert [float(r["p"]) for r in rows] == pytest.approx(np.linspace(0, 1, 11))
    for r in rows:
        F, f = float(r["F"]), float(r["f_exact"])
        assert f == pytest.approx((3 * F + 1) / 4, abs=1e-12)
        assert abs(float(r["f_mc"]) - f) <= max(4 * float(r["std_err"]), 1e-12)


def test_sigma_trace(tmp_path):
    code, out = invoke(tmp_path, "sigma-quasi-distill", "--F", "0.5", "--n-max", "100")
    rows = read_csv(out / "quasi_distill.csv")
    assert len(rows) == 100
    fr = [float(r["fraction"]) for r in rows]
    pr = [float(r["probability"]) for r in rows]
    assert all(b > a for a, b in zip(fr, fr[1:]))
    assert all(b < a for a, b in zip(pr, pr[1:]))


@pytest.mark.parametrize("name", ["fidelity-theorem-sweep", "sigma-quasi-distill", "rho-threshold", "ppt-bound"])
def test_byte_identical(tmp_path, name):
    c1, o1 = invoke(tmp_path / "a", name)
    c2, o2 = invoke(tmp_path / "b", name)
    for f in json.loads((o1 / "manifest.json").read_text())["outputs"]:
        assert (o1 / f).read_bytes() == (o2 / f).read_bytes()


def test_state_file_input(tmp_path):
    path = tmp_path / "ns.json"
    save_state(noisy_singlet(3, 0.5), path)
    code, out = invoke(tmp_path, "twirl-convergence", "--state", str(path), **{"--samples": "100"})
    assert code == 0
    rows = read_csv(out / "twirl_convergence.csv")
    assert float(rows[-1]["singlet_fraction"]) == pytest.approx(5 / 9)


def test_invalid_state_file(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"d_a": 2, "d_b": 2, "matrix": [[1.0, 0.0]] * 16}))
    code, _ = invoke(tmp_path, "witness-demo", "--state", str(path))
    assert code == 1
    assert "unit_trace" in capsys.readouterr().err


def test_malformed_state_file(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("[1, 2")
    code, _ = invoke(tmp_path, "sigma-quasi-distill", "--state", str(path))
    assert code == 1
    assert "not valid JSON" in capsys.readouterr().err


def test_seed_required(tmp_path):
    with pytest.raises(SystemExit):
        main(["classical-baseline", "--out", str(tmp_path)])


def test_unknown_experiment(tmp_path):
    with pytest.raises(SystemExit):
        main(["nope", "--seed", "1", "--out", str(tmp_path)])
    with pytest.raises(ValueError):
        ExperimentConfig(experiment="nope", seed=1, output_path=str(tmp_path))


def test_witness_demo_output(tmp_path):
    code, out = invoke(tmp_path, "witness-demo", "--p", "0.3")
    res = json.loads((out / "witness.json").read_text())
    assert res["found"]
    assert res["fraction"] == pytest.approx(1.0, abs=1e-9)
    assert res["probability"] == pytest.approx(0.3)


def test_run_api(tmp_path):
    files = run(ExperimentConfig("classical-baseline", seed=0, output_path=str(tmp_path), d=4))
    rows = read_csv(files[0])
    assert [float(r["f_classical"]) for r in rows] == pytest.approx([2 / 3, 1 / 2, 2 / 5])
