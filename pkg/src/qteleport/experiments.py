"""Seeded experiments behind the command line; each writes CSV/JSON plus a manifest."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import channels as ch
from . import distill, states, teleport, twirl
from .io import load_state, matrix_to_json, state_to_dict
from .qmath import trace_distance

EXPERIMENTS: dict[str, Callable] = {}


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int
    output_path: str
    d: int = 3
    samples: int = 10_000
    trials: int = 20
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; choose from {sorted(EXPERIMENTS)}")
        if self.seed is None:
            raise ValueError("a seed is required")


def experiment(name: str):
    def register(fn):
        EXPERIMENTS[name] = fn
        return fn

    return register


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: Path, header: list[str], rows: list[list]) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")
    return path


def run(config: ExperimentConfig) -> list[Path]:
    """Run one experiment and return the files written (manifest last)."""
    out = Path(config.output_path)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(config.seed)
    files = EXPERIMENTS[config.experiment](config, rng, out)
    manifest = asdict(config)
    manifest["outputs"] = [p.name for p in files]
    files.append(write_json(out / "manifest.json", manifest))
    return files


def _state_param(config: ExperimentConfig):
    path = config.parameters.get("state")
    return load_state(path) if path else None


@experiment("isomorphism-roundtrip")
def _isomorphism_roundtrip(config, rng, out):
    rows = []
    d = config.d
    for t in range(config.trials):
        rho = states.random_choi_state(d, rng)
        lam = ch.channel_from_state(rho, trace_preserving=True)
        choi_err = np.max(np.abs(ch.choi(lam).matrix - rho.matrix))
        comp_err = np.max(np.abs(lam.completeness() - np.eye(d)))
        src = ch.random_channel(d, rng)
        back = ch.channel_from_state(ch.choi(src), trace_preserving=True)
        rows.append([t, choi_err, comp_err, ch.choi_distance(src, back)])
    return [write_csv(out / "isomorphism_roundtrip.csv",
                      ["trial", "choi_error", "completeness_error", "channel_roundtrip_error"], rows)]


@experiment("fidelity-theorem-sweep")
def _fidelity_sweep(config, rng, out):
    d = config.d
    steps = int(config.parameters.get("p_steps", 10))
    rows = []
    for p in np.linspace(0.0, 1.0, steps + 1):
        lam = ch.depolarizing(d, float(p))
        F = ch.entanglement_fidelity(lam)
        mean, se = ch.channel_fidelity_mc(lam, config.samples, rng)
        rows.append([float(p), F, ch.channel_fidelity_exact(lam), mean, se])
    return [write_csv(out / "fidelity_theorem_sweep.csv", ["p", "F", "f_exact", "f_mc", "std_err"], rows)]


@experiment("twirl-convergence")
def _twirl_convergence(config, rng, out):
    rho = _state_param(config) or states.random_state(config.d, config.d, rng)
    exact = twirl.twirl_state_exact(rho).state()
    rows = []
    n = 10
    while n <= config.samples:
        mc = twirl.twirl_state_mc(rho, n, rng)
        rows.append([n, trace_distance(mc.matrix, exact.matrix), states.singlet_fraction(mc)])
        n *= 10
    return [write_csv(out / "twirl_convergence.csv", ["samples", "trace_distance", "singlet_fraction"], rows)]


@experiment("teleport-calibration")
def _teleport_calibration(config, rng, out):
    d = config.d
    rows = [["P_+", "", ch.choi_distance(teleport.standard_teleport_channel(states.max_entangled_state(d)),
                                          ch.identity_channel(d))]]
    for p in (0.0, 0.25, 0.5, 0.75, 1.0):
        tel = teleport.standard_teleport_channel(states.noisy_singlet(d, p))
        rows.append(["noisy_singlet", p, ch.choi_distance(tel, ch.depolarizing(d, p))])
    return [write_csv(out / "teleport_calibration.csv", ["resource", "p", "choi_distance"], rows)]


@experiment("classical-baseline")
def _classical_baseline(config, rng, out):
    rows = []
    for d in range(2, config.d + 1):
        rows.append([d, teleport.classical_fidelity(d), teleport.optimal_fidelity_from_fraction(d, 1 / d)])
    return [write_csv(out / "classical_baseline.csv", ["d", "f_classical", "f_from_fraction_1_over_d"], rows)]


@experiment("ppt-bound")
def _ppt_bound(config, rng, out):
    d = config.d
    rows = []
    for t in range(config.trials):
        for kind, rho in (
            ("separable", states.random_separable_state(d, d, rng)),
            ("ppt", states.random_ppt_state(d, d, rng)),
        ):
            F = states.singlet_fraction(rho)
            rows.append([t, kind, F, 1 / d, teleport.optimal_fidelity_from_fraction(d, max(F, 1 / d**2)),
                         teleport.classical_fidelity(d)])
    return [write_csv(out / "ppt_bound.csv",
                      ["trial", "kind", "singlet_fraction", "fraction_bound", "f_max_implied", "f_classical"], rows)]


@experiment("sigma-quasi-distill")
def _sigma_quasi_distill(config, rng, out):
    rho = _state_param(config) or distill.make_sigma_F(float(config.parameters.get("F", 0.5)))
    n_max = int(config.parameters.get("n_max", 100))
    reports = distill.quasi_distill_sequence(rho, lambda n: distill.diagonal_filter(n, rho.d_a), n_max)
    rows = [[r.n, r.fraction, r.probability] for r in reports]
    return [write_csv(out / "quasi_distill.csv", ["n", "fraction", "probability"], rows)]


@experiment("rho-threshold")
def _rho_threshold(config, rng, out):
    F = float(config.parameters.get("F", 0.5))
    rho = _state_param(config)
    if rho is None:
        rho = distill.make_sigma_F(F) if config.parameters.get("family") == "sigma" else distill.make_rho_F(F)
    rep = distill.threshold_experiment(rho, config.trials, rng)
    running = rep.running_best()
    rows = [[i, float(v)] for i, v in enumerate(running)]
    summary = {
        "best_fraction": rep.best_fraction,
        "best_probability": rep.best_probability,
        "best_filter": {"a": matrix_to_json(rep.best_filter.a), "b": matrix_to_json(rep.best_filter.b)},
        "trials": len(rep.trace),
        "trace": [r.to_dict() for r in rep.trace],
    }
    return [
        write_json(out / "threshold_trace.json", summary),
        write_csv(out / "threshold_running_best.csv", ["trial", "best_fraction"], rows),
    ]


def default_witness_state(p: float = 0.5) -> states.BipartiteState:
    """``p P_+^2 + (1 - p)|02><02|`` on ``C^2 (x) C^3``."""
    v = states.max_entangled(2, 2, 3)
    e02 = np.zeros(6)
    e02[2] = 1.0
    return states.BipartiteState(p * np.outer(v, v.conj()) + (1 - p) * np.outer(e02, e02), 2, 3)


@experiment("witness-demo")
def _witness_demo(config, rng, out):
    rho = _state_param(config) or default_witness_state(float(config.parameters.get("p", 0.5)))
    m = int(config.parameters.get("m", min(rho.dims)))
    found = distill.witness_search(rho, m, config.trials, rng)
    result = {"state": state_to_dict(rho), "m": m, "found": found is not None}
    if found is not None:
        P, Q, filt = found
        res = distill.apply_filter(rho, filt)
        result.update(
            P=matrix_to_json(P),
            Q=matrix_to_json(Q),
            filter={"a": matrix_to_json(filt.a), "b": matrix_to_json(filt.b)},
            probability=res.success_probability,
            fraction=states.singlet_fraction_m(res.post_state, m),
        )
    return [write_json(out / "witness.json", result)]
