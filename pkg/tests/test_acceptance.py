"""Exit criteria; each test prints one PASS/FAIL line (also collected in the run summary)."""

import time

import numpy as np
import pytest

from conftest import record_criterion
from qteleport.channels import (
    channel_fidelity_exact,
    channel_fidelity_mc,
    channel_from_state,
    choi,
    choi_distance,
    depolarizing,
    entanglement_fidelity,
    identity_channel,
    random_channel,
)
from qteleport.distill import (
    LocalFilter,
    apply_filter,
    make_rho_F,
    make_sigma_F,
    diagonal_filter,
    quasi_distill_sequence,
    threshold_experiment,
    verify_distillation_witness,
    witness_search,
)
from qteleport.experiments import default_witness_state
from qteleport.qmath import trace_distance
from qteleport.states import (
    BipartiteState,
    max_entangled_state,
    noisy_singlet,
    random_choi_state,
    random_ppt_state,
    singlet_fraction,
    singlet_fraction_m,
)
from qteleport.teleport import classical_fidelity, optimal_fidelity_from_fraction, standard_teleport_channel
from qteleport.twirl import twirl_channel, twirl_state_exact, twirl_state_mc


def haar_average_fidelity(kraus, d):
    """Closed-form Haar integral of <phi|L(phi)|phi>: (sum_k |Tr K_k|^2 + d)/(d(d+1))."""
    return (sum(abs(np.trace(k)) ** 2 for k in kraus) + d) / (d * (d + 1))


def test_criterion_1_fidelity_theorem():
    rng = np.random.default_rng(1)
    worst_z, worst_exact = 0.0, 0.0
    for d in (2, 3, 4):
        for _ in range(20):
            ch = random_channel(d, rng)
            F = entanglement_fidelity(ch)
            formula = (F * d + 1) / (d + 1)
            mean, se = channel_fidelity_mc(ch, 10_000, rng)
            worst_z = max(worst_z, abs(mean - formula) / se)
            worst_exact = max(worst_exact, abs(channel_fidelity_exact(ch) - haar_average_fidelity(ch.kraus, d)))
    ok = worst_z < 4 and worst_exact < 1e-12
    record_criterion(1, "fidelity theorem", ok, f"max |mc - formula|/se = {worst_z:.2f}, exact-path err = {worst_exact:.1e}")
    assert ok


def test_criterion_2_isomorphism_round_trip():
    rng = np.random.default_rng(2)
    worst_choi, worst_comp = 0.0, 0.0
    for d in (2, 3):
        for _ in range(20):
            rho = random_choi_state(d, rng)
            ch = channel_from_state(rho)
            worst_choi = max(worst_choi, np.max(np.abs(choi(ch).matrix - rho.matrix)))
            worst_comp = max(worst_comp, np.max(np.abs(ch.completeness() - np.eye(d))))
    ok = worst_choi < 1e-9 and worst_comp < 1e-9
    record_criterion(2, "isomorphism round trip", ok, f"choi err = {worst_choi:.1e}, completeness err = {worst_comp:.1e}")
    assert ok


def test_criterion_3_teleport_calibration():
    worst = 0.0
    for d in (2, 3):
        worst = max(worst, choi_distance(standard_teleport_channel(max_entangled_state(d)), identity_channel(d)))
        for p in (0.0, 0.25, 0.5, 0.75, 1.0):
            worst = max(worst, choi_distance(standard_teleport_channel(noisy_singlet(d, p)), depolarizing(d, p)))
    ok = worst < 1e-10
    record_criterion(3, "teleport calibration and equivalence", ok, f"max Choi distance = {worst:.1e}")
    assert ok


def test_criterion_4_pure_state_fidelity():
    worst_f, worst_p = 0.0, 0.0
    for a2 in np.linspace(0.5, 0.99, 15):
        a, b = np.sqrt(a2), np.sqrt(1 - a2)
        rho = BipartiteState.from_vector(np.array([a, 0, 0, b]), 2)
        f = channel_fidelity_exact(standard_teleport_channel(rho))
        worst_f = max(worst_f, abs(f - (2 / 3) * (a * a + a * b + b * b)))
        res = apply_filter(rho, LocalFilter(np.diag([b, a]), np.eye(2)))
        worst_p = max(worst_p, abs(res.success_probability - 2 * a2 * (1 - a2)))
        assert singlet_fraction(res.post_state) == pytest.approx(1.0, abs=1e-12)
    ok = worst_f < 1e-10 and worst_p < 1e-12
    record_criterion(4, "pure-state fidelity and filter", ok, f"fidelity err = {worst_f:.1e}, probability err = {worst_p:.1e}")
    assert ok


def test_criterion_5_twirling():
    rng = np.random.default_rng(5)
    rho = BipartiteState(np.asarray(random_choi_state(2, rng).matrix), 2, 2)
    dist = trace_distance(twirl_state_mc(rho, 10_000, rng).matrix, twirl_state_exact(rho).state().matrix)
    worst_F = worst_f = worst_diag = 0.0
    for d in (2, 3, 4):
        for _ in range(10):
            ch = random_channel(d, rng)
            tw = twirl_channel(ch)
            worst_F = max(worst_F, abs(entanglement_fidelity(tw) - entanglement_fidelity(ch)))
            worst_f = max(worst_f, abs(channel_fidelity_exact(tw) - channel_fidelity_exact(ch)))
            worst_diag = max(worst_diag, np.max(np.abs(choi(tw).matrix - twirl_state_exact(choi(ch)).state().matrix)))
    ok = dist < 0.02 and worst_F < 1e-12 and worst_f < 1e-12 and worst_diag < 1e-9
    record_criterion(
        5, "twirling", ok,
        f"MC trace distance = {dist:.4f}, F err = {worst_F:.1e}, f err = {worst_f:.1e}, diagram err = {worst_diag:.1e}",
    )
    assert ok


def test_criterion_6_classical_and_ppt_bound():
    exact = classical_fidelity(2) == 2 / 3 and classical_fidelity(3) == 1 / 2
    rng = np.random.default_rng(6)
    worst = -np.inf
    implied_ok = True
    for d in (2, 3):
        for _ in range(200):
            F = singlet_fraction(random_ppt_state(d, d, rng))
            worst = max(worst, F - 1 / d)
            implied_ok &= optimal_fidelity_from_fraction(d, max(F, 1 / d**2)) <= 2 / (d + 1) + 1e-9
    ok = exact and worst <= 1e-9 and implied_ok
    record_criterion(6, "classical / bound-entangled bound", ok, f"max (F - 1/d) over 400 PPT samples = {worst:.3e}")
    assert ok


def test_criterion_7_sigma_quasi_distillation():
    worst_oracle = 0.0
    ok = True
    for F in (0.3, 0.5, 0.7):
        reps = quasi_distill_sequence(make_sigma_F(F), diagonal_filter, 100)
        fr = np.array([r.fraction for r in reps])
        pr = np.array([r.probability for r in reps])
        ok &= bool(np.all(np.diff(fr) > 0) and np.all(np.diff(pr) < 0) and fr[-1] > 0.99)
        for r in reps:
            # independent 9x9 evaluation of the same filter
            n = r.n
            rho = F * np.outer(*(2 * [np.eye(9)[[0, 4, 8]].sum(0) / np.sqrt(3)])) + (1 - F) * np.diag(np.eye(9)[1])
            k = np.diag(np.kron([1 / n, 1, 1], [1, 1 / n, 1 / n]))
            out = k @ rho @ k
            prob = np.trace(out)
            v = np.eye(9)[[0, 4, 8]].sum(0) / np.sqrt(3)
            worst_oracle = max(worst_oracle, abs(r.probability - prob), abs(r.fraction - v @ out @ v / prob))
    ok &= worst_oracle < 1e-12
    record_criterion(7, "sigma_F quasi-distillation", ok, f"monotone and > 0.99 at n=100; oracle err = {worst_oracle:.1e}")
    assert ok


def test_criterion_8_rho_threshold():
    t0 = time.perf_counter()
    rep_rho = threshold_experiment(make_rho_F(0.5), 10_000, np.random.default_rng(8))
    rep_sigma = threshold_experiment(make_sigma_F(0.5), 10_000, np.random.default_rng(8))
    elapsed = time.perf_counter() - t0
    rb = rep_rho.running_best()
    last_decile = rb[-1] - rb[int(0.9 * len(rb)) - 1]
    ok = rep_rho.best_fraction < 1 - 1e-6 and last_decile < 1e-3 and rep_sigma.best_fraction > 0.99 and elapsed < 60
    record_criterion(
        8, "rho_F threshold vs sigma_F", ok,
        f"rho plateau = {rep_rho.best_fraction:.6f} (last-decile gain {last_decile:.1e}), "
        f"sigma best = {rep_sigma.best_fraction:.6f}, {elapsed:.1f}s",
    )
    assert ok


def test_criterion_9_witness():
    rho = default_witness_state(0.5)
    filt = verify_distillation_witness(rho, np.eye(2), np.diag([1.0, 1.0, 0.0]), 2)
    frac = singlet_fraction_m(apply_filter(rho, filt).post_state, 2) if filt is not None else 0.0
    none_found = witness_search(noisy_singlet(2, 0.5), 2, 1000, np.random.default_rng(9)) is None
    ok = abs(frac - 1) < 1e-9 and none_found
    record_criterion(9, "distillation witness", ok, f"distilled fraction = {frac:.12f}, noisy singlet witness absent = {none_found}")
    assert ok
