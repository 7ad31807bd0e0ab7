"""Single-pair local filtering: conclusive distillation and quasi-distillation."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .io import matrix_to_json
from .qmath import dagger, eigh_hermitian, haar_unitary, operator_norm, schmidt
from .states import BipartiteState, max_entangled, singlet_fraction_m

ZERO_PROB = 1e-14
CONTRACTION_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LocalFilter:
    """Product operator ``A (x) B``; the success branch of a two-outcome local measurement.

    ``a`` and ``b`` are kept as given. :meth:`scaled` divides both by
    ``max(||A||, ||B||)`` so that ``A^dag A <= I`` and ``B^dag B <= I``; every
    probability reported by this module uses the scaled pair.
    """

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=complex)
        b = np.array(self.b, dtype=complex)
        if a.ndim != 2 or b.ndim != 2:
            raise ValueError("filter operators must be matrices")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("filter operators must have finite entries")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def scaled(self) -> tuple[np.ndarray, np.ndarray]:
        s = max(operator_norm(self.a), operator_norm(self.b))
        if s == 0:
            return self.a, self.b
        return self.a / s, self.b / s

    def is_contraction(self, tol: float = CONTRACTION_TOL) -> bool:
        return all(
            eigh_hermitian(dagger(x) @ x)[0][-1] <= 1 + tol for x in self.scaled()
        )

    def operator(self) -> np.ndarray:
        a, b = self.scaled()
        return np.kron(a, b)


@dataclass(frozen=True, eq=False)
class FilterResult:
    """``post_state`` is ``None`` when the success branch has (numerically) zero probability."""

    success_probability: float
    post_state: BipartiteState | None

    @property
    def succeeded(self) -> bool:
        return self.post_state is not None


@dataclass(frozen=True)
class QuasiDistillReport:
    n: int
    fraction: float | None
    probability: float


def _check_filter(rho: BipartiteState, filt: LocalFilter):
    if filt.a.shape[1] != rho.d_a or filt.b.shape[1] != rho.d_b:
        raise ValueError(
            f"filter shapes {filt.a.shape}, {filt.b.shape} do not act on dims {rho.dims}"
        )


def apply_filter(rho: BipartiteState, filt: LocalFilter) -> FilterResult:
    """Success branch ``A (x) B rho A^dag (x) B^dag`` and its probability."""
    _check_filter(rho, filt)
    k = filt.operator()
    out = k @ rho.matrix @ dagger(k)
    prob = float(np.trace(out).real)
    if prob < ZERO_PROB:
        return FilterResult(max(prob, 0.0), None)
    out = out / prob
    return FilterResult(prob, BipartiteState(0.5 * (out + dagger(out)), filt.a.shape[0], filt.b.shape[0]))


def _fraction_and_probability(rho_m: np.ndarray, a: np.ndarray, b: np.ndarray, target: np.ndarray):
    k = np.kron(a, b)
    out = k @ rho_m @ dagger(k)
    prob = float(np.trace(out).real)
    if prob < ZERO_PROB:
        return None, max(prob, 0.0)
    return float(np.real(target.conj() @ out @ target)) / prob, prob


def diagonal_filter(n: int, d: int = 3) -> LocalFilter:
    """``A_n = diag(1/n, 1, ..., 1)``, ``B_n = diag(1, 1/n, ..., 1/n)``."""
    a = np.ones(d)
    a[0] = 1 / n
    b = np.full(d, 1 / n)
    b[0] = 1
    return LocalFilter(np.diag(a), np.diag(b))


def quasi_distill_sequence(
    rho: BipartiteState,
    filters: Callable[[int], LocalFilter] | Sequence[LocalFilter],
    n_max: int,
    m: int | None = None,
) -> list[QuasiDistillReport]:
    """Singlet fraction and success probability of filter ``n`` for ``n = 1..n_max``.

    ``filters`` is either a callable ``n -> LocalFilter`` or a sequence whose
    first element is filter ``n = 1``. The target is the ``m x m`` singlet
    (default ``m = min(d_a, d_b)``).
    """
    m = min(rho.dims) if m is None else m
    get = filters if callable(filters) else (lambda n: filters[n - 1])
    reports = []
    for n in range(1, n_max + 1):
        res = apply_filter(rho, get(n))
        frac = singlet_fraction_m(res.post_state, m) if res.succeeded else None
        reports.append(QuasiDistillReport(n, frac, res.success_probability))
    return reports


def _is_projector(p: np.ndarray, tol: float = 1e-9) -> bool:
    return (
        p.ndim == 2
        and p.shape[0] == p.shape[1]
        and np.max(np.abs(p - dagger(p))) < tol
        and np.max(np.abs(p @ p - p)) < tol
    )


def verify_distillation_witness(
    rho: BipartiteState,
    P: np.ndarray,
    Q: np.ndarray,
    m: int,
    tol: float = 1e-9,
) -> LocalFilter | None:
    """Check a product-projection witness and build the distilling filter.

    If ``(P (x) Q) rho (P (x) Q)`` is a rank-one projector onto
    ``psi = sum_i a_i |f_i>|g_i>`` of Schmidt rank ``m``, return
    ``A = sum_i |i><f_i|`` and ``B = a_min sum_i (1/a_i) |i><g_i|``, which map
    ``rho`` to the ``m x m`` singlet on the first ``m`` basis vectors with
    probability ``m a_min^2``. Otherwise return ``None``.

    Raises
    ------
    ValueError
        If ``P`` or ``Q`` is not an orthogonal projector of rank ``m``.
    """
    P = np.asarray(P, dtype=complex)
    Q = np.asarray(Q, dtype=complex)
    for name, x, dim in (("P", P, rho.d_a), ("Q", Q, rho.d_b)):
        if x.shape != (dim, dim) or not _is_projector(x):
            raise ValueError(f"{name} is not an orthogonal projector on C^{dim}")
        if round(float(np.trace(x).real)) != m:
            raise ValueError(f"{name} has rank {np.trace(x).real:.3g}, expected {m}")
    pq = np.kron(P, Q)
    block = pq @ rho.matrix @ pq
    lam, vec = eigh_hermitian(block)
    if lam[-1] < ZERO_PROB or (len(lam) > 1 and lam[-2] > tol * max(lam[-1], 1.0)):
        return None
    psi = np.sqrt(lam[-1]) * vec[:, -1]
    sd = schmidt(psi, rho.dims)
    if sd.rank != m:
        return None
    a_min = sd.coefficients[-1]
    A = np.zeros((rho.d_a, rho.d_a), dtype=complex)
    B = np.zeros((rho.d_b, rho.d_b), dtype=complex)
    for i, c in enumerate(sd.coefficients):
        A[i] = sd.left_vectors[:, i].conj()
        B[i] = (a_min / c) * sd.right_vectors[:, i].conj()
    return LocalFilter(A, B)


def _projector(vectors: np.ndarray) -> np.ndarray:
    q, _ = np.linalg.qr(vectors)
    return q @ dagger(q)


def _structured_candidates(rho: BipartiteState, m: int):
    lam, vec = eigh_hermitian(rho.matrix)
    for p, v in zip(lam[::-1], vec.T[::-1]):
        if p <= 1e-12:
            continue
        sd = schmidt(v, rho.dims)
        if sd.rank < m:
            continue
        for idx in itertools.combinations(range(sd.rank), m):
            idx = list(idx)
            yield _projector(sd.left_vectors[:, idx]), _projector(sd.right_vectors[:, idx])


def witness_search(
    rho: BipartiteState, m: int, trials: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, LocalFilter] | None:
    """Look for a product projection that distills ``rho`` to an ``m x m`` singlet.

    Candidates from the Schmidt supports of ``rho``'s eigenvectors come
    first, then Haar-random ``m``-dimensional subspaces, until ``trials``
    candidates have been checked. Failure to find one is not a proof that
    none exists.
    """
    if not 1 <= m <= min(rho.dims):
        raise ValueError(f"m={m} out of range for dims {rho.dims}")
    structured = _structured_candidates(rho, m)
    for _ in range(trials):
        cand = next(structured, None)
        if cand is None:
            cand = (
                _projector(haar_unitary(rho.d_a, rng)[:, :m]),
                _projector(haar_unitary(rho.d_b, rng)[:, :m]),
            )
        P, Q = cand
        filt = verify_distillation_witness(rho, P, Q, m)
        if filt is not None:
            return P, Q, filt
    return None


def _basis_state(d: int, i: int, j: int) -> np.ndarray:
    e = np.zeros(d * d)
    e[i * d + j] = 1.0
    return np.outer(e, e)


def make_sigma_F(F: float) -> BipartiteState:
    """``F P_+ + (1 - F)|01><01|`` on ``C^3 (x) C^3``."""
    if not 0 < F < 1:
        raise ValueError(f"F={F} outside (0, 1)")
    v = max_entangled(3)
    return BipartiteState(F * np.outer(v, v.conj()) + (1 - F) * _basis_state(3, 0, 1), 3, 3)


def make_rho_F(F: float) -> BipartiteState:
    """``F P_+ + (1 - F)/3 (|01><01| + |12><12| + |20><20|)`` on ``C^3 (x) C^3``."""
    if not 0 < F < 1:
        raise ValueError(f"F={F} outside (0, 1)")
    v = max_entangled(3)
    noise = sum(_basis_state(3, i, (i + 1) % 3) for i in range(3)) / 3
    return BipartiteState(F * np.outer(v, v.conj()) + (1 - F) * noise, 3, 3)


@dataclass(frozen=True)
class ThresholdConfig:
    """Budget and move set for :func:`threshold_experiment`.

    Each restart draws a starting filter from one of the families in turn
    (``structured``: ``diag(x,1,..) (x) diag(1,y,z,..)`` near a common
    log-uniform scale; ``diagonal``: independent log-uniform diagonals;
    ``random``: complex Ginibre matrices) and then hill-climbs with
    coordinate-wise multiplicative perturbations of single entries.
    """

    restart_every: int = 50
    step_sizes: tuple[float, ...] = (0.05, 0.3, 1.0)
    log_scale_min: float = -10.0
    families: tuple[str, ...] = ("structured", "diagonal", "random")


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    a: np.ndarray
    b: np.ndarray
    fraction: float | None
    probability: float

    def to_dict(self) -> dict:
        return {
            "trial": self.trial,
            "filter": {"a": matrix_to_json(self.a), "b": matrix_to_json(self.b)},
            "fraction": self.fraction,
            "probability": self.probability,
        }


@dataclass
class ThresholdReport:
    best_fraction: float
    best_filter: LocalFilter
    best_probability: float
    trace: list[TrialRecord] = field(repr=False)

    def running_best(self) -> np.ndarray:
        vals = np.array([-np.inf if r.fraction is None else r.fraction for r in self.trace])
        return np.maximum.accumulate(vals)


def _start_filter(family: str, d_a: int, d_b: int, rng: np.random.Generator, cfg: ThresholdConfig):
    lo = cfg.log_scale_min
    if family == "structured":
        t = rng.uniform(lo, 0.0)
        a = np.ones(d_a, dtype=complex)
        b = np.ones(d_b, dtype=complex)
        a[0] = np.exp(t + 0.3 * rng.standard_normal())
        b[1:] = np.exp(t + 0.3 * rng.standard_normal(d_b - 1))
        return np.diag(a), np.diag(b)
    if family == "diagonal":
        return (
            np.diag(np.exp(rng.uniform(lo, 0.0, d_a))).astype(complex),
            np.diag(np.exp(rng.uniform(lo, 0.0, d_b))).astype(complex),
        )
    if family == "random":
        def ginibre(d):
            return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))

        return ginibre(d_a), ginibre(d_b)
    raise ValueError(f"unknown filter family {family!r}")


def threshold_experiment(
    rho: BipartiteState,
    trials: int,
    rng: np.random.Generator,
    config: ThresholdConfig | None = None,
    m: int | None = None,
) -> ThresholdReport:
    """Heuristic maximization of the post-filter singlet fraction.

    Trial 0 is the identity filter. Every trial evaluates one candidate
    ``LocalFilter`` and is recorded (scaled operators, fraction, probability)
    so any entry can be re-evaluated with :func:`apply_filter`. The best value
    found is a lower bound on the supremum, nothing more.
    """
    cfg = config or ThresholdConfig()
    m = min(rho.dims) if m is None else m
    target = max_entangled(rho.d_a, m, rho.d_b)
    rho_m = rho.matrix
    trace: list[TrialRecord] = []

    def evaluate(a, b):
        filt = LocalFilter(a, b)
        sa, sb = filt.scaled()
        frac, prob = _fraction_and_probability(rho_m, sa, sb, target)
        trace.append(TrialRecord(len(trace), sa, sb, frac, prob))
        return frac

    best = (evaluate(np.eye(rho.d_a), np.eye(rho.d_b)), 0)
    cur_a = cur_b = None
    cur_f = None
    restart = 0
    while len(trace) < trials:
        t = len(trace)
        if cur_a is None or (t - 1) % cfg.restart_every == 0:
            family = cfg.families[restart % len(cfg.families)]
            restart += 1
            cur_a, cur_b = _start_filter(family, rho.d_a, rho.d_b, rng, cfg)
            cur_f = evaluate(cur_a, cur_b)
        else:
            a, b = cur_a.copy(), cur_b.copy()
            x = a if rng.integers(2) == 0 else b
            nz = np.argwhere(np.abs(x) > 0)
            i, j = nz[rng.integers(len(nz))]
            s = cfg.step_sizes[rng.integers(len(cfg.step_sizes))]
            x[i, j] *= np.exp(s * (rng.standard_normal() + 1j * rng.standard_normal()))
            f = evaluate(a, b)
            if f is not None and (cur_f is None or f > cur_f):
                cur_a, cur_b, cur_f = a, b, f
        rec = trace[-1]
        if rec.fraction is not None and (best[0] is None or rec.fraction > best[0]):
            best = (rec.fraction, rec.trial)
    rec = trace[best[1]]
    return ThresholdReport(best[0], LocalFilter(rec.a, rec.b), rec.probability, trace)
