"""Bipartite density matrices, noisy singlets and singlet-fraction diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qmath import dagger, eigh_hermitian, haar_state, partial_trace, partial_transpose, random_density

STATE_TOL = 1e-9
PPT_TOL = 1e-9


class InvalidStateError(ValueError):
    """A matrix violates a density-matrix invariant; ``invariant`` names which one."""

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        super().__init__(f"{invariant}: {detail}" if detail else invariant)


def check_density(m: np.ndarray, tol: float = STATE_TOL) -> np.ndarray:
    """Validate a density matrix and return it as a complex array."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidStateError("square", f"shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidStateError("finite", "matrix has NaN or Inf entries")
    if np.max(np.abs(m - dagger(m)), initial=0.0) > tol:
        raise InvalidStateError("hermitian")
    tr = np.trace(m).real
    if abs(tr - 1.0) > tol:
        raise InvalidStateError("unit_trace", f"trace = {tr!r}")
    lam = eigh_hermitian(m)[0][0]
    if lam < -tol:
        raise InvalidStateError("positive_semidefinite", f"min eigenvalue = {lam!r}")
    return m


@dataclass(frozen=True, eq=False)
class BipartiteState:
    """Density matrix on ``C^d_a (x) C^d_b``, validated on construction."""

    matrix: np.ndarray
    d_a: int
    d_b: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = self.d_a * self.d_b
        if m.shape != (n, n):
            raise InvalidStateError("factor_dimensions", f"shape {m.shape} vs dims ({self.d_a}, {self.d_b})")
        m = check_density(m)
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dims(self) -> tuple[int, int]:
        return (self.d_a, self.d_b)

    @classmethod
    def from_vector(cls, v: np.ndarray, d_a: int, d_b: int | None = None) -> "BipartiteState":
        v = np.asarray(v, dtype=complex).ravel()
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()), d_a, d_a if d_b is None else d_b)

    def reduced(self, keep: int) -> np.ndarray:
        return partial_trace(self.matrix, self.dims, keep)


def max_entangled(d: int, m: int | None = None, d_b: int | None = None) -> np.ndarray:
    """``(1/sqrt(m)) sum_{i<m} |i>|i>`` in ``C^d (x) C^d_b`` (``m`` defaults to ``d``)."""
    if d < 2 and m is None:
        raise ValueError("maximally entangled state needs d >= 2")
    m = d if m is None else m
    d_b = d if d_b is None else d_b
    if m > min(d, d_b):
        raise ValueError(f"m={m} exceeds local dimensions ({d}, {d_b})")
    v = np.zeros(d * d_b, dtype=complex)
    v[[i * d_b + i for i in range(m)]] = 1.0
    return v / np.sqrt(m)


def max_entangled_state(d: int) -> BipartiteState:
    """The projector ``P_+`` onto ``max_entangled(d)``."""
    return BipartiteState.from_vector(max_entangled(d), d)


def singlet_fraction(rho: BipartiteState) -> float:
    """Overlap ``<Psi_+| rho |Psi_+>``."""
    if rho.d_a != rho.d_b:
        raise ValueError(f"singlet fraction needs d_a == d_b, got {rho.dims}")
    return singlet_fraction_m(rho, rho.d_a)


def singlet_fraction_m(rho: BipartiteState, m: int) -> float:
    """Overlap with the ``m x m`` singlet embedded on the first ``m`` basis vectors of each side."""
    if not 1 <= m <= min(rho.dims):
        raise ValueError(f"m={m} out of range for dims {rho.dims}")
    v = max_entangled(rho.d_a, m, rho.d_b)
    return float(np.real(v.conj() @ rho.matrix @ v))


def noisy_singlet_matrix(d: int, p: float) -> np.ndarray:
    v = max_entangled(d)
    return p * np.outer(v, v.conj()) + (1 - p) * np.eye(d * d) / d**2


@dataclass(frozen=True)
class NoisySinglet:
    """``p P_+ + (1 - p) I/d^2``.

    ``p`` may go below zero down to ``-1/(d^2 - 1)``: those members are still
    states (singlet fraction below ``1/d^2``) and are what twirling produces
    from such inputs.
    """

    d: int
    p: float

    def __post_init__(self):
        lo = -1.0 / (self.d**2 - 1)
        if not lo - 1e-12 <= self.p <= 1 + 1e-12:
            raise ValueError(f"p={self.p} outside [{lo}, 1] for d={self.d}")

    @property
    def fraction(self) -> float:
        return self.p + (1 - self.p) / self.d**2

    @property
    def fidelity(self) -> float:
        """Standard-teleportation fidelity ``p + (1 - p)/d``."""
        return self.p + (1 - self.p) / self.d

    def state(self) -> BipartiteState:
        return BipartiteState(noisy_singlet_matrix(self.d, self.p), self.d, self.d)


def noisy_singlet(d: int, p: float) -> BipartiteState:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"mixing weight p={p} outside [0, 1]")
    return NoisySinglet(d, p).state()


def p_from_fraction(d: int, F: float) -> float:
    return (F - 1 / d**2) / (1 - 1 / d**2)


def noisy_singlet_from_F(d: int, F: float) -> NoisySinglet:
    if not 1 / d**2 - 1e-12 <= F <= 1 + 1e-12:
        raise ValueError(f"F={F} outside [1/d^2, 1]")
    return NoisySinglet(d, min(max(p_from_fraction(d, F), 0.0), 1.0))


def fidelity_from_fraction(d: int, F: float) -> float:
    """``f = (F d + 1)/(d + 1)``."""
    return (F * d + 1) / (d + 1)


def fraction_from_fidelity(d: int, f: float) -> float:
    if not 1 / d - 1e-12 <= f <= 1 + 1e-12:
        raise ValueError(f"f={f} outside [1/d, 1]")
    return (f * (d + 1) - 1) / d


def min_pt_eigenvalue(rho: BipartiteState) -> float:
    return float(eigh_hermitian(partial_transpose(rho.matrix, rho.dims))[0][0])


def is_ppt(rho: BipartiteState, tol: float = PPT_TOL) -> bool:
    return min_pt_eigenvalue(rho) >= -tol


def noisy_singlet_separable(d: int, p: float) -> bool:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"mixing weight p={p} outside [0, 1]")
    return p <= 1 / (d + 1)


def random_state(d_a: int, d_b: int, rng: np.random.Generator, rank: int | None = None) -> BipartiteState:
    return BipartiteState(random_density(d_a * d_b, rng, rank), d_a, d_b)


def random_choi_state(d: int, rng: np.random.Generator) -> BipartiteState:
    """Random full-rank state whose first reduction is exactly ``I/d``.

    A random ``M`` is conjugated by ``R^{-1/2} (x) I`` where ``R = Tr_B M``.
    """
    m = random_density(d * d, rng)
    lam, vec = eigh_hermitian(partial_trace(m, (d, d), 0))
    r_inv_sqrt = (vec / np.sqrt(lam)) @ dagger(vec)
    k = np.kron(r_inv_sqrt, np.eye(d))
    rho = k @ m @ dagger(k) / d
    return BipartiteState(0.5 * (rho + dagger(rho)), d, d)


def random_separable_state(
    d_a: int, d_b: int, rng: np.random.Generator, n_terms: int = 50
) -> BipartiteState:
    """Dirichlet-weighted mixture of ``n_terms`` Haar-random product pure states."""
    w = rng.dirichlet(np.ones(n_terms))
    rho = np.zeros((d_a * d_b, d_a * d_b), dtype=complex)
    for wk in w:
        v = np.kron(haar_state(d_a, rng), haar_state(d_b, rng))
        rho += wk * np.outer(v, v.conj())
    return BipartiteState(rho, d_a, d_b)


def mix_to_ppt(rho: BipartiteState, tol: float = PPT_TOL, iters: int = 60) -> BipartiteState:
    """Smallest admixture ``(1 - t) rho + t I/n`` that is PPT, found by bisection on ``t``."""
    n = rho.d_a * rho.d_b
    if is_ppt(rho, tol):
        return rho

    def mixed(t: float) -> BipartiteState:
        return BipartiteState((1 - t) * rho.matrix + t * np.eye(n) / n, rho.d_a, rho.d_b)

    lo, hi = 0.0, 1.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if is_ppt(mixed(mid), tol):
            hi = mid
        else:
            lo = mid
    return mixed(hi)


def random_ppt_state(d_a: int, d_b: int, rng: np.random.Generator) -> BipartiteState:
    return mix_to_ppt(random_state(d_a, d_b, rng))
