"""Dense complex linear algebra on bipartite (and multipartite) systems.

Every composite index follows ``i * d_B + j`` for ``|i>|j>``; this is numpy's
``kron`` ordering and every other module relies on it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

SCHMIDT_RTOL = 1e-8


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of any number of matrices or vectors."""
    if not ops:
        raise ValueError("tensor needs at least one operand")
    return reduce(np.kron, (np.asarray(o, dtype=complex) for o in ops))


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def hermitize(m: np.ndarray) -> np.ndarray:
    """Symmetrize away round-off anti-Hermitian parts."""
    return 0.5 * (m + dagger(m))


def eigh_hermitian(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return np.linalg.eigh(hermitize(np.asarray(m, dtype=complex)))


def _check_dims(m: np.ndarray, dims: Sequence[int]) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    n = int(np.prod(dims))
    if m.ndim != 2 or m.shape != (n, n):
        raise ValueError(f"matrix of shape {m.shape} does not match subsystem dims {tuple(dims)}")
    return m


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: int | Sequence[int]) -> np.ndarray:
    """Reduce ``m`` onto the subsystems listed in ``keep``.

    Parameters
    ----------
    m : np.ndarray
        Square operator on ``C^dims[0] (x) C^dims[1] (x) ...``.
    dims : sequence of int
        Local dimensions, outermost factor first.
    keep : int or sequence of int
        Subsystem indices to keep (0 is the first factor). Kept subsystems
        retain their original relative order.

    Returns
    -------
    np.ndarray
        The reduced operator.
    """
    dims = tuple(int(d) for d in dims)
    m = _check_dims(m, dims)
    keep = sorted({keep} if isinstance(keep, (int, np.integer)) else set(keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ValueError(f"keep={keep} out of range for {len(dims)} subsystems")
    n = len(dims)
    t = m.reshape(dims + dims)
    ket = list(range(n))
    bra = list(range(n, 2 * n))
    for i in range(n):
        if i not in keep:
            bra[i] = ket[i]
    out = [ket[k] for k in keep] + [bra[k] for k in keep]
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    return np.einsum(t, ket + bra, out).reshape(dk, dk)


def partial_transpose(m: np.ndarray, dims: Sequence[int], sys: int = 1) -> np.ndarray:
    """Transpose the indices of subsystem ``sys`` (default: the second, B)."""
    dims = tuple(int(d) for d in dims)
    m = _check_dims(m, dims)
    n = len(dims)
    t = m.reshape(dims + dims)
    axes = list(range(2 * n))
    axes[sys], axes[n + sys] = axes[n + sys], axes[sys]
    return t.transpose(axes).reshape(m.shape)


@dataclass(frozen=True)
class SchmidtDecomposition:
    """``v = sum_i coefficients[i] * left[:, i] (x) right[:, i]``."""

    coefficients: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.coefficients)

    def reconstruct(self) -> np.ndarray:
        return sum(
            c * np.kron(self.left_vectors[:, i], self.right_vectors[:, i])
            for i, c in enumerate(self.coefficients)
        )


def schmidt(v: np.ndarray, dims: tuple[int, int], rtol: float = SCHMIDT_RTOL) -> SchmidtDecomposition:
    """Schmidt decomposition of a bipartite vector via the SVD of its coefficient matrix.

    Coefficients no larger than ``rtol`` times the largest one are dropped, so
    ``rank`` is scale invariant.
    """
    d_a, d_b = dims
    v = np.asarray(v, dtype=complex).ravel()
    if v.size != d_a * d_b:
        raise ValueError(f"vector of length {v.size} does not match dims {dims}")
    if not np.any(v):
        raise ValueError("Schmidt decomposition of the zero vector is undefined")
    u, s, vh = np.linalg.svd(v.reshape(d_a, d_b))
    r = int(np.sum(s > rtol * s[0]))
    # coefficient matrix C = U S V^H, so the right factors are conj(V) columns
    return SchmidtDecomposition(s[:r], u[:, :r], vh[:r].T)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR decomposition of a Ginibre matrix."""
    if d < 1:
        raise ValueError("dimension must be positive")
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def haar_state(d: int, rng: np.random.Generator) -> np.ndarray:
    """Uniformly random pure state (normalized complex Gaussian vector)."""
    if d < 1:
        raise ValueError("dimension must be positive")
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return z / np.linalg.norm(z)


def haar_states(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` random pure states as the rows of an ``(n, d)`` array."""
    z = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def weyl(d: int, m: int, n: int) -> np.ndarray:
    """Weyl operator ``X^m Z^n`` with ``X|k> = |k+1>`` and ``Z|k> = w^k |k>``."""
    if not (0 <= m < d and 0 <= n < d):
        raise ValueError(f"Weyl indices ({m}, {n}) out of range for d={d}")
    k = np.arange(d)
    shift = np.zeros((d, d), dtype=complex)
    shift[(k + m) % d, k] = 1.0
    phase = np.exp(2j * np.pi * n * k / d)
    return shift * phase[np.newaxis, :]


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(hermitize(a - b)))))


def operator_norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, 2))


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix ``G G^dag / Tr`` from a ``d x rank`` Ginibre matrix."""
    k = d if rank is None else rank
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real
