"""Standard qudit teleportation through a shared bipartite state.

Alice measures (input, A) in the generalized Bell basis
``|Phi_mn> = (I (x) W(m, n)) |Psi_+>`` and Bob undoes outcome ``(m, n)`` with
``W(m, n)^T``. With ``P_+`` as the resource Bob's unnormalized state is
``W(m, n)* psi / d``, so this correction makes the protocol the identity
channel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import Channel, channel_from_state, choi_matrix
from .qmath import dagger, eigh_hermitian, partial_trace, weyl
from .states import BipartiteState, max_entangled
from .twirl import twirl_state_exact

__all__ = [
    "TeleportOutcome",
    "bell_basis",
    "classical_fidelity",
    "correction",
    "optimal_fidelity_from_fraction",
    "optimal_teleport_channel",
    "standard_teleport_channel",
    "teleport_outcomes",
    "teleport_sample",
    "weyl",
]


@dataclass(frozen=True, eq=False)
class TeleportOutcome:
    outcome: tuple[int, int]
    probability: float
    bob_state: np.ndarray


def bell_basis(d: int) -> dict[tuple[int, int], np.ndarray]:
    """Generalized Bell vectors ``(I (x) W(m, n)) |Psi_+>`` keyed by ``(m, n)``."""
    v = max_entangled(d)
    return {(m, n): np.kron(np.eye(d), weyl(d, m, n)) @ v for m in range(d) for n in range(d)}


def correction(d: int, m: int, n: int) -> np.ndarray:
    """Bob's unitary for Bell outcome ``(m, n)``."""
    return weyl(d, m, n).T


def _check_square(rho: BipartiteState) -> int:
    if rho.d_a != rho.d_b:
        raise ValueError(f"teleportation needs a d x d resource, got {rho.dims}")
    return rho.d_a


def standard_teleport_channel(rho: BipartiteState) -> Channel:
    """Channel realized by standard teleportation through ``rho``.

    Built from explicit Kraus operators (one per Bell outcome and eigenvector
    of ``rho``) and then compressed through the Choi isomorphism.
    """
    d = _check_square(rho)
    lam, vec = eigh_hermitian(rho.matrix)
    kraus = []
    for (m, n), phi in bell_basis(d).items():
        phi_c = phi.reshape(d, d).conj()
        corr = correction(d, m, n)
        for p, chi in zip(lam, vec.T):
            if p <= 1e-14:
                continue
            # <Phi|_{3A} (|s>_3 |chi>_AB) = sum_a conj(Phi[s, a]) chi[a, b]
            kraus.append(np.sqrt(p) * corr @ (phi_c @ chi.reshape(d, d)).T)
    raw = Channel(tuple(kraus), trace_preserving=False)
    return channel_from_state(BipartiteState(choi_matrix(raw), d, d), trace_preserving=True)


def teleport_outcomes(rho: BipartiteState, psi: np.ndarray) -> list[TeleportOutcome]:
    """All Bell outcomes with their Born probabilities and Bob's corrected states.

    Evaluated literally on the three-party state ``|psi><psi| (x) rho``
    ordered as (input, A, B).
    """
    d = _check_square(rho)
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.size != d:
        raise ValueError(f"input state of length {psi.size} does not match d={d}")
    psi = psi / np.linalg.norm(psi)
    total = np.kron(np.outer(psi, psi.conj()), rho.matrix)
    out = []
    for (m, n), phi in bell_basis(d).items():
        proj = np.kron(np.outer(phi, phi.conj()), np.eye(d))
        bob = partial_trace(proj @ total @ proj, (d, d, d), 2)
        prob = float(np.trace(bob).real)
        corr = correction(d, m, n)
        state = corr @ bob @ dagger(corr) / prob if prob > 1e-14 else np.zeros((d, d), dtype=complex)
        out.append(TeleportOutcome((m, n), prob, state))
    return out


def teleport_sample(rho: BipartiteState, psi: np.ndarray, rng: np.random.Generator) -> TeleportOutcome:
    """Run the protocol once, drawing Alice's outcome from its Born distribution."""
    outs = teleport_outcomes(rho, psi)
    probs = np.array([o.probability for o in outs])
    return outs[rng.choice(len(outs), p=probs / probs.sum())]


def optimal_teleport_channel(rho: BipartiteState) -> Channel:
    """Twirl ``rho`` into its noisy singlet, then teleport through it."""
    return standard_teleport_channel(twirl_state_exact(rho).state())


def optimal_fidelity_from_fraction(d: int, F_max: float) -> float:
    """Best teleportation fidelity ``(F_max d + 1)/(d + 1)`` given the best singlet fraction."""
    if not 1 / d**2 - 1e-12 <= F_max <= 1 + 1e-12:
        raise ValueError(f"F_max={F_max} outside [1/d^2, 1]")
    return (F_max * d + 1) / (d + 1)


def classical_fidelity(d: int) -> float:
    """Best fidelity reachable with no shared entanglement, ``2/(d + 1)``."""
    if d < 2:
        raise ValueError("d must be >= 2")
    return 2 / (d + 1)
