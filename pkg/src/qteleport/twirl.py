"""``U (x) U*`` twirling of states and the matching twirl of channels."""

from __future__ import annotations

import numpy as np

from .channels import Channel, ChannelError, channel_from_state, choi
from .qmath import dagger, haar_unitary
from .states import BipartiteState, NoisySinglet, p_from_fraction, singlet_fraction


def twirl_state_exact(rho: BipartiteState) -> NoisySinglet:
    """Closed-form twirl: the invariant-family member with the same singlet fraction.

    Inputs with singlet fraction below ``1/d^2`` map to ``p < 0``.
    """
    if rho.d_a != rho.d_b:
        raise ValueError(f"twirling needs a d x d state, got {rho.dims}")
    d = rho.d_a
    return NoisySinglet(d, p_from_fraction(d, singlet_fraction(rho)))


def conjugate_uu_star(rho: np.ndarray, u: np.ndarray) -> np.ndarray:
    w = np.kron(u, u.conj())
    return w @ rho @ dagger(w)


def twirl_state_mc(rho: BipartiteState, samples: int, rng: np.random.Generator) -> BipartiteState:
    """Empirical average of ``(U (x) U*) rho (U (x) U*)^dag`` over Haar ``U``."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if rho.d_a != rho.d_b:
        raise ValueError(f"twirling needs a d x d state, got {rho.dims}")
    acc = np.zeros_like(rho.matrix)
    for _ in range(samples):
        acc += conjugate_uu_star(rho.matrix, haar_unitary(rho.d_a, rng))
    return BipartiteState(acc / samples, rho.d_a, rho.d_b)


def twirl_channel(
    channel: Channel,
    samples: int | None = None,
    rng: np.random.Generator | None = None,
) -> Channel:
    """Twirl a channel: random ``U`` before it, ``U^dag`` after it.

    With ``samples=None`` the result is exact: the channel is mapped to its
    Choi state, twirled in closed form and mapped back, which gives the
    depolarizing channel of equal entanglement fidelity. Otherwise the Choi
    matrices of ``U^dag o L o U`` are averaged over ``samples`` Haar draws.
    """
    if not channel.is_square or not channel.trace_preserving:
        raise ChannelError("twirling is defined for square trace-preserving channels")
    rho = choi(channel)
    if samples is None:
        return channel_from_state(twirl_state_exact(rho).state(), trace_preserving=True)
    if rng is None:
        raise ValueError("Monte-Carlo twirl needs an rng")
    d = channel.d_in
    acc = np.zeros_like(rho.matrix)
    for _ in range(samples):
        u = haar_unitary(d, rng)
        # Choi of U^dag L(U . U^dag) U is (U^T (x) U^dag) rho_L (U^T (x) U^dag)^dag
        acc += conjugate_uu_star(rho.matrix, u.T)
    return channel_from_state(BipartiteState(acc / samples, d, d), trace_preserving=True)
