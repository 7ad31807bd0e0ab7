"""Kraus-form channels and the state <-> channel isomorphism.

The Choi state of a channel is ``(I (x) L) P_+``: the channel acts on the
second factor of a maximally entangled pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .qmath import dagger, eigh_hermitian, haar_states, haar_unitary, partial_trace, weyl
from .states import BipartiteState, max_entangled, singlet_fraction

TP_TOL = 1e-9
REDUCTION_TOL = 1e-8
EIG_CUTOFF = 1e-12


class ChannelError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Channel:
    """Completely positive map ``rho -> sum_k K rho K^dag``.

    ``trace_preserving`` is a checked claim: constructing a channel flagged
    trace preserving whose Kraus operators do not satisfy
    ``sum K^dag K = I`` raises ``ChannelError``.
    """

    kraus: tuple[np.ndarray, ...]
    trace_preserving: bool = True
    d_in: int = field(init=False)
    d_out: int = field(init=False)

    def __post_init__(self):
        ks = tuple(np.array(k, dtype=complex) for k in self.kraus)
        if not ks:
            raise ChannelError("a channel needs at least one Kraus operator")
        shape = ks[0].shape
        if len(shape) != 2 or any(k.shape != shape for k in ks):
            raise ChannelError("Kraus operators must be matrices of equal shape")
        if not all(np.all(np.isfinite(k)) for k in ks):
            raise ChannelError("Kraus operators must have finite entries")
        for k in ks:
            k.setflags(write=False)
        object.__setattr__(self, "kraus", ks)
        object.__setattr__(self, "d_out", shape[0])
        object.__setattr__(self, "d_in", shape[1])
        if self.trace_preserving:
            err = np.max(np.abs(self.completeness() - np.eye(self.d_in)))
            if err > TP_TOL:
                raise ChannelError(f"sum K^dag K deviates from identity by {err:.3g}")

    def completeness(self) -> np.ndarray:
        """``sum_k K^dag K``."""
        return sum(dagger(k) @ k for k in self.kraus)

    @property
    def is_square(self) -> bool:
        return self.d_in == self.d_out

    def is_trace_nonincreasing(self, tol: float = TP_TOL) -> bool:
        return float(eigh_hermitian(self.completeness())[0][-1]) <= 1 + tol

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return apply(self, rho)


def apply(channel: Channel, rho) -> np.ndarray:
    """Apply ``channel`` to a density matrix (array or ``BipartiteState`` of matching size)."""
    m = rho.matrix if isinstance(rho, BipartiteState) else np.asarray(rho, dtype=complex)
    if m.shape != (channel.d_in, channel.d_in):
        raise ChannelError(f"input of shape {m.shape} does not match d_in={channel.d_in}")
    return sum(k @ m @ dagger(k) for k in channel.kraus)


def identity_channel(d: int) -> Channel:
    return Channel((np.eye(d),))


def unitary_channel(u: np.ndarray) -> Channel:
    return Channel((u,))


def depolarizing(d: int, p: float) -> Channel:
    """``sigma -> p sigma + (1 - p) I/d`` as a Weyl-operator mixture.

    Complete positivity allows ``-1/(d^2 - 1) <= p <= 1``.
    """
    lo = -1.0 / (d**2 - 1)
    if not lo - 1e-12 <= p <= 1 + 1e-12:
        raise ChannelError(f"p={p} outside the completely positive range [{lo}, 1]")
    w_other = max((1 - p) / d**2, 0.0)
    w_id = max(p + w_other, 0.0)
    kraus = []
    for m in range(d):
        for n in range(d):
            w = w_id if m == n == 0 else w_other
            if w > 0:
                kraus.append(np.sqrt(w) * weyl(d, m, n))
    return Channel(tuple(kraus))


def choi_matrix(channel: Channel) -> np.ndarray:
    """``(I (x) L) P_+`` as a raw matrix (unnormalized if the channel is not trace preserving)."""
    if not channel.is_square:
        raise ChannelError("the Choi state is defined here for square channels only")
    d = channel.d_in
    v = max_entangled(d)
    out = np.zeros((d * d, d * d), dtype=complex)
    for k in channel.kraus:
        w = np.kron(np.eye(d), k) @ v
        out += np.outer(w, w.conj())
    return out


def choi(channel: Channel) -> BipartiteState:
    return BipartiteState(choi_matrix(channel), channel.d_in, channel.d_in)


def channel_from_state(rho: BipartiteState, trace_preserving: bool | None = None) -> Channel:
    """Recover the unique CP map ``L`` with ``(I (x) L) P_+ = rho``.

    Each eigenvector ``sum_ij c_ij |i>|j>`` of ``rho`` with eigenvalue ``p_k``
    gives the Kraus operator ``sqrt(p_k d) C^T`` (``C = [c_ij]``).

    Parameters
    ----------
    rho : BipartiteState
        State on ``C^d (x) C^d``.
    trace_preserving : bool or None
        ``True`` demands a channel and raises unless ``Tr_B rho = I/d``;
        ``False`` never flags the result as trace preserving; ``None`` decides
        from the first reduction.

    Returns
    -------
    Channel
    """
    if rho.d_a != rho.d_b:
        raise ChannelError(f"channel_from_state needs a d x d state, got {rho.dims}")
    d = rho.d_a
    red_err = np.max(np.abs(rho.reduced(0) - np.eye(d) / d))
    if trace_preserving and red_err > REDUCTION_TOL:
        raise ChannelError(f"first reduction differs from I/d by {red_err:.3g}; no trace-preserving channel")
    tp = red_err <= REDUCTION_TOL if trace_preserving is None else trace_preserving
    lam, vec = eigh_hermitian(rho.matrix)
    kraus = []
    for p, v in zip(lam, vec.T):
        if p > EIG_CUTOFF:
            kraus.append(np.sqrt(p * d) * v.reshape(d, d).T)
    ch = Channel(tuple(kraus), trace_preserving=False)
    if tp:
        # absorb the O(eps) completeness error left by the eigensolver
        a = ch.completeness()
        lam_a, vec_a = eigh_hermitian(a)
        fix = (vec_a / np.sqrt(lam_a)) @ dagger(vec_a)
        ch = Channel(tuple(k @ fix for k in kraus), trace_preserving=True)
    return ch


def choi_distance(a: Channel, b: Channel) -> float:
    """Max-entry distance between Choi matrices; zero iff the maps are equal."""
    return float(np.max(np.abs(choi_matrix(a) - choi_matrix(b))))


def entanglement_fidelity(channel: Channel) -> float:
    return singlet_fraction(choi(channel))


def channel_fidelity_exact(channel: Channel) -> float:
    """Average fidelity ``(F d + 1)/(d + 1)`` from the entanglement fidelity ``F``."""
    if not channel.is_square:
        raise ChannelError("average fidelity needs a square channel")
    if not channel.trace_preserving:
        raise ChannelError("average fidelity formula holds for trace-preserving channels only")
    d = channel.d_in
    return (entanglement_fidelity(channel) * d + 1) / (d + 1)


def channel_fidelity_mc(
    channel: Channel, samples: int, rng: np.random.Generator, batch: int = 4096
) -> tuple[float, float]:
    """Monte-Carlo estimate of ``int dphi <phi| L(|phi><phi|) |phi>``.

    Returns
    -------
    mean, std_err : float
        Sample mean over Haar-random inputs and its standard error.
    """
    if not channel.is_square or not channel.trace_preserving:
        raise ChannelError("average fidelity needs a square trace-preserving channel")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    d = channel.d_in
    vals = np.empty(samples)
    done = 0
    while done < samples:
        n = min(batch, samples - done)
        phis = haar_states(d, n, rng)
        acc = np.zeros(n)
        for k in channel.kraus:
            amp = np.einsum("ni,ij,nj->n", phis.conj(), k, phis)
            acc += np.abs(amp) ** 2
        vals[done : done + n] = acc
        done += n
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / np.sqrt(samples)) if samples > 1 else 0.0
    return mean, se


def random_channel(d: int, rng: np.random.Generator, env_dim: int | None = None) -> Channel:
    """Stinespring channel: Haar unitary on system (x) environment, environment traced out."""
    e = d if env_dim is None else env_dim
    u = haar_unitary(d * e, rng).reshape(d, e, d, e)
    # environment starts in |0>; Kraus index is the final environment state
    kraus = tuple(u[:, j, :, 0] for j in range(e))
    return Channel(kraus)


def stinespring_reduce(channel: Channel, rho: np.ndarray) -> np.ndarray:
    """Reference evaluation of ``L(rho)`` through the isometry ``V = sum_k K (x) |k>``."""
    v = np.concatenate([k[:, None, :] for k in channel.kraus], axis=1).reshape(-1, channel.d_in)
    big = v @ rho @ dagger(v)
    return partial_trace(big, (channel.d_out, len(channel.kraus)), 0)
