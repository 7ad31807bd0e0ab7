"""JSON formats for states and channels.

Matrices are flat row-major lists of ``[re, im]`` pairs::

    {"d_a": 2, "d_b": 2, "matrix": [[0.5, 0.0], [0.0, 0.0], ...]}
    {"d_in": 2, "d_out": 2, "kraus": [[[1.0, 0.0], ...], ...], "trace_preserving": true}
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .channels import Channel
from .states import BipartiteState


class FormatError(ValueError):
    pass


def matrix_to_json(m: np.ndarray) -> list[list[float]]:
    m = np.asarray(m, dtype=complex)
    return [[float(z.real), float(z.imag)] for z in m.ravel()]


def matrix_from_json(entries, rows: int, cols: int) -> np.ndarray:
    try:
        arr = np.asarray(entries, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"matrix entries are not [re, im] number pairs: {exc}") from None
    if arr.shape != (rows * cols, 2):
        raise FormatError(f"expected {rows * cols} [re, im] pairs, got array of shape {arr.shape}")
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(rows, cols)


def _field(obj: dict, name: str, kind):
    if not isinstance(obj, dict) or name not in obj:
        raise FormatError(f"missing field {name!r}")
    val = obj[name]
    if kind is int and (isinstance(val, bool) or not isinstance(val, int) or val < 1):
        raise FormatError(f"field {name!r} must be a positive integer")
    if kind is bool and not isinstance(val, bool):
        raise FormatError(f"field {name!r} must be a boolean")
    return val


def state_to_dict(rho: BipartiteState) -> dict:
    return {"d_a": rho.d_a, "d_b": rho.d_b, "matrix": matrix_to_json(rho.matrix)}


def state_from_dict(obj: dict) -> BipartiteState:
    """Parse and re-validate; invariant violations raise ``InvalidStateError``."""
    d_a = _field(obj, "d_a", int)
    d_b = _field(obj, "d_b", int)
    n = d_a * d_b
    return BipartiteState(matrix_from_json(_field(obj, "matrix", list), n, n), d_a, d_b)


def channel_to_dict(ch: Channel) -> dict:
    return {
        "d_in": ch.d_in,
        "d_out": ch.d_out,
        "kraus": [matrix_to_json(k) for k in ch.kraus],
        "trace_preserving": ch.trace_preserving,
    }


def channel_from_dict(obj: dict) -> Channel:
    d_in = _field(obj, "d_in", int)
    d_out = _field(obj, "d_out", int)
    kraus = _field(obj, "kraus", list)
    tp = _field(obj, "trace_preserving", bool)
    return Channel(tuple(matrix_from_json(k, d_out, d_in) for k in kraus), trace_preserving=tp)


def _read(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from None


def load_state(path) -> BipartiteState:
    return state_from_dict(_read(path))


def save_state(rho: BipartiteState, path) -> None:
    Path(path).write_text(json.dumps(state_to_dict(rho)))


def load_channel(path) -> Channel:
    return channel_from_dict(_read(path))


def save_channel(ch: Channel, path) -> None:
    Path(path).write_text(json.dumps(channel_to_dict(ch)))
