"""Characteristic function ``phi(xi) = tr rho exp(i xi . A)``.

The exponential is taken through the spectral decomposition of the hermitian
matrix ``xi . A``; with ``xi . A = V diag(lam) V^H``::

    phi(xi) = sum_j exp(i lam_j) <v_j| rho |v_j>

Inverse transform convention (used by :mod:`nwigner.wigner`)::

    W(a) = (2 pi)^-n  int dxi  exp(-i xi . a) phi(xi)
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConvergenceFailure, DimensionMismatch, LatticeTooLarge
from .operators import OperatorTuple, QuantumState, linear_combination, eigendecompose

DEFAULT_MAX_SAMPLES = 2**28

__all__ = [
    "CharSample",
    "char_value",
    "char_values",
    "char_grid",
    "symmetric_lattice",
    "qubit_char_closed_form",
    "DEFAULT_MAX_SAMPLES",
]


@dataclass(frozen=True)
class CharSample:
    xi: np.ndarray
    value: complex


def _check_dims(rho: np.ndarray, tup: OperatorTuple):
    if rho.shape[0] != tup.dim:
        raise DimensionMismatch(f"state has dim {rho.shape[0]}, operators have dim {tup.dim}")


def _rho_of(state) -> np.ndarray:
    return state.rho if isinstance(state, QuantumState) else np.asarray(state, dtype=complex)


def char_value(state, tup: OperatorTuple, xi) -> complex:
    """Characteristic function at a single point ``xi``.

    ``state`` may be a :class:`QuantumState` or any (not necessarily
    normalized) matrix; the map is linear in it.
    """
    rho = _rho_of(state)
    _check_dims(rho, tup)
    spec = eigendecompose(linear_combination(tup, xi))
    v = spec.eigenvectors
    weights = np.einsum("aj,ab,bj->j", v.conj(), rho, v).real
    return complex(np.sum(np.exp(1j * spec.eigenvalues) * weights))


def _chunk_values(rho, mats, xis):
    h = np.tensordot(xis, mats, axes=1)
    try:
        lam, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    weights = np.einsum("maj,ab,mbj->mj", v.conj(), rho, v).real
    return np.sum(np.exp(1j * lam) * weights, axis=1)


def char_values(state, tup: OperatorTuple, xis) -> np.ndarray:
    """Characteristic function at each row of ``xis`` (shape ``(m, n)``)."""
    rho = _rho_of(state)
    _check_dims(rho, tup)
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    if xis.shape[1] != tup.n:
        raise DimensionMismatch(f"points have {xis.shape[1]} coordinates, tuple has {tup.n} operators")
    chunk = max(1, 2**22 // tup.dim**2)
    out = np.empty(len(xis), dtype=complex)
    for start in range(0, len(xis), chunk):
        out[start:start + chunk] = _chunk_values(rho, tup.matrices, xis[start:start + chunk])
    return out


def symmetric_lattice(spacing: float, half_count: int) -> np.ndarray:
    """1D lattice ``spacing * (-half_count, ..., half_count)``."""
    return spacing * np.arange(-half_count, half_count + 1, dtype=float)


def char_grid(state, tup: OperatorTuple, axes: Sequence[np.ndarray], *,
              max_samples: int = DEFAULT_MAX_SAMPLES, workers: int | None = None) -> np.ndarray:
    """Evaluate ``phi`` on the tensor lattice ``axes[0] x ... x axes[n-1]``.

    The work is split into contiguous chunks of the row-major flattened
    lattice; each chunk writes only its own slice, so the result does not
    depend on ``workers``.

    Raises
    ------
    LatticeTooLarge
        If the lattice holds more than ``max_samples`` points.
    """
    rho = _rho_of(state)
    _check_dims(rho, tup)
    axes = [np.asarray(ax, dtype=float).ravel() for ax in axes]
    if len(axes) != tup.n:
        raise DimensionMismatch(f"{len(axes)} lattice axes for {tup.n} operators")
    shape = tuple(len(ax) for ax in axes)
    total = int(np.prod(shape, dtype=np.int64))
    if total > max_samples:
        raise LatticeTooLarge(f"lattice of {total} points exceeds the cap of {max_samples}")

    out = np.empty(total, dtype=complex)
    chunk = max(1, 2**22 // tup.dim**2)
    mats = tup.matrices

    def work(start):
        stop = min(start + chunk, total)
        idx = np.unravel_index(np.arange(start, stop), shape)
        xis = np.stack([ax[i] for ax, i in zip(axes, idx)], axis=1)
        out[start:stop] = _chunk_values(rho, mats, xis)

    starts = range(0, total, chunk)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, starts))
    else:
        for start in starts:
            work(start)
    return out.reshape(shape)


def qubit_char_closed_form(r0, r, xi):
    """Closed form of ``phi`` for ``rho = r0 * 1 + r . sigma`` and the Pauli triple.

    ``tr[(r0 + r.sigma)(cos|xi| + i sin|xi| xi.sigma/|xi|)]
    = 2 r0 cos|xi| + 2i (r . xi/|xi|) sin|xi|``.  Accepts a single ``xi`` or
    an array of shape ``(..., 3)``; ``xi = 0`` evaluates to ``2 r0``.
    """
    r = np.asarray(r, dtype=float)
    if abs(2 * r0 - 1) > 1e-12 or np.linalg.norm(r) > 0.5 + 1e-12:
        warnings.warn("(r0, r) does not describe a normalized qubit state", stacklevel=2)
    xi = np.asarray(xi, dtype=float)
    norm = np.linalg.norm(xi, axis=-1)
    # sin|x|/|x| -> 1 at the origin
    sinc = np.sinc(norm / np.pi)
    value = 2 * r0 * np.cos(norm) + 2j * (xi @ r) * sinc
    return complex(value) if np.ndim(value) == 0 else value
