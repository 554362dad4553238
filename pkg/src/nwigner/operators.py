"""Operator tuples, density matrices and the standard operator families.

Conventions
-----------
* Hermiticity is checked relative to the max-norm of the matrix with tolerance
  ``HERMITIAN_RTOL``; anything below it is silently symmetrized.
* Spin matrices use the J_z eigenbasis ordered by *descending* magnetic quantum
  number, so basis index ``i`` carries ``m = s - i``.
* Random hermitian matrices draw from ``numpy.random.default_rng(seed)``
  (PCG64).  Entries of ``M`` are i.i.d. standard complex normal,
  ``(x + i y) / sqrt(2)``, and the result is ``(M + M^dagger) / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    InvalidSpin,
    InvalidState,
    NotHermitian,
    NotSquare,
    ZeroVector,
)

HERMITIAN_RTOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10

__all__ = [
    "HermitianOperator",
    "OperatorTuple",
    "QuantumState",
    "SpectralData",
    "make_hermitian",
    "make_tuple",
    "pauli_triple",
    "spin_triple",
    "random_hermitian",
    "random_unitary",
    "density_from_pure",
    "maximally_mixed",
    "random_state",
    "linear_combination",
    "eigendecompose",
    "asymmetry",
]


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=complex, copy=True)
    out.setflags(write=False)
    return out


def asymmetry(matrix) -> float:
    """Relative hermiticity defect ``max|M - M^H| / max|M|`` (0 for M = 0)."""
    m = np.asarray(matrix)
    scale = np.max(np.abs(m)) if m.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(m - m.conj().T)) / scale)


@dataclass(frozen=True)
class HermitianOperator:
    """A validated hermitian ``dim x dim`` matrix (read-only)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise NotSquare(f"expected a nonempty square matrix, got shape {m.shape}")
        if asymmetry(m) > HERMITIAN_RTOL:
            raise NotHermitian(f"relative asymmetry {asymmetry(m):.3e} exceeds {HERMITIAN_RTOL}")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


@dataclass(frozen=True)
class OperatorTuple:
    """The ordered operators ``(A_1, ..., A_n)`` acting on one Hilbert space."""

    ops: tuple[HermitianOperator, ...]
    names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        ops = tuple(op if isinstance(op, HermitianOperator) else make_hermitian(op) for op in self.ops)
        if not ops:
            raise DimensionMismatch("an operator tuple needs at least one operator")
        dims = {op.dim for op in ops}
        if len(dims) != 1:
            raise DimensionMismatch(f"operators have differing dimensions {sorted(dims)}")
        names = tuple(self.names) or tuple(f"A{k + 1}" for k in range(len(ops)))
        if len(names) != len(ops):
            raise DimensionMismatch("one name per operator expected")
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "names", names)
        stack = np.stack([op.matrix for op in ops])
        stack.setflags(write=False)
        object.__setattr__(self, "_stack", stack)

    @property
    def n(self) -> int:
        return len(self.ops)

    @property
    def dim(self) -> int:
        return self.ops[0].dim

    @property
    def matrices(self) -> np.ndarray:
        """Stacked operators, shape ``(n, dim, dim)``."""
        return self._stack

    def __len__(self):
        return self.n

    def __getitem__(self, k) -> HermitianOperator:
        return self.ops[k]

    def select(self, indices: Sequence[int]) -> "OperatorTuple":
        return OperatorTuple(tuple(self.ops[i] for i in indices), tuple(self.names[i] for i in indices))

    def extreme_eigenvalues(self) -> np.ndarray:
        """Per-operator ``(min, max)`` eigenvalues, shape ``(n, 2)``."""
        ev = np.linalg.eigvalsh(self.matrices)
        return np.stack([ev[:, 0], ev[:, -1]], axis=1)


@dataclass(frozen=True)
class QuantumState:
    """A density matrix: hermitian, unit trace, positive semidefinite."""

    rho: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.rho)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise NotSquare(f"expected a nonempty square matrix, got shape {m.shape}")
        if asymmetry(m) > HERMITIAN_RTOL:
            raise InvalidState(f"density matrix is not hermitian (defect {asymmetry(m):.3e})")
        m = (m + m.conj().T) / 2
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidState(f"trace {tr!r} differs from 1")
        lmin = np.linalg.eigvalsh(m)[0]
        if lmin < -PSD_TOL:
            raise InvalidState(f"density matrix has negative eigenvalue {lmin:.3e}")
        object.__setattr__(self, "rho", _frozen(m))

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    def expectation(self, op) -> float:
        return float(np.trace(self.rho @ np.asarray(op)).real)

    def mix(self, other: "QuantumState", alpha: float) -> "QuantumState":
        """Convex combination ``alpha * self + (1 - alpha) * other``."""
        return QuantumState(alpha * self.rho + (1 - alpha) * other.rho)


@dataclass(frozen=True)
class SpectralData:
    """Ascending eigenvalues and the matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def projectors(self, tol: float = 1e-10) -> list[tuple[float, np.ndarray]]:
        """Group numerically equal eigenvalues and return ``(value, projector)`` pairs.

        Downstream code uses projectors rather than vectors so that results do
        not depend on the eigenvector choice inside degenerate eigenspaces.
        """
        lam, v = self.eigenvalues, self.eigenvectors
        scale = max(1.0, float(np.max(np.abs(lam))))
        out = []
        start = 0
        for j in range(1, len(lam) + 1):
            if j == len(lam) or lam[j] - lam[j - 1] > tol * scale:
                block = v[:, start:j]
                out.append((float(np.mean(lam[start:j])), block @ block.conj().T))
                start = j
        return out


def make_hermitian(matrix) -> HermitianOperator:
    """Validate ``matrix`` and return it as a symmetrized hermitian operator.

    Raises
    ------
    NotSquare
        If ``matrix`` is not a nonempty square 2D array.
    NotHermitian
        If the relative asymmetry exceeds ``HERMITIAN_RTOL``.
    """
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise NotSquare(f"expected a nonempty square matrix, got shape {m.shape}")
    if asymmetry(m) > HERMITIAN_RTOL:
        raise NotHermitian(f"relative asymmetry {asymmetry(m):.3e} exceeds {HERMITIAN_RTOL}")
    return HermitianOperator((m + m.conj().T) / 2)


def make_tuple(matrices: Iterable, names: Sequence[str] = ()) -> OperatorTuple:
    return OperatorTuple(tuple(make_hermitian(m) for m in matrices), tuple(names))


SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def pauli_triple() -> OperatorTuple:
    """The Pauli matrices ``(sigma_x, sigma_y, sigma_z)``."""
    return make_tuple([SIGMA_X, SIGMA_Y, SIGMA_Z], ("sx", "sy", "sz"))


def _spin_value(s) -> Fraction:
    try:
        two_s = Fraction(s).limit_denominator(1000) * 2
    except (TypeError, ValueError) as exc:
        raise InvalidSpin(f"spin must be a half-integer, got {s!r}") from exc
    if two_s.denominator != 1 or two_s < 1 or abs(float(two_s) - 2 * float(s)) > 1e-9:
        raise InvalidSpin(f"spin must be a positive half-integer, got {s!r}")
    return two_s / 2


def spin_triple(s) -> OperatorTuple:
    """Angular momentum matrices ``(J_x, J_y, J_z)`` of spin ``s`` (hbar = 1).

    The basis is ordered ``m = s, s-1, ..., -s``.
    """
    s = _spin_value(s)
    dim = int(2 * s + 1)
    m = np.array([float(s) - i for i in range(dim)])
    sf = float(s)
    # raising operator: <m+1|J+|m> = sqrt(s(s+1) - m(m+1)), m+1 sits one index up
    jp = np.diag(np.sqrt(sf * (sf + 1) - m[1:] * (m[1:] + 1)), k=1).astype(complex)
    jm = jp.conj().T
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    jz = np.diag(m).astype(complex)
    return make_tuple([jx, jy, jz], ("Jx", "Jy", "Jz"))


def spin_basis_index(s, m) -> int:
    """Basis index of the ``J_z`` eigenvector with magnetic number ``m``."""
    s = _spin_value(s)
    idx = float(s) - float(m)
    if abs(idx - round(idx)) > 1e-9 or not 0 <= round(idx) <= 2 * s:
        raise InvalidSpin(f"m={m} is not a magnetic number of spin {s}")
    return int(round(idx))


def random_hermitian(dim: int, seed) -> HermitianOperator:
    """GUE-style random hermitian matrix, deterministic in ``seed``."""
    if dim < 1:
        raise NotSquare("dim must be >= 1")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    return HermitianOperator((z + z.conj().T) / 2)


def random_unitary(dim: int, seed) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_state(dim: int, seed, rank: int | None = None) -> QuantumState:
    """Random density matrix ``G G^H / tr`` with ``G`` a ``dim x rank`` Ginibre matrix."""
    rng = np.random.default_rng(seed)
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return QuantumState(rho / np.trace(rho).real)


def density_from_pure(vector) -> QuantumState:
    """Rank-one state ``|psi><psi| / <psi|psi>``."""
    psi = np.asarray(vector, dtype=complex).ravel()
    norm2 = float(np.vdot(psi, psi).real)
    if psi.size == 0 or norm2 == 0.0:
        raise ZeroVector("cannot build a state from the zero vector")
    return QuantumState(np.outer(psi, psi.conj()) / norm2)


def maximally_mixed(dim: int) -> QuantumState:
    return QuantumState(np.eye(dim) / dim)


def linear_combination(tup: OperatorTuple, xi) -> HermitianOperator:
    """``xi . A = sum_k xi_k A_k``."""
    xi = np.asarray(xi, dtype=float).ravel()
    if xi.shape != (tup.n,):
        raise DimensionMismatch(f"direction has length {xi.size}, tuple has {tup.n} operators")
    return HermitianOperator(np.tensordot(xi, tup.matrices, axes=1))


def eigendecompose(h) -> SpectralData:
    m = np.asarray(h)
    try:
        lam, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return SpectralData(lam, v)
