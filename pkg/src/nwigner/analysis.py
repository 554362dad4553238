"""Structural checks: covariance, reducibility, informational completeness, qubit shell."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .charfn import char_values, qubit_char_closed_form
from .errors import DimensionMismatch, InvalidAction, NotReducing, TrivialB
from .operators import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    OperatorTuple,
    QuantumState,
    eigendecompose,
    make_tuple,
    pauli_triple,
)
from .wigner import compute_wigner, plan_grid

__all__ = [
    "SymmetryAction",
    "symmetry_action",
    "covariance_residual",
    "Block",
    "reduce_blocks",
    "RankReport",
    "hermitian_basis",
    "completeness_rank",
    "null_residual",
    "commutator_family",
    "QubitReport",
    "qubit_state",
    "qubit_wigner_check",
    "pentagon_fixture",
    "direct_sum",
]


@dataclass(frozen=True)
class SymmetryAction:
    """A unitary ``U`` with ``U^H A_k U = sum_l R[k, l] A_l``."""

    U: np.ndarray
    R: np.ndarray

    def defect(self, tup: OperatorTuple) -> float:
        mats = tup.matrices
        lhs = np.einsum("ba,kbc,cd->kad", self.U.conj(), mats, self.U)
        rhs = np.tensordot(self.R, mats, axes=1)
        return float(np.max(np.abs(lhs - rhs)))

    def validate(self, tup: OperatorTuple, atol: float = 1e-8):
        u = np.asarray(self.U)
        if u.shape != (tup.dim, tup.dim):
            raise InvalidAction(f"U has shape {u.shape}, expected {(tup.dim, tup.dim)}")
        if np.shape(self.R) != (tup.n, tup.n):
            raise InvalidAction(f"R has shape {np.shape(self.R)}, expected {(tup.n, tup.n)}")
        if not np.allclose(u.conj().T @ u, np.eye(tup.dim), atol=1e-10):
            raise InvalidAction("U is not unitary")
        defect = self.defect(tup)
        if defect > atol:
            raise InvalidAction(f"U does not act linearly on the tuple through R (defect {defect:.3e})")


def symmetry_action(U, tup: OperatorTuple) -> SymmetryAction:
    """Find ``R`` for a unitary ``U`` by Hilbert-Schmidt projection and validate it."""
    U = np.asarray(U, dtype=complex)
    mats = tup.matrices
    gram = np.einsum("lab,mba->lm", mats, mats).real
    conj = np.einsum("ba,kbc,cd->kad", U.conj(), mats, U)
    b = np.einsum("kab,lba->kl", conj, mats)
    if np.max(np.abs(b.imag)) > 1e-8 * max(1.0, np.max(np.abs(b))):
        raise InvalidAction("conjugated operators leave the real span of the tuple")
    action = SymmetryAction(U, np.linalg.solve(gram, b.real.T).T)
    action.validate(tup)
    return action


def covariance_residual(state: QuantumState, tup: OperatorTuple, action: SymmetryAction, xi_samples) -> float:
    """``max |phi_{U rho U^H}(xi) - phi_rho(R^T xi)|`` over the samples."""
    action.validate(tup)
    xis = np.atleast_2d(np.asarray(xi_samples, dtype=float))
    rotated = QuantumState(action.U @ state.rho @ action.U.conj().T)
    lhs = char_values(rotated, tup, xis)
    rhs = char_values(state, tup, xis @ action.R)
    return float(np.max(np.abs(lhs - rhs)))


@dataclass(frozen=True)
class Block:
    """Restriction to one eigenspace of a reducing operator.

    ``rho`` is the compressed, unnormalized density matrix, so block
    characteristic functions add up to the full one.
    """

    eigenvalue: float
    isometry: np.ndarray
    rho: np.ndarray
    tuple: OperatorTuple

    @property
    def weight(self) -> float:
        return float(np.trace(self.rho).real)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    def state(self) -> QuantumState:
        return QuantumState(self.rho / self.weight)

    def char_values(self, xis) -> np.ndarray:
        return char_values(self.rho, self.tuple, xis)


def reduce_blocks(state: QuantumState, tup: OperatorTuple, B, rtol: float = 1e-10) -> list[Block]:
    """Split the problem along the eigenspaces of a hermitian ``B`` commuting with every ``A_k``.

    Raises
    ------
    TrivialB
        If ``B`` is a multiple of the identity.
    NotReducing
        If some ``[B, A_k]`` does not vanish.
    """
    b = np.asarray(B, dtype=complex)
    if b.shape != (tup.dim, tup.dim):
        raise DimensionMismatch(f"B has shape {b.shape}, expected {(tup.dim, tup.dim)}")
    bnorm = np.linalg.norm(b, 2)
    if np.linalg.norm(b - np.trace(b) / tup.dim * np.eye(tup.dim), 2) <= 1e-10 * max(bnorm, 1.0):
        raise TrivialB("B is a multiple of the identity")
    for k, a in enumerate(tup.matrices):
        comm = b @ a - a @ b
        if np.linalg.norm(comm, 2) > rtol * max(bnorm * np.linalg.norm(a, 2), 1e-300):
            raise NotReducing(f"B does not commute with A{k + 1}")

    spectral = eigendecompose(b)
    lam, v = spectral.eigenvalues, spectral.eigenvectors
    scale = max(1.0, float(np.max(np.abs(lam))))
    groups, start = [], 0
    for j in range(1, len(lam) + 1):
        if j == len(lam) or lam[j] - lam[j - 1] > 1e-8 * scale:
            groups.append((float(np.mean(lam[start:j])), v[:, start:j]))
            start = j
    blocks = []
    for value, q in groups:
        ops = [q.conj().T @ a @ q for a in tup.matrices]
        sub = make_tuple([(o + o.conj().T) / 2 for o in ops], tup.names)
        r = q.conj().T @ state.rho @ q
        blocks.append(Block(value, q, (r + r.conj().T) / 2, sub))
    return blocks


def hermitian_basis(dim: int) -> np.ndarray:
    """Hilbert-Schmidt orthonormal basis of the ``dim^2``-dimensional real space of hermitian matrices."""
    basis = []
    for j in range(dim):
        e = np.zeros((dim, dim), dtype=complex)
        e[j, j] = 1
        basis.append(e)
    for j in range(dim):
        for k in range(j + 1, dim):
            s = np.zeros((dim, dim), dtype=complex)
            s[j, k] = s[k, j] = 1 / math.sqrt(2)
            a = np.zeros((dim, dim), dtype=complex)
            a[j, k], a[k, j] = -1j / math.sqrt(2), 1j / math.sqrt(2)
            basis += [s, a]
    return np.array(basis)


def commutator_family(tup: OperatorTuple) -> list[np.ndarray]:
    """``i [A_1, A_2^m]`` for ``m = 1 .. dim - 1`` (hermitian, traceless)."""
    if tup.n != 2:
        raise DimensionMismatch("the commutator family is defined for operator pairs")
    a1, a2 = tup.matrices
    out, power = [], np.eye(tup.dim, dtype=complex)
    for _ in range(1, tup.dim):
        power = power @ a2
        out.append(1j * (a1 @ power - power @ a1))
    return out


@dataclass(frozen=True)
class RankReport:
    samples: int
    sample_scale: float
    singular_values: np.ndarray
    threshold: float
    rank: int
    null_space: np.ndarray
    commutator_residuals: tuple[float, ...] = field(default=())

    @property
    def complete(self) -> bool:
        return self.null_space.shape[0] == 0

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "sample_distribution": f"xi ~ Normal(0, {self.sample_scale:.6g}^2 I)",
            "singular_values": [float(s) for s in self.singular_values],
            "threshold": self.threshold,
            "rank": self.rank,
            "null_dimension": int(self.null_space.shape[0]),
            "commutator_residuals": list(self.commutator_residuals),
        }


def _sample_map(tup: OperatorTuple, xis: np.ndarray, basis: np.ndarray) -> np.ndarray:
    lam, v = np.linalg.eigh(np.tensordot(xis, tup.matrices, axes=1))
    unitaries = np.einsum("maj,mj,mbj->mab", v, np.exp(1j * lam), v.conj())
    # tr(E U) for every basis element E and sample U
    values = np.einsum("eab,mba->me", basis, unitaries)
    return np.concatenate([values.real, values.imag], axis=0)


def null_residual(report: RankReport, X, basis: np.ndarray | None = None) -> float:
    """Relative distance of a hermitian ``X`` from the reported null space."""
    dim = int(round(math.sqrt(report.singular_values.size))) if basis is None else basis.shape[1]
    basis = hermitian_basis(dim) if basis is None else basis
    x = np.einsum("eab,ba->e", basis, np.asarray(X)).real
    norm = np.linalg.norm(x)
    if norm == 0:
        return 0.0
    x = x / norm
    n = report.null_space
    proj = n.T @ (n @ x) if n.size else np.zeros_like(x)
    return float(np.linalg.norm(x - proj))


def completeness_rank(tup: OperatorTuple, xi_samples=None, count: int = 200, seed=0,
                      rtol: float = 1e-8) -> RankReport:
    """Numerical rank of the real-linear map ``X -> (Re, Im) tr X exp(i xi.A)``.

    The map acts on the ``dim^2`` real coordinates of hermitian ``X``.  A full
    rank means the Wigner distribution determines the state.  Without explicit
    samples, ``count`` points are drawn from ``Normal(0, s^2 I)`` with
    ``s = 2 pi / max_k ||A_k||``.  For pairs, the residuals of every
    ``i [A_1, A_2^m]`` against the null space are reported as well.
    """
    dim = tup.dim
    radius = float(np.max(np.linalg.norm(tup.matrices, ord=2, axis=(1, 2))))
    scale = 2 * math.pi / max(radius, 1e-300)
    if xi_samples is None:
        xis = np.random.default_rng(seed).normal(scale=scale, size=(count, tup.n))
    else:
        xis = np.atleast_2d(np.asarray(xi_samples, dtype=float))
        if xis.shape[1] != tup.n:
            raise DimensionMismatch("sample dimension does not match the tuple")
        scale = float("nan")
    basis = hermitian_basis(dim)
    m = _sample_map(tup, xis, basis)
    _, sv, vt = np.linalg.svd(m, full_matrices=True)
    sv_full = np.zeros(dim * dim)
    sv_full[:len(sv)] = sv
    threshold = rtol * (sv_full[0] if sv_full.size else 0.0)
    rank = int(np.sum(sv_full > threshold))
    null = vt[rank:]
    report = RankReport(len(xis), scale, sv_full, float(threshold), rank, null)
    if tup.n == 2:
        residuals = tuple(null_residual(report, c, basis) for c in commutator_family(tup))
        report = RankReport(len(xis), scale, sv_full, float(threshold), rank, null, residuals)
    return report


def null_matrices(report: RankReport) -> list[np.ndarray]:
    """Null-space vectors of a report as hermitian matrices."""
    dim = int(round(math.sqrt(report.singular_values.size)))
    basis = hermitian_basis(dim)
    return [np.tensordot(x, basis, axes=1) for x in report.null_space]


def qubit_state(r0: float, r) -> QuantumState:
    r = np.asarray(r, dtype=float)
    return QuantumState(r0 * np.eye(2) + r[0] * SIGMA_X + r[1] * SIGMA_Y + r[2] * SIGMA_Z)


@dataclass(frozen=True)
class QubitReport:
    interior_ratio: float
    radii: np.ndarray
    radial_profile: np.ndarray
    outer_peak: tuple[float, float]
    inner_peak: tuple[float, float]
    charfn_error: float
    cos_bins: np.ndarray
    shell_profile: np.ndarray

    def to_dict(self) -> dict:
        return {
            "interior_ratio": self.interior_ratio,
            "outer_peak": {"radius": self.outer_peak[0], "value": self.outer_peak[1]},
            "inner_peak": {"radius": self.inner_peak[0], "value": self.inner_peak[1]},
            "charfn_error": self.charfn_error,
        }


def qubit_wigner_check(r0: float, r, epsilon: float, resolution=128, samples: int = 2000,
                       seed=0, grid=None) -> QubitReport:
    """Compare the 3D Pauli-triple Wigner grid with the qubit shell picture.

    Reports the largest ``|W|`` inside the ball ``|a| <= 1 - 6 sqrt(eps)``
    relative to the global maximum, the signed radial profile (shell
    averages), the positions of its positive and negative extremes, the
    outer-shell average per bin of ``cos(polar angle)``, and the agreement of
    the characteristic function with its closed form.
    """
    tup = pauli_triple()
    state = qubit_state(r0, r)
    if grid is None:
        grid = compute_wigner(state, tup, plan_grid(tup, epsilon, resolution))
    x, y, z = grid.spec.mesh()
    rad = np.sqrt(x**2 + y**2 + z**2)
    w = grid.values
    wmax = float(np.max(np.abs(w)))
    interior = rad <= 1 - 6 * math.sqrt(epsilon)
    ratio = float(np.max(np.abs(w[interior])) / wmax) if interior.any() else 0.0

    step = min(ax.step for ax in grid.spec.axes)
    edges = np.arange(0.0, float(rad.max()) + step, step)
    which = np.digitize(rad.ravel(), edges) - 1
    sums = np.bincount(which, weights=w.ravel(), minlength=len(edges))
    counts = np.bincount(which, minlength=len(edges))
    keep = counts > 0
    radii = (edges[:-1] + step / 2)[keep[:-1]]
    profile = (sums[:-1] / np.maximum(counts[:-1], 1))[keep[:-1]]
    outer = (float(radii[np.argmax(profile)]), float(profile.max()))
    inner = (float(radii[np.argmin(profile)]), float(profile.min()))

    band = (rad > 1) & (rad < 1 + 2 * math.sqrt(epsilon))
    cos_theta = np.where(rad > 0, z / np.where(rad > 0, rad, 1), 0)
    cos_edges = np.linspace(-1, 1, 11)
    cbin = np.clip(np.digitize(cos_theta[band], cos_edges) - 1, 0, 9)
    shell = np.bincount(cbin, weights=w[band], minlength=10) / np.maximum(np.bincount(cbin, minlength=10), 1)

    xis = np.random.default_rng(seed).normal(scale=3.0, size=(samples, 3))
    err = float(np.max(np.abs(char_values(state, tup, xis) - qubit_char_closed_form(r0, r, xis))))
    return QubitReport(ratio, radii, profile, outer, inner, err,
                       (cos_edges[:-1] + cos_edges[1:]) / 2, shell)


def pentagon_fixture(weights=(1.0, 1.3, 0.7, 1.15, 0.85)):
    """Operator pair with an order-5 symmetry, plus the symmetry unitary.

    ``C = A_1 + i A_2`` has entries only on the cyclic superdiagonal
    ``C[j, j+1 mod 5] = c_j``.  The clock unitary ``U = diag(w^j)`` with
    ``w = exp(2 pi i / 5)`` gives ``U^H C U = w C``, so ``U`` rotates
    ``(A_1, A_2)`` by ``2 pi / 5``.  Unequal weights keep the pair
    non-commuting.
    """
    c = np.zeros((5, 5), dtype=complex)
    for j, cj in enumerate(weights):
        c[j, (j + 1) % 5] = cj
    a1 = (c + c.conj().T) / 2
    a2 = (c - c.conj().T) / 2j
    omega = np.exp(2j * np.pi / 5)
    u = np.diag(omega ** np.arange(5))
    return make_tuple([a1, a2], ("P1", "P2")), u


def direct_sum(*tuples: OperatorTuple) -> OperatorTuple:
    """Block-diagonal tuple ``A_k = A_k^(1) (+) A_k^(2) (+) ...``."""
    n = tuples[0].n
    if any(t.n != n for t in tuples):
        raise DimensionMismatch("direct sum needs tuples of equal length")
    dim = sum(t.dim for t in tuples)
    mats = np.zeros((n, dim, dim), dtype=complex)
    off = 0
    for t in tuples:
        mats[:, off:off + t.dim, off:off + t.dim] = t.matrices
        off += t.dim
    return make_tuple(mats, tuples[0].names)
