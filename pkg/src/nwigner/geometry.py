"""Joint numerical range, singular set, commuting atoms and near-commuting ellipses."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import DimensionMismatch, NotCommuting, NotOrthonormal, ZeroDirection
from .operators import OperatorTuple, QuantumState, make_tuple

DEGENERACY_RTOL = 1e-8
COMMUTE_RTOL = 1e-10
MERGE_TOL = 1e-8

__all__ = [
    "SupportSample",
    "SingularPoint",
    "SingularSet",
    "WeightedAtoms",
    "JNRApproximation",
    "support_point",
    "jnr_boundary",
    "singular_points",
    "commuting_weights",
    "near_commuting_ellipse",
    "kippenhahn_curve",
    "adaptive_angles",
    "compress",
    "circle_directions",
    "random_directions",
    "expectations",
    "hausdorff",
    "directed_distance",
]


def circle_directions(count: int, offset: float = 0.0) -> np.ndarray:
    """``count`` unit vectors in the plane at equally spaced angles."""
    theta = offset + 2 * np.pi * np.arange(count) / count
    return np.stack([np.cos(theta), np.sin(theta)], axis=1)


def random_directions(n: int, count: int, seed) -> np.ndarray:
    """Uniform random unit vectors in R^n."""
    x = np.random.default_rng(seed).standard_normal((count, n))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def expectations(tup: OperatorTuple, vectors) -> np.ndarray:
    """``<v|A_k|v>`` for every column ``v``; shape ``(columns, n)``."""
    v = np.asarray(vectors)
    return np.einsum("aj,kab,bj->jk", v.conj(), tup.matrices, v).real


def _directions(tup: OperatorTuple, directions) -> np.ndarray:
    d = np.atleast_2d(np.asarray(directions, dtype=float))
    if d.shape[1] != tup.n:
        raise DimensionMismatch(f"directions have {d.shape[1]} components, tuple has {tup.n}")
    norms = np.linalg.norm(d, axis=1)
    if np.any(norms == 0):
        raise ZeroDirection("directions must be nonzero")
    return d / norms[:, None]


@dataclass(frozen=True)
class SupportSample:
    direction: np.ndarray
    height: float
    point: np.ndarray
    degenerate: bool = False


def support_point(tup: OperatorTuple, xi) -> SupportSample:
    """Support function ``lambda_max(xi . A)`` and an exposed point of the range.

    The point is the expectation tuple of a top eigenvector.  When the top
    eigenvalue is degenerate the sample is flagged and the point is one
    exposed point of the face.
    """
    u = _directions(tup, xi)[0]
    lam, v = np.linalg.eigh(np.tensordot(u, tup.matrices, axes=1))
    scale = max(float(np.max(np.abs(lam))), np.finfo(float).tiny)
    degenerate = len(lam) > 1 and lam[-1] - lam[-2] < DEGENERACY_RTOL * scale
    return SupportSample(u, float(lam[-1]), expectations(tup, v[:, -1:])[0], bool(degenerate))


@dataclass(frozen=True)
class JNRApproximation:
    """Outer approximation of the joint numerical range by supporting half-spaces.

    ``a`` is accepted iff ``u . a <= h(u) + tol`` for every sampled direction
    ``u``.  The approximation error shrinks as the directions get denser, so the
    tolerance should grow when directions are sparse.
    """

    samples: tuple[SupportSample, ...]

    @property
    def directions(self) -> np.ndarray:
        return np.array([s.direction for s in self.samples])

    @property
    def heights(self) -> np.ndarray:
        return np.array([s.height for s in self.samples])

    @property
    def points(self) -> np.ndarray:
        return np.array([s.point for s in self.samples])

    def excess(self, a) -> np.ndarray:
        """Largest violation ``max_u (u . a - h(u))`` for each row of ``a``."""
        a = np.atleast_2d(np.asarray(a, dtype=float))
        return np.max(a @ self.directions.T - self.heights, axis=1)

    def contains(self, a, tol: float = 1e-9) -> np.ndarray:
        return self.excess(a) <= tol

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def __getitem__(self, i):
        return self.samples[i]


def jnr_boundary(tup: OperatorTuple, directions) -> JNRApproximation:
    d = _directions(tup, directions)
    if len(d) == 0:
        raise ValueError("need at least one direction")
    return JNRApproximation(tuple(support_point(tup, u) for u in d))


@dataclass(frozen=True)
class SingularPoint:
    point: np.ndarray
    direction: np.ndarray
    eigenvalue: float
    gap: float


@dataclass(frozen=True)
class SingularSet:
    """Expectation points of eigenvectors belonging to non-degenerate eigenvalues.

    ``skipped`` counts eigenvalues dropped as degenerate.
    """

    entries: tuple[SingularPoint, ...]
    skipped: int = 0

    @property
    def points(self) -> np.ndarray:
        if not self.entries:
            return np.zeros((0, 0))
        return np.array([e.point for e in self.entries])

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def singular_points(tup: OperatorTuple, directions, rtol: float = DEGENERACY_RTOL) -> SingularSet:
    """Sample the singular set by diagonalizing ``xi . A`` for every direction.

    Every eigenvalue whose distance to its nearest neighbour exceeds
    ``rtol * ||xi . A||`` contributes the expectation tuple of its eigenvector.
    For two operators and a dense angle sweep this traces Kippenhahn's
    boundary generating curve.
    """
    d = _directions(tup, directions)
    h = np.tensordot(d, tup.matrices, axes=1)
    lam, v = np.linalg.eigh(h)
    entries = []
    skipped = 0
    for i, u in enumerate(d):
        ev = lam[i]
        scale = max(float(np.max(np.abs(ev))), np.finfo(float).tiny)
        diffs = np.diff(ev)
        gaps = np.minimum(np.r_[np.inf, diffs], np.r_[diffs, np.inf])
        if len(ev) == 1:
            gaps = np.array([np.inf])
        pts = expectations(tup, v[i])
        for j, g in enumerate(gaps):
            if g < rtol * scale:
                skipped += 1
                continue
            entries.append(SingularPoint(pts[j], u, float(ev[j]), float(g)))
    return SingularSet(tuple(entries), skipped)


@dataclass(frozen=True)
class WeightedAtoms:
    locations: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.weights)

    def mean(self) -> np.ndarray:
        return self.weights @ self.locations


def _commute_check(tup: OperatorTuple, rtol: float):
    mats = tup.matrices
    norms = np.linalg.norm(mats, ord=2, axis=(1, 2))
    for j in range(tup.n):
        for k in range(j + 1, tup.n):
            c = mats[j] @ mats[k] - mats[k] @ mats[j]
            if np.linalg.norm(c, 2) > rtol * max(norms[j] * norms[k], np.finfo(float).tiny):
                raise NotCommuting(f"[A{j + 1}, A{k + 1}] does not vanish")


def _joint_basis(tup: OperatorTuple, seed: int) -> np.ndarray:
    coeffs = np.random.default_rng(seed).standard_normal(tup.n)
    _, v = np.linalg.eigh(np.tensordot(coeffs, tup.matrices, axes=1))
    return v


def _atoms_from_basis(state, tup, v, merge_tol) -> WeightedAtoms:
    locs = expectations(tup, v)
    w = np.einsum("aj,ab,bj->j", v.conj(), state.rho, v).real
    order = np.lexsort(locs.T[::-1])
    merged_locs, merged_w = [], []
    for j in order:
        for i, loc in enumerate(merged_locs):
            if np.max(np.abs(loc - locs[j])) <= merge_tol:
                merged_w[i] += w[j]
                break
        else:
            merged_locs.append(locs[j])
            merged_w.append(w[j])
    merged_locs, merged_w = np.array(merged_locs), np.array(merged_w)
    # sort on rounded keys so rounding noise cannot reorder atoms
    order = np.lexsort(np.round(merged_locs, 6).T[::-1])
    return WeightedAtoms(merged_locs[order], merged_w[order])


def _same_atoms(a: WeightedAtoms, b: WeightedAtoms, atol: float = 1e-7) -> bool:
    if a.locations.shape != b.locations.shape:
        return False
    dist, idx = cKDTree(b.locations).query(a.locations)
    return (np.all(dist <= atol) and len(set(idx.tolist())) == len(idx)
            and np.allclose(a.weights, b.weights[idx], atol=atol))


def commuting_weights(state: QuantumState, tup: OperatorTuple, merge_tol: float = MERGE_TOL,
                      commute_rtol: float = COMMUTE_RTOL) -> WeightedAtoms:
    """Atoms of the Wigner distribution of a commuting tuple.

    A joint eigenbasis comes from diagonalizing one random combination of the
    operators; a second seed is used as a cross-check.
    """
    _commute_check(tup, commute_rtol)
    atoms = _atoms_from_basis(state, tup, _joint_basis(tup, 0), merge_tol)
    check = _atoms_from_basis(state, tup, _joint_basis(tup, 1), merge_tol)
    if not _same_atoms(atoms, check):
        raise NotCommuting("joint eigenbasis is not stable under a change of combination")
    return atoms


def _pair_points(tup: OperatorTuple, theta: np.ndarray) -> np.ndarray:
    d = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    _, v = np.linalg.eigh(np.tensordot(d, tup.matrices, axes=1))
    return np.einsum("maj,kab,mbj->mjk", v.conj(), tup.matrices, v).real


def adaptive_angles(tup: OperatorTuple, step: float = 1e-2, base: int = 256,
                    min_width: float = 1e-12, max_points: int = 2_000_000) -> np.ndarray:
    """Angles whose singular points are at most ``step`` apart along every branch.

    Starts from ``base`` equally spaced angles and bisects each interval whose
    endpoint expectation tuples (per sorted eigenvalue index) are farther
    apart than ``step``.  Intervals narrower than ``min_width`` are left alone:
    there the branch jumps across an exact eigenvalue crossing.
    """
    if tup.n != 2:
        raise DimensionMismatch("adaptive angle sweeps need exactly two operators")
    theta = (np.arange(base) + 0.5) * (2 * np.pi / base)
    pts = _pair_points(tup, theta)
    while len(theta) < max_points:
        nxt_theta = np.r_[theta[1:], theta[0] + 2 * np.pi]
        nxt_pts = np.roll(pts, -1, axis=0)
        jump = np.max(np.linalg.norm(nxt_pts - pts, axis=2), axis=1)
        split = (jump > step) & (nxt_theta - theta > min_width)
        if not split.any():
            break
        mid = (theta[split] + nxt_theta[split]) / 2
        theta = np.r_[theta, mid]
        pts = np.concatenate([pts, _pair_points(tup, mid)])
        order = np.argsort(theta)
        theta, pts = theta[order], pts[order]
    return theta


def kippenhahn_curve(tup: OperatorTuple, step: float = 1e-2, base: int = 256,
                     rtol: float = DEGENERACY_RTOL) -> SingularSet:
    """Singular set of an operator pair sampled at spatial resolution ``step``."""
    theta = adaptive_angles(tup, step=step, base=base)
    return singular_points(tup, np.stack([np.cos(theta), np.sin(theta)], axis=1), rtol=rtol)


def compress(matrix, q: np.ndarray) -> np.ndarray:
    """``Q^H M Q`` symmetrized."""
    b = q.conj().T @ np.asarray(matrix) @ q
    return (b + b.conj().T) / 2


def near_commuting_ellipse(a1, a2, psi_i, psi_j, step: float = 1e-3) -> np.ndarray:
    """Singular curve of ``(A1, A2)`` compressed to ``span{psi_i, psi_j}``.

    Returns an ``(m, 2)`` array of points on the Kippenhahn curve of the 2x2
    compressions: an ellipse, degenerating to the two atoms when the
    compressions commute.  Points are at most ``step`` apart.
    """
    q = np.stack([np.asarray(psi_i, dtype=complex).ravel(), np.asarray(psi_j, dtype=complex).ravel()], axis=1)
    if not np.allclose(q.conj().T @ q, np.eye(2), atol=1e-10):
        raise NotOrthonormal("psi_i and psi_j must be orthonormal")
    pair = make_tuple([compress(a1, q), compress(a2, q)])
    # rtol=0: a commuting compression must still yield both atoms
    return kippenhahn_curve(pair, step=step, rtol=0.0).points


def hausdorff(p, q) -> float:
    """Symmetric Hausdorff distance between two finite point sets."""
    return max(directed_distance(p, q), directed_distance(q, p))


def directed_distance(p, q) -> float:
    """``max_{x in p} min_{y in q} |x - y|``."""
    dist, _ = cKDTree(np.atleast_2d(q)).query(np.atleast_2d(p))
    return float(np.max(dist))
