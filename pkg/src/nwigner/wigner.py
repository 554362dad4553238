"""Gaussian-regularized Wigner distributions on regular grids.

The smoothed distribution ``W * G_eps`` (``G_eps`` isotropic with covariance
``eps * identity``) has Fourier transform ``phi(xi) exp(-eps |xi|^2 / 2)``.
It is sampled on a periodic box ``[min_k, max_k)`` with ``count_k`` points;
the conjugate frequency lattice has spacing ``2 pi / L_k`` and reaches
``pi count_k / L_k``.  Inversion is a single forward FFT with an exact phase
factor ``exp(-i xi . min)`` for the box origin, so no interpolation happens
anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .charfn import DEFAULT_MAX_SAMPLES, char_grid, char_values
from .errors import BadAxis, BoxTooSmall, DimensionMismatch, LatticeTooLarge, ResolutionTooLow, ZeroDirection
from .operators import OperatorTuple, QuantumState, eigendecompose, linear_combination

ETA = 1e-9
DEFAULT_PAD = 6.0
MIN_PAD = 5.0
MAX_SAMPLES_3D = 256**3

__all__ = [
    "Axis",
    "GridSpec",
    "WignerGrid",
    "Density1D",
    "GridStats",
    "plan_grid",
    "plan_axis",
    "compute_wigner",
    "marginal_exact",
    "marginal_from_charfn",
    "grid_projection",
    "grid_stats",
    "ball_mass",
    "required_count",
    "default_max_samples",
]


@dataclass(frozen=True)
class Axis:
    """Periodic sampling of ``[min, max)`` with ``count`` equally spaced points."""

    min: float
    max: float
    count: int

    def __post_init__(self):
        object.__setattr__(self, "min", float(self.min))
        object.__setattr__(self, "max", float(self.max))
        object.__setattr__(self, "count", int(self.count))
        if not self.min < self.max:
            raise BadAxis(f"axis needs min < max, got [{self.min}, {self.max}]")
        if self.count < 1:
            raise BadAxis("axis needs at least one point")

    @property
    def length(self) -> float:
        return self.max - self.min

    @property
    def step(self) -> float:
        return self.length / self.count

    @property
    def points(self) -> np.ndarray:
        return self.min + self.step * np.arange(self.count)

    @property
    def frequencies(self) -> np.ndarray:
        """Conjugate lattice in FFT order, spacing ``2 pi / length``."""
        return 2 * np.pi * np.fft.fftfreq(self.count, d=self.step)

    @property
    def max_frequency(self) -> float:
        return np.pi * self.count / self.length


def _is_pow2(k: int) -> bool:
    return k >= 1 and k & (k - 1) == 0


def _next_pow2(k: float) -> int:
    return 1 << max(0, math.ceil(math.log2(max(k, 1))))


@dataclass(frozen=True)
class GridSpec:
    axes: tuple[Axis, ...]
    epsilon: float

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        if not self.axes:
            raise BadAxis("a grid needs at least one axis")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        for ax in self.axes:
            if ax.count < 8 or not _is_pow2(ax.count):
                raise BadAxis(f"grid counts must be powers of two >= 8, got {ax.count}")

    @property
    def n(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(ax.count for ax in self.axes)

    @property
    def cell_volume(self) -> float:
        return float(np.prod([ax.step for ax in self.axes]))

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*[ax.points for ax in self.axes], indexing="ij")


@dataclass(frozen=True)
class WignerGrid:
    """Sampled ``W * G_eps``; ``values[i0, i1, ...]`` sits at ``(axes[0].points[i0], ...)``."""

    spec: GridSpec
    values: np.ndarray
    mass: float
    min_value: float
    max_value: float
    imag_residue: float = 0.0

    @classmethod
    def from_values(cls, spec: GridSpec, values, imag_residue: float = 0.0) -> "WignerGrid":
        values = np.array(values, dtype=np.float64, copy=True)
        if values.shape != spec.shape:
            raise DimensionMismatch(f"values of shape {values.shape} do not fit grid {spec.shape}")
        values.setflags(write=False)
        return cls(spec, values, float(values.sum() * spec.cell_volume),
                   float(values.min()), float(values.max()), float(imag_residue))

    @property
    def n(self) -> int:
        return self.spec.n


@dataclass(frozen=True)
class Density1D:
    axis: Axis
    values: np.ndarray
    direction: np.ndarray

    @property
    def points(self) -> np.ndarray:
        return self.axis.points

    @property
    def mass(self) -> float:
        return float(np.sum(self.values) * self.axis.step)

    def l1_distance(self, other: "Density1D") -> float:
        if self.axis != other.axis:
            raise BadAxis("densities live on different axes")
        return float(np.sum(np.abs(self.values - other.values)) * self.axis.step)


class GridStats(NamedTuple):
    mass: float
    min: float
    max: float
    negative_volume: float


def default_max_samples(n: int) -> int:
    return MAX_SAMPLES_3D if n >= 3 else DEFAULT_MAX_SAMPLES


def required_count(length: float, variance: float, eta: float = ETA) -> int:
    """Smallest power-of-two count (>= 8) whose frequency lattice damps ``exp(-variance xi^2/2)`` to ``eta``."""
    xi_needed = math.sqrt(2 * math.log(1 / eta) / variance)
    return max(8, _next_pow2(length * xi_needed / math.pi - 1e-9))


def _damping_ok(axis: Axis, variance: float, eta: float) -> bool:
    return variance * axis.max_frequency**2 / 2 >= math.log(1 / eta) * (1 - 1e-12)


def _snap(lo: float, hi: float, epsilon: float) -> tuple[float, float]:
    # round outward to a decimal quantum no larger than sqrt(eps)
    q = 10.0 ** math.floor(math.log10(math.sqrt(epsilon)))
    return math.floor(lo / q + 1e-9) * q, math.ceil(hi / q - 1e-9) * q


def plan_grid(tup: OperatorTuple, epsilon: float, resolution=None, pad: float = DEFAULT_PAD,
              eta: float = ETA) -> GridSpec:
    """Choose a box covering the joint numerical range and check the lattice.

    The box on axis ``k`` is ``[min_k - pad sqrt(eps), max_k + pad sqrt(eps)]``
    with ``min_k``/``max_k`` the extreme eigenvalues of ``A_k``, rounded
    outward to a decimal step no larger than ``sqrt(eps)``.  Counts are
    rounded up to powers of two; ``resolution=None`` picks the smallest
    compliant count per axis.

    Raises
    ------
    ResolutionTooLow
        If ``eps * xi_max^2 / 2 < ln(1/eta)`` on some axis.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if pad < MIN_PAD:
        raise ValueError(f"pad must be at least {MIN_PAD}")
    ext = tup.extreme_eigenvalues()
    half = pad * math.sqrt(epsilon)
    bounds = [_snap(lo - half, hi + half, epsilon) for lo, hi in ext]
    needed = [required_count(hi - lo, epsilon, eta) for lo, hi in bounds]
    if resolution is None:
        counts = needed
    else:
        counts = [resolution] * tup.n if np.ndim(resolution) == 0 else list(resolution)
        if len(counts) != tup.n:
            raise DimensionMismatch(f"{len(counts)} counts for {tup.n} axes")
        counts = [max(8, _next_pow2(int(c))) for c in counts]
    if any(c < m for c, m in zip(counts, needed)):
        raise ResolutionTooLow(
            f"counts {counts} do not damp the Gaussian to {eta:g} at the lattice edge for "
            f"eps={epsilon:g}; need at least {needed} (or a larger epsilon)", min_counts=needed)
    return GridSpec(tuple(Axis(lo, hi, c) for (lo, hi), c in zip(bounds, counts)), epsilon)


def _check_support(tup: OperatorTuple, spec: GridSpec):
    half = MIN_PAD * math.sqrt(spec.epsilon)
    for k, ((lo, hi), ax) in enumerate(zip(tup.extreme_eigenvalues(), spec.axes)):
        if ax.min > lo - half or ax.max < hi + half:
            raise BoxTooSmall(f"axis {k} box [{ax.min:.4g}, {ax.max:.4g}) does not contain the "
                              f"spectrum [{lo:.4g}, {hi:.4g}] dilated by {MIN_PAD} sqrt(eps)")


def compute_wigner(state: QuantumState, tup: OperatorTuple, spec: GridSpec, *,
                   check_support: bool = True, eta: float = ETA, max_samples: int | None = None,
                   workers: int | None = None) -> WignerGrid:
    """Regularized Wigner distribution of ``state`` for ``tup`` on ``spec``.

    ``values[a] = prod_k (1/L_k) sum_xi exp(-i xi.a) phi(xi) exp(-eps |xi|^2/2)``,
    the Riemann form of the inverse transform on the conjugate lattice.
    """
    if spec.n != tup.n:
        raise DimensionMismatch(f"grid has {spec.n} axes, tuple has {tup.n} operators")
    for k, ax in enumerate(spec.axes):
        if not _damping_ok(ax, spec.epsilon, eta):
            need = [required_count(a.length, spec.epsilon, eta) for a in spec.axes]
            raise ResolutionTooLow(f"axis {k}: count {ax.count} too low for eps={spec.epsilon:g}",
                                   min_counts=need)
    if check_support:
        _check_support(tup, spec)
    cap = default_max_samples(spec.n) if max_samples is None else max_samples
    total = int(np.prod(spec.shape, dtype=np.int64))
    if total > cap:
        raise LatticeTooLarge(f"grid of {total} points exceeds the cap of {cap}")

    freqs = [ax.frequencies for ax in spec.axes]
    phi = char_grid(state, tup, freqs, max_samples=cap, workers=workers)
    factor = np.ones(spec.shape, dtype=complex)
    for k, (ax, f) in enumerate(zip(spec.axes, freqs)):
        shape = [1] * spec.n
        shape[k] = -1
        axis_factor = np.exp(-spec.epsilon * f**2 / 2 - 1j * f * ax.min) / ax.length
        factor = factor * axis_factor.reshape(shape)
    w = np.fft.fftn(phi * factor)
    scale = float(np.max(np.abs(w.real))) or 1.0
    return WignerGrid.from_values(spec, w.real, imag_residue=float(np.max(np.abs(w.imag))) / scale)


def _unit(xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float).ravel()
    if not np.any(xi):
        raise ZeroDirection("direction must be nonzero")
    return xi


def plan_axis(tup: OperatorTuple, xi, epsilon: float, pad: float = DEFAULT_PAD, count: int | None = None,
              eta: float = ETA) -> Axis:
    """Axis for the marginal of ``xi . a``: spectrum of ``xi . A`` plus ``pad`` standard deviations."""
    xi = _unit(xi)
    lam = np.linalg.eigvalsh(linear_combination(tup, xi).matrix)
    sigma = math.sqrt(epsilon) * float(np.linalg.norm(xi))
    lo, hi = lam[0] - pad * sigma, lam[-1] + pad * sigma
    need = required_count(hi - lo, sigma**2, eta)
    if count is None:
        count = need
    elif count < need:
        raise ResolutionTooLow(f"count {count} below the required {need}", min_counts=[need])
    return Axis(float(lo), float(hi), int(count))


def marginal_exact(state: QuantumState, tup: OperatorTuple, xi, epsilon: float, axis: Axis) -> Density1D:
    """Smoothed spectral measure of ``xi . A`` in ``state``.

    ``sum_j tr(rho P_j) N(t; lam_j, eps |xi|^2)`` over the distinct
    eigenvalues ``lam_j`` with spectral projectors ``P_j``.
    """
    xi = _unit(xi)
    spectral = eigendecompose(linear_combination(tup, xi))
    var = epsilon * float(xi @ xi)
    t = axis.points
    values = np.zeros_like(t)
    for lam, proj in spectral.projectors():
        p = float(np.trace(state.rho @ proj).real)
        values += p * np.exp(-((t - lam) ** 2) / (2 * var)) / math.sqrt(2 * math.pi * var)
    return Density1D(axis, values, xi)


def marginal_from_charfn(state: QuantumState, tup: OperatorTuple, xi, epsilon: float, axis: Axis,
                         eta: float = ETA) -> Density1D:
    """Marginal of ``xi . a`` by 1D inversion of ``t -> phi(t xi) exp(-eps t^2 |xi|^2 / 2)``."""
    xi = _unit(xi)
    var = epsilon * float(xi @ xi)
    if not _damping_ok(axis, var, eta):
        need = required_count(axis.length, var, eta)
        raise ResolutionTooLow(f"count {axis.count} too low, need {need}", min_counts=[need])
    t = axis.frequencies
    phi = char_values(state, tup, np.outer(t, xi))
    x = phi * np.exp(-var * t**2 / 2 - 1j * t * axis.min) / axis.length
    return Density1D(axis, np.fft.fft(x).real, xi)


def grid_projection(grid: WignerGrid, axis_index: int) -> Density1D:
    """Integrate the grid over every axis except ``axis_index``."""
    if not 0 <= axis_index < grid.n:
        raise BadAxis(f"axis {axis_index} out of range for an {grid.n}-dimensional grid")
    others = tuple(k for k in range(grid.n) if k != axis_index)
    vol = float(np.prod([grid.spec.axes[k].step for k in others]))
    values = grid.values.sum(axis=others) * vol if others else np.array(grid.values)
    direction = np.zeros(grid.n)
    direction[axis_index] = 1.0
    return Density1D(grid.spec.axes[axis_index], values, direction)


def grid_stats(grid: WignerGrid) -> GridStats:
    """Mass, extrema and ``negative_volume = int max(0, -W)``."""
    neg = float(np.sum(np.clip(-grid.values, 0, None)) * grid.spec.cell_volume)
    return GridStats(grid.mass, grid.min_value, grid.max_value, neg)


def ball_mass(grid: WignerGrid, center, radius: float) -> float:
    """Riemann mass of the grid inside the Euclidean ball ``|a - center| <= radius``."""
    center = np.asarray(center, dtype=float)
    r2 = sum((m - c) ** 2 for m, c in zip(grid.spec.mesh(), center))
    return float(np.sum(grid.values[r2 <= radius**2]) * grid.spec.cell_volume)


def combine(grids: Sequence[WignerGrid], weights: Sequence[float]) -> WignerGrid:
    """Pointwise linear combination of grids sharing one spec."""
    spec = grids[0].spec
    if any(g.spec != spec for g in grids):
        raise BadAxis("grids must share one spec")
    return WignerGrid.from_values(spec, sum(w * g.values for g, w in zip(grids, weights)))
