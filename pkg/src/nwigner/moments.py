"""Weyl-ordered moments and the moments of the Wigner distribution.

The moment ``int a^alpha W(a) da`` equals the expectation of the symmetrized
product holding ``alpha_k`` copies of ``A_k``, averaged over every distinct
ordering of the factors.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import product

import numpy as np

from .charfn import char_values
from .errors import DimensionMismatch, OrderTooHigh
from .operators import OperatorTuple, QuantumState

MAX_WEYL_ORDER = 8
MAX_FD_ORDER = 4

__all__ = [
    "weyl_moment",
    "weyl_symmetrized",
    "charfn_moment",
    "grid_moment",
    "multi_indices",
    "multiset_permutations",
    "MAX_WEYL_ORDER",
    "MAX_FD_ORDER",
]


def _alpha(alpha, n: int) -> tuple[int, ...]:
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != n:
        raise DimensionMismatch(f"multi-index has {len(alpha)} entries, tuple has {n} operators")
    if any(a < 0 for a in alpha):
        raise ValueError("multi-index entries must be non-negative")
    return alpha


def multi_indices(n: int, max_order: int):
    """All multi-indices of length ``n`` with ``|alpha| <= max_order``, sorted by order then lexicographically."""
    out = [a for a in product(range(max_order + 1), repeat=n) if sum(a) <= max_order]
    return sorted(out, key=lambda a: (sum(a), a))


def multiset_permutations(alpha):
    """Distinct words with ``alpha[k]`` copies of letter ``k``, in lexicographic order."""
    alpha = list(alpha)
    total = sum(alpha)
    word = []

    def rec():
        if len(word) == total:
            yield tuple(word)
            return
        for k, left in enumerate(alpha):
            if left:
                alpha[k] -= 1
                word.append(k)
                yield from rec()
                word.pop()
                alpha[k] += 1

    yield from rec()


def weyl_symmetrized(tup: OperatorTuple, alpha) -> np.ndarray:
    """Average of all distinct orderings of the product with ``alpha_k`` factors ``A_k``.

    The sum over distinct words obeys ``S(alpha) = sum_k A_k S(alpha - e_k)``
    (split off the first letter), which is evaluated with memoization instead
    of enumerating the multinomially many words.
    """
    alpha = _alpha(alpha, tup.n)
    if sum(alpha) > MAX_WEYL_ORDER:
        raise OrderTooHigh(f"order {sum(alpha)} exceeds {MAX_WEYL_ORDER}")
    mats = tup.matrices

    @lru_cache(maxsize=None)
    def word_sum(a):
        if not any(a):
            return np.eye(tup.dim, dtype=complex)
        acc = np.zeros((tup.dim, tup.dim), dtype=complex)
        for k, ak in enumerate(a):
            if ak:
                rest = a[:k] + (ak - 1,) + a[k + 1:]
                acc += mats[k] @ word_sum(rest)
        return acc

    count = math.factorial(sum(alpha)) // math.prod(math.factorial(a) for a in alpha)
    return word_sum(alpha) / count


def weyl_moment(state: QuantumState, tup: OperatorTuple, alpha) -> float:
    """``tr rho Sym(A^alpha)`` for the Weyl-symmetrized product."""
    value = np.trace(state.rho @ weyl_symmetrized(tup, alpha))
    scale = max(1.0, abs(value))
    if abs(value.imag) > 1e-10 * scale:
        raise ArithmeticError(f"Weyl moment has imaginary part {value.imag:.3e}")
    return float(value.real)


# central difference stencils on offsets -p..p for derivative orders 0..4
_STENCILS = {
    0: {0: 1.0},
    1: {-1: -0.5, 1: 0.5},
    2: {-1: 1.0, 0: -2.0, 1: 1.0},
    3: {-2: -0.5, -1: 1.0, 1: -1.0, 2: 0.5},
    4: {-2: 1.0, -1: -4.0, 0: 6.0, 1: -4.0, 2: 1.0},
}


def _mixed_difference(state, tup, alpha, h):
    terms = [sorted(_STENCILS[a].items()) for a in alpha]
    offsets, weights = [], []
    for combo in product(*terms):
        offsets.append([o for o, _ in combo])
        weights.append(math.prod(w for _, w in combo))
    xis = np.asarray(offsets, dtype=float) * h
    phi = char_values(state, tup, xis)
    return np.dot(weights, phi) / math.prod(hk**a for hk, a in zip(h, alpha))


def charfn_moment(state: QuantumState, tup: OperatorTuple, alpha, h=None) -> float:
    """Moment ``i^-|alpha| d^alpha phi(0)`` by central differences.

    Two step sizes ``h`` and ``h/2`` are combined by Richardson extrapolation
    (the central stencils have even error expansions, so the ``h^2`` term
    cancels).  The default step per axis is ``eps^(1/(|alpha|+4)) / ||A_k||``,
    the balance point between the remaining ``h^4`` truncation error and
    the ``eps / h^|alpha|`` rounding error.
    """
    alpha = _alpha(alpha, tup.n)
    order = sum(alpha)
    if order > MAX_FD_ORDER:
        raise OrderTooHigh(f"order {order} exceeds the finite-difference limit {MAX_FD_ORDER}")
    if order == 0:
        return float(np.trace(state.rho).real)
    if h is None:
        norms = np.linalg.norm(tup.matrices, ord=2, axis=(1, 2))
        base = np.finfo(float).eps ** (1.0 / (order + 4))
        h = base / np.maximum(norms, np.finfo(float).tiny)
    h = np.broadcast_to(np.asarray(h, dtype=float), (tup.n,))
    coarse = _mixed_difference(state, tup, alpha, h)
    fine = _mixed_difference(state, tup, alpha, h / 2)
    deriv = (4 * fine - coarse) / 3
    return float((deriv / 1j**order).real)


def grid_moment(grid, alpha) -> float:
    """Riemann-sum moment ``sum a^alpha W(a) dV`` of a Wigner grid."""
    alpha = _alpha(alpha, grid.n)
    weight = np.ones(grid.spec.shape)
    for k, (ax, a) in enumerate(zip(grid.spec.axes, alpha)):
        if a:
            shape = [1] * grid.n
            shape[k] = -1
            weight = weight * (ax.points**a).reshape(shape)
    return float(np.sum(weight * grid.values) * grid.spec.cell_volume)
