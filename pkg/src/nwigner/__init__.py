"""Wigner distributions for n arbitrary hermitian operators.

The distribution is the unique one whose marginal along every linear
combination ``xi . a`` is the quantum distribution of ``xi . A``.  Its Fourier
transform is ``tr rho exp(i xi . A)``; grids of the Gaussian-smoothed
distribution are obtained by damping that function and inverting it by FFT.
"""

__version__ = "0.1.0"

from .operators import (  # noqa: E402
    HermitianOperator,
    OperatorTuple,
    QuantumState,
    density_from_pure,
    make_hermitian,
    make_tuple,
    maximally_mixed,
    pauli_triple,
    random_hermitian,
    spin_triple,
)
from .charfn import char_value, char_values, char_grid  # noqa: E402
from .wigner import compute_wigner, plan_grid, marginal_exact, marginal_from_charfn, grid_stats  # noqa: E402
