import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.spatial import ConvexHull

from nwigner.errors import NotCommuting, NotOrthonormal, ZeroDirection
from nwigner.geometry import (
    adaptive_angles,
    circle_directions,
    commuting_weights,
    hausdorff,
    jnr_boundary,
    kippenhahn_curve,
    near_commuting_ellipse,
    random_directions,
    singular_points,
    support_point,
)
from nwigner.operators import (
    OperatorTuple,
    QuantumState,
    make_tuple,
    maximally_mixed,
    pauli_triple,
    random_hermitian,
    random_state,
    random_unitary,
    spin_triple,
)

DIAG_PAIR = make_tuple([np.diag([1.0, 2.0]), np.diag([3.0, 4.0])])


def test_support_point_examples():
    s = support_point(pauli_triple(), [1, 0, 0])
    assert s.height == pytest.approx(1, abs=1e-12)
    np.testing.assert_allclose(s.point, [1, 0, 0], atol=1e-12)
    s = support_point(DIAG_PAIR, [1, 0])
    assert s.height == pytest.approx(2)
    np.testing.assert_allclose(s.point, [2, 4], atol=1e-12)
    with pytest.raises(ZeroDirection):
        support_point(DIAG_PAIR, [0, 0])


def test_support_point_degenerate_flag():
    s = support_point(make_tuple([np.eye(3)]), [1])
    assert s.degenerate


def test_support_point_saturates_random():
    for seed in range(20):
        tup = OperatorTuple(tuple(random_hermitian(4, 3 * seed + k) for k in range(3)))
        for u in random_directions(3, 5, seed):
            s = support_point(tup, u)
            assert abs(s.direction @ s.point - s.height) <= 1e-10 * max(1, abs(s.height))


def test_jnr_examples():
    pts = jnr_boundary(pauli_triple(), random_directions(3, 100, 0)).points
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1, atol=1e-10)
    a = random_hermitian(5, 3)
    lam = np.linalg.eigvalsh(a.matrix)
    single = jnr_boundary(OperatorTuple((a,)), [[1], [-1]])
    np.testing.assert_allclose(single.heights, [lam[-1], -lam[0]], atol=1e-12)
    assert single.contains([[lam[0]], [lam[-1]]]).all()
    assert not single.contains([[lam[-1] + 1e-6]]).any()
    heights = jnr_boundary(spin_triple(1), random_directions(3, 50, 1)).heights
    np.testing.assert_allclose(heights, 1, atol=1e-12)


def test_singular_points_examples():
    sing = singular_points(pauli_triple().select([0, 1]), circle_directions(360))
    assert len(sing) == 720
    np.testing.assert_allclose(np.linalg.norm(sing.points, axis=1), 1, atol=1e-10)
    radii = np.linalg.norm(singular_points(spin_triple(1.5), random_directions(3, 200, 2)).points, axis=1)
    assert np.all(np.min(np.abs(radii[:, None] - [0.5, 1.5]), axis=1) <= 1e-9)
    sing = singular_points(DIAG_PAIR, circle_directions(7, 0.1))
    assert {tuple(np.round(p, 12)) for p in sing.points} == {(1.0, 3.0), (2.0, 4.0)}


def test_singular_points_report_degenerate():
    sing = singular_points(make_tuple([np.diag([1.0, 1.0, 2.0])]), [[1.0]])
    assert sing.skipped == 2
    assert len(sing) == 1


def test_commuting_weights_examples():
    atoms = commuting_weights(maximally_mixed(2), DIAG_PAIR)
    np.testing.assert_allclose(atoms.locations, [[1, 3], [2, 4]], atol=1e-12)
    np.testing.assert_allclose(atoms.weights, [0.5, 0.5], atol=1e-12)
    atoms = commuting_weights(QuantumState(np.diag([1.0, 0.0])), DIAG_PAIR)
    pos = atoms.weights > 1e-12
    np.testing.assert_allclose(atoms.locations[pos], [[1, 3]])
    np.testing.assert_allclose(atoms.weights[pos], [1.0])
    with pytest.raises(NotCommuting):
        commuting_weights(maximally_mixed(2), pauli_triple().select([0, 1]))


def test_commuting_weights_first_moments_and_merging():
    rng = np.random.default_rng(3)
    for seed in range(10):
        dim = int(rng.integers(2, 7))
        u = random_unitary(dim, seed)
        diags = rng.integers(0, 3, size=(2, dim)).astype(float)  # coincident joint values happen
        tup = make_tuple([u @ np.diag(d) @ u.conj().T for d in diags])
        state = random_state(dim, seed)
        atoms = commuting_weights(state, tup)
        assert atoms.weights.sum() == pytest.approx(1, abs=1e-10)
        assert len(atoms) == len({tuple(c) for c in diags.T})
        np.testing.assert_allclose(atoms.mean(), [state.expectation(op) for op in tup.ops], atol=1e-9)


def test_convex_hull_consistency():
    for n, tup in [(2, OperatorTuple((random_hermitian(4, 1), random_hermitian(4, 2)))),
                   (3, OperatorTuple(tuple(random_hermitian(3, 10 + k) for k in range(3))))]:
        dirs = random_directions(n, 400, 5)
        sing = singular_points(tup, np.r_[dirs, random_directions(n, 2000, 6)])
        hull = ConvexHull(sing.points)
        outer = jnr_boundary(tup, dirs)
        lhs = outer.points @ hull.equations[:, :-1].T + hull.equations[:, -1]
        assert np.max(lhs) <= 1e-6
        # the outer approximation contains every singular point
        assert outer.contains(sing.points, tol=1e-9).all()


@given(st.integers(0, 10_000))
def test_support_function_sublinear(seed):
    rng = np.random.default_rng(seed)
    dim, n = int(rng.integers(2, 6)), int(rng.integers(1, 4))
    tup = OperatorTuple(tuple(random_hermitian(dim, seed * 7 + k) for k in range(n)))
    x1, x2 = rng.normal(size=(2, n))

    def h(x):
        return np.linalg.eigvalsh(np.tensordot(x, tup.matrices, axes=1))[-1]

    assert h(x1 + x2) <= h(x1) + h(x2) + 1e-10
    # the normalized support function scales back to h
    assert support_point(tup, x1).height * np.linalg.norm(x1) == pytest.approx(h(x1), abs=1e-10)


def test_kippenhahn_pauli_pair_is_circle():
    sing = kippenhahn_curve(pauli_triple().select([0, 1]), step=1e-2)
    np.testing.assert_allclose(np.linalg.norm(sing.points, axis=1), 1, atol=1e-10)
    assert len(sing) >= 2 * 600


def test_ellipse_examples():
    pts = near_commuting_ellipse(pauli_triple().matrices[0], pauli_triple().matrices[1], [1, 0], [0, 1])
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1, atol=1e-10)
    e = np.eye(3)
    pts = near_commuting_ellipse(np.diag([0.0, 1, 2]), np.diag([0.0, 2, 1]), e[0], e[1])
    assert {tuple(np.round(p, 12)) for p in pts} == {(0.0, 0.0), (1.0, 2.0)}
    with pytest.raises(NotOrthonormal):
        near_commuting_ellipse(np.eye(3), np.eye(3), e[0], e[0] + e[1])


def test_ellipse_of_random_two_by_two_pair():
    # elliptical range theorem: the 2x2 Kippenhahn curve is an ellipse with foci at
    # the eigenvalues of A1 + i A2 and minor axis sqrt(tr(T^H T) - |l1|^2 - |l2|^2)
    a1, a2 = random_hermitian(2, 4).matrix, random_hermitian(2, 5).matrix
    t = a1 + 1j * a2
    l1, l2 = np.linalg.eigvals(t)
    minor = math.sqrt(np.trace(t.conj().T @ t).real - abs(l1) ** 2 - abs(l2) ** 2)
    major = math.hypot(abs(l1 - l2), minor)
    pts = near_commuting_ellipse(a1, a2, [1, 0], [0, 1])
    z = pts[:, 0] + 1j * pts[:, 1]
    np.testing.assert_allclose(np.abs(z - l1) + np.abs(z - l2), major, atol=1e-9)


def _branch(a1, a2, delta, step=1e-3):
    """Singular points of the perturbed pair whose eigenvectors live on span{e0, e1}."""
    tup = make_tuple([a1, a2])
    theta = adaptive_angles(tup, step=step)
    d = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    _, v = np.linalg.eigh(np.tensordot(d, tup.matrices, axes=1))
    outside = np.abs(v[:, 2, :]) ** 2
    pts = np.einsum("maj,kab,mbj->mjk", v.conj(), tup.matrices, v).real
    return pts[outside < delta**2]


def perturbed_pair(delta, seeds):
    r1, r2 = (random_hermitian(3, s).matrix for s in seeds)
    return np.diag([0.0, 1, 2]) + delta * r1, np.diag([0.0, 2, 1]) + delta * r2


ELLIPSE_RATIO = 0.25  # Hausdorff distance / delta, measured at delta = 0.05


@pytest.mark.parametrize("seeds", [(11, 12), (1, 2), (3, 4), (5, 6)])
def test_near_commuting_ellipse_tracks_branch(seeds):
    delta = 0.05
    a1, a2 = perturbed_pair(delta, seeds)
    e = np.eye(3)
    ell = near_commuting_ellipse(a1, a2, e[0], e[1])
    branch = _branch(a1, a2, delta)
    assert len(branch) > 100
    assert hausdorff(ell, branch) <= ELLIPSE_RATIO * delta


def test_near_commuting_ellipse_error_is_higher_order():
    e = np.eye(3)
    ratios = []
    for delta in (0.1, 0.02):
        a1, a2 = perturbed_pair(delta, (11, 12))
        ratios.append(hausdorff(near_commuting_ellipse(a1, a2, e[0], e[1]), _branch(a1, a2, delta)) / delta)
    assert ratios[1] < ratios[0] / 2
