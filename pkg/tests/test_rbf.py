import numpy as np
import pytest
from hypothesis import example, given
from hypothesis import strategies as st

from pumi.errors import DuplicateSites, IllConditionedPatch, InvalidRadius
from pumi.rbf import (Kernel, assemble_system, distance_matrix, eval_local, fit_local, kernel_eval,
                      residual, solve_local, wendland_c2)


@pytest.mark.parametrize("r, eps, want", [
    (0.0, 1.0, 1.0),
    (0.5, 1.0, 0.1875),
    (1.0, 1.0, 0.0),
    (2.0, 1.0, 0.0),
    (0.25, 2.0, 0.1875),
    (0.1, 1.0, 0.9 ** 4 * 1.4),
])
def test_kernel_values(r, eps, want):
    assert kernel_eval(Kernel(eps), r) == pytest.approx(want, rel=1e-15, abs=1e-300)


def test_kernel_rejects_negative_radius():
    with pytest.raises(InvalidRadius):
        kernel_eval(Kernel(1.0), -1e-3)


@pytest.mark.parametrize("eps", [0.0, -1.0, float("inf"), float("nan")])
def test_kernel_rejects_bad_shape(eps):
    with pytest.raises(ValueError):
        Kernel(eps)


@given(st.floats(0, 5), st.floats(0, 5), st.floats(0.01, 10))
@example(0.0, 1e-10, 0.71875)
def test_kernel_monotone_and_bounded(r1, r2, eps):
    lo, hi = sorted((r1, r2))
    a, b = wendland_c2(lo, eps), wendland_c2(hi, eps)
    assert 0.0 <= b <= 1.0 and 0.0 <= a <= 1.0
    # monotone up to rounding of the factored form
    assert b <= a + 4 * np.finfo(float).eps


def test_two_point_closed_form():
    sites = np.array([[0.0, 0.0], [0.5, 0.0]])
    A, f = assemble_system(sites, [1.0, 0.0], Kernel(1.0))
    lam = solve_local(A, f)
    det = 1 - 0.1875 ** 2
    np.testing.assert_allclose(lam, [1 / det, -0.1875 / det], rtol=1e-14)
    np.testing.assert_allclose(lam, [1.03644, -0.19433], atol=1e-5)


def test_assembled_matrix_is_symmetric_positive_definite():
    pts = np.random.default_rng(4).random((60, 2))
    A, _ = assemble_system(pts, np.zeros(60), Kernel(1.5))
    assert np.array_equal(A, A.T)
    assert np.all(np.diag(A) == 1.0)
    assert np.linalg.eigvalsh(A).min() > 0


def test_duplicate_sites_rejected():
    pts = [[0, 0], [1, 1], [0, 0]]
    with pytest.raises(DuplicateSites):
        assemble_system(pts, [1, 2, 3], Kernel(1.0))
    with pytest.raises(DuplicateSites):
        assemble_system([[0, 0], [1e-12, 0]], [1, 2], Kernel(1.0), dup_tol=1e-10)


def test_local_fit_interpolates():
    rng = np.random.default_rng(8)
    pts = rng.random((40, 2))
    f = np.sin(3 * pts[:, 0]) * pts[:, 1]
    idx = np.arange(5, 35)
    loc = fit_local(pts, f, idx, Kernel(0.7))
    for i in idx:
        assert eval_local(loc, pts, pts[i]) == pytest.approx(f[i], abs=1e-10)


def test_ill_conditioned_patch_reported():
    A = np.array([[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(IllConditionedPatch) as info:
        solve_local(A, np.array([1.0, 0.0]), patch_id=7)
    assert info.value.patch_id == 7


def test_residual_and_distance_matrix():
    D = distance_matrix([[0, 0], [3, 4]], [[0, 0]])
    np.testing.assert_array_equal(D, [[0.0], [5.0]])
    A = np.eye(2)
    assert residual(A, np.array([1.0, 2.0]), np.array([1.0, 2.0])) == 0.0
    assert residual(A, np.array([1.0, 2.5]), np.array([1.0, 2.0])) == pytest.approx(0.5 / 3)
