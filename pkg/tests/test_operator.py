import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pseudospec import linalg
from pseudospec.chebyshev import diff_matrix
from pseudospec.operator import (
    OscillatorParams,
    UnderResolvedWarning,
    compute_spectrum,
    discretize,
    eigenfunction_residual,
    eigenvector,
    exact_eigenfunction,
    exact_eigenvalue,
    hermite,
    match_exact,
    trusted_modulus,
)

C = 1 + 5j


@pytest.mark.parametrize("c", [C, 1.0])
def test_discretize_smallest_case(c):
    op = discretize(c, 2, 1.0)
    assert op.matrix.shape == (1, 1)
    assert op.matrix[0, 0] == pytest.approx(2.0, abs=1e-14)


def test_discretize_structure():
    op = discretize(C, 200, 6.0)
    assert op.matrix.shape == (199, 199) and op.size == 199
    D2 = diff_matrix(200, 2, 6.0).entries[1:-1, 1:-1]
    np.testing.assert_array_equal(op.matrix, -D2 + np.diag(C * op.interior_points**2))
    assert np.any(op.matrix.imag != 0)
    assert np.all(discretize(2.0, 20, 3.0).matrix.imag == 0)
    with pytest.raises(ValueError):
        op.matrix[0, 0] = 0


def test_discretize_is_deterministic():
    a, b = discretize(C, 50, 6.0), discretize(C, 50, 6.0)
    np.testing.assert_array_equal(a.matrix, b.matrix)


@pytest.mark.parametrize("c", [0.0, -1 + 1j, 1j, complex("nan")])
def test_rejects_bad_c(c):
    with pytest.raises(ValueError):
        OscillatorParams(c)


def test_exact_eigenvalue_examples():
    assert exact_eigenvalue(1.0, 0) == 1
    assert exact_eigenvalue(1.0, 3) == 7
    # a^2 = (1 + sqrt(26)) / 2, b = 5 / (2a)
    a = math.sqrt((1 + math.sqrt(26)) / 2)
    assert exact_eigenvalue(C, 0) == pytest.approx(complex(a, 5 / (2 * a)), abs=1e-14)
    assert exact_eigenvalue(C, 0) == pytest.approx(1.7462846 + 1.4316109j, abs=1e-7)
    assert exact_eigenvalue(C, 1) == pytest.approx(5.2388537 + 4.2948327j, abs=1e-7)
    with pytest.raises(ValueError):
        exact_eigenvalue(C, -1)


@given(st.floats(0.01, 100), st.floats(-100, 100), st.integers(0, 60))
def test_eigenvalues_on_ray_with_constant_gap(re, im, n):
    c = complex(re, im)
    lam, nxt = exact_eigenvalue(c, n), exact_eigenvalue(c, n + 1)
    assert abs(np.angle(lam) - np.angle(c) / 2) <= 1e-12
    assert abs(nxt - lam) == pytest.approx(2 * abs(c) ** 0.5, rel=1e-12)


def test_exact_eigenfunction_examples():
    assert exact_eigenfunction(1.0, 0, 0.0) == 1
    assert exact_eigenfunction(1.0, 1, 0.0) == 0
    # polar form: 26^{1/16} exp(i atan2(5, 1) / 8)
    expected = 26 ** (1 / 16) * np.exp(1j * math.atan2(5, 1) / 8)
    assert exact_eigenfunction(C, 0, 0.0) == pytest.approx(expected, abs=1e-15)
    assert exact_eigenfunction(C, 0, 0.0) == pytest.approx(1.2078258 + 0.2094150j, abs=1e-7)
    assert exact_eigenfunction(C, 3, 1e3) == 0


def test_hermite_low_orders():
    xi = np.array([0.3 + 0.1j, -1.2, 2.0j])
    np.testing.assert_allclose(hermite(2, xi), 4 * xi**2 - 2)
    np.testing.assert_allclose(hermite(3, xi), 8 * xi**3 - 12 * xi)


@pytest.mark.parametrize("n", [0, 1, 4, 9])
def test_exact_eigenpair_satisfies_ode_second_order(n):
    # central second difference; error should drop by ~4 when the step halves
    x = np.linspace(-2.0, 2.0, 9)
    lam = exact_eigenvalue(C, n)

    def residual(step):
        f = lambda t: exact_eigenfunction(C, n, t)
        d2 = (f(x + step) - 2 * f(x) + f(x - step)) / step**2
        return np.max(np.abs(-d2 + C * x**2 * f(x) - lam * f(x)))

    r1, r2 = residual(1e-2), residual(5e-3)
    assert r2 < r1
    assert math.log2(r1 / r2) == pytest.approx(2.0, abs=0.1)


def test_residual_examples():
    assert eigenfunction_residual(discretize(C, 200, 6.0), 0) < 1e-6
    # for real c the Gaussian decays slowly enough that L = 6 truncates Psi_1 at
    # ~1e-7, which the boundary columns of D2 amplify; L = 9 resolves it
    assert eigenfunction_residual(discretize(1.0, 200, 9.0), 1) < 1e-6
    assert eigenfunction_residual(discretize(1.0, 200, 6.0), 1, warn=False) > 1e-2
    with pytest.warns(UnderResolvedWarning):
        r = eigenfunction_residual(discretize(C, 16, 6.0), 10)
    assert r > 1e-2
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        eigenfunction_residual(discretize(C, 16, 6.0), 10, warn=False)


@pytest.mark.parametrize("N, L", [(200, 8.0), (120, 8.0)])
def test_spectrum_ray_within_trust_region(N, L):
    op = discretize(C, N, L)
    spec = compute_spectrum(op)
    assert np.all(np.diff(np.abs(spec.eigenvalues)) >= 0)
    good = spec.eigenvalues[spec.converged]
    assert good.size >= N // 10 - 2
    idx, rel = match_exact(C, good, good.size)
    assert np.max(rel) < 1e-4
    assert np.max(np.abs(np.angle(good) - np.angle(C) / 2)) < 1e-4
    np.testing.assert_array_equal(idx[:10], np.arange(10))


def test_spectrum_residuals_consistent_with_linalg():
    op = discretize(C, 60, 6.0)
    spec = compute_spectrum(op)
    assert spec.trusted_modulus == trusted_modulus(C, 60) == abs(exact_eigenvalue(C, 6))
    assert np.all(spec.residuals <= 1e-8)
    norm = linalg.matrix_two_norm(op.matrix)
    for lam in spec.eigenvalues[:10]:
        assert linalg.smallest_singular_value(op.shifted(lam)) <= 1e-8 * norm


def test_real_case_gives_odd_integers():
    spec = compute_spectrum(discretize(1.0, 200, 8.0))
    np.testing.assert_allclose(spec.eigenvalues[:10], 2 * np.arange(10) + 1, rtol=1e-9)


def test_eigenvector_matches_exact_eigenfunction():
    op = discretize(C, 120, 8.0)
    lam = exact_eigenvalue(C, 2)
    v = eigenvector(op, lam)
    assert v.size == 121 and v[0] == 0 and v[-1] == 0
    assert np.max(np.abs(v)) == pytest.approx(1.0)
    x = np.concatenate([[8.0], op.interior_points, [-8.0]])
    psi = exact_eigenfunction(C, 2, x)
    psi = psi / psi[np.argmax(np.abs(psi))]
    assert np.max(np.abs(v - psi)) < 1e-8


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 40), st.floats(0.5, 10))
def test_shifted_subtracts_identity(N, L):
    op = discretize(C, N, L)
    z = 1.5 - 2j
    np.testing.assert_array_equal(op.shifted(z), op.matrix - z * np.eye(N - 1))


def test_truncation_limits_ray_accuracy_at_default_domain():
    # at L = 6 the upper trusted eigenvalues are limited by domain truncation
    spec = compute_spectrum(discretize(C, 200, 6.0))
    _, rel = match_exact(C, spec.eigenvalues, 20)
    assert np.max(rel[:10]) < 1e-10
    assert 1e-4 < np.max(rel) < 1e-2
