import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pseudospec import linalg
from pseudospec import pseudospectra as ps
from pseudospec.fitting import FitRefusedError
from pseudospec.operator import DiscretizedOperator, OscillatorParams, compute_spectrum, discretize, exact_eigenvalue

C = 1 + 5j


def matrix_op(M):
    M = np.asarray(M, dtype=complex)
    M.setflags(write=False)
    return DiscretizedOperator(OscillatorParams(1.0), M.shape[0] + 1, 1.0, np.zeros(M.shape[0]), M)


SCALAR = discretize(C, 2, 1.0)


def test_window_validation_and_layout():
    w = ps.ComplexWindow(0, 2, -1, 1, 3, 5)
    Z = w.points()
    assert Z.shape == (3, 5)
    assert Z[2, 0] == 2 - 1j and Z[0, 4] == 1j
    assert w.dx == 1.0 and w.dy == 0.5
    for bad in [(1, 0, 0, 1, 3, 3), (0, 1, 0, 0, 3, 3), (0, 1, 0, 1, 1, 3), (0, math.inf, 0, 1, 3, 3), (0, 1, 0, 1, 2.5, 3)]:
        with pytest.raises(ValueError):
            ps.ComplexWindow(*bad)


def test_scalar_field_examples():
    w = ps.ComplexWindow(0, 4, -2, 2, 5, 5)
    f = ps.compute_field(SCALAR, w)
    assert f.sigma_min[2, 2] == pytest.approx(0.0, abs=1e-14)
    assert f.sigma_min[2, 3] == pytest.approx(1.0, abs=1e-14)
    np.testing.assert_allclose(f.sigma_min, np.abs(2 - w.points()), atol=1e-14)
    assert f.fingerprint == (C, 2, 1.0)
    with pytest.raises(ValueError):
        f.sigma_min[0, 0] = 1.0


def test_resolvent_norm_examples():
    assert ps.resolvent_norm_at(SCALAR, 0) == pytest.approx(0.5, rel=1e-14)
    assert ps.resolvent_norm_at(SCALAR, 2.0) == math.inf
    assert ps.resolvent_norm_at(matrix_op(np.diag([1.0, 3.0])), 2.0) == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ValueError):
        ps.resolvent_norm_at(SCALAR, complex(math.nan, 0))


@pytest.fixture(scope="module")
def small_field():
    op = discretize(C, 40, 6.0)
    w = ps.ComplexWindow(0, 40, -5, 35, 17, 15)
    return op, ps.compute_field(op, w)


def test_field_disk_bound(small_field):
    op, f = small_field
    lam = compute_spectrum(op).eigenvalues
    dist = np.min(np.abs(f.window.points()[..., None] - lam), axis=-1)
    assert np.all(f.sigma_min <= dist + 1e-10)
    assert np.all(f.sigma_min >= 0)


def test_field_matches_reference_svd(small_field):
    op, f = small_field
    Z = f.window.points()
    for i, j in [(0, 0), (5, 7), (16, 14), (3, 11)]:
        ref = linalg.reference_singular_values(op.shifted(Z[i, j]))[0]
        assert f.sigma_min[i, j] == pytest.approx(ref, rel=1e-8, abs=1e-12)


def test_field_nesting(small_field):
    _, f = small_field
    assert f.nesting_holds([10.0 ** (-k) for k in range(1, 13)])


def test_field_worker_independence(small_field):
    op, f = small_field
    f2 = ps.compute_field(op, f.window, workers=2)
    assert f2.sigma_min.tobytes() == f.sigma_min.tobytes()
    with pytest.raises(ValueError):
        ps.compute_field(op, f.window, workers=0)


def test_sigma_min_survives_near_underflow():
    op = matrix_op([[1e-200 + 0j]])
    assert ps.resolvent_norm_at(op, 0.0) == pytest.approx(1e200)


def test_far_field_is_small_but_real_axis_is_not():
    # pseudo-eigenvalues far along the sector; the real axis is not among them
    op = discretize(C, 200, 6.0)
    assert linalg.smallest_singular_value(op.shifted(70 + 58j)) < 1e-5
    assert linalg.smallest_singular_value(op.shifted(40.0)) > 1.0


def test_circle_contour():
    w = ps.ComplexWindow(0.5, 3.5, -1.5, 1.5, 61, 61)
    f = ps.compute_field(SCALAR, w)
    (lines,) = ps.contours(f, [0.5])
    assert len(lines) == 1
    line = lines[0]
    assert line[0] == line[-1]
    assert np.max(np.abs(np.abs(line - 2) - 0.5)) <= 2 * w.dx


def test_level_above_field_gives_window_rectangle():
    w = ps.ComplexWindow(10, 12, 10, 12, 9, 9)
    f = ps.compute_field(SCALAR, w)
    (lines,) = ps.contours(f, [1e3])
    assert len(lines) == 1
    pts = lines[0]
    assert pts[0] == pts[-1]
    on_edge = np.isclose(pts.real, 10) | np.isclose(pts.real, 12) | np.isclose(pts.imag, 10) | np.isclose(pts.imag, 12)
    assert np.all(on_edge)
    for corner in (10 + 10j, 12 + 10j, 12 + 12j, 10 + 12j):
        assert np.min(np.abs(pts - corner)) < 1e-12


def test_empty_level_set():
    w = ps.ComplexWindow(10, 12, 10, 12, 9, 9)
    assert ps.contours(ps.compute_field(SCALAR, w), [1e-3]) == [[]]


def test_contour_levels_validated():
    f = ps.compute_field(SCALAR, ps.ComplexWindow(0, 4, -2, 2, 5, 5))
    with pytest.raises(ValueError):
        ps.contours(f, [0.1, 0.5])
    with pytest.raises(ValueError):
        ps.contours(f, [0.0])


def test_contour_nesting_point_in_polygon(small_field):
    _, f = small_field
    levels = [1.0, 1e-1]
    outer, inner = ps.contours(f, levels)
    assert outer and inner
    for line in inner:
        for poly in outer:
            if poly[0] == poly[-1] and ps.point_in_polygon(line[:1], poly)[0]:
                break
        else:
            pytest.fail("inner contour not enclosed by any outer contour")


def test_point_in_polygon_square():
    sq = np.array([0, 1, 1 + 1j, 1j, 0])
    np.testing.assert_array_equal(ps.point_in_polygon([0.5 + 0.5j, 2, -0.1j], sq), [True, False, False])


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 0.9), st.floats(-0.4, 0.4), st.floats(-0.4, 0.4))
def test_scalar_contours_are_circles(r, dx, dy):
    centre = complex(2 + dx, dy)
    op = matrix_op([[centre]])
    w = ps.ComplexWindow(1, 3, -1, 1, 41, 41)
    lines = ps.contours(ps.compute_field(op, w), [r])[0]
    pts = np.concatenate(lines)
    assert np.max(np.abs(np.abs(pts - centre) - r)) <= 2 * w.dx


def test_curve_examples():
    assert ps.curve_points(1.0, C, 1 / 3, 1.0) == pytest.approx(1 + C)
    assert ps.curve_points(1.0, C, 1 / 3, 8.0) == pytest.approx(10 + 10j, abs=1e-13)


@given(st.floats(0.1, 10), st.floats(-1, 3), st.floats(1e-3, 1e4))
def test_curve_formula_consistency(b, p, eta):
    z = ps.curve_points(b, C, p, eta)
    assert abs(z - (b * eta + C * eta**p)) <= 1e-14 * abs(z)


def test_eta_samples():
    np.testing.assert_allclose(ps.eta_samples((1, 100), 3), [1, 10, 100])
    np.testing.assert_allclose(ps.eta_samples((1, 3), 3, "linear"), [1, 2, 3])
    for bad in [((0, 1), 3, "log"), ((2, 1), 3, "log"), ((1, 2), 1, "log"), ((1, 2), 3, "cubic")]:
        with pytest.raises(ValueError):
            ps.eta_samples(*bad)


def test_eta_at_modulus_is_largest_inside():
    e = ps.eta_at_modulus(1.0, C, 1 / 3, 100.0)
    assert abs(ps.curve_points(1.0, C, 1 / 3, e)) <= 100.0
    assert abs(ps.curve_points(1.0, C, 1 / 3, e * (1 + 1e-12))) > 100.0 - 1e-9


def test_trace_warns_outside_trust_region_and_filters():
    op = discretize(C, 60, 6.0)
    with pytest.warns(ps.TrustRegionWarning):
        tr = ps.trace_curve(op, 1.0, 1.0, (1.0, 200.0), 12)
    outside = np.abs(tr.z) > tr.trust_radius
    assert outside.any() and not tr.stable[outside].any()
    assert np.all(np.isfinite(tr.resolvent_norms))
    np.testing.assert_allclose(tr.resolvent_norms, 1 / tr.sigma_min)
    drift = np.abs(np.log(tr.resolvent_norms) - np.log(tr.reference_norms))
    assert np.all(drift[tr.stable] < ps.STABILITY_TOL)
    with pytest.raises(ValueError):
        ps.trace_curve(op, 0.0, 1.0, (1.0, 2.0), 4)


def test_trace_without_stability_check():
    op = discretize(C, 60, 6.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        tr = ps.trace_curve(op, 1.0, 1.0, (1.0, 5.0), 5, check_stability=False)
    assert np.all(np.isnan(tr.reference_norms)) and tr.n_stable == 5


def test_fit_exponent_synthetic():
    eta = np.geomspace(1, 1e4, 30)
    z = ps.curve_points(1.0, C, 1 / 3, eta)
    tr = ps.synthetic_trace(1.0, 1 / 3, C, eta, np.abs(z) ** (-1 / 3))
    assert ps.fit_exponent(tr).slope == pytest.approx(-1 / 3, abs=1e-10)
    tr = ps.synthetic_trace(1.0, 1 / 3, C, eta, np.full(30, 2.0))
    assert ps.fit_exponent(tr).slope == pytest.approx(0.0, abs=1e-10)


def test_fit_exponent_refuses_short_tail():
    eta = np.geomspace(1, 10, 14)
    tr = ps.synthetic_trace(1.0, 1.0, C, eta, np.ones(14))
    with pytest.raises(FitRefusedError):
        ps.fit_exponent(tr, tail_fraction=0.5)
    assert ps.fit_exponent(tr, tail_fraction=1.0).n_points == 14
    with pytest.raises(ValueError):
        ps.fit_exponent(tr, tail_fraction=0.0)


def test_sector_examples():
    assert ps.sector_membership(8 + 2j, 1.0)
    assert not ps.sector_membership(8 + 3j, 1.0)
    assert not ps.sector_membership(-1, 5.0)


def test_omega_parameters_solve_coupling():
    for m in (0, 3, 10):
        for p in (0.1, 0.25, 0.3):
            b, E = ps.omega_parameters(C, m, p)
            lam = exact_eigenvalue(C, m)
            assert abs(b * E + C * E**p - lam) <= 1e-12 * abs(lam)
            assert b > 0 and E > 0


def test_omega_examples():
    m, p = 2, 0.25
    b, E = ps.omega_parameters(C, m, p)
    lam = exact_eigenvalue(C, m)
    assert ps.omega_region_membership(lam, m, p, C, b, E)
    assert not ps.omega_region_membership(0.5 * lam, m, p, C, b, E)
    # matched modulus, angle below arg(z_eta)
    eta = 3 * E
    zeta = b * eta + C * eta**p
    assert ps.omega_region_membership(zeta, m, p, C, b, E)
    assert not ps.omega_region_membership(abs(zeta) * np.exp(1j * (np.angle(zeta) - 0.05)), m, p, C, b, E)
    hi = np.angle(C * np.conj(zeta) / abs(C))
    assert not ps.omega_region_membership(abs(zeta) * np.exp(1j * (hi + 0.05)), m, p, C, b, E)
    assert ps.omega_region_membership(abs(zeta) * np.exp(1j * (hi - 1e-3)), m, p, C, b, E)


def test_omega_rejections():
    b, E = ps.omega_parameters(C, 2, 0.25)
    with pytest.raises(ValueError):
        ps.omega_region_membership(10, 2, 0.4, C, b, E)
    with pytest.raises(ValueError):
        ps.omega_region_membership(10, 2, 0.25, C, b * 1.01, E)
    with pytest.raises(ValueError):
        ps.omega_parameters(C, 2, 1 / 3)


def test_perturbation_scalar_saturates():
    rep = ps.perturbation_check(SCALAR, 1e-3, 5, seed=1)
    np.testing.assert_allclose(rep.ratios, 1.0, rtol=1e-9)
    assert rep.passed


def test_perturbation_small_operator_and_determinism():
    op = discretize(C, 30, 6.0)
    a = ps.perturbation_check(op, 1e-2, 5, seed=7)
    b = ps.perturbation_check(op, 1e-2, 5, seed=7)
    assert a.passed and a.max_ratio <= 1 + 1e-6
    assert a.eigenvalues.tobytes() == b.eigenvalues.tobytes()
    assert a.ratios.tobytes() == b.ratios.tobytes()


def test_perturbation_zero_limit():
    op = discretize(C, 30, 6.0)
    lam = compute_spectrum(op).eigenvalues
    norm = linalg.matrix_two_norm(op.matrix)
    assert max(linalg.smallest_singular_value(op.shifted(m)) for m in lam) <= 1e-8 * norm


def test_perturbation_validation_and_violation(monkeypatch):
    with pytest.raises(ValueError):
        ps.perturbation_check(SCALAR, 0.0, 3, 0)
    with pytest.raises(ValueError):
        ps.perturbation_check(SCALAR, 1e-2, 0, 0)
    # a broken eigen-solver must trip the containment check
    real = linalg.eigenvalues
    monkeypatch.setattr(
        linalg, "eigenvalues", lambda A, vectors=False: linalg.EigenDecomposition(A, real(A).eigenvalues + 1.0, None)
    )
    with pytest.raises(ps.ContainmentViolation) as err:
        ps.perturbation_check(SCALAR, 1e-2, 2, 0)
    assert not err.value.report.passed
    assert not ps.perturbation_check(SCALAR, 1e-2, 2, 0, strict=False).passed
