import math

import numpy as np
import pytest
from scipy.special import factorial2

from unitri import lognormal as ln
from unitri import quadrature as qd
from unitri import triangles as tm
from unitri.quadrature import QuadratureSpec

PHI = 1.0 / math.sqrt(2.0 * math.pi)


def gauss(x):
    return PHI * np.exp(-0.5 * x * x)


def test_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(rel_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureSpec(abs_tol=-1.0)
    with pytest.raises(ValueError):
        QuadratureSpec(max_refinements=0)
    with pytest.raises(ValueError):
        QuadratureSpec(transform="bogus")


def test_gaussian_normalization():
    res = qd.integrate(gauss, -math.inf, math.inf)
    assert res.converged
    assert abs(res.value - 1.0) < 1e-12


def test_gauss_weight_truncation_is_harmless():
    res = qd.integrate(gauss, -math.inf, math.inf, QuadratureSpec(transform="gauss_weight"))
    assert res.converged and abs(res.value - 1.0) < 1e-12


def test_arctan_representation_of_mean_angle():
    res = qd.integrate(lambda x: PHI * np.arctan(np.exp(2 * x)) * np.exp(-0.5 * x * x), -math.inf, math.inf)
    assert res.value == pytest.approx(math.pi / 4, rel=1e-12)


def test_finite_and_half_infinite_rules():
    assert qd.integrate(np.sin, 0.0, math.pi).value == pytest.approx(2.0, rel=1e-13)
    assert qd.integrate(lambda x: np.exp(-x), 0.0, math.inf).value == pytest.approx(1.0, rel=1e-13)
    assert qd.integrate(lambda x: np.exp(x), -math.inf, 0.0).value == pytest.approx(1.0, rel=1e-13)
    # reversed limits
    assert qd.integrate(np.sin, math.pi, 0.0).value == pytest.approx(-2.0, rel=1e-13)
    assert qd.integrate(np.sin, 1.0, 1.0).value == 0.0


def test_endpoint_singularity_tanh_sinh():
    # 1/sqrt(x) on (0, 1]
    res = qd.integrate(lambda x: 1.0 / np.sqrt(x), 0.0, 1.0)
    assert res.converged and res.value == pytest.approx(2.0, rel=1e-9)


def test_nan_reports_abscissa():
    with pytest.raises(qd.QuadratureError, match="x="):
        qd.integrate(lambda x: np.where(x > 0.5, np.nan, x), 0.0, 1.0)


def test_nan_reported_at_original_abscissa_under_log_axis():
    with pytest.raises(qd.QuadratureError) as info:
        qd.integrate(lambda x: np.where(x > 10.0, np.nan, 1.0), 0.0, math.inf, QuadratureSpec(transform="log_axis"))
    assert float(str(info.value).split("x=")[1]) > 10.0


def test_nonconvergence_flagged_not_raised():
    res = qd.integrate(lambda x: np.sin(1.0 / x), 1e-3, 1.0, QuadratureSpec(max_refinements=2))
    assert not res.converged
    with pytest.raises(qd.ConvergenceError):
        qd.expect_converged(res, "oscillatory")


def test_converged_implies_tolerance_met():
    spec = QuadratureSpec()
    for f, lo, hi in [(gauss, -math.inf, math.inf), (np.cos, 0.0, 1.0), (lambda x: np.exp(-x * x), 0.0, math.inf)]:
        res = qd.integrate(f, lo, hi, spec)
        assert res.converged
        assert res.error_estimate <= max(spec.rel_tol * abs(res.value), spec.abs_tol)


def test_deterministic():
    f = lambda x: np.exp(-x) * np.cos(x)  # noqa: E731
    r1 = qd.integrate(f, 0.0, math.inf)
    r2 = qd.integrate(f, 0.0, math.inf)
    assert r1.value == r2.value and r1.error_estimate == r2.error_estimate


def test_sum_reciprocal_normalization_cosh_edge():
    d = ln.sum_reciprocal_density()
    res = qd.integrate(d.pdf, 2.0, math.inf, QuadratureSpec(transform="cosh_edge", rel_tol=1e-12))
    assert abs(res.value - 1.0) < 1e-7  # raw pdf, rounding near the edge
    assert abs(qd.moment_of_density(d, 0) - 1.0) < 1e-8  # analytic reparametrization


def test_transform_correctness_with_and_without_cosh_edge():
    d = ln.sum_reciprocal_density()
    with_edge = qd.integrate(d.pdf, 2.0, math.inf, QuadratureSpec(transform="cosh_edge", rel_tol=1e-12))
    offset = 1e-12
    without = qd.integrate(d.pdf, 2.0 + offset, math.inf, QuadratureSpec(rel_tol=1e-12, max_refinements=14))
    assert abs(with_edge.value - without.value) < 1e-6


def test_moment_of_density_raw_vs_reparam():
    d = ln.general_w_density(math.sqrt(3.0))
    fast = qd.moment_of_density(d, 1)
    raw = qd.moment_of_density(d, 1, QuadratureSpec(transform="none", rel_tol=1e-9, max_refinements=14))
    assert raw == pytest.approx(fast, rel=1e-6)


def test_moment_examples():
    assert qd.moment_of_density(ln.sqrt_sum_density(), 2) == pytest.approx(1 + math.e, rel=1e-10)
    assert qd.moment_of_density(tm.isosceles_side_density(), 1) == pytest.approx(3.9753634096801809, rel=1e-10)
    with pytest.raises(ValueError):
        qd.moment_of_density(ln.sqrt_sum_density(), -1)


def _closed_form_library():
    cases = []
    for k in range(0, 9):
        exact = 0.0 if k % 2 else float(factorial2(k - 1)) if k > 0 else 1.0
        # beyond |x| = 40 the integrand is 0; computing it there gives inf * 0
        cases.append((lambda x, k=k: np.where(np.abs(x) < 40.0, x ** k * gauss(x), 0.0),
                      -math.inf, math.inf, exact))
    for mu, sigma in [(-0.5, 1.0), (0.5 * math.log(2), 1.0), (0.3, 0.5), (-1.0, 1.4)]:
        p = ln.LognormalParams(mu, sigma)
        for k in (1, 2, 3):
            cases.append((lambda x, p=p, k=k: np.where(x < 1e50, x ** k * ln.lognormal_pdf(x, p), 0.0), 0.0, math.inf,
                          ln.lognormal_moment(k, p)))
    return cases


@pytest.mark.parametrize("refinements", [3, 4, 5, 6, 8, 12])
def test_error_honesty(refinements):
    spec = QuadratureSpec(max_refinements=refinements, transform="log_axis")
    gspec = QuadratureSpec(max_refinements=refinements)
    honest = total = 0
    for f, lo, hi, exact in _closed_form_library():
        res = qd.integrate(f, lo, hi, spec if lo == 0.0 else gspec)
        total += 1
        honest += res.error_estimate >= abs(res.value - exact)
    assert honest >= 0.95 * total


def test_monotone_refinement_on_smooth_integrands():
    spec = QuadratureSpec(rel_tol=1e-300, abs_tol=1e-300, max_refinements=6)
    for f, lo, hi in [(gauss, -math.inf, math.inf), (lambda x: np.exp(-x) / (1 + x * x), 0.0, math.inf),
                      (lambda x: np.cos(x) ** 2, 0.0, 2.0)]:
        h = qd.integrate(f, lo, hi, spec).history
        assert all(b <= a for a, b in zip(h, h[1:])), h


def test_integrate_2d_normalization_and_cross_moment():
    res = qd.integrate_2d(tm.joint_ab_pdf)
    assert res.converged and abs(res.value - 1.0) < 1e-6
    res = qd.integrate_2d(lambda a, b: a * b * tm.joint_ab_pdf(a, b))
    assert res.value == pytest.approx(10.0179601615245669326196491, rel=1e-8)


def test_integrate_2d_rectangle():
    res = qd.integrate_2d(lambda a, b: a * b, region="rectangle", bounds=((0.0, 1.0), (0.0, 2.0)),
                          spec=QuadratureSpec())
    assert res.value == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ValueError):
        qd.integrate_2d(lambda a, b: a, region="rectangle")
    with pytest.raises(ValueError):
        qd.integrate_2d(lambda a, b: a, region="disk")


def test_mean_c_two_dimensional():
    assert abs(tm.arbitrary_mean_c() - 5.483) < 1e-2
