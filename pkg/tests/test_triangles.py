import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from conftest import histogram_density
from unitri import kernels
from unitri import montecarlo as mc
from unitri import quadrature as qd
from unitri import triangles as tm
from unitri.lognormal import DomainError
from unitri.rng import Stream
from unitri.triangles import Branch, ModelKind, ScaleMatrix, Triangle

S = tm.EQUILATERAL_SIDE
EPS = np.finfo(float).eps


def heron_condition(a, b, c):
    """Sum of |x dA/dx| over the sides for a triangle of area 1."""
    a2, b2, c2 = a * a, b * b, c * c
    return (np.abs(a2 * (b2 + c2 - a2)) + np.abs(b2 * (a2 + c2 - b2)) + np.abs(c2 * (a2 + b2 - c2))) / 8.0


# -- geometry ------------------------------------------------------------------


def test_heron_examples():
    assert tm.heron_area(Triangle(S, S, S)) == pytest.approx(1.0, rel=1e-15)
    assert tm.heron_area(Triangle(1.0, 2.0, math.sqrt(5.0))) == pytest.approx(1.0, rel=1e-15)
    assert tm.heron_area(Triangle(1.0, 1.0, 2.0)) == 0.0


def test_heron_rejects_non_triangles():
    with pytest.raises(tm.NotATriangleError):
        tm.heron_area(Triangle(1.0, 1.0, 3.0))
    with pytest.raises(tm.NotATriangleError):
        Triangle(0.0, 1.0, 1.0)
    with pytest.raises(tm.NotATriangleError):
        Triangle(-1.0, 1.0, 1.0)


def test_heron_near_degenerate_is_zero():
    # within 1e-15 of the perimeter of equality
    assert tm.heron_area(Triangle(1.0, 1.0, 2.0 - 1e-16)) == 0.0


@settings(max_examples=200, deadline=None)
@given(a=st.floats(0.05, 20.0), b=st.floats(0.05, 20.0), gamma=st.floats(0.01, math.pi - 0.01))
def test_heron_agrees_with_angle_form(a, b, gamma):
    # law of cosines in half-angle form keeps c accurate to a few ulps
    c = math.sqrt((a - b) ** 2 + 4 * a * b * math.sin(gamma / 2) ** 2)
    ref = tm.area_from_angle(a, b, gamma)
    got = tm.heron_area(Triangle(a, b, c))
    # rounding in c is amplified by the Heron condition number
    cond = heron_condition(a, b, c) / max(ref, 1e-300) ** 2
    assert got == pytest.approx(ref, rel=max(1e-12, 8 * EPS * cond))


def test_heron_angle_form_exact_sides():
    # sides with exactly representable c
    assert tm.heron_area(Triangle(3.0, 4.0, 5.0)) == pytest.approx(tm.area_from_angle(3.0, 4.0, math.pi / 2), rel=1e-12)
    assert tm.heron_area(Triangle(2.0, 2.0, 2.0)) == pytest.approx(
        tm.area_from_angle(2.0, 2.0, math.pi / 3), rel=1e-12)


def test_scale_matrix():
    for r in (0.3, 1.0, 4.7):
        m = ScaleMatrix(r)
        assert m.determinant == pytest.approx(1.0, abs=1e-15)
        assert np.linalg.det(m.matrix) == pytest.approx(1.0, abs=1e-15)
        img = [tm.mr_transform(m, p) for p in tm.EQUILATERAL_VERTICES]
        assert tm.polygon_area(img) == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(ValueError):
        ScaleMatrix(0.0)


def test_mr_transform_examples():
    assert tm.mr_transform(ScaleMatrix(1.0), (0.7, -2.0)) == (0.7, -2.0)
    r = 2.5
    assert tm.mr_transform(ScaleMatrix(r), (0.0, 2 / 3 ** 0.75)) == pytest.approx((0.0, 2 / (r * 3 ** 0.75)))


def test_equilateral_vertices_have_unit_area_and_side():
    v = np.array(tm.EQUILATERAL_VERTICES)
    assert tm.polygon_area(v) == pytest.approx(1.0, rel=1e-15)
    sides = [np.hypot(*(v[i] - v[(i + 1) % 3])) for i in range(3)]
    np.testing.assert_allclose(sides, S, rtol=1e-15)


# -- right model ---------------------------------------------------------------


def test_right_draws_construction():
    b = mc.run_batch(ModelKind.RIGHT, 5, 200_000)
    a, bb, c, al = (b.column(k) for k in ("a", "b", "c", "alpha"))
    assert np.max(np.abs(a * bb - 2.0)) <= 1e-12
    assert np.max(np.abs(kernels.heron(a, bb, c) - 1.0)) <= 1e-9
    np.testing.assert_allclose(2.0 * np.tan(al), a * a, rtol=1e-12)
    np.testing.assert_allclose(c * c, a * a + bb * bb, rtol=1e-15)


def test_right_moments(big_batches):
    b = big_batches(ModelKind.RIGHT)
    (m1, se1), (m2, se2) = mc.empirical_moments(b, "a", [1, 2])
    assert abs(m1 - math.sqrt(2 * math.e)) <= 4 * se1
    assert abs(m2 - 2 * math.e ** 2) <= 4 * se2


def test_sample_right_scalar():
    t = tm.sample_right(Stream(3))
    assert t.is_strict() and t.area == pytest.approx(1.0, abs=1e-12)


def test_right_angle_pdf_properties():
    d = tm.right_angle_density()
    assert qd.moment_of_density(d, 0) == pytest.approx(1.0, abs=1e-10)
    assert qd.moment_of_density(d, 1) == pytest.approx(math.pi / 4, rel=1e-12)
    assert tm.right_angle_pdf(0.0) == 0.0 and tm.right_angle_pdf(math.pi / 2) == 0.0
    x = np.linspace(0.05, 1.5, 30)
    np.testing.assert_allclose(tm.right_angle_pdf(x), tm.right_angle_pdf(math.pi / 2 - x), rtol=1e-10)


def test_right_angle_mode():
    eps = tm.right_angle_mode()
    assert abs(eps - 0.018363) < 1e-5
    f = tm.right_angle_pdf
    assert f(eps) == pytest.approx(f(math.pi / 2 - eps), rel=1e-9)
    assert f(eps) > f(eps + 1e-3) and f(eps) > f(eps - 1e-3)


def test_right_angle_histogram(big_batches):
    al = big_batches(ModelKind.RIGHT).column("alpha")
    for x0 in (0.3, 0.785, 1.2):
        est, se = histogram_density(al, x0, 0.01)
        assert abs(est - tm.right_angle_pdf(x0)) < 4 * se + 1e-3


# -- isosceles model -----------------------------------------------------------


def test_isosceles_r_one_is_equilateral():
    r = np.array([1.0])
    # u = Phi(1/2) gives r = exp(-1/2 + 1/2) = 1
    u = np.array([stats.norm.cdf(0.5)])
    rr, a, b, c = kernels.isosceles(u, -0.5, 1.0)
    assert rr[0] == pytest.approx(r[0], rel=1e-15)
    np.testing.assert_allclose([a[0], b[0], c[0]], S, rtol=1e-15)


def test_isosceles_draws_construction():
    b = mc.run_batch(ModelKind.ISOSCELES, 9, 200_000)
    r, a, bb, c = (b.column(k) for k in ("r", "a", "b", "c"))
    assert np.array_equal(a, bb)
    np.testing.assert_allclose(np.log(c) - np.log(r), math.log(S), atol=1e-14)
    assert np.max(np.abs(kernels.heron(a, bb, c) - 1.0)) <= 1e-9


def test_isosceles_moments(big_batches):
    b = big_batches(ModelKind.ISOSCELES)
    (c1, se1), (c2, se2) = mc.empirical_moments(b, "c", [1, 2])
    assert abs(c1 - 2 / 3 ** 0.25) <= 4 * se1
    assert abs(c2 - 4 * math.e / math.sqrt(3)) <= 4 * se2
    (a2, se) = mc.empirical_moments(b, "a", [2])[0]
    # heavy tail: flagged rather than failed if the SE is large
    assert se > 0.1 * 36.3585711936558 or abs(a2 - 36.3585711936558) <= 4 * se


def test_isosceles_side_moments_quadrature():
    d = tm.isosceles_side_density()
    assert qd.moment_of_density(d, 1) == pytest.approx(3.9753634096801809039980060, rel=1e-12)
    assert qd.moment_of_density(d, 2) == pytest.approx(math.sqrt(3) * (1 / 3 + math.e ** 2) * math.e, rel=1e-12)


def test_isosceles_side_histogram_oracle():
    b = mc.run_batch(ModelKind.ISOSCELES, 21, 10_000_000)
    est, se = histogram_density(b.column("a"), 2.0, 0.01)
    assert abs(est - tm.isosceles_side_pdf(2.0)) < 4 * se + 1e-4


def test_sample_isosceles_scalar():
    t, r = tm.sample_isosceles(Stream(4))
    assert t.a == t.b and t.c == pytest.approx(S * r, rel=1e-15)


def test_tail_exponent():
    fit = tm.isosceles_tail_fit()
    delta = 0.5 - math.log(3) / 4
    assert fit.delta == pytest.approx(delta, rel=0.05)
    assert fit.rms < 1e-3
    wide = tm.isosceles_tail_exponent(50.0, 1000.0)
    assert abs(wide - fit.delta) < 0.02 * abs(fit.delta)


# -- third side and arbitrary model -------------------------------------------


def test_c_from_ab_examples():
    assert tm.c_from_ab(S, S, Branch.MINUS) == pytest.approx(S, rel=1e-14)
    assert tm.c_from_ab(S, S, Branch.PLUS) == pytest.approx(2 * 3 ** 0.25, rel=1e-14)
    for a in (0.3, 1.0, 2.0, 7.0):
        ref = math.sqrt(a * a + 4 / (a * a))
        assert tm.c_from_ab(a, 2 / a, Branch.MINUS) == pytest.approx(ref, rel=1e-7)
        assert tm.c_from_ab(a, 2 / a, Branch.PLUS) == pytest.approx(ref, rel=1e-7)
    with pytest.raises(tm.BelowHyperbolaError):
        tm.c_from_ab(1.0, 1.0, Branch.PLUS)


@settings(max_examples=300, deadline=None)
@given(la=st.floats(-3.0, 3.0), excess=st.floats(1e-6, 4.0), plus=st.booleans())
def test_c_from_ab_gives_unit_area(la, excess, plus):
    a = math.exp(la)
    b = 2.0 * math.exp(excess) / a
    c = tm.c_from_ab(a, b, Branch.PLUS if plus else Branch.MINUS)
    t = Triangle(a, b, c)
    assert t.is_strict()
    cond = heron_condition(a, b, c)
    assert abs(tm.heron_area(t) - 1.0) <= max(1e-9, 8 * EPS * cond)
    rel = tm.quartic_residual(a, b, c) / (a + b + c) ** 4
    assert abs(rel) < 1e-12


def test_arbitrary_draws_construction(big_batches):
    b = big_batches(ModelKind.ARBITRARY)
    a, bb, c = b.column("a"), b.column("b"), b.column("c")
    assert np.min(a * bb) >= 2.0
    dev = np.abs(kernels.heron(a, bb, c) - 1.0)
    assert np.all(dev <= np.maximum(1e-9, 8 * EPS * heron_condition(a, bb, c)))
    # the bulk meets 1e-9 outright
    assert np.mean(dev <= 1e-9) > 0.9999


def test_arbitrary_moments_and_branches(big_batches):
    b = big_batches(ModelKind.ARBITRARY)
    (m, se), = mc.empirical_moments(b, "a", [1])
    assert abs(m - 3.5452643891219526811143352) <= 4 * se
    n = b.accepted
    plus = int(np.sum(b.column("branch") == 1))
    assert abs(plus - n / 2) <= 4 * math.sqrt(n) / 2
    folded = float(np.mean(b.column("folded")))
    assert abs(folded - 0.5) <= 4 * 0.5 / math.sqrt(n)


def test_folding_preserves_difference(big_batches):
    b = big_batches(ModelKind.ARBITRARY)
    d = np.log(b.column("a")) - np.log(b.column("b"))
    rep = mc.ks_test(d, lambda x: stats.norm.cdf(x, scale=math.sqrt(2.0)))
    assert rep.p_value > 1e-3


def test_arbitrary_mean_c_vs_mc(big_batches):
    b = big_batches(ModelKind.ARBITRARY)
    (m, se), = mc.empirical_moments(b, "c", [1])
    ec = tm.arbitrary_mean_c()
    assert abs(ec - 5.483) < 1e-2
    assert abs(m - ec) <= 4 * se
    assert abs(ec - 3.5452643891219526811143352) > 1.0


def test_joint_pdf_symmetry_and_support():
    s = Stream(8)
    a = np.exp(s.normals(1000, 0.3, 1.0))
    b = np.exp(s.normals(1000, 0.3, 1.0))
    np.testing.assert_array_equal(tm.joint_ab_pdf(a, b), tm.joint_ab_pdf(b, a))
    assert tm.joint_ab_pdf(1.0, 1.0) == 0.0


def test_arbitrary_a_pdf_values():
    assert tm.arbitrary_a_pdf(math.sqrt(2.0)) == pytest.approx(1 / (math.sqrt(2 * math.pi) * math.sqrt(2)), rel=1e-12)
    with pytest.raises(DomainError):
        tm.arbitrary_a_pdf(0.0)
    d = tm.arbitrary_a_density()
    assert qd.moment_of_density(d, 2) == pytest.approx(27.2316390652988719486867211, rel=1e-10)


@pytest.mark.parametrize("a", [1.0, 2.0, 5.0])
def test_arbitrary_marginal_is_integral_of_joint(a):
    res = qd.integrate(lambda b: tm.joint_ab_pdf(np.full_like(b, a), b), 2.0 / a, math.inf,
                       qd.QuadratureSpec(transform="log_axis", rel_tol=1e-12))
    assert res.value == pytest.approx(float(tm.arbitrary_a_pdf(a)), abs=1e-8)


def test_sample_arbitrary_scalar():
    t, br = tm.sample_arbitrary(Stream(2))
    assert isinstance(br, Branch) and t.a * t.b >= 2.0


# -- stick breaking ------------------------------------------------------------


def test_stick_twice_examples():
    assert tm.stick_twice_area(1 / 3, 2 / 3) == pytest.approx(math.sqrt(3) / 12, rel=1e-12)
    assert tm.stick_twice_area(2 / 3, 1 / 3) == pytest.approx(math.sqrt(3) / 12, rel=1e-12)
    assert tm.stick_twice_area(0.05, 0.1) is None


def test_stick_twice_acceptance_frozen_oracle():
    # brute force over 1e8 cut pairs gives 0.604669 +- 0.000049; closed form pi/(3 sqrt 3)
    oracle = math.pi / (3 * math.sqrt(3))
    b = mc.run_batch(ModelKind.STICK_TWICE, 17, 1_000_000)
    p = b.accepted / b.count
    assert abs(p - oracle) <= 4 * math.sqrt(oracle * (1 - oracle) / b.count)
    assert np.max(b.column("area")) <= tm.STICK_TWICE_MAX_AREA


def test_stick_twice_ks_1e5():
    b = mc.run_batch(ModelKind.STICK_TWICE, 23, 100_000)
    assert mc.ks_test(b.column("area"), tm.stick_twice_area_cdf).p_value > 1e-3


def test_stick_once_examples():
    assert tm.stick_once_area(0.5, math.pi / 2) == pytest.approx(0.25, rel=1e-15)
    assert tm.stick_once_area(0.3, 0.0) == 0.0
    s = tm.sample_stick_once(Stream(1))
    assert 0.0 <= s <= 0.25


def test_stick_once_ks_1e5():
    b = mc.run_batch(ModelKind.STICK_ONCE, 29, 100_000)
    area = b.column("area")
    assert area.min() >= 0.0 and area.max() <= 0.25
    assert mc.ks_test(area, tm.stick_once_area_cdf).p_value > 1e-3


def test_sample_stick_twice_scalar():
    vals = [tm.sample_stick_twice(Stream(i)) for i in range(50)]
    assert any(v is None for v in vals) and any(v is not None for v in vals)


# -- scalar draws equal batch draws --------------------------------------------


@pytest.mark.parametrize("model", ["right", "isosceles", "arbitrary", "stick-once"])
def test_scalar_draws_match_batch(model):
    n = 25
    batch_fn = {"right": tm.right_batch, "isosceles": tm.isosceles_batch,
                "arbitrary": tm.arbitrary_batch, "stick-once": tm.stick_once_batch}[model]
    ref = batch_fn(Stream(99), n)
    s = Stream(99)
    scalar_fn = {"right": tm.sample_right, "isosceles": tm.sample_isosceles,
                 "arbitrary": tm.sample_arbitrary, "stick-once": tm.sample_stick_once}[model]
    draws = [scalar_fn(s) for _ in range(n)]
    if model == "stick-once":
        np.testing.assert_array_equal(draws, ref)
        return
    tris = [d[0] if isinstance(d, tuple) else d for d in draws]
    np.testing.assert_array_equal([t.a for t in tris], ref["a"])
    np.testing.assert_array_equal([t.c for t in tris], ref["c"])


# -- rotated region and surface ------------------------------------------------


def test_rotated_region_examples():
    at, bt, _ = tm.rotate45(S, S, S)
    assert tm.rotated_region_contains(at, bt)
    assert not tm.rotated_region_contains(1.0, 1.0)
    with pytest.raises(DomainError):
        tm.rotated_region_contains(0.0, 1.0)
    lower, upper = tm.rotated_boundary(100.0)
    assert upper == pytest.approx(math.sqrt(2) * 100.0, rel=0.01)
    assert lower == pytest.approx(2 * math.sqrt(2) / 100.0, rel=0.01)
    # both roots of (2a~² - t)t = 16 in t = b~²
    assert lower ** 2 * upper ** 2 == pytest.approx(16.0, rel=1e-12)
    assert lower ** 2 + upper ** 2 == pytest.approx(2 * 100.0 ** 2, rel=1e-12)


def test_unit_area_triangles_project_into_region(big_batches):
    b = big_batches(ModelKind.ARBITRARY)
    a, bb, c = (b.column(k)[:20_000] for k in ("a", "b", "c"))
    for x, y, z in zip(a, bb, c):
        at, bt, _ = tm.rotate45(x, y, z)
        assert tm.rotated_region_contains(at, bt, rtol=1e-9)


def test_surface_mesh():
    mesh = tm.sigma_surface_mesh(6.0, 30)
    a, b, c = mesh.points.T
    np.testing.assert_allclose(kernels.heron(a, b, c), 1.0, atol=1e-9)
    on = mesh.branch == 0
    np.testing.assert_allclose(a[on] * b[on], 2.0, rtol=1e-15)
    # interior grid points appear once per branch
    assert np.sum(mesh.branch == 1) == np.sum(mesh.branch == -1)
    with pytest.raises(ValueError):
        tm.sigma_surface_mesh(6.0, 1)


def test_surface_mesh_quartic_residual():
    mesh = tm.sigma_surface_mesh(4.0, 20)
    a, b, c = mesh.points.T
    assert np.max(np.abs(tm.quartic_residual(a, b, c))) < 1e-8


def test_surface_mesh_equilateral_point():
    mesh = tm.sigma_surface_mesh(pairs=[(S, S), (1.0, 2.0)])
    np.testing.assert_allclose(mesh.points[:2, 2], [S, 2 * 3 ** 0.25], rtol=1e-14)
    assert list(mesh.branch) == [-1, 1, 0]
    with pytest.raises(tm.BelowHyperbolaError):
        tm.sigma_surface_mesh(pairs=[(1.0, 1.0)])


def test_cylinder_curve_is_right_triangles():
    cc = tm.cylinder_curve(5.0, 50)
    np.testing.assert_allclose(cc[:, 0] * cc[:, 1], 2.0, rtol=1e-15)
    np.testing.assert_allclose(kernels.heron(*cc.T), 1.0, atol=1e-12)
