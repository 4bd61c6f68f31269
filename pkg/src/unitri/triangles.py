"""Generative models for random triangles and the geometry they rely on.

Five models:

``right``        ln a ~ N(ln2/2, sigma**2), b = 2/a, right angle between a and b
``isosceles``    r ~ Lognormal(-1/2, sigma**2); the equilateral triangle of
                 area 1 mapped by diag(r, 1/r)
``arbitrary``    (ln a, ln b) folded bivariate normal on ab >= 2, third side
                 from a fair coin between the two roots
``stick-twice``  unit stick cut at two uniform points; pieces are a², b², c²
``stick-once``   unit stick cut once into a², b²; gamma ~ Uniform[0, pi]

The first three always produce area 1; the stick models produce areas.

Scalar samplers (``sample_*``) consume a :class:`unitri.rng.Stream` and
return one draw; ``*_batch`` returns column arrays and consumes the stream
in the same order, so ``n`` scalar draws equal one batch of ``n``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import erfc, ndtr, ndtri

from unitri import kernels
from unitri.lognormal import (
    DEFAULT_PARAMS,
    INV_SQRT_2PI,
    ISOSCELES_KAPPA,
    RIGHT_PARAMS,
    DensityFn,
    DomainError,
    LognormalParams,
    Reparam,
    general_w_density,
    general_w_pdf,
)
from unitri.quadrature import SPEC_2D, QuadratureSpec, expect_converged, integrate_2d

HALF_LN2 = 0.5 * math.log(2.0)
EQUILATERAL_SIDE = 2.0 * 3.0 ** -0.25
STICK_TWICE_MAX_AREA = math.sqrt(3.0) / 12.0
_HYPERBOLA_RTOL = 8 * np.finfo(float).eps


class NotATriangleError(ValueError):
    """Side lengths violate a triangle inequality."""


class BelowHyperbolaError(ValueError):
    """ab < 2: no triangle of area 1 has sides a and b."""


class ModelKind(str, enum.Enum):
    RIGHT = "right"
    ISOSCELES = "isosceles"
    ARBITRARY = "arbitrary"
    STICK_TWICE = "stick-twice"
    STICK_ONCE = "stick-once"


class Branch(enum.IntEnum):
    MINUS = -1
    PLUS = 1


@dataclass(frozen=True)
class Triangle:
    a: float
    b: float
    c: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0 and self.c > 0):
            raise NotATriangleError(f"sides must be positive: {self}")

    @property
    def area(self) -> float:
        return heron_area(self)

    def is_strict(self) -> bool:
        a, b, c = self.a, self.b, self.c
        return a + b > c and b + c > a and a + c > b


@dataclass(frozen=True)
class ScaleMatrix:
    """``M_r = diag(r, 1/r)``, an area-preserving map of the plane."""

    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"r must be positive, got {self.r}")

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.r, 0.0], [0.0, 1.0 / self.r]])

    @property
    def determinant(self) -> float:
        return self.r * (1.0 / self.r)


# vertices of the equilateral triangle of area 1 centred at the origin
EQUILATERAL_VERTICES = (
    (3.0 ** -0.25, -(3.0 ** -0.75)),
    (-(3.0 ** -0.25), -(3.0 ** -0.75)),
    (0.0, 2.0 * 3.0 ** -0.75),
)


def mr_transform(m: ScaleMatrix, point) -> tuple:
    x, y = point
    return (m.r * x, y / m.r)


def polygon_area(vertices) -> float:
    """Shoelace area of a simple polygon."""
    pts = np.asarray(vertices, dtype=float)
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def heron_area(t: Triangle) -> float:
    """Area from the three sides (Kahan's stable ordering of Heron's formula).

    Triples within 1e-15 (relative to the perimeter) of a triangle
    inequality are degenerate and have area 0.
    """
    area = float(kernels.heron(t.a, t.b, t.c))
    if math.isnan(area):
        raise NotATriangleError(f"not a triangle: {t}")
    return area


def area_from_angle(a: float, b: float, gamma: float) -> float:
    return 0.5 * a * b * math.sin(gamma)


def c_from_ab(a: float, b: float, branch: Branch) -> float:
    """Third side of the unit-area triangle with sides a, b on the given root."""
    ab = a * b
    if ab < 2.0 * (1.0 - _HYPERBOLA_RTOL):
        raise BelowHyperbolaError(f"ab = {ab} < 2")
    return float(kernels.c_from_ab(a, b, Branch(branch) is Branch.PLUS))


# -- right model ---------------------------------------------------------------


def right_batch(stream, n: int, sigma: float = 1.0) -> dict:
    a, b, c, alpha = kernels.right(stream.uniforms(n), RIGHT_PARAMS.mu, sigma)
    return {"a": a, "b": b, "c": c, "alpha": alpha}


def sample_right(stream, sigma: float = 1.0) -> Triangle:
    cols = right_batch(stream, 1, sigma)
    return Triangle(cols["a"][0], cols["b"][0], cols["c"][0])


def right_angle_pdf(alpha):
    """Density of the angle opposite a in the right model (sigma = 1)."""
    alpha = np.asarray(alpha, dtype=np.float64)
    out = np.zeros_like(alpha)
    m = (alpha > 0) & (alpha < 0.5 * math.pi)
    if np.any(m):
        al = alpha[m]
        lt = np.log(np.tan(al))
        out[m] = INV_SQRT_2PI * np.exp(-lt * lt / 8.0) / np.sin(2.0 * al)
    return out[()] if out.ndim == 0 else out


def right_angle_density() -> DensityFn:
    # x = ln(tan alpha)/2 is standard normal
    return DensityFn(
        name="right-angle",
        support_lo=0.0,
        support_hi=0.5 * math.pi,
        pdf=right_angle_pdf,
        transform="gauss_weight",
        reparam=Reparam(
            to_x=lambda t: np.arctan(np.exp(2.0 * np.asarray(t))),
            to_t=lambda al: 0.5 * np.log(np.tan(al)),
            weight=lambda t: INV_SQRT_2PI * np.exp(-0.5 * np.square(t)),
            t_lo=-math.inf,
            t_hi=math.inf,
            center=0.0,
        ),
        cdf=lambda al: ndtr(0.5 * np.log(np.tan(np.clip(al, 0.0, 0.5 * math.pi)))),
        ppf=lambda q: np.arctan(np.exp(2.0 * ndtri(q))),
    )


def _golden_max(f, lo, hi, tol):
    g = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - g * (hi - lo)
    x2 = lo + g * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(500):
        if hi - lo <= tol:
            return 0.5 * (lo + hi)
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + g * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - g * (hi - lo)
            f1 = f(x1)
    raise ArithmeticError(f"golden-section did not reach tol {tol}: bracket [{lo}, {hi}]")


def right_angle_mode(lo: float = 1e-8, hi: float = 0.1, tol: float = 1e-8) -> float:
    """Location of the density maximum nearest 0."""
    grid = np.geomspace(lo, hi, 400)
    vals = right_angle_pdf(grid)
    i = int(np.argmax(vals))
    if i == 0 or i == grid.size - 1:
        raise ArithmeticError(f"no interior maximum of the angle density on ({lo}, {hi})")

    def logpdf(al):
        lt = math.log(math.tan(al))
        return -lt * lt / 8.0 - math.log(math.sin(2.0 * al))

    return _golden_max(logpdf, grid[i - 1], grid[i + 1], tol)


# -- isosceles model -----------------------------------------------------------


def isosceles_batch(stream, n: int, sigma: float = 1.0) -> dict:
    r, a, b, c = kernels.isosceles(stream.uniforms(n), DEFAULT_PARAMS.mu, sigma)
    return {"r": r, "a": a, "b": b, "c": c}


def sample_isosceles(stream, sigma: float = 1.0) -> tuple:
    cols = isosceles_batch(stream, 1, sigma)
    return Triangle(cols["a"][0], cols["b"][0], cols["c"][0]), float(cols["r"][0])


def isosceles_c_params(sigma: float = 1.0) -> LognormalParams:
    """c = (2/3**(1/4)) r, so ln c ~ N(-1/2 + ln(2/3**(1/4)), sigma**2)."""
    return LognormalParams(DEFAULT_PARAMS.mu + math.log(EQUILATERAL_SIDE), sigma)


def isosceles_side_pdf(a):
    return general_w_pdf(a, ISOSCELES_KAPPA, DEFAULT_PARAMS)


def isosceles_side_density() -> DensityFn:
    d = general_w_density(ISOSCELES_KAPPA, DEFAULT_PARAMS)
    return DensityFn(**{**d.__dict__, "name": "isosceles-side"})


@dataclass(frozen=True)
class TailFit:
    delta: float
    intercept: float
    rms: float


def isosceles_tail_fit(lo: float = 50.0, hi: float = 500.0, points: int = 200) -> TailFit:
    """Least-squares fit of ``ln f(a) = -ln(a)**2/2 - delta ln a + const``."""
    a = np.geomspace(lo, hi, points)
    la = np.log(a)
    y = np.log(isosceles_side_pdf(a)) + 0.5 * la * la
    design = np.column_stack([-la, np.ones_like(la)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    rms = float(np.sqrt(np.mean((design @ coef - y) ** 2)))
    return TailFit(float(coef[0]), float(coef[1]), rms)


def isosceles_tail_exponent(lo: float = 50.0, hi: float = 500.0, points: int = 200) -> float:
    return isosceles_tail_fit(lo, hi, points).delta


# -- arbitrary model -----------------------------------------------------------


def arbitrary_batch(stream, n: int, sigma: float = 1.0) -> dict:
    uvw = stream.uniforms(3 * n).reshape(n, 3)
    a, b, c, branch, folded = kernels.arbitrary(uvw, sigma)
    return {"a": a, "b": b, "c": c, "branch": branch, "folded": folded}


def sample_arbitrary(stream, sigma: float = 1.0) -> tuple:
    cols = arbitrary_batch(stream, 1, sigma)
    tri = Triangle(cols["a"][0], cols["b"][0], cols["c"][0])
    return tri, Branch(int(cols["branch"][0]))


def joint_ab_pdf(a, b):
    """Density of (a, b) in the arbitrary model; zero where ab < 2."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    a, b = np.broadcast_arrays(a, b)
    out = np.zeros(a.shape)
    m = (a > 0) & (b > 0) & (a * b >= 2.0)
    if np.any(m):
        u = np.log(a[m]) - HALF_LN2
        v = np.log(b[m]) - HALF_LN2
        out[m] = np.exp(-0.5 * (u * u + v * v)) / (math.pi * (a[m] * b[m]))
    return out[()] if out.ndim == 0 else out


def arbitrary_a_pdf(a):
    """Marginal density of a in the arbitrary model."""
    a = np.asarray(a, dtype=np.float64)
    if np.any(a <= 0):
        raise DomainError("arbitrary_a_pdf requires a > 0")
    u = np.log(a) - HALF_LN2
    out = INV_SQRT_2PI * np.exp(-0.5 * u * u) * erfc(-u / math.sqrt(2.0)) / a
    return out[()] if out.ndim == 0 else out


def arbitrary_a_density() -> DensityFn:
    # s = ln a; the density of s is 2 phi(s - m) Phi(s - m), whose CDF is Phi(s - m)**2
    def weight(s):
        s = np.asarray(s, dtype=np.float64)
        x = np.exp(s)
        ok = (x > 0) & np.isfinite(x)
        out = np.zeros_like(s)
        out[ok] = arbitrary_a_pdf(x[ok]) * x[ok]
        return out

    return DensityFn(
        name="arbitrary-a",
        support_lo=0.0,
        support_hi=math.inf,
        pdf=arbitrary_a_pdf,
        transform="log_axis",
        reparam=Reparam(
            to_x=np.exp,
            to_t=np.log,
            weight=weight,
            t_lo=-math.inf,
            t_hi=math.inf,
            center=HALF_LN2,
        ),
        cdf=lambda a: ndtr(np.log(a) - HALF_LN2) ** 2,
        ppf=lambda q: np.exp(HALF_LN2 + ndtri(np.sqrt(q))),
    )


def _masked(fn):
    def g(a, b):
        p = joint_ab_pdf(a, b)
        out = np.zeros_like(p)
        m = p > 0
        if np.any(m):
            out[m] = fn(a[m], b[m]) * p[m]
        return out

    return g


def _branch_average(a, b):
    plus = kernels.c_from_ab(a, b, np.ones(a.shape, dtype=bool))
    minus = kernels.c_from_ab(a, b, np.zeros(a.shape, dtype=bool))
    return 0.5 * (plus + minus)


def arbitrary_joint_moment(fn, spec: QuadratureSpec = SPEC_2D):
    """``E(fn(a, b))`` under :func:`joint_ab_pdf` by iterated quadrature."""
    return integrate_2d(_masked(fn), "ab_geq_2", spec)


def arbitrary_mean_c(spec: QuadratureSpec = SPEC_2D) -> float:
    """Mean third side, averaging the two roots with equal weight."""
    return expect_converged(arbitrary_joint_moment(_branch_average, spec), "E(c)")


# -- stick-breaking models -----------------------------------------------------


def stick_twice_batch(stream, n: int) -> np.ndarray:
    """Areas for ``n`` attempts; NaN marks a rejected attempt."""
    return kernels.stick_twice(stream.uniforms(2 * n).reshape(n, 2))


def stick_twice_area(u1: float, u2: float) -> Optional[float]:
    """Area for explicit cut positions, or None when no triangle forms."""
    area = float(kernels.stick_twice(np.array([[u1, u2]], dtype=np.float64))[0])
    return None if math.isnan(area) else area


def sample_stick_twice(stream) -> Optional[float]:
    area = float(stick_twice_batch(stream, 1)[0])
    return None if math.isnan(area) else area


def stick_once_batch(stream, n: int) -> np.ndarray:
    return kernels.stick_once(stream.uniforms(2 * n).reshape(n, 2))


def stick_once_area(cut: float, gamma: float) -> float:
    a = math.sqrt(cut)
    b = math.sqrt(1.0 - cut)
    return area_from_angle(a, b, gamma)


def sample_stick_once(stream) -> float:
    return float(stick_once_batch(stream, 1)[0])


def stick_twice_area_cdf(x):
    x = np.clip(np.asarray(x, dtype=np.float64), 0.0, STICK_TWICE_MAX_AREA)
    return 48.0 * x * x


def stick_once_area_cdf(x):
    return np.clip(4.0 * np.asarray(x, dtype=np.float64), 0.0, 1.0)


# -- rotated coordinates and the surface of unit-area triangles ----------------


def rotate45(a, b, c) -> tuple:
    """(a, b, c) -> (a~, b~, c~) with a = (a~ - c~)/sqrt2, c = (a~ + c~)/sqrt2."""
    s = math.sqrt(0.5)
    return (s * (a + c), b, s * (c - a))


def rotated_region_contains(a_tilde: float, b_tilde: float, rtol: float = 1e-12) -> bool:
    """Whether (a~, b~) lies in the projection bounded by (2a~² - b~²)b~² = 16."""
    if not (a_tilde > 0 and b_tilde > 0):
        raise DomainError("rotated coordinates must be positive")
    return (2.0 * a_tilde ** 2 - b_tilde ** 2) * b_tilde ** 2 >= 16.0 * (1.0 - rtol)


def rotated_boundary(a_tilde: float) -> tuple:
    """Lower and upper b~ on the boundary curve at a~ (requires a~ >= 2)."""
    if a_tilde < 2.0:
        raise ValueError("the boundary curve only exists for a~ >= 2")
    a2 = a_tilde * a_tilde
    disc = math.sqrt((a2 - 4.0) * (a2 + 4.0))
    upper2 = a2 + disc
    return (math.sqrt(16.0 / upper2), math.sqrt(upper2))


def quartic_residual(a, b, c):
    """``16 - (a+b+c)(-a+b+c)(a-b+c)(a+b-c)``; zero exactly on the surface."""
    return 16.0 - (a + b + c) * (-a + b + c) * (a - b + c) * (a + b - c)


@dataclass
class SurfaceMesh:
    points: np.ndarray  # (n, 3) columns a, b, c
    branch: np.ndarray  # -1 minus, +1 plus, 0 on the hyperbola ab = 2

    def __len__(self):
        return len(self.branch)


def sigma_surface_mesh(a_max: float = 6.0, resolution: int = 40, pairs=None) -> SurfaceMesh:
    """Both sheets of the unit-area surface over a grid in ``{ab >= 2}``.

    By default ``a`` runs over ``resolution`` points in ``[2/a_max, a_max]``
    and, for each ``a``, ``b`` over ``resolution`` points in ``[2/a, a_max]``;
    the first ``b`` lies on the hyperbola and yields a single (right) triangle.
    ``pairs`` overrides the grid with explicit (a, b) points.
    """
    if pairs is None:
        if resolution < 2:
            raise ValueError("resolution must be >= 2")
        if a_max <= math.sqrt(2.0):
            raise ValueError("a_max must exceed sqrt(2)")
        pts = []
        for a in np.linspace(2.0 / a_max, a_max, resolution):
            bs = np.unique(np.linspace(2.0 / a, a_max, resolution))
            pts.extend((a, b, j == 0) for j, b in enumerate(bs))
    else:
        pts = []
        for a, b in pairs:
            if a * b < 2.0 * (1.0 - _HYPERBOLA_RTOL):
                raise BelowHyperbolaError(f"ab = {a * b} < 2")
            pts.append((a, b, abs(a * b - 2.0) <= 2.0 * _HYPERBOLA_RTOL))
    rows, labels = [], []
    for a, b, on_curve in pts:
        if on_curve:
            rows.append((a, b, math.sqrt(a * a + b * b)))
            labels.append(0)
        else:
            for br in (Branch.MINUS, Branch.PLUS):
                rows.append((a, b, c_from_ab(a, b, br)))
                labels.append(int(br))
    return SurfaceMesh(np.array(rows, dtype=float).reshape(-1, 3), np.array(labels, dtype=np.int8))


def cylinder_curve(a_max: float = 6.0, points: int = 40) -> np.ndarray:
    """Right triangles (a, 2/a, sqrt(a² + 4/a²)): where the surface meets ab = 2."""
    a = np.linspace(2.0 / a_max, a_max, points)
    b = 2.0 / a
    return np.column_stack([a, b, np.sqrt(a * a + b * b)])
