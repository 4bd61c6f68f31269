"""Lognormal densities closed under reciprocal, sum-with-reciprocal and roots.

For ``X ~ Lognormal(mu, sigma**2)`` this module evaluates the densities of

* ``Y = X + 1/X``                       (:func:`sum_reciprocal_pdf`, support y > 2)
* ``Z = sqrt(X + 1/X)``                 (:func:`sqrt_sum_pdf`, support z > sqrt 2)
* ``W = sqrt(X**2/kappa + kappa/X**2)`` (:func:`general_w_pdf`, support w > sqrt 2)

All three share one structure.  Writing ``y = 2 cosh t`` the two preimages
of ``y`` under ``x + 1/x`` are exactly ``exp(-t)`` and ``exp(t)``, and the
Jacobian ``sqrt(y**2 - 4) = 2 sinh t`` cancels the edge singularity.  The
resulting smooth density of ``t`` on ``[0, inf)`` is what quadrature
integrates (see :class:`Reparam`).

Densities return 0 below their support edge instead of raising, so they are
total on the positive reals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import ndtr, ndtri

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
SQRT2 = math.sqrt(2.0)


class DomainError(ValueError):
    """Argument outside the domain of a density or moment."""


@dataclass(frozen=True)
class LognormalParams:
    """Location and spread of ``ln X`` for ``X ~ Lognormal(mu, sigma**2)``."""

    mu: float
    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")

    def reciprocal(self) -> "LognormalParams":
        return LognormalParams(-self.mu, self.sigma)

    def power(self, k: float) -> "LognormalParams":
        return LognormalParams(k * self.mu, abs(k) * self.sigma)


DEFAULT_PARAMS = LognormalParams(-0.5, 1.0)
RIGHT_PARAMS = LognormalParams(0.5 * math.log(2.0), 1.0)
ISOSCELES_KAPPA = math.sqrt(3.0)


@dataclass(frozen=True)
class Reparam:
    """Smooth change of variable ``x = to_x(t)`` with density ``weight(t)``.

    ``integral g(x) pdf(x) dx == integral g(to_x(t)) weight(t) dt`` over
    ``[t_lo, t_hi]``.  When ``center`` is set the weight is Gaussian-like with
    that center and ``scale``, and quadrature may truncate at 12 scales.
    """

    to_x: Callable[[np.ndarray], np.ndarray]
    to_t: Callable[[np.ndarray], np.ndarray]
    weight: Callable[[np.ndarray], np.ndarray]
    t_lo: float
    t_hi: float
    center: Optional[float] = None
    scale: float = 1.0


@dataclass(frozen=True)
class DensityFn:
    """A probability density on ``[support_lo, support_hi]``.

    ``transform`` names the quadrature transform suited to this density
    (``none``, ``cosh_edge``, ``log_axis`` or ``gauss_weight``); ``reparam``
    realizes it analytically.  ``cdf`` and ``ppf`` are closed forms when known.
    """

    name: str
    support_lo: float
    support_hi: float
    pdf: Callable[[np.ndarray], np.ndarray]
    transform: str = "none"
    reparam: Optional[Reparam] = None
    cdf: Optional[Callable[[np.ndarray], np.ndarray]] = None
    ppf: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, x):
        return self.pdf(x)


def _out(x: np.ndarray):
    return x[()] if x.ndim == 0 else x


def lognormal_pdf(x, p: LognormalParams):
    x = np.asarray(x, dtype=np.float64)
    if np.any(x <= 0):
        raise DomainError("lognormal_pdf requires x > 0")
    z = (np.log(x) - p.mu) / p.sigma
    return _out(INV_SQRT_2PI / p.sigma * np.exp(-0.5 * z * z) / x)


def lognormal_moment(k: int, p: LognormalParams) -> float:
    """``E(X**k) = exp(k mu + k**2 sigma**2 / 2)``."""
    if int(k) != k or k < 1:
        raise DomainError(f"moment order must be a positive integer, got {k}")
    return math.exp(k * p.mu + 0.5 * (k * p.sigma) ** 2)


def _pair_terms(ln_xplus, mu, sigma):
    """Sum of the Gaussian kernels at the two preimages ``-ln_xplus`` and ``+ln_xplus``.

    Returns ``(exp(-(-L - mu)**2 / 2s**2) + exp(-(L - mu)**2 / 2s**2)) / (sqrt(2 pi) s)``.
    """
    zm = (-ln_xplus - mu) / sigma
    zp = (ln_xplus - mu) / sigma
    return INV_SQRT_2PI / sigma * (np.exp(-0.5 * zm * zm) + np.exp(-0.5 * zp * zp))


def _edge_root(y):
    """``ln x_+`` and ``sqrt(y**2 - 4)`` for ``y > 2`` without cancellation."""
    root = np.sqrt((y - 2.0) * (y + 2.0))
    return np.log(0.5 * (y + root)), root


def sum_reciprocal_pdf(y, p: LognormalParams):
    """Density of ``X + 1/X``; zero for ``y <= 2``."""
    y = np.asarray(y, dtype=np.float64)
    out = np.zeros_like(y)
    m = y > 2.0
    if np.any(m):
        ym = y[m]
        lnxp, root = _edge_root(ym)
        out[m] = _pair_terms(lnxp, p.mu, p.sigma) / root
    return _out(out)


def sqrt_sum_pdf(z, p: LognormalParams):
    """Density of ``sqrt(X + 1/X)``; zero for ``z <= sqrt 2``."""
    z = np.asarray(z, dtype=np.float64)
    out = np.zeros_like(z)
    z2 = z * z
    # the double nearest sqrt 2 is the support edge, although its square exceeds 2
    m = (z > SQRT2) & (z2 > 2.0)
    if np.any(m):
        lnxp, root = _edge_root(z2[m])
        out[m] = 2.0 * z[m] * _pair_terms(lnxp, p.mu, p.sigma) / root
    return _out(out)


def general_w_pdf(w, kappa: float, p: LognormalParams):
    """Density of ``sqrt(X**2/kappa + kappa/X**2)``; zero for ``w <= sqrt 2``.

    ``X**2/kappa`` is Lognormal(2 mu - ln kappa, 4 sigma**2), so this is
    :func:`sqrt_sum_pdf` with shifted parameters.
    """
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    return sqrt_sum_pdf(w, _w_params(kappa, p))


def _w_params(kappa, p):
    return LognormalParams(2.0 * p.mu - math.log(kappa), 2.0 * p.sigma)


# -- DensityFn factories ------------------------------------------------------


def _edge_weight(q: LognormalParams):
    return lambda t: _pair_terms(np.asarray(t, dtype=np.float64), q.mu, q.sigma)


def _edge_cdf(q: LognormalParams, to_t):
    # P(T <= t) for T = |ln X'|
    def cdf(x):
        t = to_t(np.asarray(x, dtype=np.float64))
        return _out(ndtr((t - q.mu) / q.sigma) - ndtr((-t - q.mu) / q.sigma))

    return cdf


def _bisect_ppf(cdf, to_x, t_hi=80.0):
    def ppf(prob):
        prob = np.asarray(prob, dtype=np.float64)
        lo = np.zeros_like(prob)
        hi = np.full_like(prob, t_hi)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            below = cdf(to_x(mid)) < prob
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return _out(to_x(0.5 * (lo + hi)))

    return ppf


def _y_of_t(t):
    return 2.0 * np.cosh(t)


def _t_of_y(y):
    y = np.maximum(y, 2.0)
    return np.arccosh(0.5 * y)


def _z_of_t(t):
    return np.sqrt(2.0 * np.cosh(t))


def _t_of_z(z):
    return _t_of_y(z * z)


def lognormal_density(p: LognormalParams) -> DensityFn:
    return DensityFn(
        name="lognormal",
        support_lo=0.0,
        support_hi=math.inf,
        pdf=lambda x: lognormal_pdf(x, p),
        transform="gauss_weight",
        reparam=Reparam(
            to_x=lambda t: np.exp(p.mu + p.sigma * np.asarray(t)),
            to_t=lambda x: (np.log(x) - p.mu) / p.sigma,
            weight=lambda t: INV_SQRT_2PI * np.exp(-0.5 * np.square(t)),
            t_lo=-math.inf,
            t_hi=math.inf,
            center=0.0,
        ),
        cdf=lambda x: ndtr((np.log(x) - p.mu) / p.sigma),
        ppf=lambda q: np.exp(p.mu + p.sigma * ndtri(q)),
    )


def _edge_density(name, pdf, q, to_x, to_t, lo):
    cdf = _edge_cdf(q, to_t)
    return DensityFn(
        name=name,
        support_lo=lo,
        support_hi=math.inf,
        pdf=pdf,
        transform="cosh_edge",
        reparam=Reparam(to_x=to_x, to_t=to_t, weight=_edge_weight(q), t_lo=0.0, t_hi=math.inf),
        cdf=cdf,
        ppf=_bisect_ppf(cdf, to_x),
    )


def sum_reciprocal_density(p: LognormalParams = DEFAULT_PARAMS) -> DensityFn:
    return _edge_density(
        "sum-reciprocal", lambda y: sum_reciprocal_pdf(y, p), p, _y_of_t, _t_of_y, 2.0
    )


def sqrt_sum_density(p: LognormalParams = DEFAULT_PARAMS) -> DensityFn:
    return _edge_density("sqrt-sum", lambda z: sqrt_sum_pdf(z, p), p, _z_of_t, _t_of_z, SQRT2)


def general_w_density(kappa: float = 1.0, p: LognormalParams = DEFAULT_PARAMS) -> DensityFn:
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    return _edge_density(
        "general-w",
        lambda w: general_w_pdf(w, kappa, p),
        _w_params(kappa, p),
        _z_of_t,
        _t_of_z,
        SQRT2,
    )


def cosh_representation_mean(kind: str, p: LognormalParams = DEFAULT_PARAMS,
                             kappa: float = 1.0, spec=None) -> float:
    """Mean of Z or W from the cosh form of the integral.

    With ``x = exp(mu + sigma u)``, ``Z = sqrt(2 cosh(mu + sigma u))`` and
    ``W = sqrt(2 cosh(2 mu + 2 sigma u - ln kappa))``, hence

        E = (1/sqrt(pi)) * integral sqrt(cosh(shift + scale*u)) exp(-u**2/2) du.
    """
    from unitri.quadrature import QuadratureSpec, integrate

    if kind == "z":
        shift, scale = p.mu, p.sigma
    elif kind == "w":
        if not kappa > 0:
            raise DomainError(f"kappa must be positive, got {kappa}")
        shift, scale = 2.0 * p.mu - math.log(kappa), 2.0 * p.sigma
    else:
        raise ValueError(f"kind must be 'z' or 'w', got {kind!r}")
    spec = spec or QuadratureSpec(transform="gauss_weight")

    def f(u):
        return np.sqrt(np.cosh(shift + scale * u)) * np.exp(-0.5 * u * u)

    res = integrate(f, -math.inf, math.inf, spec)
    return res.value / math.sqrt(math.pi)
