"""Adaptive double-exponential quadrature.

The interval kind picks the rule:

* finite ``[lo, hi]``      tanh-sinh:  x = lo + (hi-lo) * logistic(pi sinh t)
* ``[lo, inf)``            exp-sinh:   x = lo + exp(pi/2 sinh t)
* ``(-inf, hi]``           reflected exp-sinh
* ``(-inf, inf)``          sinh-sinh:  x = sinh(pi/2 sinh t)

Each is a trapezoid sum in ``t``.  Level ``k`` uses step ``2**-k`` and only
evaluates the new odd nodes.  The error estimate at level ``k`` is
``|I_k - I_{k-1}|`` floored by the rounding bound ``64 eps sum|w f|``; since
the rule converges roughly quadratically, this overstates the error of
``I_k``.

Before the rule is applied, ``QuadratureSpec.transform`` may change variables:

``cosh_edge``     x = lo cosh t,  t in [0, acosh(hi/lo)] (inverse-sqrt edge at lo > 0)
``log_axis``      x = exp s       (lo >= 0)
``gauss_weight``  an infinite end is cut at ``center +- 12 scale``
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

EPS = np.finfo(np.float64).eps
TRANSFORMS = ("none", "cosh_edge", "log_axis", "gauss_weight")
GAUSS_CUTOFF = 12.0
MIN_LEVEL = 3

# t-ranges keep abscissae finite and below 1e150 (so x**2 does not overflow)
_T_FINITE = 4.0
_T_EXP_LO = 4.5
_T_INF = 6.0


class QuadratureError(ArithmeticError):
    """Integrand returned NaN."""


class ConvergenceError(ArithmeticError):
    """Raised by wrappers that require a converged result."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_refinements: int = 12
    transform: str = "none"
    center: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("rel_tol and abs_tol must be positive")
        if self.max_refinements < 1:
            raise ValueError("max_refinements must be >= 1")
        if self.transform not in TRANSFORMS:
            raise ValueError(f"transform must be one of {TRANSFORMS}, got {self.transform!r}")
        if not self.scale > 0:
            raise ValueError("scale must be positive")


SPEC_2D = QuadratureSpec(rel_tol=1e-8, abs_tol=1e-12, transform="log_axis")


@dataclass
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int
    converged: bool
    history: list = field(default_factory=list, repr=False)


def _rule(kind, lo, hi):
    """Return ``nodes(t) -> (x, dx/dt)`` and the t-range for an interval kind."""
    if kind == "finite":
        span = hi - lo

        def nodes(t):
            z = math.pi * np.sinh(t)
            # distance from the nearer endpoint computed directly
            ez = np.exp(-np.abs(z))
            near = span * ez / (1.0 + ez)
            x = np.where(z < 0, lo + near, hi - near)
            dx = span * math.pi * np.cosh(t) * ez / (1.0 + ez) ** 2
            return x, dx

        return nodes, -_T_FINITE, _T_FINITE
    if kind == "upper":

        def nodes(t):
            e = np.exp(0.5 * math.pi * np.sinh(t))
            return lo + e, 0.5 * math.pi * np.cosh(t) * e

        return nodes, -_T_EXP_LO, _T_INF
    if kind == "lower":

        def nodes(t):
            e = np.exp(0.5 * math.pi * np.sinh(t))
            return hi - e, 0.5 * math.pi * np.cosh(t) * e

        return nodes, -_T_EXP_LO, _T_INF

    def nodes(t):
        s = 0.5 * math.pi * np.sinh(t)
        return np.sinh(s), 0.5 * math.pi * np.cosh(t) * np.cosh(s)

    return nodes, -_T_INF, _T_INF


def _evaluate(f, x, dx, lo, hi):
    with np.errstate(all="ignore"):
        fx = np.asarray(f(x), dtype=np.float64)
    if fx.shape != x.shape:
        fx = np.broadcast_to(fx, x.shape).astype(np.float64)
    bad = np.isnan(fx)
    if np.any(bad):
        raise QuadratureError(f"integrand returned NaN at x={float(x[bad][0])!r}")
    # abscissae that rounded onto a finite endpoint carry no weight
    on_edge = (x == lo) | (x == hi) | ~np.isfinite(x)
    return np.where(on_edge, 0.0, fx * dx)


def _call(f, x):
    """``f(x)`` for a transform wrapper; NaN is reported at the original abscissa."""
    with np.errstate(all="ignore"):
        fx = np.asarray(f(x), dtype=np.float64)
    bad = np.isnan(fx)
    if np.any(bad):
        raise QuadratureError(f"integrand returned NaN at x={float(np.broadcast_to(x, fx.shape)[bad][0])!r}")
    return fx


def _de_integrate(f, lo, hi, spec):
    if lo == hi:
        return QuadratureResult(0.0, 0.0, 0, True, [0.0])
    if lo > hi:
        res = _de_integrate(f, hi, lo, spec)
        res.value = -res.value
        return res
    if math.isfinite(lo) and math.isfinite(hi):
        kind = "finite"
    elif math.isfinite(lo):
        kind = "upper"
    elif math.isfinite(hi):
        kind = "lower"
    else:
        kind = "both"
    nodes, t_lo, t_hi = _rule(kind, lo, hi)

    def level_sum(t):
        x, dx = nodes(t)
        g = _evaluate(f, x, dx, lo, hi)
        return float(math.fsum(g)), float(np.sum(np.abs(g))), t.size

    j = np.arange(math.ceil(t_lo), math.floor(t_hi) + 1, dtype=np.float64)
    total, total_abs, evals = level_sum(j)
    h = 1.0
    value = total * h
    history = []
    err = math.inf
    floor = math.inf
    converged = False
    for level in range(1, spec.max_refinements + 1):
        h *= 0.5
        k_lo = math.ceil((t_lo / h - 1) / 2)
        k_hi = math.floor((t_hi / h - 1) / 2)
        t = (2.0 * np.arange(k_lo, k_hi + 1, dtype=np.float64) + 1.0) * h
        s, sa, n = level_sum(t)
        total += s
        total_abs += sa
        evals += n
        new = total * h
        # the rounding floor is the same bound at every level up to ulps; keep it monotone
        floor = min(floor, 64.0 * EPS * total_abs * h)
        err = max(abs(new - value), floor)
        value = new
        history.append(err)
        if level >= MIN_LEVEL and err <= max(spec.rel_tol * abs(value), spec.abs_tol):
            converged = True
            break
    return QuadratureResult(value, err, evals, converged, history)


def integrate(f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
              spec: QuadratureSpec = QuadratureSpec()) -> QuadratureResult:
    """Integrate a vectorized ``f`` over ``[lo, hi]`` (ends may be infinite)."""
    lo, hi = float(lo), float(hi)
    tr = spec.transform
    if tr == "cosh_edge":
        if not (lo > 0 and math.isfinite(lo)):
            raise ValueError("cosh_edge needs a finite positive lower edge")
        t_hi = math.acosh(hi / lo) if math.isfinite(hi) else math.inf

        def g(t):
            x = lo * np.cosh(t)
            ok = np.isfinite(x)
            out = np.zeros_like(x)
            if np.any(ok):
                out[ok] = _call(f, x[ok]) * (lo * np.sinh(t[ok]))
            return out

        return _de_integrate(g, 0.0, t_hi, spec)
    if tr == "log_axis":
        if lo < 0:
            raise ValueError("log_axis needs lo >= 0")
        s_lo = math.log(lo) if lo > 0 else -math.inf
        s_hi = math.log(hi) if math.isfinite(hi) else math.inf

        def g(s):
            x = np.exp(s)
            ok = (x > 0) & np.isfinite(x)
            out = np.zeros_like(x)
            if np.any(ok):
                out[ok] = _call(f, x[ok]) * x[ok]
            return out

        return _de_integrate(g, s_lo, s_hi, spec)
    if tr == "gauss_weight":
        cut = GAUSS_CUTOFF * spec.scale
        lo = max(lo, spec.center - cut)
        hi = min(hi, spec.center + cut)
        if lo >= hi:
            return QuadratureResult(0.0, 0.0, 0, True, [0.0])
    return _de_integrate(f, lo, hi, spec)


def expect_converged(res: QuadratureResult, what: str) -> float:
    """Value of a converged result; raises :class:`ConvergenceError` otherwise."""
    if not res.converged:
        raise ConvergenceError(
            f"{what}: no convergence (estimate {res.value!r}, error {res.error_estimate:.3g})", res
        )
    return res.value


def moment_of_density(d, k: int, spec: QuadratureSpec | None = None) -> float:
    """``E(X**k)`` for a density ``d`` (a :class:`unitri.lognormal.DensityFn`).

    If ``spec.transform`` equals the density's own transform and the density
    carries an analytic reparametrization, the smooth form is integrated;
    otherwise the raw pdf is integrated with the requested transform.
    """
    if k < 0:
        raise ValueError("moment order must be non-negative")
    spec = spec or QuadratureSpec(transform=d.transform)
    rp = d.reparam
    if rp is not None and spec.transform == d.transform:
        if rp.center is not None:
            tspec = replace(spec, transform="gauss_weight", center=rp.center, scale=rp.scale)
        else:
            tspec = replace(spec, transform="none")

        def g(t):
            w = rp.weight(t)
            return w if k == 0 else np.where(w > 0, rp.to_x(t) ** k * w, 0.0)

        res = integrate(g, rp.t_lo, rp.t_hi, tspec)
    else:
        if k == 0:
            res = integrate(d.pdf, d.support_lo, d.support_hi, spec)
        else:
            def g(x):
                p = d.pdf(x)
                return np.where(p > 0, x ** k * p, 0.0)

            res = integrate(g, d.support_lo, d.support_hi, spec)
    return expect_converged(res, f"moment {k} of {d.name}")


def probability(d, x0: float, x1: float, spec: QuadratureSpec | None = None) -> float:
    """Mass of ``d`` on ``[x0, x1]`` by quadrature of the (reparametrized) pdf."""
    x0 = max(x0, d.support_lo)
    x1 = min(x1, d.support_hi)
    if x0 >= x1:
        return 0.0
    spec = spec or QuadratureSpec(abs_tol=1e-14)
    rp = d.reparam
    if rp is not None:
        t0 = rp.t_lo if x0 <= d.support_lo else float(rp.to_t(np.float64(x0)))
        t1 = rp.t_hi if x1 >= d.support_hi else float(rp.to_t(np.float64(x1)))
        res = integrate(rp.weight, t0, t1, replace(spec, transform="none"))
    else:
        res = integrate(d.pdf, x0, x1, replace(spec, transform="none"))
    return expect_converged(res, f"probability of {d.name} on [{x0}, {x1}]")


def integrate_2d(f: Callable[[np.ndarray, np.ndarray], np.ndarray], region: str = "ab_geq_2",
                 spec: QuadratureSpec = SPEC_2D, bounds=None) -> QuadratureResult:
    """Iterated integral of ``f(a, b)``: inner over b, outer over a.

    ``region='ab_geq_2'`` integrates over ``{a > 0, b >= 2/a}``;
    ``region='rectangle'`` uses ``bounds=((a_lo, a_hi), (b_lo, b_hi))``.
    The inner and outer integrals use ``spec`` (default transform ``log_axis``).
    """
    if region == "ab_geq_2":
        a_lo, a_hi = 0.0, math.inf

        def b_range(a):
            return 2.0 / a, math.inf
    elif region == "rectangle":
        if bounds is None:
            raise ValueError("rectangle region needs bounds")
        (a_lo, a_hi), (b_lo, b_hi) = bounds

        def b_range(a):
            return b_lo, b_hi
    else:
        raise ValueError(f"unknown region {region!r}")

    inner_evals = 0
    inner_ok = True

    def outer(avals):
        nonlocal inner_evals, inner_ok
        out = np.empty(avals.shape)
        for i, a in enumerate(avals.ravel()):
            lo, hi = b_range(a)
            r = integrate(lambda b: f(np.full_like(b, a), b), lo, hi, spec)
            inner_evals += r.evaluations
            inner_ok &= r.converged
            out.flat[i] = r.value
        return out

    res = integrate(outer, a_lo, a_hi, spec)
    res.evaluations += inner_evals
    res.converged = res.converged and inner_ok
    return res
