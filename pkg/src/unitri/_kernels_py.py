"""Pure numpy implementation of the per-draw kernels.

Mirrors ``_ckernels.pyx`` operation for operation.  Every kernel takes an
array of uniforms in (0, 1) laid out row-major, one row per draw, and returns
the derived columns.
"""

import numpy as np
from scipy.special import ndtri

HALF_LN2 = 0.5 * np.log(2.0)
SQRT3 = np.sqrt(3.0)
ISO_C_OVER_R = 2.0 / 3.0 ** 0.25
DEGENERATE_RTOL = 1e-15


def heron(a, b, c):
    """Kahan's cancellation-free Heron formula.

    Returns 0 for degenerate triples and NaN where a triangle inequality fails
    by more than ``DEGENERATE_RTOL`` of the perimeter.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    s = np.sort(np.stack(np.broadcast_arrays(a, b, c)), axis=0)
    z, y, x = s[0], s[1], s[2]
    gap = z - (x - y)
    tol = DEGENERATE_RTOL * (x + y + z)
    prod = (x + (y + z)) * gap * (z + (x - y)) * (x + (y - z))
    area = 0.25 * np.sqrt(np.where(gap > tol, prod, 0.0))
    return np.where(gap < -tol, np.nan, area)


def right(u, mu, sigma):
    a = np.exp(mu + sigma * ndtri(u))
    b = 2.0 / a
    c = np.sqrt(a * a + b * b)
    alpha = np.arctan(a / b)
    return a, b, c, alpha


def isosceles(u, mu, sigma):
    r = np.exp(mu + sigma * ndtri(u))
    r2 = r * r
    a = np.sqrt(r2 / SQRT3 + SQRT3 / r2)
    c = r * ISO_C_OVER_R
    return r, a, a.copy(), c


def c_from_ab(a, b, plus):
    """Third side of the unit-area triangle(s) with sides a, b (ab >= 2)."""
    ab = a * b
    root = np.sqrt(np.maximum((ab - 2.0) * (ab + 2.0), 0.0))
    d = a - b
    c_minus = np.sqrt(d * d + 8.0 / (ab + root))
    c_plus = np.sqrt(a * a + b * b + 2.0 * root)
    return np.where(plus, c_plus, c_minus)


def arbitrary(uvw, sigma):
    """Folded bivariate normal sides plus a fair-coin branch.

    Columns of ``uvw``: normal u, normal v, branch coin.  Returns
    (a, b, c, branch, folded) with branch = +1 for the plus root.
    """
    u = sigma * ndtri(uvw[:, 0])
    v = sigma * ndtri(uvw[:, 1])
    folded = (u + v) < 0.0
    uf = np.where(folded, -v, u) + HALF_LN2
    vf = np.where(folded, -u, v) + HALF_LN2
    a = np.exp(uf)
    b = np.exp(vf)
    plus = uvw[:, 2] >= 0.5
    c = c_from_ab(a, b, plus)
    branch = np.where(plus, 1, -1).astype(np.int8)
    return a, b, c, branch, folded


def stick_twice(uv):
    """Areas from square-rooted stick pieces; NaN where no triangle forms."""
    lo = np.minimum(uv[:, 0], uv[:, 1])
    hi = np.maximum(uv[:, 0], uv[:, 1])
    a = np.sqrt(lo)
    b = np.sqrt(hi - lo)
    c = np.sqrt(1.0 - hi)
    area = heron(a, b, c)
    return np.where(area > 0.0, area, np.nan)


def stick_once(uv):
    cut = uv[:, 0]
    gamma = np.pi * uv[:, 1]
    return 0.5 * np.sqrt(cut) * np.sqrt(1.0 - cut) * np.sin(gamma)
