"""Seeded batches, empirical statistics and goodness-of-fit tests.

A batch of ``count`` draws is split into fixed chunks of ``CHUNK`` draws.
Chunk ``i`` is generated from ``Stream(seed, (i,))`` and chunks are
concatenated in index order, so a batch is a pure function of
``(model, seed, count, sigma)``.  The worker count only changes how chunks
are scheduled, never the output.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import stats

from unitri import quadrature
from unitri import triangles as tm
from unitri.rng import Stream
from unitri.triangles import ModelKind

CHUNK = 1 << 16

COLUMNS = {
    ModelKind.RIGHT: ("a", "b", "c", "alpha"),
    ModelKind.ISOSCELES: ("r", "a", "b", "c"),
    ModelKind.ARBITRARY: ("a", "b", "c", "branch", "folded"),
    ModelKind.STICK_TWICE: ("area",),
    ModelKind.STICK_ONCE: ("area",),
}


class InsufficientSamplesError(ValueError):
    pass


@dataclass
class SampleBatch:
    model: ModelKind
    seed: int
    count: int
    columns: dict
    accepted: int
    sigma: float = 1.0

    @property
    def names(self) -> tuple:
        return COLUMNS[self.model]

    def __len__(self) -> int:
        return self.accepted

    def column(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise KeyError(f"{self.model.value} batch has no column {name!r}; "
                           f"columns are {', '.join(self.names)}") from None

    def rows(self):
        cols = [self.columns[n] for n in self.names]
        for i in range(self.accepted):
            yield {n: c[i].item() for n, c in zip(self.names, cols)}


@dataclass
class FitReport:
    statistic: float
    p_value: float
    test: str
    n: int
    bins: Optional[int] = None
    detail: dict = field(default_factory=dict, repr=False)


def _chunk(model: ModelKind, stream: Stream, n: int, sigma: float) -> dict:
    if model is ModelKind.RIGHT:
        return tm.right_batch(stream, n, sigma)
    if model is ModelKind.ISOSCELES:
        return tm.isosceles_batch(stream, n, sigma)
    if model is ModelKind.ARBITRARY:
        return tm.arbitrary_batch(stream, n, sigma)
    if model is ModelKind.STICK_TWICE:
        area = tm.stick_twice_batch(stream, n)
        return {"area": area[~np.isnan(area)]}
    return {"area": tm.stick_once_batch(stream, n)}


def run_batch(model, seed: int, count: int, *, workers: int = 1, sigma: float = 1.0) -> SampleBatch:
    """Draw ``count`` samples (attempts, for stick-twice) from ``model``."""
    model = ModelKind(model)
    if count < 1:
        raise ValueError("count must be >= 1")
    sizes = [min(CHUNK, count - start) for start in range(0, count, CHUNK)]
    root = Stream(seed)

    def job(i):
        return _chunk(model, root.substream(i), sizes[i], sigma)

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(len(sizes))))
    else:
        parts = [job(i) for i in range(len(sizes))]
    names = COLUMNS[model]
    columns = {n: np.concatenate([p[n] for p in parts]) for n in names}
    accepted = len(columns[names[0]])
    return SampleBatch(model, int(seed), int(count), columns, accepted, sigma)


def empirical_moments(batch: SampleBatch, column: str, orders: Sequence[int]) -> list:
    """``(mean of x**k, standard error)`` for each order ``k``."""
    if not len(orders):
        raise ValueError("orders must be non-empty")
    x = np.asarray(batch.column(column), dtype=np.float64)
    out = []
    for k in orders:
        if k == 0:
            out.append((1.0, 0.0))
            continue
        xk = x ** k
        se = float(np.std(xk, ddof=1) / math.sqrt(xk.size)) if xk.size > 1 else math.inf
        out.append((float(np.mean(xk)), se))
    return out


def correlation(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size < 2 or x.size != y.size:
        raise ValueError("need two equal-length columns with at least 2 values")
    dx = x - x.mean()
    dy = y - y.mean()
    vx = float(np.dot(dx, dx))
    vy = float(np.dot(dy, dy))
    if vx == 0.0 or vy == 0.0:
        raise ValueError("correlation undefined for a zero-variance column")
    r = float(np.dot(dx, dy)) / math.sqrt(vx * vy)
    return max(-1.0, min(1.0, r))


def empirical_correlation(batch: SampleBatch, col1: str, col2: str) -> float:
    """Pearson correlation of two batch columns."""
    return correlation(batch.column(col1), batch.column(col2))


def ks_test(sample, cdf: Callable[[np.ndarray], np.ndarray]) -> FitReport:
    """One-sample Kolmogorov-Smirnov test with the asymptotic p-value."""
    x = np.sort(np.asarray(sample, dtype=np.float64))
    n = x.size
    if n < 1:
        raise InsufficientSamplesError("empty sample")
    f = np.asarray(cdf(x), dtype=np.float64)
    if np.any(np.diff(f) < 0):
        raise ValueError("cdf is not monotone on the sample range")
    if np.any((f < 0) | (f > 1)) or np.any(np.isnan(f)):
        raise ValueError("cdf values must lie in [0, 1]")
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))
    p = float(stats.kstwobign.sf(math.sqrt(n) * d))
    return FitReport(d, min(max(p, 0.0), 1.0), "KS", n)


def _bin_edges(sample, pdf, bins):
    if pdf.ppf is not None:
        inner = np.asarray(pdf.ppf(np.arange(1, bins) / bins), dtype=np.float64)
    else:
        inner = np.quantile(sample, np.arange(1, bins) / bins)
    return np.concatenate([[pdf.support_lo], inner, [pdf.support_hi]])


def chi_square_density_test(sample, pdf, bins: int = 50, min_expected: float = 5.0) -> FitReport:
    """Pearson chi-square of a sample against a :class:`DensityFn`.

    Edges are equiprobable under the density (closed-form quantiles when the
    density has them); bin probabilities come from quadrature of the pdf.
    Adjacent bins are merged until every expected count is at least
    ``min_expected``.
    """
    if bins < 5:
        raise ValueError("bins must be >= 5")
    x = np.asarray(sample, dtype=np.float64)
    n = x.size
    if n < min_expected * bins:
        raise InsufficientSamplesError(f"{n} samples cannot fill {bins} bins with {min_expected} each")
    edges = _bin_edges(x, pdf, bins)
    probs = np.array([quadrature.probability(pdf, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])])
    idx = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, bins - 1)
    observed = np.bincount(idx, minlength=bins).astype(np.float64)
    expected = probs * n
    obs_m, exp_m = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(observed, expected):
        o_acc += o
        e_acc += e
        if e_acc >= min_expected:
            obs_m.append(o_acc)
            exp_m.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc > 0 or o_acc > 0:
        obs_m[-1] += o_acc
        exp_m[-1] += e_acc
    obs_m = np.array(obs_m)
    exp_m = np.array(exp_m)
    k = obs_m.size
    if k < 5:
        raise InsufficientSamplesError(f"only {k} bins remain after merging")
    stat = float(np.sum((obs_m - exp_m) ** 2 / exp_m))
    p = float(stats.chi2.sf(stat, k - 1))
    return FitReport(stat, p, "chi_square", n, k,
                     detail={"mass": float(probs.sum()), "observed": obs_m, "expected": exp_m})
