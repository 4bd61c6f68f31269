"""Command-line interface: sample, density, moments, surface, verify.

Exit codes: 0 success, 1 verification failure, 2 usage or IO error,
3 quadrature non-convergence.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from unitri import __version__
from unitri import acceptance
from unitri import io as uio
from unitri import lognormal as ln
from unitri import montecarlo as mc
from unitri import quadrature as qd
from unitri import triangles as tm
from unitri.triangles import ModelKind

log = logging.getLogger("unitri")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NONCONVERGED = 0, 1, 2, 3

MODELS = tuple(m.value for m in ModelKind)
DENSITIES = ("right-angle", "isosceles-side", "arbitrary-a", "sum-reciprocal", "sqrt-sum", "general-w")
DEFAULT_RANGES = {
    "right-angle": (0.0, 0.5 * math.pi),
    "isosceles-side": (math.sqrt(2.0), 10.0),
    "general-w": (math.sqrt(2.0), 10.0),
    "sqrt-sum": (math.sqrt(2.0), 10.0),
    "sum-reciprocal": (2.0, 10.0),
    "arbitrary-a": (0.0, 20.0),
}
# selectors whose parameters are fixed by the triangle model
FIXED_DENSITIES = ("right-angle", "isosceles-side", "arbitrary-a")


RECORD_FIELDS = {
    "sample": ("command", "model", "n", "seed", "sigma", "format"),
    "density": ("command", "which", "kappa", "mu", "sigma", "range", "points", "format"),
    "moments": ("command", "model", "n", "seed", "format"),
    "surface": ("command", "a_max", "resolution", "format"),
    "verify": ("command", "n", "seed", "quick", "workers"),
}


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    model: Optional[str] = None
    which: Optional[str] = None
    n: Optional[int] = None
    seed: Optional[int] = None
    kappa: Optional[float] = None
    mu: Optional[float] = None
    sigma: float = 1.0
    range: Optional[tuple] = None
    points: int = 500
    out: Optional[str] = None
    format: str = "csv"
    quick: bool = False
    workers: int = 1
    a_max: float = 6.0
    resolution: int = 40

    def record(self) -> dict:
        """Settings that determine the output; the output path is excluded."""
        keep = RECORD_FIELDS[self.command]
        d = {k: v for k, v in asdict(self).items() if k in keep and v is not None}
        if "range" in d:
            d["range"] = list(d["range"])
        return d


def _model(cfg: RunConfig) -> ModelKind:
    try:
        return ModelKind(cfg.model)
    except ValueError:
        raise UsageError(f"unknown model {cfg.model!r}; valid models: {', '.join(MODELS)}") from None


def _check_format(cfg):
    if cfg.format not in ("csv", "json"):
        raise UsageError(f"format must be csv or json, got {cfg.format!r}")


def _emit(cfg: RunConfig, text: str, meta_config: dict) -> None:
    if cfg.out is None:
        sys.stdout.write(text)
        return
    try:
        uio.atomic_write(cfg.out, text)
        uio.atomic_write(uio.sidecar_path(cfg.out), uio.format_meta(cfg.command, cfg.seed, meta_config))
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {cfg.out}: {exc.strerror}") from exc
    log.info("wrote %s", cfg.out)


def _log_run(cfg: RunConfig) -> None:
    log.info("unitri %s %s seed=%s config=%s", __version__, cfg.command, cfg.seed, cfg.record())


def cmd_sample(cfg: RunConfig) -> int:
    model = _model(cfg)
    _check_format(cfg)
    if cfg.seed is None:
        raise UsageError("sample requires --seed")
    if cfg.n is None or cfg.n < 1:
        raise UsageError("sample requires --n >= 1")
    if cfg.mu is not None:
        log.warning("--mu ignored: the unit-area constraint fixes the location of each model")
    _log_run(cfg)
    log.info("workers=%d (output does not depend on it)", cfg.workers)
    batch = mc.run_batch(model, cfg.seed, cfg.n, workers=cfg.workers, sigma=cfg.sigma)
    text = uio.batch_to_text(batch, cfg.format)
    _emit(cfg, text, {**cfg.record(), **uio.batch_meta(batch)})
    return EXIT_OK


def density_for(which: str, kappa=None, mu=None, sigma=1.0) -> ln.DensityFn:
    """The :class:`DensityFn` behind a ``density --which`` selector."""
    if which not in DENSITIES:
        raise UsageError(f"unknown density {which!r}; valid densities: {', '.join(DENSITIES)}")
    if which in FIXED_DENSITIES:
        if mu is not None or sigma != 1.0 or kappa is not None:
            raise UsageError(f"{which} has fixed parameters; --kappa/--mu/--sigma do not apply")
        if which == "right-angle":
            return tm.right_angle_density()
        if which == "isosceles-side":
            return tm.isosceles_side_density()
        return tm.arbitrary_a_density()
    p = ln.LognormalParams(ln.DEFAULT_PARAMS.mu if mu is None else mu, sigma)
    if which == "sum-reciprocal":
        return ln.sum_reciprocal_density(p)
    if which == "sqrt-sum":
        return ln.sqrt_sum_density(p)
    return ln.general_w_density(1.0 if kappa is None else kappa, p)


def density_curve(cfg: RunConfig):
    """``(x, pdf, warnings)`` for a density command."""
    d = density_for(cfg.which, cfg.kappa, cfg.mu, cfg.sigma)
    if cfg.points < 2:
        raise UsageError("--points must be >= 2")
    lo, hi = cfg.range if cfg.range is not None else DEFAULT_RANGES[cfg.which]
    if not lo < hi:
        raise UsageError(f"empty range {lo}:{hi}")
    warnings = []
    if lo < d.support_lo or hi > d.support_hi:
        clo, chi = max(lo, d.support_lo), min(hi, d.support_hi)
        if not clo < chi:
            raise UsageError(f"range {lo}:{hi} does not meet the support [{d.support_lo}, {d.support_hi}]")
        warnings.append(f"range {lo}:{hi} clipped to support: {clo}:{chi}")
        lo, hi = clo, chi
    x = np.linspace(lo, hi, cfg.points)
    # every exported density tends to 0 at its support edges
    y = np.zeros_like(x)
    inside = (x > d.support_lo) & (x < d.support_hi)
    y[inside] = d.pdf(x[inside])
    return x, y, warnings


def cmd_density(cfg: RunConfig) -> int:
    _check_format(cfg)
    _log_run(cfg)
    x, y, warnings = density_curve(cfg)
    for w in warnings:
        log.warning(w)
    text = uio.format_table(("x", "pdf"), (x, y), cfg.format)
    _emit(cfg, text, {**cfg.record(), "warnings": warnings})
    return EXIT_OK


@dataclass
class MomentRow:
    quantity: str
    quadrature: float
    mc: float
    mc_se: float
    reference: Optional[float]
    quad_rtol: float = 1e-9
    quad_atol: float = 0.0
    mc_atol: Optional[float] = None
    converged: bool = True

    @property
    def quad_ok(self) -> bool:
        if not self.converged:
            return False
        if self.reference is None:
            return True
        return abs(self.quadrature - self.reference) <= max(self.quad_rtol * abs(self.reference), self.quad_atol)

    @property
    def mc_ok(self) -> bool:
        if not self.converged:
            return False
        band = self.mc_atol if self.mc_atol is not None else acceptance.MC_SIGMAS * self.mc_se
        return abs(self.mc - self.quadrature) <= band


def _quad(fn):
    try:
        return fn(), True
    except qd.ConvergenceError as exc:
        log.error("%s", exc)
        return math.nan, False


def _row(name, quad_fn, mc_pair, ref, **kw):
    q, ok = _quad(quad_fn)
    return MomentRow(name, q, mc_pair[0], mc_pair[1], ref, converged=ok, **kw)


def _area_moment(cdf_hi, pdf):
    res = qd.integrate(lambda x: x * pdf(x), 0.0, cdf_hi)
    return qd.expect_converged(res, "E(area)")


def moment_rows(model: ModelKind, n: int, seed: int, workers: int = 1) -> list:
    """Quadrature vs Monte Carlo vs reference rows for one model (sigma = 1)."""
    T = acceptance.TARGETS
    b = mc.run_batch(model, seed, n, workers=workers)
    if model is ModelKind.RIGHT:
        lp = ln.lognormal_density(ln.RIGHT_PARAMS)
        ra = tm.right_angle_density()
        ea = mc.empirical_moments(b, "a", [1, 2])
        eal = mc.empirical_moments(b, "alpha", [1, 2])
        return [
            _row("E(a)", lambda: qd.moment_of_density(lp, 1), ea[0], T["right.E_a"]),
            _row("E(a^2)", lambda: qd.moment_of_density(lp, 2), ea[1], T["right.E_a2"]),
            _row("E(alpha)", lambda: qd.moment_of_density(ra, 1), eal[0], T["right.E_alpha"]),
            _row("E(alpha^2)", lambda: qd.moment_of_density(ra, 2), eal[1], T["right.E_alpha2"]),
        ]
    if model is ModelKind.ISOSCELES:
        iso = tm.isosceles_side_density()
        cd = ln.lognormal_density(tm.isosceles_c_params())
        ea = mc.empirical_moments(b, "a", [1, 2])
        ec = mc.empirical_moments(b, "c", [1, 2])
        return [
            _row("E(a)", lambda: qd.moment_of_density(iso, 1), ea[0], T["iso.E_a"]),
            _row("E(a^2)", lambda: qd.moment_of_density(iso, 2), ea[1], T["iso.E_a2"]),
            _row("E(c)", lambda: qd.moment_of_density(cd, 1), ec[0], T["iso.E_c"]),
            _row("E(c^2)", lambda: qd.moment_of_density(cd, 2), ec[1], T["iso.E_c2"]),
        ]
    if model is ModelKind.ARBITRARY:
        arb = tm.arbitrary_a_density()
        ea = mc.empirical_moments(b, "a", [1, 2])
        ab = b.column("a") * b.column("b")
        eab = (float(ab.mean()), float(ab.std(ddof=1) / math.sqrt(ab.size)))
        ec = mc.empirical_moments(b, "c", [1])[0]
        r = mc.empirical_correlation(b, "a", "b")

        def corr():
            m = acceptance.quadrature_moments()
            return m["arb.corr"]

        return [
            _row("E(a)", lambda: qd.moment_of_density(arb, 1), ea[0], T["arb.E_a"]),
            _row("E(a^2)", lambda: qd.moment_of_density(arb, 2), ea[1], T["arb.E_a2"]),
            _row("E(ab)", lambda: qd.expect_converged(tm.arbitrary_joint_moment(lambda a, bb: a * bb), "E(ab)"),
                 eab, T["arb.E_ab"], quad_rtol=1e-8),
            _row("corr(a,b)", corr, (r, (1 - r * r) / math.sqrt(b.accepted)), T["arb.corr"],
                 quad_atol=1e-3, mc_atol=0.01),
            _row("E(c)", tm.arbitrary_mean_c, ec, T["arb.E_c"], quad_atol=1e-2),
        ]
    if model is ModelKind.STICK_TWICE:
        p = b.accepted / b.count
        area = mc.empirical_moments(b, "area", [1])[0]
        hi = tm.STICK_TWICE_MAX_AREA
        return [
            _row("acceptance", lambda: math.pi / (3.0 * math.sqrt(3.0)),
                 (p, math.sqrt(p * (1 - p) / b.count)), T["stick_twice.acceptance"]),
            _row("E(area)", lambda: _area_moment(hi, lambda x: 96.0 * x), area, T["stick_twice.E_area"]),
        ]
    area = mc.empirical_moments(b, "area", [1])[0]
    return [_row("E(area)", lambda: _area_moment(0.25, lambda x: np.full_like(x, 4.0)), area,
                 T["stick_once.E_area"])]


def cmd_moments(cfg: RunConfig) -> int:
    model = _model(cfg)
    _check_format(cfg)
    if cfg.sigma != 1.0:
        raise UsageError("moment tables are defined at sigma = 1")
    cfg.seed = acceptance.PUBLISHED_SEED if cfg.seed is None else cfg.seed
    cfg.n = acceptance.FULL_N if cfg.n is None else cfg.n
    _log_run(cfg)
    rows = moment_rows(model, cfg.n, cfg.seed, cfg.workers)
    names = ("quantity", "quadrature", "mc", "mc_se", "reference", "quad_check", "mc_check")

    def flag(row, ok):
        return "nonconverged" if not row.converged else ("pass" if ok else "fail")

    recs = [(r.quantity, r.quadrature, r.mc, r.mc_se, r.reference, flag(r, r.quad_ok), flag(r, r.mc_ok))
            for r in rows]
    _emit(cfg, uio.format_records(names, recs, cfg.format), cfg.record())
    if not all(r.converged for r in rows):
        return EXIT_NONCONVERGED
    return EXIT_OK if all(r.quad_ok and r.mc_ok for r in rows) else EXIT_FAIL


def surface_records(a_max: float, resolution: int) -> list:
    mesh = tm.sigma_surface_mesh(a_max, resolution)
    recs = [("sigma", *map(float, p), int(br)) for p, br in zip(mesh.points, mesh.branch)]
    recs += [("cylinder", *map(float, p), 0) for p in tm.cylinder_curve(a_max, resolution)]
    return recs


def cmd_surface(cfg: RunConfig) -> int:
    _check_format(cfg)
    if cfg.resolution < 2:
        raise UsageError("--resolution must be >= 2")
    _log_run(cfg)
    recs = surface_records(cfg.a_max, cfg.resolution)
    _emit(cfg, uio.format_records(("part", "a", "b", "c", "branch"), recs, cfg.format), cfg.record())
    return EXIT_OK


def verify_report(cfg: RunConfig):
    s = acceptance.Settings(
        n=cfg.n or (acceptance.QUICK_N if cfg.quick else acceptance.FULL_N),
        seed=acceptance.PUBLISHED_SEED if cfg.seed is None else cfg.seed,
        quick=cfg.quick,
        workers=cfg.workers,
    )
    checks = acceptance.run_all(s)
    lines = [f"unitri {__version__} verify: n={s.n} seed={s.seed} workers={s.workers}"]
    if cfg.quick:
        lines.append(f"quick mode: n={s.n}, corr band widened to {s.corr_band:g}, "
                     "C17 uses 2 chunks + 17 draws")
    for group, head in (("quadrature", "hard tolerances"), ("MC", f"statistical bands, {acceptance.MC_SIGMAS:g} SE")):
        lines.append(f"== [{group}] criteria ({head}) ==")
        lines.extend(c.line() for c in checks if c.group == group)
    passed = sum(c.passed for c in checks)
    lines.append(f"{passed}/{len(checks)} criteria passed")
    return checks, "\n".join(lines) + "\n"


def cmd_verify(cfg: RunConfig) -> int:
    _log_run(cfg)
    checks, text = verify_report(cfg)
    sys.stdout.write(text)
    if cfg.out is not None:
        try:
            uio.atomic_write(cfg.out, text)
        except OSError as exc:
            raise OSError(exc.errno, f"cannot write {cfg.out}: {exc.strerror}") from exc
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


COMMANDS = {
    "sample": cmd_sample,
    "density": cmd_density,
    "moments": cmd_moments,
    "surface": cmd_surface,
    "verify": cmd_verify,
}


def _range(text: str) -> tuple:
    try:
        lo, hi = text.split(":")
        return float(lo), float(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="unitri", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"unitri {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed_required=False):
        p.add_argument("--out", help="output path (default: stdout); writes <out>.meta.json alongside")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--seed", type=int, required=seed_required)
        p.add_argument("-q", "--quiet", action="store_true", help="only log warnings and errors")

    p = sub.add_parser("sample", help="draw unit-area triangles")
    p.add_argument("--model", required=True, choices=MODELS)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--mu", type=float)
    p.add_argument("--workers", type=int, default=1)
    common(p, seed_required=True)

    p = sub.add_parser("density", help="emit (x, pdf) curve data")
    p.add_argument("--which", required=True, choices=DENSITIES)
    p.add_argument("--kappa", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--range", type=_range, metavar="LO:HI")
    p.add_argument("--points", type=int, default=500)
    common(p)

    p = sub.add_parser("moments", help="quadrature vs Monte Carlo moment table")
    p.add_argument("--model", required=True, choices=MODELS)
    p.add_argument("--n", type=int)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--workers", type=int, default=1)
    common(p)

    p = sub.add_parser("surface", help="mesh of the unit-area surface and the ab = 2 cylinder curve")
    p.add_argument("--a-max", type=float, default=6.0)
    p.add_argument("--resolution", type=int, default=40)
    common(p)

    p = sub.add_parser("verify", help="run every acceptance check")
    p.add_argument("--quick", action="store_true", help=f"n={acceptance.QUICK_N} with widened bands")
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="also write the report here")
    p.add_argument("-q", "--quiet", action="store_true", help="only log warnings and errors")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    fields = RunConfig.__dataclass_fields__
    return RunConfig(**{k: v for k, v in vars(args).items() if k in fields})


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(name)s: %(levelname)s: %(message)s", stream=sys.stderr)
    cfg = config_from_args(args)
    try:
        return COMMANDS[cfg.command](cfg)
    except (UsageError, ln.DomainError, tm.BelowHyperbolaError) as exc:
        parser.print_usage(sys.stderr)
        print(f"unitri: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"unitri: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except qd.ConvergenceError as exc:
        print(f"unitri: error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED


if __name__ == "__main__":
    sys.exit(main())
