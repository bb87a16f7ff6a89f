"""Command-line entry point: ``sphermean <subcommand> ...``.

Exit codes: 0 success, 1 verification failure or I/O error, 2 usage error.
Reports are JSON with sorted keys and floats at 17 significant digits.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from dataclasses import asdict, dataclass, field as dc_field
from pathlib import Path

import numpy as np

log = logging.getLogger("sphermean")

PHANTOM_KINDS = ("gaussian", "bump", "zalcman", "disk-mask", "square-mask",
                 "two-disk-mask", "lshape-mask", "random-bumps")
VERIFY_SUITES = ("specfun", "transform", "zalcman", "abel", "local",
                 "rconvex", "support", "rconvex-walk", "all")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    action: str = ""
    input: str | None = None
    output: str | None = None
    field: str | None = None
    mask: str | None = None
    report: str | None = None
    dim: int = 2
    shape: int = 256
    spacing: float = 0.02
    radius: float | None = None
    method: str = "fft"
    policy: str = "zero"
    verify: bool = False
    seed: int = 7
    kind: str = "gaussian"
    sigma: float = 0.1
    size: float = 0.9
    zero_index: int = 0
    order: float = 0.0
    count: int = 10
    verbose: bool = False
    extra: dict = dc_field(default_factory=dict)


# -- reports -------------------------------------------------------------

def _to_plain(obj):
    if isinstance(obj, dict):
        return {str(k): _to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_to_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def _dump(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_dump(k, indent, 0)}: {_dump(obj[k], indent, level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + _dump(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return "%.17g" % obj if math.isfinite(obj) else "null"
    import json

    return json.dumps(obj)


def emit_report(results):
    """Serialize a report dict (or a ``SuiteResult``) to deterministic JSON text.

    Keys are sorted, floats carry 17 significant digits and non-finite
    values become ``null``.
    """
    if hasattr(results, "as_report"):
        results = results.as_report()
    return _dump(_to_plain(results), 2, 0) + "\n"


def _write_report(config, report):
    text = emit_report(report)
    if config.report:
        Path(config.report).write_text(text)
    else:
        sys.stdout.write(text)


# -- parsing -------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive(text):
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text}")
    return v


def _positive_int(text):
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return v


def _common(p):
    p.add_argument("--verbose", "-v", action="store_true", help="log progress lines to stderr")


def build_parser():
    parser = _Parser(prog="sphermean",
                     description="Fixed-radius spherical mean transform toolkit.")
    sub = parser.add_subparsers(dest="subcommand", parser_class=_Parser)

    p = sub.add_parser("bessel", help="table of positive zeros of J_order as CSV")
    p.add_argument("--order", type=float, default=0.0, help="Bessel order (>= 0)")
    p.add_argument("--count", type=_positive_int, default=10, help="number of zeros")
    p.add_argument("--output", help="CSV path (default stdout)")
    _common(p)

    p = sub.add_parser("phantom", help="write a test field or mask")
    p.add_argument("--kind", choices=PHANTOM_KINDS, required=True, help="phantom family")
    p.add_argument("--dim", type=int, choices=(2, 3), default=2, help="spatial dimension")
    p.add_argument("--shape", type=_positive_int, default=256, help="points per axis")
    p.add_argument("--spacing", type=_positive, default=0.02, help="grid spacing")
    p.add_argument("--sigma", type=_positive, default=0.1, help="gaussian width")
    p.add_argument("--size", type=_positive, default=0.9,
                   help="bump or disk radius, square half side, L-shape half side")
    p.add_argument("--zero-index", type=int, default=0, help="zalcman: which Bessel zero sets lambda")
    p.add_argument("--count", type=_positive_int, default=5, help="random-bumps: number of bumps")
    p.add_argument("--seed", type=int, default=7, help="seed for randomized placement")
    p.add_argument("--output", required=True, help="field path (sidecar written next to it)")
    _common(p)

    p = sub.add_parser("transform", help="fixed-radius spherical mean transform of a field")
    p.add_argument("--input", required=True, help="input field")
    p.add_argument("--radius", type=_positive, required=True, help="sphere radius R")
    p.add_argument("--method", choices=("fft", "quad"), default="fft", help="multiplier or quadrature")
    p.add_argument("--output", required=True, help="output field")
    p.add_argument("--verify", action="store_true", help="emit ring and oracle report")
    p.add_argument("--report", help="report path (default stdout)")
    _common(p)

    p = sub.add_parser("invert", help="deconvolve a transformed field")
    p.add_argument("--input", required=True, help="transformed field")
    p.add_argument("--radius", type=_positive, required=True, help="sphere radius R")
    p.add_argument("--policy", default="zero", help="zero | tikhonov:EPS")
    p.add_argument("--output", required=True, help="reconstructed field")
    p.add_argument("--report", help="report path (default stdout)")
    _common(p)

    p = sub.add_parser("abel", help="ridge/radial Abel pair on CSV profiles")
    p.add_argument("action", choices=("forward", "inverse"))
    p.add_argument("--input", required=True, help="CSV r,value on a uniform grid from 0")
    p.add_argument("--output", required=True, help="CSV output")
    p.add_argument("--dim", type=int, choices=(2, 3), default=3, help="ambient dimension")
    _common(p)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("action", choices=VERIFY_SUITES, metavar="suite",
                   help="one of " + ", ".join(VERIFY_SUITES))
    p.add_argument("--seed", type=int, default=7, help="seed for randomized placement")
    p.add_argument("--dim", type=int, choices=(2, 3), default=2,
                   help="recorded in the report; suites fix their own grids")
    p.add_argument("--report", help="report path (default stdout)")
    p.add_argument("--field", help="support/rconvex-walk: field to test")
    p.add_argument("--mask", help="rconvex/support/rconvex-walk: mask K")
    p.add_argument("--radius", type=_positive, help="R for user-supplied inputs")
    _common(p)
    return parser


def parse_args(argv):
    """Validated :class:`RunConfig`; raises ``SystemExit(2)`` on usage errors."""
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.subcommand is None:
            raise UsageError("sphermean: a subcommand is required")
        cfg = RunConfig(**{k: v for k, v in vars(ns).items() if k in RunConfig.__dataclass_fields__})
        _validate(cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(str(exc), file=sys.stderr)
        raise SystemExit(2)
    return cfg


def _validate(cfg):
    if cfg.subcommand == "bessel" and cfg.order < 0:
        raise UsageError("bessel: --order must be >= 0")
    if cfg.subcommand == "phantom":
        if cfg.shape < 8:
            raise UsageError("phantom: --shape must be at least 8")
        if cfg.kind in ("two-disk-mask", "lshape-mask") and cfg.dim != 2:
            raise UsageError(f"phantom: --kind {cfg.kind} is 2-D only")
        if cfg.kind == "zalcman" and cfg.zero_index < 0:
            raise UsageError("phantom: --zero-index must be >= 0")
    if cfg.subcommand == "invert":
        from .inversion import RegularizationPolicy

        try:
            RegularizationPolicy.parse(cfg.policy)
        except ValueError as exc:
            raise UsageError(f"invert: {exc}")
    if cfg.subcommand == "verify":
        given = [x for x in (cfg.field, cfg.mask) if x]
        if given or cfg.radius is not None:
            if cfg.action not in ("support", "rconvex", "rconvex-walk"):
                raise UsageError(f"verify {cfg.action}: --field/--mask/--radius are not accepted")
            if cfg.mask is None or cfg.radius is None:
                raise UsageError(f"verify {cfg.action}: --mask and --radius are required together")
            if cfg.action == "rconvex" and cfg.field:
                raise UsageError("verify rconvex: --field is not accepted")
            if cfg.action != "rconvex" and not cfg.field:
                raise UsageError(f"verify {cfg.action}: --field is required with --mask")


# -- subcommands ---------------------------------------------------------

def _run_bessel(cfg):
    from .specfun import bessel_zeros

    zeros = bessel_zeros(cfg.order, cfg.count).as_array()
    lines = ["index,zero"] + [f"{i + 1},{z:.15g}" for i, z in enumerate(zeros)]
    text = "\n".join(lines) + "\n"
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _make_phantom(cfg):
    from . import phantoms as ph
    from .field import GridField
    from .geometry import DomainMask
    from .inversion import CounterexampleSpec, zalcman_field

    d, n, h = cfg.dim, cfg.shape, cfg.spacing
    kind = cfg.kind
    if kind == "gaussian":
        return ph.gaussian(d, n, h, cfg.sigma)
    if kind == "bump":
        return ph.radial_bump(d, n, h, cfg.size)
    if kind == "zalcman":
        return zalcman_field(CounterexampleSpec.from_zero_index(d, cfg.zero_index), (n,) * d, h)
    if kind == "random-bumps":
        return ph.random_bumps(d, n, h, cfg.count, np.random.default_rng(cfg.seed))
    if kind == "disk-mask":
        m = ph.disk_mask(d, n, h, cfg.size)
    elif kind == "square-mask":
        m = ph.square_mask(d, n, h, cfg.size)
    elif kind == "two-disk-mask":
        m = ph.two_disk_mask(n, h)
    else:
        m = ph.lshape_mask(n, h, cfg.size)
    assert isinstance(m, DomainMask)
    return GridField(m.values.astype(float), m.spacing, m.origin)


def _run_phantom(cfg):
    from .field import save_field

    f = _make_phantom(cfg)
    save_field(cfg.output, f)
    log.info("wrote %s phantom %s to %s", cfg.kind, f.shape, cfg.output)
    return 0


def _run_transform(cfg):
    from .field import load_field, save_field
    from .transform import (SphereKernel, fixed_radius_transform, interior_mask,
                            quadrature_transform, spectral_ring_check)

    f = load_field(cfg.input)
    kernel = SphereKernel(cfg.radius, f.dim)
    h = fixed_radius_transform(f, kernel) if cfg.method == "fft" else quadrature_transform(f, kernel)
    save_field(cfg.output, h)
    log.info("wrote %s transform to %s", cfg.method, cfg.output)
    if not cfg.verify:
        return 0
    rings = spectral_ring_check(h, kernel)
    other = quadrature_transform(f, kernel) if cfg.method == "fft" else fixed_radius_transform(f, kernel)
    m = interior_mask(f, cfg.radius)
    if m.any():
        scale = float(np.max(np.abs(other.values[m])))
        err = float(np.max(np.abs(h.values[m] - other.values[m]))) / scale if scale > 0 else 0.0
    else:
        err = math.nan
    report = {"method": cfg.method, "R": cfg.radius, "ring_maxima": list(rings.maxima),
              "oracle_rel_err": err}
    _write_report(cfg, report)
    return 0


def _run_invert(cfg):
    from .field import load_field, save_field
    from .inversion import RegularizationPolicy, deconvolve
    from .transform import SphereKernel

    h = load_field(cfg.input)
    kernel = SphereKernel(cfg.radius, h.dim)
    res = deconvolve(h, kernel, RegularizationPolicy.parse(cfg.policy))
    save_field(cfg.output, res.field)
    report = {"policy": cfg.policy, "R": cfg.radius, "discarded_fraction": res.discarded_fraction,
              "ring_half_width": res.ring_half_width, "warning": res.warning}
    _write_report(cfg, report)
    return 0


def _run_abel(cfg):
    from .abel import AbelParams, EvenProfile, abel_forward, abel_inverse
    from .field import RadialProfile, load_profile_csv, save_profile_csv

    r_max, values = load_profile_csv(cfg.input)
    params = AbelParams(dim=cfg.dim)
    if cfg.action == "forward":
        out = abel_forward(EvenProfile(r_max, values), params)
        save_profile_csv(cfg.output, out)
    else:
        g = abel_inverse(RadialProfile(r_max, values), params)
        for w in g.warnings:
            log.warning("%s", w)
        save_profile_csv(cfg.output, RadialProfile(g.p_max, g.values), header=("p", "value"))
    return 0


def _load_mask(path):
    from .field import load_field
    from .geometry import DomainMask

    m = load_field(path)
    if not np.all((m.values == 0) | (m.values == 1)):
        raise ValueError(f"{path}: mask values must be 0 or 1")
    return DomainMask(m.values > 0.5, m.spacing, m.origin)


def _custom_report(cfg, metrics, witnesses, passed):
    config = {"seed": cfg.seed, "dim": cfg.dim, "R": cfg.radius, "mask": cfg.mask, "field": cfg.field}
    return {"suite": cfg.action, "config": config, "metrics": metrics,
            "witnesses": witnesses, "pass": bool(passed)}


def _verify_custom(cfg):
    from .field import load_field
    from .geometry import r_convex
    from .inversion import HarnessConfig, rconvex_region_growing, support_theorem_harness

    K = _load_mask(cfg.mask)
    if cfg.action == "rconvex":
        v = r_convex(K, cfg.radius)
        metrics = {"status": v.status, "component_count": v.component_count,
                   "uncovered_count": v.uncovered_count}
        wit = []
        if v.witness_point:
            wit.append({"kind": "uncovered", "index": list(v.witness_index), "point": list(v.witness_point)})
        if v.status == "disconnected_witness":
            wit += [{"kind": "component", "index": list(r), "point": list(K.point_of(r))}
                    for r in v.component_representatives]
        return _custom_report(cfg, metrics, wit, v.is_r_convex)
    f = load_field(cfg.field)
    hc = HarnessConfig(K, cfg.radius)
    if cfg.action == "support":
        rep = support_theorem_harness(f, hc)
        metrics = {k: getattr(rep, k) for k in ("status", "regime", "hypothesis_max",
                                                 "exterior_mass_fraction", "center_count",
                                                 "tails", "implementation_failure")}
        wit = []
        if rep.witness_center:
            wit.append({"kind": "hypothesis_witness", "center": list(rep.witness_center),
                        "point": list(rep.witness_point)})
        return _custom_report(cfg, metrics, wit, rep.status == "consistent-pass")
    w = rconvex_region_growing(f, hc)
    metrics = {"complete": w.complete, "center_count": w.center_count, "reached_count": w.reached_count,
               "seed_count": w.seed_count, "frontier_count": w.frontier_count,
               "blocking_value": w.blocking_value}
    wit = [{"kind": "frontier", "point": list(p)} for p in w.frontier_witnesses]
    if w.blocking_point:
        wit.append({"kind": "blocking_point", "point": list(w.blocking_point)})
    return _custom_report(cfg, metrics, wit, w.complete)


def _run_verify(cfg):
    from .suites import run_suite

    if cfg.mask:
        report = _verify_custom(cfg)
    else:
        t = time.perf_counter()
        result = run_suite(cfg.action, seed=cfg.seed)
        log.info("suite %s finished in %.1f s", cfg.action, time.perf_counter() - t)
        report = result.as_report()
        report["config"]["dim"] = cfg.dim
    _write_report(cfg, report)
    return 0 if report["pass"] else 1


_RUNNERS = {"bessel": _run_bessel, "phantom": _run_phantom, "transform": _run_transform,
            "invert": _run_invert, "abel": _run_abel, "verify": _run_verify}


def run(config):
    """Execute ``config``; returns the process exit code."""
    logging.basicConfig(level=logging.INFO if config.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    log.info("config %s", asdict(config))
    try:
        return _RUNNERS[config.subcommand](config)
    except (OSError, ValueError) as exc:
        print(f"sphermean {config.subcommand}: {exc}", file=sys.stderr)
        return 1


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
