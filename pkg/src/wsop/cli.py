"""``wsop`` command line: weight checks, norms and probes.

Exit codes: 0 on PASS or a plain computation, 1 on configuration errors,
2 on a FAIL verdict (or a failed class-S certificate).
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .config import PROBES, ConfigError, RunConfig, load_config
from .operators import InnerFunctionSpec, KernelOrder, SymbolSpec, SymbolTerm
from .pseries import random_polynomial
from .probes import (
    FAIL,
    ProbeReport,
    TestFamily,
    probe_berezin_bounded,
    probe_division,
    probe_hankel_bounded,
    probe_hankel_sharpness,
    probe_lemma1,
    probe_lemma2,
    probe_radial_identity,
    probe_toeplitz_bounded,
)
from .probes.report import clean
from .probes.theorems import default_probe_rule
from .quad import PolydiskRule, TorusRule, norm_ap, norm_besov, thread_count
from .weights import certify_s_class, sandwich_check, weight_indices

EXIT_OK, EXIT_CONFIG, EXIT_FAIL = 0, 1, 2


def _norm_rule(cfg: RunConfig) -> PolydiskRule:
    if cfg.n == 1 or cfg.quadrature_explicit:
        return PolydiskRule.uniform(cfg.n, cfg.radial, cfg.angular)
    return default_probe_rule(cfg.n)


def _function(cfg: RunConfig, degree: int = 6):
    if cfg.function is not None:
        return cfg.function
    return random_polynomial(cfg.n, degree, np.random.default_rng(cfg.seed))


def _family(cfg: RunConfig) -> TestFamily:
    spec = {"seed": cfg.seed if cfg.seed else 7, **(cfg.family or {})}
    try:
        return TestFamily.from_json(spec, dim=cfg.n)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field 'family': {exc}") from None


def _alpha(cfg: RunConfig, default: float) -> KernelOrder:
    return cfg.alpha if cfg.alpha is not None else KernelOrder((default,) * cfg.n)


def _first_coord_symbol(cfg: RunConfig, c: complex, a: int, b: int) -> SymbolSpec:
    ea = (a,) + (0,) * (cfg.n - 1)
    eb = (b,) + (0,) * (cfg.n - 1)
    return SymbolSpec.monomial(ea, eb, c)


def build_report(cfg: RunConfig) -> ProbeReport:
    name = cfg.probe
    n = cfg.n
    if name == "radial-identity":
        return probe_radial_identity(_function(cfg), order=cfg.order or 32)
    if name == "lemma1":
        f = cfg.inner or cfg.function or InnerFunctionSpec(((0.7,),) * n)
        k = cfg.multi_index or (1,) * n
        return probe_lemma1(f, k)
    if name == "lemma2":
        a = cfg.lemma.get("a", 0.0)
        b = cfg.lemma.get("b", 3.0)
        return probe_lemma2(a, b, cfg.weight.coords[0], radial=cfg.radial, angular=max(cfg.angular, 4096))
    if name == "toeplitz":
        h = cfg.symbol
        if h is None:
            zero = (0,) * n
            h = SymbolSpec((SymbolTerm(2 / 3, zero, zero), SymbolTerm(1 / 3, (1,) + zero[1:], zero)))
        if not h.holomorphic:
            raise ConfigError("field 'symbol': the Toeplitz probe needs a holomorphic h")
        return probe_toeplitz_bounded(h, _family(cfg), cfg.p, cfg.weight, _norm_rule(cfg), cfg.cap)
    if name == "division":
        J = cfg.inner or InnerFunctionSpec(((0.5,),) * n)
        F = _function(cfg, degree=4)
        M = max(512, cfg.angular)
        return probe_division(J, F, cfg.p, cfg.weight, TorusRule((M,) * n))
    if name == "hankel":
        g = cfg.symbol or _first_coord_symbol(cfg, 0.5, 0, 1)
        return probe_hankel_bounded(g, _family(cfg), _alpha(cfg, 1.0), cfg.p, cfg.weight, _norm_rule(cfg), cfg.cap)
    if name == "berezin":
        g = cfg.symbol or _first_coord_symbol(cfg, 0.5, 0, 1)
        return probe_berezin_bounded(g, _family(cfg), _alpha(cfg, 1.0), cfg.p, cfg.weight, _norm_rule(cfg), cfg.cap)
    if name == "hankel-sharpness":
        alpha = _alpha(cfg, 0.5)
        kwargs = {}
        if cfg.r_list is not None:
            kwargs["r_list"] = cfg.r_list
        return probe_hankel_sharpness(
            list(alpha.of_dim(n)),
            cfg.p,
            cfg.weight,
            k=cfg.k,
            order=cfg.order or 16,
            expect=cfg.expect,
            alpha_scan=cfg.alpha_scan,
            **kwargs,
        )
    raise ConfigError(f"no probe selected; choose one of {PROBES}")


def run_probe(cfg: RunConfig) -> ProbeReport:
    """Build the report and attach the resolved config and run metadata."""
    try:
        report = build_report(cfg)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    params = {**report.params, "config": cfg.to_json()}
    meta = {
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "version": __version__,
        "threads": thread_count(),
    }
    return replace(report, params=params, metadata=meta)


def _cmd_probe(args) -> int:
    overrides = {"probe": args.name, "radial": args.rad, "angular": args.ang,
                 "seed": args.seed, "out": args.out, "csv": args.csv}
    cfg = load_config(args.config, overrides)
    report = run_probe(cfg)
    report.write(cfg.out, cfg.csv)
    s = {k: v for k, v in clean(report.summary).items() if not isinstance(v, (dict, list))}
    print(f"{report.probe}: {report.verdict} {json.dumps(s, sort_keys=True)}")
    for note in report.notes:
        print(f"  note: {note}")
    return EXIT_FAIL if report.verdict == FAIL else EXIT_OK


def _cmd_weight_check(args) -> int:
    cfg = load_config(args.config, {"radial": None, "angular": None})
    w = cfg.weight
    idx = weight_indices(w)
    coords = []
    ok = True
    for j, c in enumerate(w.coords):
        cert = certify_s_class(c, args.q, args.grid)
        sand = sandwich_check(c, args.grid, args.slack)
        ok = ok and cert.passed
        coords.append({
            "weight": c.to_json(),
            "alpha_omega": idx.alpha_omega[j],
            "beta_omega": idx.beta_omega[j],
            "slack": idx.slack[j],
            "certificate": cert.to_json(),
            "sandwich": {"passed": sand.passed, "worst_t": sand.worst_t, "max_violation": sand.max_violation},
        })
    out = {"coords": coords, "passed": ok}
    text = json.dumps(clean(out), sort_keys=True, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return EXIT_OK if ok else EXIT_FAIL


def _cmd_norm(args) -> int:
    cfg = load_config(args.config, {"radial": args.rad, "angular": args.ang, "seed": args.seed})
    f = _function(cfg)
    rule = PolydiskRule.uniform(cfg.n, cfg.radial, cfg.angular)
    if args.space == "ap":
        val = norm_ap(f, cfg.weight, cfg.p, rule)
    else:
        val = norm_besov(f, cfg.weight, cfg.p, rule)
    out = {"space": args.space, "norm": val, "p": cfg.p, "weight": cfg.weight.to_json(),
           "quadrature": {"radial": cfg.radial, "angular": cfg.angular}}
    print(json.dumps(clean(out), sort_keys=True))
    return EXIT_OK if math.isfinite(val) else EXIT_FAIL


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wsop", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"wsop {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--rad", type=int, help="radial nodes per coordinate")
        p.add_argument("--ang", type=int, help="angular nodes per coordinate")
        p.add_argument("--seed", type=int)

    pw = sub.add_parser("weight-check", help="indices, class-S certificate and sandwich check")
    pw.add_argument("--config")
    pw.add_argument("--q", type=float, default=0.5)
    pw.add_argument("--grid", type=int, default=64)
    pw.add_argument("--slack", type=float, default=0.0)
    pw.add_argument("--out")
    pw.set_defaults(func=_cmd_weight_check)

    pn = sub.add_parser("norm", help="A^p or Besov norm of the configured function")
    pn.add_argument("--space", choices=("ap", "besov"), default="ap")
    common(pn)
    pn.set_defaults(func=_cmd_norm)

    pp = sub.add_parser("probe", help="run one probe and write its report")
    pp.add_argument("name", choices=PROBES)
    common(pp)
    pp.add_argument("--out", help="report JSON path")
    pp.add_argument("--csv", help="sample table CSV path")
    pp.set_defaults(func=_cmd_probe)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"wsop: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


run = main
