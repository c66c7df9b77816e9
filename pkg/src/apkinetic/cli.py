"""Command-line entry point: ``apkinetic run|sweep-eps|sweep-dt|uniform|verify-constants``."""

from __future__ import annotations

import argparse
import json
import sys

from .constants import fractional_constants
from .harness import (
    SCHEMES,
    ExperimentConfig,
    ErrorReport,
    config_from_mapping,
    emit_csv,
    is_uniform,
    run_scheme,
    sweep_dt,
    sweep_epsilon,
    uniform_study,
)

DEFAULT_EPS_SWEEP = tuple(2.0**-p for p in range(2, 13))
DEFAULT_DT_SWEEP = (4e-3, 2e-3, 1e-3, 5e-4)
DEFAULT_UNIFORM_DT = (1e-1, 1e-2, 1e-3, 1e-4)


def _floats(text: str):
    vals = [float(t) for t in text.split(",") if t.strip()]
    return vals[0] if len(vals) == 1 else vals


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file whose keys mirror the flags; flags override it")
    p.add_argument("--scheme", choices=SCHEMES)
    p.add_argument("--alpha", type=float)
    p.add_argument("--eps", type=_floats, help="value or comma-separated list")
    p.add_argument("--dt", type=_floats, help="value or comma-separated list")
    p.add_argument("--tfinal", type=float)
    p.add_argument("--nx", type=int)
    p.add_argument("--nv", type=int)
    p.add_argument("--vmax", type=float)
    p.add_argument("--equilibrium", choices=("gaussian", "heavytail"))
    p.add_argument("--stencil", choices=("upwind1", "centered2"))
    p.add_argument("--reference", choices=("self", "ds", "ads"))
    p.add_argument("--reference-dt", type=float, dest="reference_dt")
    p.add_argument("--use-continuous-constants", action="store_true", default=None, dest="use_continuous_constants")
    p.add_argument("--strict-cfl", action="store_true", default=None, dest="strict_cfl")
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="CSV output path")


_CONFIG_KEYS = (
    "scheme", "alpha", "eps", "dt", "tfinal", "nx", "nv", "vmax", "equilibrium", "stencil",
    "reference", "reference_dt", "use_continuous_constants", "strict_cfl", "workers",
)


def build_config(args, eps_default=None, dt_default=None) -> ExperimentConfig:
    data = {}
    if args.config:
        with open(args.config) as fh:
            data.update(json.load(fh))
    data.pop("out", None)
    for key in _CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    if "eps" not in data and eps_default is not None:
        data["eps"] = eps_default
    if "dt" not in data and dt_default is not None:
        data["dt"] = dt_default
    for key in ("eps", "dt"):
        if isinstance(data.get(key), list):
            data[key] = tuple(data[key])
    return config_from_mapping(data)


def _print_report(report: ErrorReport, out=None):
    out = out or sys.stdout
    print(",".join(("scheme", "alpha", "eps", "dt", "error", "slope_or_order")), file=out)
    for r in report.rows:
        print(f"{r.scheme},{r.alpha:g},{r.eps:.6g},{r.dt:.6g},{r.error:.6e},{r.slope_or_order:.4g}", file=out)
    if report.fit is not None:
        f = report.fit
        print(f"# fitted slope {f.slope:.4f} (residual {f.residual:.3g}, {f.npoints} points)", file=out)


def cmd_verify_constants(args):
    alphas = args.alpha_list or [0.8, 1.0, 1.5]
    print("alpha,d,m,kappa,A,m_gamma_A,identity_residual,c_operator,c_standard")
    for a in alphas:
        c = fractional_constants(a, args.d)
        print(
            f"{a:g},{c.d},{c.m:.10g},{c.kappa:.10g},{c.A:.10g},{c.m * c.gamma_alpha_plus_1 * c.A:.10g},"
            f"{c.identity_residual:.3e},{c.c_operator:.6g},{c.c_standard:.6g}"
        )
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="apkinetic", description="Asymptotic-preserving kinetic solvers and studies")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("run", "integrate one scheme to tfinal"),
        ("sweep-eps", "error against the limit solver as eps decreases"),
        ("sweep-dt", "observed time order at fixed eps"),
        ("uniform", "runs along dt = eps^alpha"),
    ):
        sp = sub.add_parser(name, help=helptext)
        _add_common(sp)
        if name == "uniform":
            sp.add_argument("--reference-mode", choices=("fine", "same"), default="fine", dest="reference_mode")
    vc = sub.add_parser("verify-constants", help="print kappa, A and identity residuals")
    vc.add_argument("--alpha", type=_floats, dest="alpha_value")
    vc.add_argument("--d", type=int, default=1)
    args = parser.parse_args(argv)

    if args.command == "verify-constants":
        av = args.alpha_value
        args.alpha_list = None if av is None else (av if isinstance(av, list) else [av])
        return cmd_verify_constants(args)

    if args.command == "run":
        cfg = build_config(args)
        res = run_scheme(cfg)
        report = ErrorReport(rows=[res.row])
        print(f"mean(rho) = {res.rho.mean():.15f}")
    elif args.command == "sweep-eps":
        report = sweep_epsilon(build_config(args, eps_default=DEFAULT_EPS_SWEEP))
    elif args.command == "sweep-dt":
        report = sweep_dt(build_config(args, dt_default=DEFAULT_DT_SWEEP))
    else:
        report = uniform_study(build_config(args, dt_default=DEFAULT_UNIFORM_DT), args.reference_mode)
        print(f"# uniform: {is_uniform(report)}")
    _print_report(report)
    if args.out:
        emit_csv(report, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
