"""Command-line entry point wiring every module into one tool.

Exit codes follow a CI-friendly contract: 0 when the run succeeds and
every mathematical assertion holds, 2 when a mathematical assertion
fails (a measured residual above its budget, a defect above its bound),
and 1 for usage or I/O problems.  All numeric output is serialized with
17 significant digits so values round-trip through text exactly.  Every
run writes a one-line manifest (subcommand, parameters, version,
outputs, wall time) to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from . import __version__, arith, experiment, kernels, lineshift, perron
from . import series as series_mod


@dataclass(frozen=True)
class RunManifest:
    subcommand: str
    parameters: dict
    tool_version: str
    outputs: list
    wall_time: float


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; 2 is reserved here for
    mathematical-assertion failures, so usage problems remap to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _fmt(value: float) -> str:
    if np.isnan(value):
        return "NaN"
    if np.isinf(value):
        return "Infinity" if value > 0 else "-Infinity"
    return f"{value:.17g}"


def _json_text(obj) -> str:
    """Compact JSON with floats at 17 significant digits."""
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        c = complex(obj)
        return f'{{"re": {_fmt(c.real)}, "im": {_fmt(c.imag)}}}'
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        inner = ", ".join(f"{json.dumps(str(k))}: {_json_text(v)}" for k, v in obj.items())
        return "{" + inner + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json_text(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _human_value(value) -> str:
    if isinstance(value, (complex, np.complexfloating)):
        c = complex(value)
        return f"{_fmt(c.real)} {'+' if c.imag >= 0 else '-'} {_fmt(abs(c.imag))}j"
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (float, np.floating)):
        return _fmt(float(value))
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_human_value(v) for v in value) + "]"
    return str(value)


def _human_lines(payload: dict) -> str:
    return "\n".join(f"{k} = {_human_value(v)}" for k, v in payload.items())


def _cmd_kernel(args) -> tuple[dict, str | None, bool, list]:
    kern = kernels.build_pm(args.m, args.delta)
    if args.action == "constants":
        cons = kernels.constants(kern)
        payload = {"m": args.m, "delta": str(args.delta),
                   "c_k": list(cons.c_k), "c_max": cons.c_max}
        return payload, _human_lines(payload), True, []
    fn = kernels.eval if args.action == "eval" else kernels.fourier
    value = float(fn(kern, args.at))
    payload = {"m": args.m, "delta": str(args.delta), "at": args.at, "value": value}
    return payload, _fmt(value), True, []


def _cmd_arith(args) -> tuple[dict, str | None, bool, list]:
    q = args.q
    if args.action == "primroots":
        if not arith.is_prime(q):
            raise ValueError(f"q must be prime, got {q}")
        roots = [a for a in range(1, q) if arith.is_primitive_root(a, q)]
        payload = {"q": q, "primitive_roots": roots, "count": len(roots)}
        return payload, _human_lines(payload), True, []
    table = arith.build_characters(q)
    coeffs = arith.indicator_coeffs(table)
    payload = {
        "q": q,
        "pr_count": coeffs.pr_count,
        "c": [complex(v) for v in coeffs.c],
    }
    return payload, _human_lines(payload), True, []


def _parse_point(text: str) -> complex:
    parts = text.split(",")
    if len(parts) > 2:
        raise ValueError(f"expected RE or RE,IM, got {text!r}")
    re = float(parts[0])
    im = float(parts[1]) if len(parts) == 2 else 0.0
    return complex(re, im)


def _cmd_series(args) -> tuple[dict, str | None, bool, list]:
    descriptor = series_mod.catalog(args.name)
    if args.action == "eval":
        s = _parse_point(args.s)
        value = series_mod.eval_F(descriptor, s)
        payload = {"name": args.name, "s": s, "value": complex(value)}
        return payload, _human_lines(payload), True, []
    bound = series_mod.cahen_bound(descriptor, args.sigma, args.nmax)
    payload = {
        "name": args.name,
        "sigma": bound.sigma,
        "value": bound.value,
        "n_max_searched": bound.n_max_searched,
        "certified": bound.certified,
    }
    return payload, _human_lines(payload), True, []


def _cmd_perron(args) -> tuple[dict, str | None, bool, list]:
    descriptor = series_mod.catalog(args.series)
    kern = kernels.build_pm(args.m, args.delta)
    cfg = perron.PerronConfig(
        kappa=args.kappa, T=args.T, x=args.x, kernel=kern, quad_tol=args.quad_tol
    )
    report = perron.verify(descriptor, cfg)
    tolerance = report.error_budget + report.quad_error_estimate + 1e-9
    ok = bool(report.residual <= tolerance)
    payload = {
        "series": args.series,
        "x": args.x,
        "kappa": args.kappa,
        "T": args.T,
        "direct": report.direct,
        "main_integral": report.main_integral,
        "correction": report.correction,
        "error_budget": report.error_budget,
        "residual": report.residual,
        "quad_error_estimate": report.quad_error_estimate,
        "budget_certified": report.budget_certified,
        "mode": report.mode,
        "passed": ok,
    }
    return payload, _human_lines(payload), ok, []


def _cmd_lineshift(args) -> tuple[dict, str | None, bool, list]:
    descriptor = series_mod.catalog(args.series)
    kern = kernels.build_pm(args.m, args.delta)
    cfg = lineshift.ShiftConfig(
        kappa=args.kappa,
        kappa_prime=args.kappa_prime,
        T=args.T,
        kernel=kern,
        series=descriptor,
        quad_tol=args.quad_tol,
    )
    report = lineshift.shift_verify(cfg, args.x)
    ok = bool(report.defect <= report.horizontal_error_bound + 10.0 * args.quad_tol)
    payload = {
        "series": args.series,
        "x": args.x,
        "kappa": args.kappa,
        "kappa_prime": args.kappa_prime,
        "T": args.T,
        "lhs_integral": report.lhs_integral,
        "rhs_integral": report.rhs_integral,
        "residue_sum": report.residue_sum,
        "horizontal_error_bound": report.horizontal_error_bound,
        "defect": report.defect,
        "per_side_bound_sum": report.per_side_bound_sum,
        "quad_error_estimate": report.quad_error_estimate,
        "passed": ok,
    }
    return payload, _human_lines(payload), ok, []


def _cmd_experiment(args) -> tuple[dict, str | None, bool, list]:
    cfg = experiment.ExperimentConfig(
        Q=args.Q, delta=args.delta, theta=args.theta, x=args.x, weight=args.weight
    )
    rows, summary = experiment.run(cfg, threshold=args.threshold, threads=args.threads)
    with open(args.out, "w") as fh:
        fh.write(experiment.rows_to_csv(rows))
    return summary, None, True, [args.out]


def _add_common(leaf: argparse.ArgumentParser) -> None:
    # SUPPRESS keeps a leaf-level default from clobbering the root value
    leaf.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                      help="machine-readable output")
    leaf.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                      help="parallelism cap")


def _build_parser() -> _Parser:
    parser = _Parser(prog="perronkit", description=__doc__.splitlines()[0])
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    parser.add_argument("--threads", type=int, default=1, help="parallelism cap")
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")

    kernel = sub.add_parser("kernel", help="plateau kernel evaluation")
    kernel_sub = kernel.add_subparsers(dest="action", metavar="ACTION", required=True)
    for action in ("eval", "fourier", "constants"):
        k = kernel_sub.add_parser(action)
        k.add_argument("--m", type=int, required=True)
        k.add_argument("--delta", type=Fraction, required=True)
        if action != "constants":
            k.add_argument("--at", type=float, required=True)
        _add_common(k)
        k.set_defaults(func=_cmd_kernel)

    ar = sub.add_parser("arith", help="primitive roots and character coefficients")
    ar_sub = ar.add_subparsers(dest="action", metavar="ACTION", required=True)
    for action in ("primroots", "coeffs"):
        a = ar_sub.add_parser(action)
        a.add_argument("--q", type=int, required=True)
        _add_common(a)
        a.set_defaults(func=_cmd_arith)

    se = sub.add_parser("series", help="Dirichlet series evaluation and bounds")
    se_sub = se.add_subparsers(dest="action", metavar="ACTION", required=True)
    ev = se_sub.add_parser("eval")
    ev.add_argument("--name", required=True)
    ev.add_argument("--s", required=True, help="point as RE or RE,IM")
    _add_common(ev)
    ev.set_defaults(func=_cmd_series)
    ca = se_sub.add_parser("cahen")
    ca.add_argument("--name", required=True)
    ca.add_argument("--sigma", type=float, required=True)
    ca.add_argument("--nmax", type=int, required=True)
    _add_common(ca)
    ca.set_defaults(func=_cmd_series)

    pe = sub.add_parser("perron", help="truncated-sum verification with budget")
    pe_sub = pe.add_subparsers(dest="action", metavar="ACTION", required=True)
    pv = pe_sub.add_parser("verify")
    pv.add_argument("--series", required=True)
    pv.add_argument("--x", type=float, required=True)
    pv.add_argument("--kappa", type=float, required=True)
    pv.add_argument("--T", type=float, required=True)
    pv.add_argument("--m", type=int, required=True)
    pv.add_argument("--delta", type=Fraction, required=True)
    pv.add_argument("--quad-tol", type=float, default=1e-9, dest="quad_tol")
    _add_common(pv)
    pv.set_defaults(func=_cmd_perron)

    ls = sub.add_parser("lineshift", help="line shifting with residues")
    ls_sub = ls.add_subparsers(dest="action", metavar="ACTION", required=True)
    lv = ls_sub.add_parser("verify")
    lv.add_argument("--series", required=True)
    lv.add_argument("--x", type=float, required=True)
    lv.add_argument("--kappa", type=float, required=True)
    lv.add_argument("--kappa-prime", type=float, required=True, dest="kappa_prime")
    lv.add_argument("--T", type=float, required=True)
    lv.add_argument("--m", type=int, required=True)
    lv.add_argument("--delta", type=Fraction, required=True)
    lv.add_argument("--quad-tol", type=float, default=1e-9, dest="quad_tol")
    _add_common(lv)
    lv.set_defaults(func=_cmd_lineshift)

    ex = sub.add_parser("experiment", help="primitive-root interval statistics")
    ex_sub = ex.add_subparsers(dest="action", metavar="ACTION", required=True)
    er = ex_sub.add_parser("run")
    er.add_argument("--Q", type=int, required=True)
    er.add_argument("--delta", type=float, default=1.0 / 3.0)
    er.add_argument("--theta", type=float, default=0.25)
    er.add_argument("--x", type=float, default=None)
    er.add_argument("--weight", default="logp",
                    choices=("logp", "mobius", "unweighted", "mobius_integers"))
    er.add_argument("--out", required=True, help="CSV path for the rows")
    er.add_argument("--threshold", type=float, default=0.1)
    _add_common(er)
    er.set_defaults(func=_cmd_experiment)

    return parser


def dispatch(argv: list[str]) -> int:
    """Parse argv, run the subcommand, emit payload and manifest."""
    parser = _build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return 1
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not hasattr(args, "func"):
        parser.print_usage(sys.stderr)
        return 1
    start = time.perf_counter()
    try:
        payload, human, ok, outputs = args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    parameters = {
        k: (str(v) if isinstance(v, Fraction) else v)
        for k, v in vars(args).items()
        if k != "func"
    }
    manifest = RunManifest(
        subcommand=args.subcommand,
        parameters=parameters,
        tool_version=__version__,
        outputs=outputs,
        wall_time=time.perf_counter() - start,
    )
    print(_json_text(asdict(manifest)), file=sys.stderr)
    if args.json or human is None:
        print(_json_text(payload))
    else:
        print(human)
    return 0 if ok else 2


def main() -> None:
    raise SystemExit(dispatch(sys.argv[1:]))
