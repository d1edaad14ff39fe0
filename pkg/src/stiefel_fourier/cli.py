"""``stiefel-fourier``: evaluate, compare, sweep, moments and verify.

Exit codes: 0 success, 1 evaluation error (diagnostic on stderr), 2 usage
error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import checks
from .asymptotics import AutoConfig, evaluate_auto, stationary_phase_leading
from .errors import DegenerateDirectionError, StiefelFourierError, UnsupportedError
from .estimate import FourierEstimate
from .exact import QuadratureSpec, closed_form, exact_estimate, k2_quadrature, recursive_quadrature
from .geometry import stiefel_dim
from .haar import mc_char_function, mc_fourier, mc_trace_moments, moment_series
from .linalg import SingularSpectrum, svd
from .report import Report, render
from .special import stiefel_mass

METHODS = ("auto", "mc", "quadrature", "recursive", "asymptotic", "closed-form")
EXIT_OK, EXIT_EVAL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def _read_matrix(path):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"matrix file {path} not found")
    try:
        if p.suffix.lower() == ".json":
            data = json.loads(p.read_text())
            if isinstance(data, dict):
                data = data["matrix"]
            arr = np.asarray(data, dtype=float)
        else:
            arr = np.loadtxt(p, delimiter=",", ndmin=2)
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read matrix from {path}: {exc}") from exc
    return arr


def _input(args):
    """``(spectrum, matrix)`` from ``--spectrum`` or ``--matrix``; ``matrix`` may be ``None``."""
    n, k = args.n, args.k
    if not 1 <= k <= n:
        raise UsageError(f"need 1 <= k <= n, got n={n}, k={k}")
    if (args.spectrum is None) == (args.matrix is None):
        raise UsageError("give exactly one of --spectrum or --matrix")
    if args.matrix is not None:
        M = _read_matrix(args.matrix)
        if M.shape != (n, k):
            raise UsageError(f"matrix has shape {M.shape}, expected ({n}, {k})")
        if not np.all(np.isfinite(M)):
            raise UsageError("matrix entries must be finite")
        return svd(M).spectrum, M
    vals = _floats(args.spectrum)
    if len(vals) != k:
        raise UsageError(f"--spectrum has {len(vals)} values but k={k}")
    if any(not (math.isfinite(v) and v >= 0) for v in vals):
        raise UsageError("singular values must be finite and nonnegative")
    return SingularSpectrum(tuple(sorted(vals, reverse=True)), n, k), None


def _quad_spec(args):
    return QuadratureSpec(target_tol=args.tol) if args.tol is not None else QuadratureSpec()


def _run_method(method, n, k, spectrum, matrix, args):
    spec = _quad_spec(args)
    if method == "auto":
        cfg = AutoConfig(samples=args.samples, seed=args.seed, quadrature=spec, threads=args.threads)
        return evaluate_auto(n, k, matrix if matrix is not None else spectrum, cfg)
    if method == "mc":
        return mc_fourier(n, k, matrix if matrix is not None else spectrum, args.samples, args.seed, args.threads)
    if method == "quadrature":
        if k != 2:
            raise UnsupportedError("quadrature evaluates k = 2 only")
        return k2_quadrature(n, *spectrum.values, spec)
    if method == "recursive":
        return recursive_quadrature(n, k, spectrum, spec)
    if method == "asymptotic":
        return stationary_phase_leading(n, k, spectrum)
    if method == "closed-form":
        if not any(spectrum.values):
            mass = stiefel_mass(n, k)
            return FourierEstimate(mass, "closed-form", mass, trunc_error=0.0, trail=("zero frequency",))
        value = closed_form(n, spectrum)
        if value is None:
            raise UnsupportedError(f"no closed form for St({n}, {k}); closed forms exist for k = 1 and (n, k) = (4, 2)")
        return FourierEstimate(value, "closed-form", stiefel_mass(n, k), trunc_error=0.0, trail=("closed form",))
    raise UsageError(f"unknown method {method!r}")


def _spectrum_text(spectrum):
    return "[" + ", ".join("%.17g" % v for v in spectrum.values) + "]"


def _estimate_row(n, k, spectrum, est, normalization):
    if normalization == "probability":
        est = est.normalized()
    return {
        "n": n,
        "k": k,
        "spectrum": _spectrum_text(spectrum),
        "method": est.method,
        "value": float(est.value),
        "error": float(est.error),
        "error_kind": "std" if est.is_statistical else "trunc",
        "samples_or_nodes": int(est.samples_or_nodes),
        "total_mass": float(est.total_mass),
        "normalization": normalization,
        "trail": list(est.trail),
    }


def cmd_eval(args):
    spectrum, matrix = _input(args)
    est = _run_method(args.method, args.n, args.k, spectrum, matrix, args)
    return Report("eval", [_estimate_row(args.n, args.k, spectrum, est, args.normalization)])


COMPARE_METHODS = ("closed-form", "quadrature", "recursive", "mc", "asymptotic")
# rows are labelled by the estimate's method tag, not the CLI flag value
_TAGS = {"mc": "monte-carlo", "asymptotic": "stationary-phase"}


def cmd_compare(args):
    spectrum, matrix = _input(args)
    n, k = args.n, args.k
    rows, ok = [], []
    for method in COMPARE_METHODS:
        try:
            est = _run_method(method, n, k, spectrum, matrix, args)
        except StiefelFourierError as exc:
            rows.append({"kind": "method", "method": _TAGS.get(method, method), "status": f"skipped: {exc}"})
            continue
        row = _estimate_row(n, k, spectrum, est, args.normalization)
        row.pop("trail")
        rows.append({"kind": "method", "method": method, "status": "ok", **row})
        ok.append((row["method"], row))
    flagged = 0
    for (ma, a), (mb, b) in itertools.combinations(ok, 2):
        combined = math.hypot(a["error"], b["error"])
        diff = abs(a["value"] - b["value"])
        units = diff / combined if combined > 0 else (0.0 if diff <= 1e-12 * a["total_mass"] else math.inf)
        bad = units > 3.0
        flagged += bad
        rows.append(
            {
                "kind": "pair",
                "method": f"{ma} vs {mb}",
                "status": "INCONSISTENT" if bad else "ok",
                "delta": diff,
                "combined_units": units,
            }
        )
    return Report("compare", rows, {"methods_run": len(ok), "inconsistent_pairs": flagged})


def cmd_sweep(args):
    n, k = args.n, args.k
    direction = _floats(args.direction)
    if len(direction) != k:
        raise UsageError(f"--direction has {len(direction)} values but k={k}")
    if any(v < 0 for v in direction):
        raise UsageError("direction entries must be nonnegative")
    direction = sorted(direction, reverse=True)
    taus = _floats(args.taus)
    if not taus or any(t <= 0 for t in taus):
        raise UsageError("--taus must be positive")
    dim = stiefel_dim(n, k)
    rows, usable = [], True
    for tau in taus:
        lam = SingularSpectrum(tuple(tau * v for v in direction), n, k)
        exact = exact_estimate(n, k, lam, _quad_spec(args))
        row = {"tau": float(tau), "exact": float(exact.value), "exact_error": float(exact.error)}
        try:
            lead = stationary_phase_leading(n, k, lam)
        except DegenerateDirectionError as exc:
            usable = False
            row.update(leading=None, abs_err=None, scaled_err=None, rel_err=None, note=str(exc))
        else:
            err = abs(exact.value - lead.value)
            row.update(
                leading=float(lead.value),
                abs_err=err,
                scaled_err=err * tau ** ((n - k + 2) / 2),
                rel_err=err / lead.details["envelope"],
            )
        row["exact_scaled"] = abs(exact.value) * tau ** (dim / 2)
        rows.append(row)
    summary = {"n": n, "k": k, "direction": _spectrum_text(SingularSpectrum(tuple(direction), n, k))}
    if usable and len(rows) >= 2:
        sweep_rows = [checks.SweepRow(r["tau"], r["exact"], r["leading"], r["abs_err"], r["scaled_err"], r["rel_err"]) for r in rows]
        summary["rel_err_slope"] = checks.log_slope(sweep_rows)
    return Report("sweep", rows, summary)


def cmd_moments(args):
    if args.k < 1 or args.max_m < 0:
        raise UsageError("need k >= 1 and max-m >= 0")
    mean, se = mc_trace_moments(args.k, args.max_m, args.samples, args.seed, args.threads)
    rows = [{"m": m, "estimate": float(mean[m]), "std_error": float(se[m])} for m in range(args.max_m + 1)]
    summary = {"k": args.k, "samples": args.samples, "seed": args.seed}
    if args.lam is not None:
        series, series_se = moment_series(args.k, args.lam, args.max_m, args.samples, args.seed, args.threads)
        char, char_se = mc_char_function(args.k, args.lam, args.samples, args.seed + 1, args.threads)
        summary.update(lam=args.lam, series=series, series_std_error=series_se, char_function=char, char_std_error=char_se)
    return Report("moments", rows, summary)


def cmd_verify(args):
    if args.sign_check:
        rows_raw, sep = checks.sign_check()
        rows = [{"n": n, "k": k, "tau": t, "plus_residual": p, "minus_residual": m} for n, k, t, p, m in rows_raw]
        passed = sep >= 10.0
        return Report("verify", rows, {"separation_at_tau_64": sep, "passed": passed}), passed
    results = checks.run_suite(quick=args.quick)
    rows = [{"check": r.name, "passed": r.passed, "detail": r.detail} for r in results]
    failed = sum(not r.passed for r in results)
    return Report("verify", rows, {"passed": len(results) - failed, "failed": failed}), failed == 0


def _add_input(p):
    p.add_argument("--n", type=int, required=True, help="ambient dimension")
    p.add_argument("--k", type=int, required=True, help="frame size")
    p.add_argument("--spectrum", help="comma-separated singular values of the frequency matrix")
    p.add_argument("--matrix", help="JSON or CSV file holding a full n x k frequency matrix")


def _add_common(p, with_norm=True):
    p.add_argument("--samples", type=int, default=1_000_000, help="Monte Carlo sample count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: $STIEFEL_FOURIER_THREADS)")
    p.add_argument("--tol", type=float, default=None, help="quadrature tolerance relative to the total mass")
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")
    if with_norm:
        p.add_argument("--normalization", choices=("surface", "probability"), default="surface")


def build_parser():
    parser = argparse.ArgumentParser(prog="stiefel-fourier", description="Fourier transform of the Stiefel manifold surface measure.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate the transform at one frequency")
    _add_input(p)
    p.add_argument("--method", choices=METHODS, default="auto")
    _add_common(p)

    p = sub.add_parser("compare", help="run every applicable method and cross-check them")
    _add_input(p)
    _add_common(p)

    p = sub.add_parser("sweep", help="exact value against the leading asymptotic term along a ray")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--direction", required=True, help="comma-separated direction spectrum")
    p.add_argument("--taus", default="8,16,32,64,128", help="comma-separated scale factors")
    _add_common(p, with_norm=False)

    p = sub.add_parser("moments", help="Monte Carlo moments of the trace on O(k)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--max-m", type=int, default=4)
    p.add_argument("--lam", type=float, default=None, help="also compare the truncated series with E[exp(i lam Tr X)]")
    _add_common(p, with_norm=False)
    p.set_defaults(samples=100_000)

    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("--quick", action="store_true", help="geometry and algebra checks only")
    p.add_argument("--sign-check", action="store_true", help="plus- versus minus-form amplitude residuals")
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "samples", 1) is not None and getattr(args, "samples", 1) < 1:
        parser.error("--samples must be positive")
    if getattr(args, "threads", None) is not None and args.threads < 1:
        parser.error("--threads must be positive")
    handlers = {"eval": cmd_eval, "compare": cmd_compare, "sweep": cmd_sweep, "moments": cmd_moments}
    status = EXIT_OK
    try:
        if args.command == "verify":
            report, passed = cmd_verify(args)
            status = EXIT_OK if passed else EXIT_EVAL
        else:
            report = handlers[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"stiefel-fourier: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StiefelFourierError as exc:
        print(f"stiefel-fourier: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_EVAL
    sys.stdout.write(render(report, args.format))
    return status


if __name__ == "__main__":
    sys.exit(main())
