"""Command-line front end: fit, boot, and simulate subcommands.

Exit codes: 0 success, 2 validation/config error, 3 separation or
non-convergence, 4 unreliable bootstrap (partial JSON still emitted).
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .bootstrap import DEFAULT_B, DEFAULT_SEED, run_bootstrap
from .data import ColumnSpec, read_csv, write_csv
from .errors import (
    ConvergenceError,
    GevbootError,
    SeparationError,
    UnreliableRunError,
    ValidationError,
)
from .fit import fit_mle, wald_inference
from .links import ShapeTau
from .simulate import SimSpec, dengue_analog, simulate_dataset

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NONCONVERGENCE = 3
EXIT_UNRELIABLE = 4

_P_RENDER_FLOOR = 1e-4


def _parse_tau(text):
    value = text.strip().lower()
    if value == "profile":
        return ShapeTau.profiled()
    if value.startswith("fixed="):
        try:
            return ShapeTau.fixed(float(value[len("fixed="):]))
        except (ValueError, GevbootError):
            raise ValidationError(f"invalid --tau value {text!r}") from None
    raise ValidationError(f"--tau must be 'profile' or 'fixed=<value>', got {text!r}")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="gevboot",
        description=(
            "Binary regression with an extreme-value response curve: "
            "maximum-likelihood fitting, Wald inference, and parametric-"
            "bootstrap confidence intervals and hypothesis tests."
        ),
    )
    parser.add_argument("--version", action="version", version=f"gevboot {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_model_flags(p):
        p.add_argument("--input", required=True, help="input CSV path")
        p.add_argument("--response", required=True, help="response column name")
        p.add_argument(
            "--predictors",
            required=True,
            help="comma-separated predictor column names",
        )
        p.add_argument(
            "--no-intercept",
            action="store_true",
            help="do not prepend an all-ones intercept column",
        )
        p.add_argument(
            "--tau",
            default="profile",
            help="shape handling: 'profile' (default) or 'fixed=<value>'",
        )
        p.add_argument("--alpha", type=float, default=0.05, help="interval level (default 0.05)")
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--out", default=None, help="write output here instead of stdout")

    p_fit = sub.add_parser("fit", help="maximum-likelihood fit with Wald inference")
    add_model_flags(p_fit)

    p_boot = sub.add_parser("boot", help="fit plus parametric-bootstrap inference")
    add_model_flags(p_boot)
    p_boot.add_argument("--B", type=int, default=DEFAULT_B, help=f"replicates (default {DEFAULT_B})")
    p_boot.add_argument("--seed", type=int, default=DEFAULT_SEED, help="root seed")
    p_boot.add_argument(
        "--workers",
        type=int,
        default=os.cpu_count() or 1,
        help="replicate worker processes (default: available parallelism)",
    )

    p_sim = sub.add_parser("simulate", help="generate a synthetic dataset as CSV")
    p_sim.add_argument("--spec", default=None, help="JSON simulation spec path")
    p_sim.add_argument(
        "--dengue-analog",
        action="store_true",
        help="use the built-in 515-row dengue-like preset",
    )
    p_sim.add_argument("--seed", type=int, default=None, help="override the spec seed")
    p_sim.add_argument("--out", default=None, help="write CSV here instead of stdout")
    return parser


def _fmt4(x):
    return f"{x:.4f}"


def _fmt_ci(lo, hi):
    return f"[{_fmt4(lo)}, {_fmt4(hi)}]"


def _fmt_p(p, zero_floor=None):
    if p is None:
        return ""
    if zero_floor is not None and p == 0.0:
        return f"< {zero_floor:.4g}"
    if p < _P_RENDER_FLOOR:
        return "< 0.0001"
    return _fmt4(p)


def _display_names(names, has_intercept):
    out = []
    for j, name in enumerate(names):
        if has_intercept and j == 0:
            out.append(f"Intercept (beta{j + 1})")
        else:
            out.append(f"{name} (beta{j + 1})")
    return out


def _render_columns(headers, rows):
    widths = [len(h) for h in headers]
    for row in rows:
        for j, cell in enumerate(row):
            widths[j] = max(widths[j], len(cell))
    lines = []
    sep = "  "
    lines.append(sep.join(h.ljust(widths[j]) for j, h in enumerate(headers)).rstrip())
    lines.append("-" * len(lines[0]))
    for row in rows:
        lines.append(sep.join(cell.ljust(widths[j]) for j, cell in enumerate(row)).rstrip())
    return "\n".join(lines)


def _table_headers(alpha):
    level = f"{(1.0 - alpha) * 100:g}%"
    return ["Parameter", "Estimate", "SE", f"{level} C.I", "P-value"]


def _jsonsafe(obj):
    """Plain-JSON rendering: numpy scalars unwrapped, non-finite -> null."""
    if isinstance(obj, dict):
        return {k: _jsonsafe(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return [_jsonsafe(v) for v in obj.tolist()]
    if isinstance(obj, (list, tuple)):
        return [_jsonsafe(v) for v in obj]
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _dump_json(obj):
    return json.dumps(_jsonsafe(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _run_meta(command, *, seed=None, B=None, alpha=None, tau_mode=None):
    return {
        "command": command,
        "version": __version__,
        "seed": seed,
        "B": B,
        "alpha": alpha,
        "tau_mode": tau_mode,
    }


def _emit(text, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_data(args):
    predictors = tuple(s.strip() for s in args.predictors.split(",") if s.strip())
    spec = ColumnSpec(
        response=args.response,
        predictors=predictors,
        intercept=not args.no_intercept,
    )
    return read_csv(args.input, spec)


def _check_alpha(alpha):
    if not 0.0 < alpha <= 0.5:
        raise ValidationError("--alpha must lie in (0, 0.5]")


def _fit_payload(fit, table):
    params = [
        {
            "name": row.name,
            "estimate": row.estimate,
            "se": row.se,
            "ci": [row.ci_low, row.ci_high],
            "p_value": row.p_value,
        }
        for row in table.rows
    ]
    return {
        "n": fit.n_obs,
        "p": len(fit.names),
        "tau": {"mode": fit.tau.mode.value, "value": fit.tau.value},
        "loglik": fit.loglik,
        "converged": fit.converged,
        "iterations": fit.iterations,
        "boundary": fit.boundary,
        "parameters": params,
    }


def _cmd_fit(args):
    _check_alpha(args.alpha)
    tau = _parse_tau(args.tau)
    data = _load_data(args)
    fit = fit_mle(data, tau=tau)
    if not fit.converged:
        print(
            f"error: fit did not converge within the iteration budget "
            f"({fit.iterations} iterations)",
            file=sys.stderr,
        )
        return EXIT_NONCONVERGENCE
    table = wald_inference(fit, alpha=args.alpha)

    if args.format == "json":
        payload = _run_meta("fit", alpha=args.alpha, tau_mode=fit.tau.mode.value)
        payload.update(_fit_payload(fit, table))
        _emit(_dump_json(payload), args.out)
        return EXIT_OK

    names = _display_names(fit.names, fit.has_intercept)
    rows = [
        [
            names[j],
            _fmt4(row.estimate),
            _fmt4(row.se),
            _fmt_ci(row.ci_low, row.ci_high),
            _fmt_p(row.p_value),
        ]
        for j, row in enumerate(table.rows)
    ]
    body = _render_columns(_table_headers(args.alpha), rows)
    footer = (
        f"tau: {fit.tau.value:.4f} ({fit.tau.mode.value})  "
        f"log-likelihood: {fit.loglik:.4f}  "
        f"converged: {'yes' if fit.converged else 'no'} "
        f"({fit.iterations} iterations, n={fit.n_obs})"
    )
    _emit(body + "\n" + footer + "\n", args.out)
    return EXIT_OK


def _boot_payload(fit, result, intercept_blank):
    reps = result.replicates
    params = []
    for j, name in enumerate(fit.names):
        p_val = result.p_values[j]
        params.append(
            {
                "name": name,
                "estimate": result.mean[j],
                "se": result.se[j],
                "ci": [result.ci[j, 0], result.ci[j, 1]],
                "p_value": None if (intercept_blank and j == 0) else p_val,
            }
        )
    return {
        "B_effective": reps.B_effective,
        "failed": reps.failed,
        "parameters": params,
        "mle": _fit_payload(fit, wald_inference(fit, alpha=result.alpha)),
    }


def _cmd_boot(args):
    _check_alpha(args.alpha)
    if args.B < 2:
        raise ValidationError("--B must be at least 2")
    if args.seed < 0:
        raise ValidationError("--seed must be non-negative")
    tau = _parse_tau(args.tau)
    data = _load_data(args)
    fit = fit_mle(data, tau=tau)
    if not fit.converged:
        print("error: fit did not converge; bootstrap not attempted", file=sys.stderr)
        return EXIT_NONCONVERGENCE

    try:
        result = run_bootstrap(
            data, fit, B=args.B, alpha=args.alpha, seed=args.seed, workers=args.workers
        )
    except UnreliableRunError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.partial is not None:
            payload = _run_meta(
                "boot", seed=args.seed, B=args.B, alpha=args.alpha,
                tau_mode=fit.tau.mode.value,
            )
            payload.update(_boot_payload(fit, exc.partial, fit.has_intercept))
            payload["unreliable"] = True
            _emit(_dump_json(payload), args.out)
        return EXIT_UNRELIABLE

    if args.format == "json":
        payload = _run_meta(
            "boot", seed=args.seed, B=args.B, alpha=args.alpha,
            tau_mode=fit.tau.mode.value,
        )
        payload.update(_boot_payload(fit, result, fit.has_intercept))
        _emit(_dump_json(payload), args.out)
        return EXIT_OK

    reps = result.replicates
    names = _display_names(fit.names, fit.has_intercept)
    rows = []
    for j in range(len(fit.names)):
        blank_p = fit.has_intercept and j == 0
        rows.append(
            [
                names[j],
                _fmt4(result.mean[j]),
                _fmt4(result.se[j]),
                _fmt_ci(result.ci[j, 0], result.ci[j, 1]),
                "" if blank_p else _fmt_p(result.p_values[j], zero_floor=1.0 / reps.B_effective),
            ]
        )
    body = _render_columns(_table_headers(args.alpha), rows)
    footer = (
        f"B requested: {reps.B_requested}  effective: {reps.B_effective}  "
        f"failed: {reps.failed}  seed: {result.seed}"
    )
    _emit(body + "\n" + footer + "\n", args.out)
    return EXIT_OK


def _cmd_simulate(args):
    if args.dengue_analog == bool(args.spec):
        raise ValidationError("simulate needs exactly one of --dengue-analog or --spec")
    if args.dengue_analog:
        spec = dengue_analog()
    else:
        try:
            with open(args.spec, "r", encoding="utf-8") as fh:
                obj = json.load(fh)
        except OSError as exc:
            raise ValidationError(f"cannot read spec file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ValidationError(f"spec file is not valid JSON: {exc}") from None
        spec = SimSpec.from_json(obj)
    if args.seed is not None:
        if args.seed < 0:
            raise ValidationError("--seed must be non-negative")
        spec = SimSpec(
            n=spec.n,
            beta=spec.beta,
            tau=spec.tau,
            covariates=spec.covariates,
            seed=args.seed,
            response=spec.response,
        )
    data = simulate_dataset(spec)
    if args.out:
        write_csv(data, args.out, response_name=spec.response)
    else:
        write_csv(data, sys.stdout, response_name=spec.response)
    prevalence = float(np.mean(data.y))
    print(f"prevalence: {prevalence:.4f} (n={data.n_obs})", file=sys.stderr)
    return EXIT_OK


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {"fit": _cmd_fit, "boot": _cmd_boot, "simulate": _cmd_simulate}
    try:
        return handlers[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (SeparationError, ConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except GevbootError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
