"""Command-line front end: tabulate the laws, print the closed-form
moments, run Monte Carlo verification campaigns, and dump raw samples.

Every report embodies its own provenance: the flattened parameter map is
echoed in the CSV comment header or the JSON meta object, floats are
written with 17 significant digits, and a rerun of the same manifest
(seed included) reproduces the artifact byte for byte.  Exit codes:
0 success, 1 verification failure, 2 parameter validation failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .distributions import (
    BivariateQuery,
    FppParams,
    bivariate_pmf,
    interarrival_density,
    pmf,
    waiting_time_density,
)
from .errors import EmptyInputError, InvalidParamError
from .figures import figure_for_command, save_figure
from .fracint import FracIntegralSpec, _rl_chunk
from .moments import (
    cond_mean_frac_integral,
    cond_mean_integrated_power,
    cond_mixed_moment_poisson,
    cond_second_moment_frac_integral,
    cond_var_frac_integral,
    mean_frac_integral,
    mean_integrated_power,
    second_moment_frac_integral_poisson,
    var_frac_integral_poisson,
    verify_moment,
)
from .quadrature import QuadSpec
from .simulate import SimConfig, iter_path_chunks
from .skellam import SkellamParams, skellam_pmf

__all__ = ["RunManifest", "run", "main"]

_COMMANDS = (
    "pmf",
    "bivariate",
    "waiting",
    "moments",
    "verify",
    "simulate",
    "skellam",
)

# meta key (flag spelling, underscored) -> argparse dest, per command;
# the order fixes the echo order in every report header
_PARAM_FIELDS = {
    "pmf": (("lambda", "lam"), ("nu", "nu"), ("t", "t"), ("kmax", "kmax")),
    "bivariate": (
        ("lambda", "lam"),
        ("nu", "nu"),
        ("s", "s"),
        ("t", "t"),
        ("rmax", "rmax"),
        ("rel_tol", "rel_tol"),
    ),
    "waiting": (
        ("lambda", "lam"),
        ("nu", "nu"),
        ("k", "k"),
        ("tmax", "tmax"),
        ("points", "points"),
    ),
    "moments": (
        ("lambda", "lam"),
        ("nu", "nu"),
        ("alpha", "alpha"),
        ("t", "t"),
        ("n", "n"),
        ("s", "s"),
        ("w", "w"),
    ),
    "verify": (
        ("lambda", "lam"),
        ("nu", "nu"),
        ("alpha", "alpha"),
        ("t", "t"),
        ("n", "n"),
        ("n_paths", "n_paths"),
        ("seed", "seed"),
        ("workers", "workers"),
    ),
    "simulate": (
        ("lambda", "lam"),
        ("nu", "nu"),
        ("t", "t"),
        ("alpha", "alpha"),
        ("n_paths", "n_paths"),
        ("seed", "seed"),
        ("workers", "workers"),
    ),
    "skellam": (("lambda", "lam"), ("beta", "beta"), ("t", "t"), ("rmax", "rmax")),
}


@dataclass(frozen=True)
class RunManifest:
    """Everything one invocation does, captured as plain data.

    params maps flattened parameter names to values and is echoed
    verbatim into the report header, so the artifact describes itself.
    output_path "-" means standard output.
    """

    command: str
    params: dict
    output_format: str = "csv"
    output_path: str = "-"
    fig_dir: str | None = None

    def __post_init__(self) -> None:
        if self.command not in _COMMANDS:
            raise InvalidParamError(
                f"command must be one of {', '.join(_COMMANDS)}, got {self.command!r}"
            )
        if self.output_format not in ("csv", "json"):
            raise InvalidParamError(
                f"format must be csv or json, got {self.output_format!r}"
            )


def _check_nonneg_int(value, name: str) -> int:
    if int(value) != value or value < 0:
        raise InvalidParamError(f"{name} must be an integer >= 0, got {value!r}")
    return int(value)


def _run_pmf(q: dict):
    params = FppParams(rate=q["lambda"], order=q["nu"])
    kmax = _check_nonneg_int(q["kmax"], "kmax")
    rows = [[k, pmf(params, q["t"], k)] for k in range(kmax + 1)]
    return ["k", "probability"], rows, 0


def _run_bivariate(q: dict):
    params = FppParams(rate=q["lambda"], order=q["nu"])
    rmax = _check_nonneg_int(q["rmax"], "rmax")
    quad = QuadSpec(rel_tol=q["rel_tol"])
    rows = []
    for k in range(rmax + 1):
        for r in range(k, rmax + 1):
            query = BivariateQuery(s=q["s"], t=q["t"], k=k, r=r, quad=quad)
            rows.append([k, r, bivariate_pmf(params, query)])
    return ["k", "r", "probability"], rows, 0


def _run_waiting(q: dict):
    params = FppParams(rate=q["lambda"], order=q["nu"])
    k = q["k"]
    points = _check_nonneg_int(q["points"], "points")
    if points < 2:
        raise InvalidParamError(f"points must be >= 2, got {points}")
    tmax = q["tmax"]
    if not (math.isfinite(tmax) and tmax > 0.0):
        raise InvalidParamError(f"tmax must be finite and > 0, got {tmax!r}")
    rows = []
    for i in range(1, points + 1):
        s = tmax * i / points
        rows.append(
            [s, interarrival_density(params, s), waiting_time_density(params, k, s)]
        )
    return ["s", "interarrival_density", "waiting_time_density"], rows, 0


def _run_moments(q: dict):
    params = FppParams(rate=q["lambda"], order=q["nu"])
    spec = FracIntegralSpec(alpha=q["alpha"], t=q["t"])
    lam, nu, t = q["lambda"], q["nu"], q["t"]
    rows = [["mean_frac_integral", mean_frac_integral(params, spec)]]
    if nu == 1.0:
        rows.append(
            ["var_frac_integral", var_frac_integral_poisson(lam, spec.alpha, t)]
        )
        rows.append(
            [
                "second_moment_frac_integral",
                second_moment_frac_integral_poisson(lam, spec.alpha, t),
            ]
        )
        for k in (1, 2, 3):
            rows.append(
                [f"mean_integrated_power_k{k}", mean_integrated_power(lam, k, t)]
            )
    n = q.get("n")
    if n is not None:
        rows.append(["cond_mean_integral", cond_mean_frac_integral(n, spec.alpha, t)])
        rows.append(
            [
                "cond_second_moment_integral",
                cond_second_moment_frac_integral(n, spec.alpha, t),
            ]
        )
        rows.append(["cond_var_integral", cond_var_frac_integral(n, spec.alpha, t)])
        for k in (1, 2, 3):
            rows.append(
                [
                    f"cond_mean_integrated_power_k{k}",
                    cond_mean_integrated_power(n, k, t),
                ]
            )
        if q.get("s") is not None and q.get("w") is not None:
            rows.append(
                [
                    "cond_mixed_moment",
                    cond_mixed_moment_poisson(n, q["s"], q["w"], t),
                ]
            )
    return ["name", "value"], rows, 0


def _run_verify(q: dict):
    params = FppParams(rate=q["lambda"], order=q["nu"])
    spec = FracIntegralSpec(alpha=q["alpha"], t=q["t"])
    entries = [("mean_frac_integral", {}), ("var_frac_integral", {})]
    if q["nu"] == 1.0:
        # the conditional and integrated-power closed forms describe the
        # order-1 process, so they join the battery only there
        n = q["n"]
        entries += [
            ("cond_mean_integral", {"n": n}),
            ("cond_second_moment_integral", {"n": n}),
            ("cond_var_integral", {"n": n}),
            ("mean_integrated_power", {"k": 2}),
            ("cond_mean_integrated_power", {"n": n, "k": 2}),
        ]
    rows = []
    worst = 0.0
    for i, (name, extra) in enumerate(entries):
        sim = SimConfig(
            seed=q["seed"] + i, n_paths=q["n_paths"], workers=q["workers"]
        )
        rep = verify_moment(name, params, spec, sim, **extra)
        rows.append(
            [
                name,
                rep.analytic,
                rep.mc_estimate,
                rep.mc_std_error,
                rep.n_samples,
                rep.z_score,
            ]
        )
        if rep.z_score is not None and not math.isnan(rep.z_score):
            worst = max(worst, abs(rep.z_score))
    columns = [
        "name",
        "analytic",
        "mc_estimate",
        "mc_std_error",
        "n_samples",
        "z_score",
    ]
    return columns, rows, (1 if worst > 4.0 else 0)


def _run_simulate(q: dict):
    params = FppParams(rate=q["lambda"], order=q["nu"])
    t = q["t"]
    alpha = q.get("alpha")
    cfg = SimConfig(seed=q["seed"], n_paths=q["n_paths"], workers=q["workers"])
    columns = ["path", "count", "integral"]
    if alpha is not None:
        spec = FracIntegralSpec(alpha=alpha, t=t)
        columns.append("frac_integral")
    rows = []
    idx = 0
    for times, counts in iter_path_chunks(params, t, cfg):
        integ = counts * t - np.where(np.isfinite(times), times, 0.0).sum(axis=1)
        frac = _rl_chunk(times, alpha, t) if alpha is not None else None
        for j in range(counts.size):
            row = [idx, int(counts[j]), float(integ[j])]
            if frac is not None:
                row.append(float(frac[j]))
            rows.append(row)
            idx += 1
    return columns, rows, 0


def _run_skellam(q: dict):
    params = SkellamParams(rate_plus=q["lambda"], rate_minus=q["beta"])
    rmax = _check_nonneg_int(q["rmax"], "rmax")
    rows = [[r, skellam_pmf(params, q["t"], r)] for r in range(-rmax, rmax + 1)]
    return ["r", "probability"], rows, 0


_HANDLERS = {
    "pmf": _run_pmf,
    "bivariate": _run_bivariate,
    "waiting": _run_waiting,
    "moments": _run_moments,
    "verify": _run_verify,
    "simulate": _run_simulate,
    "skellam": _run_skellam,
}


def _fmt_value(x) -> str:
    """Fixed textual form: ints verbatim, floats at 17 significant digits."""
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def _json_value(x) -> str:
    if x is None:
        return "null"
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    xf = float(x)
    if not math.isfinite(xf):
        # JSON has no literal for these; absent is the honest encoding
        return "null"
    return "%.17g" % xf


def _render_csv(meta: dict, columns, rows) -> str:
    lines = [f"# {key}={_fmt_value(value)}" for key, value in meta.items()]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt_value(v) for v in row))
    return "\n".join(lines) + "\n"


def _render_json(meta: dict, columns, rows) -> str:
    meta_body = ",\n".join(
        f"    {json.dumps(key)}: {_json_value(value)}" for key, value in meta.items()
    )
    cols_body = ", ".join(json.dumps(c) for c in columns)
    rows_body = ",\n".join(
        "      [" + ", ".join(_json_value(v) for v in row) + "]" for row in rows
    )
    return (
        "{\n"
        '  "meta": {\n' + meta_body + "\n  },\n"
        '  "data": {\n'
        '    "columns": [' + cols_body + "],\n"
        '    "rows": [\n' + rows_body + "\n    ]\n"
        "  }\n"
        "}\n"
    )


def run(manifest: RunManifest) -> int:
    """Execute one manifest: write the report, render the optional
    figure, and return the process exit code."""
    try:
        columns, rows, code = _HANDLERS[manifest.command](manifest.params)
    except InvalidParamError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return 2
    except EmptyInputError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 1

    meta = {"command": manifest.command, "format": manifest.output_format}
    meta.update(manifest.params)
    if manifest.output_format == "csv":
        text = _render_csv(meta, columns, rows)
    else:
        text = _render_json(meta, columns, rows)

    if manifest.output_path == "-":
        sys.stdout.write(text)
    else:
        with open(manifest.output_path, "w", newline="") as handle:
            handle.write(text)

    if manifest.fig_dir is not None:
        os.makedirs(manifest.fig_dir, exist_ok=True)
        fig = figure_for_command(manifest.command, rows)
        save_figure(fig, os.path.join(manifest.fig_dir, f"{manifest.command}.png"))
    return code


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--format", choices=("csv", "json"), default="csv", help="report format"
    )
    parser.add_argument(
        "--output", default="-", help="report destination path, - for stdout"
    )
    parser.add_argument(
        "--fig-dir",
        default=None,
        help="directory receiving a rendered figure of the report",
    )


def _add_sim_flags(parser: argparse.ArgumentParser, default_paths: int) -> None:
    parser.add_argument("--n-paths", type=int, default=default_paths, dest="n_paths")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=1)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracpoisson",
        description=(
            "Tabulate, verify, and simulate the fractional counting process "
            "and the fractional integrals built on it."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pmf", help="tabulate count probabilities up to kmax")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--nu", type=float, default=1.0)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--kmax", type=int, default=10)
    _add_common(p)

    p = sub.add_parser("bivariate", help="tabulate the two-time joint law")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--nu", type=float, default=1.0)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--rmax", type=int, default=4)
    p.add_argument("--rel-tol", dest="rel_tol", type=float, default=1e-8)
    _add_common(p)

    p = sub.add_parser("waiting", help="tabulate arrival-time densities")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--nu", type=float, default=1.0)
    p.add_argument("--k", type=int, default=1, help="index of the awaited event")
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--points", type=int, default=200)
    _add_common(p)

    p = sub.add_parser("moments", help="print the closed-form moments")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--nu", type=float, default=1.0)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--n", type=int, default=None, help="conditioning count")
    p.add_argument("--s", type=float, default=None, help="earlier time of the mixed moment")
    p.add_argument("--w", type=float, default=None, help="later time of the mixed moment")
    _add_common(p)

    p = sub.add_parser("verify", help="run the Monte Carlo verification battery")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--nu", type=float, default=1.0)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--n", type=int, default=4, help="conditioning count")
    _add_sim_flags(p, 200_000)
    _add_common(p)

    p = sub.add_parser("simulate", help="write raw per-path sample columns")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--nu", type=float, default=1.0)
    p.add_argument("--t", type=float, required=True)
    p.add_argument(
        "--alpha",
        type=float,
        default=None,
        help="also emit the fractional integral of this order",
    )
    _add_sim_flags(p, 1000)
    _add_common(p)

    p = sub.add_parser("skellam", help="tabulate the difference-process law")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--rmax", type=int, default=10)
    _add_common(p)
    return parser


def _manifest_from_args(args: argparse.Namespace) -> RunManifest:
    params = {}
    for key, dest in _PARAM_FIELDS[args.command]:
        value = getattr(args, dest)
        if value is not None:
            params[key] = value
    return RunManifest(
        command=args.command,
        params=params,
        output_format=args.format,
        output_path=args.output,
        fig_dir=args.fig_dir,
    )


def run_cli(argv=None) -> int:
    """Parse argv and execute; returns the exit code without exiting."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    return run(_manifest_from_args(args))


def main(argv=None) -> None:
    raise SystemExit(run_cli(argv))


if __name__ == "__main__":
    main()
