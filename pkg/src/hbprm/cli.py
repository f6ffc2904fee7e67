"""Command-line interface: ``hbprm {gen,fit,compare,ks-curve}``.

Settings resolve as command-line flag, then ``--config`` JSON file, then
built-in defaults (prior ``N(0, 1)`` / ``IG(1, 1)``, 4 chains, 5000 warm-up
and 5000 retained sweeps). The output directory is ``--output-dir``, else the
``HBPRM_OUTPUT_DIR`` environment variable, else the config file, else the
current directory.

Results are computed in full before any file is written, so a failed run
leaves no partial output. Exit status is 0 only when every artifact was
written.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .ags import run_ags
from .diagnostics import DiagnosticsReport, diagnostics_report
from .exceptions import HBPRMError
from .io import (
    ingest_csv,
    write_coefficients_csv,
    write_dataset_csv,
    write_diagnostics_csv,
    write_draws_csv,
    write_ks_csv,
    write_text,
)
from .model import PriorConfig
from .mwg import MwgConfig, run_mwg
from .special import FIG1_COUNTS, ks_curve
from .synth import SynthSpec, generate

logger = logging.getLogger("hbprm")

ENV_OUTPUT_DIR = "HBPRM_OUTPUT_DIR"

DEFAULTS = {
    "m": 0.0,
    "tau2": 1.0,
    "a": 1.0,
    "b": 1.0,
    "n_warmup": 5000,
    "n_keep": 5000,
    "chains": 4,
    "seed": 0,
    "init": "prior-draw",
    "n_jobs": 1,
    "shift_counts": None,
    "sampler": "ags",
    "step_scale": 0.1,
    "adapt_target": 0.44,
    "adapt_window": 50,
    "omit_timing": False,
    "dataset": None,
    "output_dir": None,
    # gen
    "family": "large",
    "groups": 10,
    "n_per_group": 20,
    "covariates": 2,
    "y_max": None,
    "name": "synthetic",
    "input": None,
}

NUTS_NOTE = (
    "# Reference sampler: exact-likelihood Metropolis-within-Gibbs (MWG), "
    "standing in for NUTS; timings are not comparable to a NUTS run."
)


def _add_output(p):
    p.add_argument("--output-dir", help=f"output directory (default: ${ENV_OUTPUT_DIR} or .)")
    p.add_argument("--config", help="JSON file of default settings")


def _add_run_options(p, *, seed_required=False):
    p.add_argument("input", help="CSV with header group,x1,...,xK,y")
    g = p.add_argument_group("prior")
    g.add_argument("--m", type=float, help="prior mean of mu_k (default 0)")
    g.add_argument("--tau2", type=float, help="prior variance of mu_k (default 1)")
    g.add_argument("--a", type=float, help="IG shape parameter of sigma2_k (default 1)")
    g.add_argument("--b", type=float, help="IG scale parameter of sigma2_k (default 1)")
    g = p.add_argument_group("chains")
    g.add_argument("--n-warmup", type=int, help="warm-up sweeps per chain (default 5000)")
    g.add_argument("--n-keep", type=int, help="retained sweeps per chain (default 5000)")
    g.add_argument("--chains", type=int, help="number of chains (default 4)")
    g.add_argument("--seed", type=int, required=seed_required, help="run seed")
    g.add_argument("--init", choices=("prior-draw", "zeros"))
    g.add_argument("--n-jobs", type=int, help="chains run concurrently (default 1)")
    g = p.add_argument_group("Metropolis reference sampler")
    g.add_argument("--step-scale", type=float, help="initial proposal sd (default 0.1)")
    g.add_argument("--adapt-target", type=float, help="target acceptance rate (default 0.44)")
    g.add_argument("--adapt-window", type=int, help="adaptation time scale (default 50)")
    p.add_argument("--shift-counts", type=int, help="add this positive integer to every count")
    p.add_argument("--dataset", help="dataset name in the diagnostics file (default: input stem)")
    p.add_argument(
        "--omit-timing",
        action="store_true",
        default=None,
        help="write T_s and E_s as NA so repeated runs give byte-identical files",
    )
    _add_output(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hbprm", description="Hierarchical Bayesian Poisson regression samplers."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic dataset")
    p.add_argument("--family", choices=("large", "small"))
    p.add_argument("--groups", type=int, help="number of groups J (default 10)")
    p.add_argument("--n-per-group", type=int, help="rows per group (default 20)")
    p.add_argument("--covariates", type=int, help="number of covariates K (default 2)")
    p.add_argument("--y-max", type=float, help="upper count scale (small family)")
    p.add_argument("--seed", type=int)
    p.add_argument("--name", help="file stem (default 'synthetic')")
    _add_output(p)

    p = sub.add_parser("fit", help="run one sampler on a CSV dataset")
    _add_run_options(p)
    p.add_argument("--sampler", choices=("ags", "mwg"))

    p = sub.add_parser("compare", help="run the approximate and the reference sampler")
    _add_run_options(p, seed_required=True)

    p = sub.add_parser("ks-curve", help="KS distance of the Gaussian approximation")
    _add_output(p)
    return parser


def resolve_settings(args: argparse.Namespace) -> dict:
    """Merge flags over the config file over :data:`DEFAULTS`."""
    settings = dict(DEFAULTS)
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise HBPRMError(f"{args.config}: config must be a JSON object")
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise HBPRMError(f"{args.config}: unknown settings {sorted(unknown)}")
        settings.update(loaded)
    env_dir = os.environ.get(ENV_OUTPUT_DIR)
    if env_dir:
        settings["output_dir"] = env_dir
    for key, value in vars(args).items():
        if key in DEFAULTS and value is not None:
            settings[key] = value
    if settings["output_dir"] is None:
        settings["output_dir"] = "."
    return settings


def _prior(s) -> PriorConfig:
    return PriorConfig(m=s["m"], tau2=s["tau2"], a=s["a"], b=s["b"])


def _config(s) -> MwgConfig:
    # MwgConfig is an AgsConfig; the approximate sampler ignores the step fields
    return MwgConfig(
        n_warmup=s["n_warmup"],
        n_keep=s["n_keep"],
        n_chains=s["chains"],
        seed=s["seed"],
        init=s["init"],
        n_jobs=s["n_jobs"],
        step_scale=s["step_scale"],
        adapt_target=s["adapt_target"],
        adapt_window=s["adapt_window"],
    )


def _run(sampler, data, prior, config):
    logger.info("running %s: %d chains x %d sweeps", sampler, config.n_chains, config.iterations)
    if sampler == "ags":
        return run_ags(data, prior, config)
    return run_mwg(data, prior, config)


def diagnostics_row(dataset: str, report: DiagnosticsReport, omit_timing: bool) -> list:
    t_s, e_s = (None, None) if omit_timing else (report.t_s, report.e_s)
    return [
        dataset,
        report.sampler,
        report.n_d,
        report.n_covariates,
        report.n_groups,
        t_s,
        e_s,
        report.r2,
        report.rmse,
    ]


def _summary(dataset, report: DiagnosticsReport, output, omit_timing: bool) -> str:
    lines = [
        f"dataset   {dataset}",
        f"sampler   {report.sampler}",
        f"N_d={report.n_d}  K={report.n_covariates}  J={report.n_groups}",
        f"chains    {output.n_chains} x ({output.warmup_count} warm-up + {output.retained_count} retained)",
        f"mean ESS  {report.mean_ess:.2f}",
    ]
    if not omit_timing:
        lines.append(f"T_s       {report.t_s:.4f} s / 1000 iterations")
        lines.append(f"E_s       {report.e_s:.4f}")
    lines += [f"R2        {report.r2:.4f}", f"RMSE      {report.rmse:.4f}"]
    if "accept_rate" in output.stats:
        rates = ", ".join(f"{r:.3f}" for r in output.stats["accept_rate"])
        lines.append(f"acceptance per chain  {rates}")
    w_bar = output.posterior_mean_w()
    lines.append("posterior mean w (rows: groups, columns: covariates)")
    lines += ["  " + " ".join(f"{v: .6g}" for v in row) for row in w_bar]
    return "\n".join(lines) + "\n"


def cmd_gen(s) -> int:
    spec = SynthSpec(
        family=s["family"],
        J=s["groups"],
        n_per_group=s["n_per_group"],
        K=s["covariates"],
        y_max=s["y_max"],
        seed=s["seed"],
    )
    data, w = generate(spec)
    out = Path(s["output_dir"])
    write_dataset_csv(out / f"{s['name']}.csv", data)
    write_coefficients_csv(out / f"{s['name']}_coefficients.csv", w, data.labels)
    print(f"wrote {out / (s['name'] + '.csv')} ({data!r}) and its coefficients")
    return 0


def _fit_one(s, sampler, data):
    prior, config = _prior(s), _config(s)
    output = _run(sampler, data, prior, config)
    return output, diagnostics_report(output, data)


def cmd_fit(s) -> int:
    data = ingest_csv(s["input"], shift_counts=s["shift_counts"])
    dataset = s["dataset"] or Path(s["input"]).stem
    sampler = s["sampler"]
    output, report = _fit_one(s, sampler, data)
    summary = _summary(dataset, report, output, s["omit_timing"])

    out = Path(s["output_dir"])
    write_draws_csv(out / f"draws_{sampler}.csv", output)
    write_diagnostics_csv(
        out / f"diagnostics_{sampler}.csv", [diagnostics_row(dataset, report, s["omit_timing"])]
    )
    write_text(out / f"summary_{sampler}.txt", summary)
    print(summary, end="")
    return 0


def format_comparison(dataset, reports, omit_timing) -> str:
    head = f"{'sampler':<8}{'N_d':>6}{'K':>4}{'J':>4}{'T_s':>12}{'E_s':>12}{'R2':>10}{'RMSE':>14}"
    lines = [NUTS_NOTE, f"# dataset: {dataset}", head]
    for r in reports:
        t = "NA" if omit_timing else f"{r.t_s:.4f}"
        e = "NA" if omit_timing else f"{r.e_s:.4f}"
        lines.append(
            f"{r.sampler:<8}{r.n_d:>6}{r.n_covariates:>4}{r.n_groups:>4}"
            f"{t:>12}{e:>12}{r.r2:>10.4f}{r.rmse:>14.4f}"
        )
    if not omit_timing:
        ratio = reports[1].t_s / reports[0].t_s
        lines.append(f"# T_s ratio mwg / ags: {ratio:.2f}")
    return "\n".join(lines) + "\n"


def cmd_compare(s) -> int:
    data = ingest_csv(s["input"], shift_counts=s["shift_counts"])
    dataset = s["dataset"] or Path(s["input"]).stem
    results = {name: _fit_one(s, name, data) for name in ("ags", "mwg")}
    reports = [results[name][1] for name in ("ags", "mwg")]
    table = format_comparison(dataset, reports, s["omit_timing"])

    out = Path(s["output_dir"])
    for name, (output, _) in results.items():
        write_draws_csv(out / f"draws_{name}.csv", output)
    write_diagnostics_csv(
        out / "diagnostics.csv", [diagnostics_row(dataset, r, s["omit_timing"]) for r in reports]
    )
    write_text(out / "comparison.txt", table)
    print(table, end="")
    return 0


def cmd_ks_curve(s) -> int:
    rows = ks_curve(FIG1_COUNTS)
    ks = [r[1] for r in rows]
    monotone = bool(np.all(np.diff(ks) <= 0))
    write_ks_csv(Path(s["output_dir"]) / "ks_curve.csv", rows)
    print(f"{'y':>4}{'KS':>14}{'|mean error|':>16}")
    for y, d, e in rows:
        print(f"{y:>4}{d:>14.6f}{e:>16.3e}")
    print(f"non-increasing in y: {'yes' if monotone else 'NO'}")
    return 0


COMMANDS = {"gen": cmd_gen, "fit": cmd_fit, "compare": cmd_compare, "ks-curve": cmd_ks_curve}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        settings = resolve_settings(args)
        return COMMANDS[args.command](settings)
    except (HBPRMError, OSError, json.JSONDecodeError) as exc:
        print(f"hbprm {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
