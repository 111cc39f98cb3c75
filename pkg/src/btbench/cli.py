"""Command-line interface.

Subcommands: compare, diagnose, mle, freq, calibrate, plot.  Exit codes:
0 success, 1 success with diagnostic warnings, 2 unreadable input, 3 parse
failure, 4 bad configuration, 5 sampling failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .calibration import run_calibration
from .checks import ppc_coverage, ppc_replicates, waic
from .errors import (
    BtbenchError,
    ConfigError,
    InputError,
    ParseError,
    SamplingFailureError,
)
from .fit import fit_bt, fit_davidson
from .freq import demsar_procedure, pairwise_wilcoxon_procedure
from .mle import mle_mm
from .model import PriorConfig
from .plots import cd_diagram_svg, forest_plot_svg
from .report import FORMATS, render
from .results import load_results, parse_results, wide_to_long
from .sampler import SamplerConfig, convergence_report
from .summary import RopeConfig, control_view, summarize
from .wintable import LocalRopeConfig, apply_ties_policy, build_wintable

EXIT_OK = 0
EXIT_WARNINGS = 1
EXIT_IO = 2
EXIT_PARSE = 3
EXIT_CONFIG = 4
EXIT_SAMPLING = 5

HYPER_ALIASES = {
    "lognormal": "lognormal",
    "cauchy": "half_cauchy",
    "normal": "half_normal",
}


class _Parser(argparse.ArgumentParser):
    """argparse exits with code 2 on usage errors; we reserve 2 for I/O."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _parse_hyper(spec: str) -> PriorConfig:
    """'lognormal:0.5', 'cauchy:1.0' or 'normal:3.0'."""
    name, _, scale_text = spec.partition(":")
    family = HYPER_ALIASES.get(name.strip().lower())
    if family is None:
        raise ConfigError(
            f"unknown hyper-prior {name!r}; choose from {sorted(HYPER_ALIASES)}"
        )
    try:
        scale = float(scale_text) if scale_text else {"lognormal": 0.5,
                                                      "half_cauchy": 1.0,
                                                      "half_normal": 3.0}[family]
    except ValueError:
        raise ConfigError(f"bad hyper-prior scale {scale_text!r}") from None
    return PriorConfig(family=family, scale=scale)


def _parse_rope(spec: str) -> RopeConfig:
    low, _, high = spec.partition(":")
    try:
        return RopeConfig(low=float(low), high=float(high))
    except ValueError:
        raise ConfigError(f"bad ROPE {spec!r}; expected LOW:HIGH") from None


def _add_io_options(p):
    p.add_argument("input", help="long-format CSV of results")
    p.add_argument("--minimize", action="store_true",
                   help="lower measures are better (error-style metrics)")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--wide", action="store_true",
                   help="input is wide (dataset column + one column per algorithm)")
    p.add_argument("--format", choices=FORMATS, default="markdown")
    p.add_argument("--output", help="write the report here instead of stdout")


def _add_wintable_options(p):
    p.add_argument("--ties", choices=("spread", "add", "forget", "keep"),
                   default="spread")
    p.add_argument("--local-rope", action="store_true",
                   help="tie cells whose fold effect size is below --d-min")
    p.add_argument("--d-min", type=float, default=0.4)
    p.add_argument("--unpaired", action="store_true",
                   help="effect size from pooled fold variances, not differences")


def _add_fit_options(p):
    p.add_argument("--model", choices=("bt", "davidson"), default="bt")
    p.add_argument("--hyper", default="lognormal:0.5",
                   help="sigma hyper-prior: lognormal:S | cauchy:S | normal:S")
    p.add_argument("--chains", type=int, default=4)
    p.add_argument("--warmup", type=int, default=1000)
    p.add_argument("--draws", type=int, default=1000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--target-accept", type=float, default=0.8)
    p.add_argument("--parallel", action="store_true",
                   help="run chains on threads (results identical either way)")
    p.add_argument("--hdi", type=float, default=0.89)
    p.add_argument("--rope", default="0.45:0.55", metavar="LOW:HIGH")


def build_parser() -> _Parser:
    parser = _Parser(prog="btbench",
                     description="Compare algorithms across data sets with a "
                                 "Bayesian paired-comparison model plus "
                                 "frequentist baselines.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compare", help="fit and summarize pair probabilities")
    _add_io_options(p)
    _add_wintable_options(p)
    _add_fit_options(p)
    p.add_argument("--control", help="show only comparisons against this algorithm")

    p = sub.add_parser("diagnose", help="convergence, predictive checks, WAIC")
    _add_io_options(p)
    _add_wintable_options(p)
    _add_fit_options(p)
    p.add_argument("--ppc-seed", type=int, default=2024)

    p = sub.add_parser("mle", help="maximum-likelihood weights (deterministic)")
    _add_io_options(p)
    _add_wintable_options(p)

    p = sub.add_parser("freq", help="mean-rank and pairwise signed-rank baselines")
    _add_io_options(p)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--adjust", choices=("bonferroni", "holm", "hochberg", "bh", "by"),
                   default="hochberg")
    p.add_argument("--procedure", choices=("demsar", "wilcoxon", "both"),
                   default="both")

    p = sub.add_parser("calibrate", help="train/held-out predictive calibration")
    _add_io_options(p)
    _add_wintable_options(p)
    _add_fit_options(p)
    p.add_argument("--use-case", choices=("ss", "mm", "sl"), default="ss")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--held-out", type=int, default=10)

    p = sub.add_parser("plot", help="write an SVG figure")
    _add_io_options(p)
    _add_wintable_options(p)
    _add_fit_options(p)
    p.add_argument("--what", choices=("forest", "cd"), default="forest")
    p.add_argument("--alpha", type=float, default=0.05)
    return parser


def _load_table(args):
    higher = not args.minimize
    if args.wide:
        try:
            with open(args.input, "r", encoding="utf-8") as f:
                text = f.read()
        except OSError as exc:
            raise InputError(f"cannot read {args.input}: {exc}") from exc
        return parse_results(wide_to_long(text, args.delimiter),
                             higher_is_better=higher)
    return load_results(args.input, higher_is_better=higher,
                        delimiter=args.delimiter)


def _wintable_from(args, table):
    config = LocalRopeConfig(
        enabled=args.local_rope, d_min=args.d_min, paired=not args.unpaired
    )
    return build_wintable(table, config)


def _sampler_config(args) -> SamplerConfig:
    return SamplerConfig(
        chains=args.chains,
        warmup=args.warmup,
        draws=args.draws,
        seed=args.seed,
        target_accept=args.target_accept,
        parallel=args.parallel,
    )


def _run_fit(args, wt):
    """Validate the ties policy against the model, apply it, and fit."""
    prior = _parse_hyper(args.hyper)
    config = _sampler_config(args)
    if args.model == "davidson":
        if args.ties != "keep":
            raise ConfigError(
                "the explicit-ties model needs --ties keep; converting ties "
                "away would remove exactly the data it models"
            )
        return fit_davidson(wt, prior=prior, config=config)
    if args.ties == "keep":
        raise ConfigError(
            "--ties keep only makes sense with --model davidson; pick one of "
            "spread, add, forget"
        )
    return fit_bt(apply_ties_policy(wt, args.ties), prior=prior, config=config)


def _base_config_dict(args, extra=None) -> dict:
    """Reproducibility block embedded in every report.

    Execution details that cannot change the numbers (output path, format,
    thread use) are deliberately left out so identical analyses render
    identical JSON.
    """
    cfg = {
        "input": args.input,
        "direction": "lower_is_better" if args.minimize else "higher_is_better",
    }
    if hasattr(args, "ties"):
        cfg["ties"] = args.ties
        cfg["local_rope"] = {
            "enabled": args.local_rope,
            "d_min": args.d_min,
            "paired": not args.unpaired,
        }
    if hasattr(args, "model"):
        cfg.update(
            {
                "model": args.model,
                "hyper": args.hyper,
                "chains": args.chains,
                "warmup": args.warmup,
                "draws": args.draws,
                "seed": args.seed,
                "target_accept": args.target_accept,
                "hdi": args.hdi,
                "rope": args.rope,
            }
        )
        if args.model == "davidson":
            # the tie-propensity prior is a package choice, so surface it
            cfg["nu_prior"] = "normal:3.0"
    if extra:
        cfg.update(extra)
    return cfg


def _emit(args, report: dict) -> None:
    text = render(report, args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def cmd_compare(args) -> int:
    table = _load_table(args)
    wt = _wintable_from(args, table)
    fit = _run_fit(args, wt)
    conv = convergence_report(fit.draws)
    summary = summarize(fit.draws, rope=_parse_rope(args.rope), hdi_mass=args.hdi)
    if args.control:
        summary = control_view(summary, args.control)
    warnings = [] if conv.passed else ["convergence diagnostics failed"] + conv.issues
    report = {
        "command": "compare",
        "config": _base_config_dict(args, {"control": args.control}),
        "summary": summary.as_dict(),
        "convergence": conv.as_dict(),
        "warnings": warnings,
    }
    _emit(args, report)
    return EXIT_OK if conv.passed else EXIT_WARNINGS


def cmd_diagnose(args) -> int:
    table = _load_table(args)
    wt = _wintable_from(args, table)
    fit = _run_fit(args, wt)
    conv = convergence_report(fit.draws)
    replicates = ppc_replicates(fit.draws, fit.wintable, seed=args.ppc_seed)
    coverage = ppc_coverage(replicates, fit.wintable)
    ic = waic(fit.draws, fit.wintable)
    warnings = [] if conv.passed else ["convergence diagnostics failed"] + conv.issues
    report = {
        "command": "diagnose",
        "config": _base_config_dict(args, {"ppc_seed": args.ppc_seed}),
        "convergence": conv.as_dict(),
        "ppc": coverage.as_dict(),
        "waic": ic.as_dict(),
        "sampler": {
            "step_sizes": [float(s) for s in fit.draws.step_sizes],
            "accept_rates": [float(a) for a in fit.draws.accept_rates],
            "divergences": [int(d) for d in fit.draws.divergences],
        },
        "warnings": warnings,
    }
    _emit(args, report)
    return EXIT_OK if conv.passed else EXIT_WARNINGS


def cmd_mle(args) -> int:
    table = _load_table(args)
    wt = _wintable_from(args, table)
    if args.ties == "keep":
        raise ConfigError("the ML fit has no tie parameter; pick spread, add or forget")
    wt = apply_ties_policy(wt, args.ties)
    result = mle_mm(wt)
    pair_probs = [
        {
            "first": wt.algorithms[i],
            "second": wt.algorithms[j],
            "probability": result.pair_probability(wt.algorithms[i], wt.algorithms[j]),
        }
        for i, j in wt.pairs()
    ]
    report = {
        "command": "mle",
        "config": _base_config_dict(args),
        "mle": result.as_dict(),
        "pair_probabilities": pair_probs,
    }
    _emit(args, report)
    return EXIT_OK


def cmd_freq(args) -> int:
    table = _load_table(args)
    report = {
        "command": "freq",
        "config": {
            "input": args.input,
            "direction": "lower_is_better" if args.minimize else "higher_is_better",
            "alpha": args.alpha,
            "adjust": args.adjust,
        },
    }
    if args.procedure in ("demsar", "both"):
        report["demsar"] = demsar_procedure(table, alpha=args.alpha).as_dict()
    if args.procedure in ("wilcoxon", "both"):
        report["wilcoxon"] = pairwise_wilcoxon_procedure(
            table, method=args.adjust, alpha=args.alpha
        ).as_dict()
    _emit(args, report)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    table = _load_table(args)
    local = LocalRopeConfig(
        enabled=args.local_rope, d_min=args.d_min, paired=not args.unpaired
    )
    if args.model == "davidson":
        raise ConfigError("calibration is defined for the paired-comparison model")
    strong, weak = run_calibration(
        table,
        use_case=args.use_case,
        reps=args.reps,
        seed=args.seed,
        n_held_out=args.held_out,
        prior=_parse_hyper(args.hyper),
        sampler=_sampler_config(args),
        local_rope=local if args.local_rope else None,
        ties_policy=args.ties,
    )
    report = {
        "command": "calibrate",
        "config": _base_config_dict(
            args,
            {"use_case": args.use_case, "reps": args.reps, "held_out": args.held_out},
        ),
        "strong": strong.as_dict(),
        "weak": weak.as_dict(),
    }
    _emit(args, report)
    return EXIT_OK


def cmd_plot(args) -> int:
    table = _load_table(args)
    if args.what == "cd":
        freq = demsar_procedure(table, alpha=args.alpha)
        svg = cd_diagram_svg(freq)
    else:
        wt = _wintable_from(args, table)
        fit = _run_fit(args, wt)
        summary = summarize(fit.draws, rope=_parse_rope(args.rope), hdi_mass=args.hdi)
        svg = forest_plot_svg(summary)
    out = args.output or f"{args.what}.svg"
    with open(out, "w", encoding="utf-8") as f:
        f.write(svg)
    print(f"wrote {out}")
    return EXIT_OK


COMMANDS = {
    "compare": cmd_compare,
    "diagnose": cmd_diagnose,
    "mle": cmd_mle,
    "freq": cmd_freq,
    "calibrate": cmd_calibrate,
    "plot": cmd_plot,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SamplingFailureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SAMPLING
    except (ConfigError, KeyError) as exc:
        message = exc.args[0] if exc.args else exc
        print(f"error: {message}", file=sys.stderr)
        return EXIT_CONFIG
    except BtbenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
