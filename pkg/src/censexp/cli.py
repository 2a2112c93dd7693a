"""Command-line interface.

Verbs:
    test         run one exponentiality test on a CSV data file
    simulate     run a Monte-Carlo power study from a config file
    report       re-render a stored power-table CSV (tables + figures)
    asymptotics  variance estimate, normal test and operator eigenvalues
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import asymptotics as asym
from .bootstrap import BootstrapConfig, bootstrap_test
from .power_study import (
    StudyConfig,
    emit_table,
    parse_table_csv,
    run_power_study,
)
from .statistics import StatisticSpec, TestOutcome
from .survival import CensoredSample, censored_exp_mle

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="censexp",
        description="Exponentiality tests for right-censored data",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p_test = sub.add_parser("test", help="test one sample read from CSV")
    p_test.add_argument("data", help="CSV file with header time,event")
    p_test.add_argument("--spec", default="J:PR:a=1", help="statistic, e.g. J:PR:a=1, M:D:a=2, cvm, chi2:r=3, qns, delta")
    p_test.add_argument("--alpha", type=float, default=0.05)
    p_test.add_argument("--B", type=int, default=1000, help="bootstrap iterations")
    p_test.add_argument("--seed", type=int, default=0)
    p_test.add_argument("--hypothesis", choices=("simple", "composite"), default="simple")
    p_test.add_argument("--mu", type=float, default=1.0, help="null mean (simple hypothesis)")
    p_test.add_argument("--json", action="store_true", help="machine-readable output")
    p_test.add_argument(
        "--exit-on-reject", action="store_true",
        help="exit with status 2 when the null is rejected",
    )

    p_sim = sub.add_parser("simulate", help="run a power study from a config file")
    p_sim.add_argument("config", help="key = value study config file")
    p_sim.add_argument("--threads", type=int, default=None, help="override the thread budget")
    p_sim.add_argument("--seed", type=int, default=None, help="override the master seed")
    p_sim.add_argument("--format", choices=("csv", "markdown", "latex"), default="csv")
    p_sim.add_argument("--out", default="power_table", help="output path prefix")

    p_rep = sub.add_parser("report", help="re-render a stored power-table CSV")
    p_rep.add_argument("table", help="CSV produced by simulate")
    p_rep.add_argument("--format", choices=("csv", "markdown", "latex"), default="markdown")
    p_rep.add_argument("--out", default=None, help="output path prefix (default: next to the input)")
    p_rep.add_argument("--no-figures", action="store_true", help="skip figure rendering")

    p_asy = sub.add_parser("asymptotics", help="variance estimate and operator eigenvalues")
    p_asy.add_argument("data", help="CSV file with header time,event")
    p_asy.add_argument("--spec", default="J:PR:a=1", help="J-type spec giving the characterization and a")
    p_asy.add_argument("--alpha", type=float, default=0.05)
    p_asy.add_argument("--hypothesis", choices=("simple", "composite"), default="simple")
    p_asy.add_argument("--mu", type=float, default=1.0)
    p_asy.add_argument("--eigenvalues", type=int, default=10, help="number of leading eigenvalues")
    p_asy.add_argument("--grid", type=int, default=100, help="quadrature grid size")
    p_asy.add_argument("--json", action="store_true")
    return parser


def _read_sample(path: str) -> CensoredSample:
    text = Path(path).read_text(encoding="utf-8")
    return CensoredSample.from_csv(text)


def _outcome_dict(out: TestOutcome) -> dict:
    return {
        "statistic": out.statistic,
        "critical_values": list(out.critical_values),
        "p_value": out.p_value,
        "reject": out.reject,
        "meta": out.meta,
    }


def _print_config(pairs) -> None:
    print("config: " + "  ".join(f"{k}={v}" for k, v in pairs))


def _cmd_test(args) -> int:
    sample = _read_sample(args.data)
    spec = StatisticSpec.from_string(args.spec, hypothesis=args.hypothesis, mu=args.mu)
    cfg = BootstrapConfig(
        B=args.B, alpha=args.alpha, hypothesis=args.hypothesis, mu=args.mu, seed=args.seed
    )
    _print_config(
        [("spec", spec.to_string()), ("hypothesis", args.hypothesis), ("mu", args.mu),
         ("alpha", args.alpha), ("B", args.B), ("seed", args.seed), ("n", sample.n)]
    )
    out = bootstrap_test(sample, spec, cfg)
    if args.json:
        print(json.dumps(_outcome_dict(out)))
    else:
        crit = ", ".join(f"{c:.6g}" for c in out.critical_values)
        print(f"statistic       {out.statistic:.6g}")
        print(f"critical value  {crit}")
        print(f"p-value         {out.p_value:.4g}")
        print("decision        " + ("reject H0" if out.reject else "do not reject H0"))
    return 2 if (out.reject and args.exit_on_reject) else 0


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")
    print(f"wrote {path}")


def _render_figures(table, prefix: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    alts = list(dict.fromkeys(c.alternative for c in table.cells))
    specs = list(dict.fromkeys(c.statistic for c in table.cells))
    rates = list(dict.fromkeys(c.rate for c in table.cells))
    look = {(c.alternative, c.rate, c.statistic): c for c in table.cells}
    for rate in rates:
        fig, ax = plt.subplots(figsize=(1.8 + 1.1 * len(alts), 4.0))
        x = np.arange(len(alts))
        width = 0.8 / max(len(specs), 1)
        for k, s in enumerate(specs):
            vals = [
                look[(a, rate, s)].reject_pct if (a, rate, s) in look else np.nan
                for a in alts
            ]
            ax.bar(x + (k - (len(specs) - 1) / 2) * width, vals, width, label=s.label())
        ax.set_xticks(x)
        ax.set_xticklabels([a.to_string() for a in alts], rotation=30, ha="right")
        ax.set_ylabel("rejection %")
        ax.set_ylim(0, 100)
        ax.set_title(f"censoring rate {rate:g} ({table.config.hypothesis}, n={table.config.n})")
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = prefix.with_name(f"{prefix.name}_rate{rate:g}.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        print(f"wrote {path}")


_EXT = {"csv": ".csv", "markdown": ".md", "latex": ".tex"}


def _cmd_simulate(args) -> int:
    cfg = StudyConfig.from_file(args.config)
    if args.threads is not None:
        cfg = replace(cfg, threads=args.threads)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    _print_config(
        [("n", cfg.n), ("N", cfg.N), ("B", cfg.B), ("alpha", cfg.alpha),
         ("hypothesis", cfg.hypothesis), ("seed", cfg.seed), ("threads", cfg.threads),
         ("cells", len(cfg.cells())), ("config_hash", cfg.config_hash())]
    )

    def progress(done, total, cell):
        alt, rate, stat = cell
        print(f"[{done}/{total}] {alt.to_string()} rate={rate:g} {stat.to_string()}", flush=True)

    table = run_power_study(cfg, progress=progress)
    prefix = Path(args.out)
    _write(prefix.with_suffix(".csv"), emit_table(table, "csv"))
    if args.format != "csv":
        _write(prefix.with_suffix(_EXT[args.format]), emit_table(table, args.format))
    return 0


def _cmd_report(args) -> int:
    table = parse_table_csv(Path(args.table).read_text(encoding="utf-8"))
    cfg = table.config
    _print_config(
        [("n", cfg.n), ("N", cfg.N), ("B", cfg.B), ("alpha", cfg.alpha),
         ("hypothesis", cfg.hypothesis), ("seed", cfg.seed), ("version", table.version)]
    )
    prefix = Path(args.out) if args.out else Path(args.table).with_suffix("")
    _write(prefix.with_suffix(_EXT[args.format]), emit_table(table, args.format))
    if not args.no_figures:
        _render_figures(table, prefix)
    return 0


def _cmd_asymptotics(args) -> int:
    sample = _read_sample(args.data)
    spec = StatisticSpec.from_string(args.spec, hypothesis=args.hypothesis, mu=args.mu)
    if spec.kind != "J":
        raise ValueError("asymptotics requires a J-type spec (characterization + a)")
    _print_config(
        [("spec", spec.to_string()), ("hypothesis", args.hypothesis), ("mu", args.mu),
         ("alpha", args.alpha), ("n", sample.n), ("grid", args.grid)]
    )
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        out = asym.j_asymptotic_test(
            sample, spec.char, spec.a, alpha=args.alpha,
            hypothesis=args.hypothesis, mu=args.mu,
        )
        mu_used = censored_exp_mle(sample) if args.hypothesis == "composite" else args.mu
        samp = sample if mu_used == 1.0 else sample.scaled(1.0 / mu_used)
        t_grid, _ = asym.gauss_laguerre_grid(spec.a, args.grid)
        cov = asym.covariance_estimate(samp, spec.char, t_grid)
        eig = asym.limiting_eigenvalues(cov, spec.a, args.eigenvalues)
    if args.json:
        payload = _outcome_dict(out)
        payload["eigenvalues"] = [float(v) for v in eig]
        print(json.dumps(payload))
    else:
        print(f"statistic   {out.statistic:.6g}")
        print(f"z           {out.meta['z']:.6g}")
        print(f"sigma^2     {out.meta['sigma2']:.6g}")
        print(f"p-value     {out.p_value:.4g}")
        print("decision    " + ("reject H0" if out.reject else "do not reject H0"))
        print("eigenvalues " + ", ".join(f"{v:.6g}" for v in eig))
    return 0


_DISPATCH = {
    "test": _cmd_test,
    "simulate": _cmd_simulate,
    "report": _cmd_report,
    "asymptotics": _cmd_asymptotics,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _DISPATCH[args.verb](args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
