"""Monte-Carlo power-study harness.

Runs a grid of (alternative distribution, censoring rate, statistic) cells,
each estimated from N independent replicates of sample generation followed by
a bootstrap (or asymptotic chi-square) test, and renders the resulting table.
Results are bit-identical for a fixed master seed regardless of the thread
budget: every (cell, replicate) work unit derives its own RNG streams from
(master_seed, cell index, replicate index).
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import io
import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats as sps

from .bootstrap import BootstrapConfig, bootstrap_test
from .distributions import DistSpec, generate_censored_sample
from .statistics import StatisticSpec, evaluate

__all__ = [
    "StudyConfig",
    "CellResult",
    "PowerTable",
    "run_power_study",
    "emit_table",
    "parse_table_csv",
]

log = logging.getLogger(__name__)

_DEGRADED_FRACTION = 0.02

_CONFIG_KEYS = (
    "n",
    "N",
    "B",
    "alpha",
    "rates",
    "alternatives",
    "statistics",
    "hypothesis",
    "seed",
    "threads",
)


@dataclass(frozen=True)
class StudyConfig:
    alternatives: tuple
    statistics: tuple
    rates: tuple = (0.1, 0.2, 0.3)
    n: int = 50
    N: int = 500
    B: int = 500
    alpha: float = 0.05
    hypothesis: str = "simple"
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "alternatives", tuple(self.alternatives))
        object.__setattr__(self, "statistics", tuple(self.statistics))
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        if not self.alternatives:
            raise ValueError("at least one alternative is required")
        if not self.statistics:
            raise ValueError("at least one statistic is required")
        if not all(0 <= r < 0.5 for r in self.rates) or not self.rates:
            raise ValueError("censoring rates must lie in [0, 0.5)")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.N < 100 or self.B < 100:
            raise ValueError("N and B must be at least 100 for reported runs")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.hypothesis not in ("simple", "composite"):
            raise ValueError("hypothesis must be 'simple' or 'composite'")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")

    @classmethod
    def from_file(cls, path: str) -> "StudyConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    @classmethod
    def from_text(cls, text: str) -> "StudyConfig":
        raw: dict = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _CONFIG_KEYS:
                raise ValueError(
                    f"line {lineno}: unknown key {key!r}; valid keys: {', '.join(_CONFIG_KEYS)}"
                )
            raw[key] = value
        missing = [k for k in ("alternatives", "statistics") if k not in raw]
        if missing:
            raise ValueError(f"missing required key(s): {', '.join(missing)}")
        kwargs = {
            "alternatives": tuple(
                DistSpec.from_string(s) for s in raw["alternatives"].split(",") if s.strip()
            ),
            "statistics": tuple(
                StatisticSpec.from_string(s) for s in raw["statistics"].split(",") if s.strip()
            ),
        }
        if "rates" in raw:
            kwargs["rates"] = tuple(float(s) for s in raw["rates"].split(",") if s.strip())
        for key, conv in (
            ("n", int), ("N", int), ("B", int), ("alpha", float),
            ("hypothesis", str), ("seed", int), ("threads", int),
        ):
            if key in raw:
                kwargs[key] = conv(raw[key])
        return cls(**kwargs)

    def to_text(self) -> str:
        lines = [
            f"n = {self.n}",
            f"N = {self.N}",
            f"B = {self.B}",
            f"alpha = {self.alpha!r}",
            "rates = " + ", ".join(repr(r) for r in self.rates),
            "alternatives = " + ", ".join(a.to_string() for a in self.alternatives),
            "statistics = " + ", ".join(s.to_string() for s in self.statistics),
            f"hypothesis = {self.hypothesis}",
            f"seed = {self.seed}",
            f"threads = {self.threads}",
        ]
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        """Scheduling-independent digest (thread budget excluded)."""
        canon = replace(self, threads=1).to_text()
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]

    def cells(self):
        return [
            (alt, rate, stat)
            for alt in self.alternatives
            for rate in self.rates
            for stat in self.statistics
        ]


@dataclass(frozen=True)
class CellResult:
    alternative: DistSpec
    rate: float
    statistic: StatisticSpec
    reject_pct: float
    mc_se: float
    n_effective: int
    degraded: bool


@dataclass(frozen=True)
class PowerTable:
    cells: tuple
    config: StudyConfig
    version: str

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))


def _package_version() -> str:
    try:
        from importlib.metadata import version

        return version("censexp")
    except Exception:  # pragma: no cover - fallback for odd installs
        return "unknown"


def _run_unit(args):
    """One (cell, replicate) work unit; True/False reject or None on failure."""
    (seed, cell_idx, rep_idx, alt, rate, spec, n, B, alpha, hypothesis) = args
    ss = np.random.SeedSequence(entropy=(seed, cell_idx, rep_idx))
    samp_ss, boot_ss = ss.spawn(2)
    try:
        sample = generate_censored_sample(alt, rate, n, np.random.default_rng(samp_ss))
        spec = replace(spec, hypothesis=hypothesis)
        if spec.kind == "chi2":
            # evaluated against its asymptotic chi-square reference, one
            # degree of freedom spent on the estimated mean in composite mode
            value = evaluate(spec, sample)
            df = spec.r if hypothesis == "simple" else spec.r - 1
            return bool(value >= sps.chi2.ppf(1.0 - alpha, df))
        cfg = BootstrapConfig(B=B, alpha=alpha, hypothesis=hypothesis, seed=boot_ss)
        return bool(bootstrap_test(sample, spec, cfg).reject)
    except (ValueError, RuntimeError) as exc:
        log.debug("replicate (%d, %d) failed: %s", cell_idx, rep_idx, exc)
        return None


def run_power_study(cfg: StudyConfig, progress=None) -> PowerTable:
    """Estimate the rejection percentage of every cell in the grid.

    ``progress``, if given, is called as progress(done_cells, total_cells,
    (alternative, rate, statistic)) after each cell is aggregated.
    """
    cells = cfg.cells()
    units = [
        (cfg.seed, ci, ri, alt, rate, stat, cfg.n, cfg.B, cfg.alpha, cfg.hypothesis)
        for ci, (alt, rate, stat) in enumerate(cells)
        for ri in range(cfg.N)
    ]
    if cfg.threads == 1:
        flat = list(map(_run_unit, units))
    else:
        chunk = max(1, len(units) // (cfg.threads * 8))
        with concurrent.futures.ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            flat = list(pool.map(_run_unit, units, chunksize=chunk))
    results = []
    for ci, (alt, rate, stat) in enumerate(cells):
        outcomes = flat[ci * cfg.N : (ci + 1) * cfg.N]
        ok = [o for o in outcomes if o is not None]
        failed = cfg.N - len(ok)
        n_eff = len(ok)
        if failed:
            log.warning(
                "cell (%s, %g, %s): %d of %d replicates failed",
                alt.to_string(), rate, stat.to_string(), failed, cfg.N,
            )
        if n_eff == 0:
            pct, se = float("nan"), float("nan")
        else:
            p = sum(ok) / n_eff
            pct = 100.0 * p
            se = 100.0 * math.sqrt(p * (1.0 - p) / n_eff)
        results.append(
            CellResult(
                alternative=alt,
                rate=rate,
                statistic=stat,
                reject_pct=pct,
                mc_se=se,
                n_effective=n_eff,
                degraded=failed > _DEGRADED_FRACTION * cfg.N,
            )
        )
        if progress is not None:
            progress(ci + 1, len(cells), (alt, rate, stat))
    return PowerTable(cells=tuple(results), config=cfg, version=_package_version())


_CSV_COLUMNS = (
    "alternative,theta,rate,statistic,hypothesis,reject_pct,mc_se,"
    "n_effective,degraded,n,N,B,seed"
)


def _emit_csv(table: PowerTable) -> str:
    cfg = table.config
    out = io.StringIO()
    out.write(f"# version={table.version}\n")
    out.write(f"# config_hash={cfg.config_hash()}\n")
    out.write(f"# alpha={cfg.alpha!r}\n")
    out.write(_CSV_COLUMNS + "\n")
    for c in table.cells:
        out.write(
            f"{c.alternative.family},{c.alternative.theta!r},{c.rate!r},"
            f"{c.statistic.to_string()},{cfg.hypothesis},{c.reject_pct!r},"
            f"{c.mc_se!r},{c.n_effective},{int(c.degraded)},"
            f"{cfg.n},{cfg.N},{cfg.B},{cfg.seed}\n"
        )
    return out.getvalue()


def parse_table_csv(text: str) -> PowerTable:
    """Inverse of the csv emitter (modulo the thread budget, which does not
    affect results and is restored as 1)."""
    version = "unknown"
    alpha = 0.05
    rows = []
    header_seen = False
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            if key == "version":
                version = value
            elif key == "alpha":
                alpha = float(value)
            continue
        if not header_seen:
            if line.strip() != _CSV_COLUMNS:
                raise ValueError("unrecognized table header")
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 13:
            raise ValueError(f"bad table row: {line!r}")
        rows.append(parts)
    if not rows:
        raise ValueError("table contains no data rows")
    hypothesis = rows[0][4]
    n, N, B, seed = (int(rows[0][i]) for i in (9, 10, 11, 12))
    alts, rates, specs, cells = [], [], [], []
    for p in rows:
        alt = DistSpec(p[0], float(p[1]))
        stat = StatisticSpec.from_string(p[3], hypothesis=hypothesis)
        rate = float(p[2])
        if alt not in alts:
            alts.append(alt)
        if rate not in rates:
            rates.append(rate)
        if stat not in specs:
            specs.append(stat)
        cells.append(
            CellResult(alt, rate, stat, float(p[5]), float(p[6]), int(p[7]), bool(int(p[8])))
        )
    cfg = StudyConfig(
        alternatives=tuple(alts),
        statistics=tuple(specs),
        rates=tuple(rates),
        n=n, N=N, B=B, alpha=alpha, hypothesis=hypothesis, seed=seed, threads=1,
    )
    return PowerTable(cells=tuple(cells), config=cfg, version=version)


def _cell_lookup(table: PowerTable):
    return {
        (c.alternative, c.rate, c.statistic): c for c in table.cells
    }


def _grid_text(table: PowerTable, fmt: str) -> str:
    cfg = table.config
    look = _cell_lookup(table)
    alts = list(dict.fromkeys(c.alternative for c in table.cells))
    specs = list(dict.fromkeys(c.statistic for c in table.cells))
    rates = list(dict.fromkeys(c.rate for c in table.cells))
    out = io.StringIO()
    if fmt == "latex":
        out.write("\\documentclass{article}\n\\begin{document}\n")
    for rate in rates:
        title = f"censoring rate {rate:g} ({cfg.hypothesis}, n={cfg.n}, N={cfg.N}, B={cfg.B})"
        if fmt == "markdown":
            out.write(f"### {title}\n\n")
            out.write("| statistic | " + " | ".join(a.to_string() for a in alts) + " |\n")
            out.write("|---" * (len(alts) + 1) + "|\n")
            for s in specs:
                row = [s.label()]
                for a in alts:
                    c = look.get((a, rate, s))
                    row.append(_fmt_cell(c))
                out.write("| " + " | ".join(row) + " |\n")
            out.write("\n")
        else:  # latex
            cols = "l" + "r" * len(alts)
            out.write(f"\\begin{{table}}[ht]\\centering\\caption{{{title}}}\n")
            out.write(f"\\begin{{tabular}}{{{cols}}}\n")
            out.write(
                "statistic & "
                + " & ".join(a.to_string().replace(":", " ") for a in alts)
                + " \\\\\n\\hline\n"
            )
            for s in specs:
                row = [s.label().replace("_", "\\_")]
                for a in alts:
                    c = look.get((a, rate, s))
                    row.append(_fmt_cell(c))
                out.write(" & ".join(row) + " \\\\\n")
            out.write("\\end{tabular}\\end{table}\n")
    if fmt == "latex":
        out.write("\\end{document}\n")
    return out.getvalue()


def _fmt_cell(c: CellResult | None) -> str:
    if c is None:
        return "-"
    flag = "*" if c.degraded else ""
    return f"{c.reject_pct:.0f}{flag}"


def emit_table(table: PowerTable, fmt: str = "csv") -> str:
    """Render the table; csv is machine-round-trippable, markdown and latex
    mirror the grouped rows-by-statistic layout."""
    if not table.cells:
        raise ValueError("table has no cells")
    if fmt == "csv":
        return _emit_csv(table)
    if fmt in ("markdown", "latex"):
        return _grid_text(table, fmt)
    raise ValueError("format must be one of csv, markdown, latex")
