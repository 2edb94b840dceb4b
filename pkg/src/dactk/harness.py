"""Monte-Carlo experiment orchestration.

Runs many encode/enumerate trials under a deterministic per-trial seed
schedule, aggregates level populations across trials, and merges them
with the grid-based theory into a side-by-side comparison table.

Determinism contract: trial t of master seed s always draws from
`trial_rng(s, t)` regardless of batching or execution order, and the
aggregation sums over trials before any division, so splitting the
trial range across runs and merging the aggregates reproduces a single
run exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codec import CodecParams, encode
from .errors import BudgetExceeded
from .search import SearchConfig, SideInfo, enumerate_tree, path_counts
from .spectrum import expansion_series

COMPARISON_CSV_HEADER = "i,gamma_theory,gamma_empirical,abs_diff,mean_J_i"


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines an expansion experiment's output."""

    params: CodecParams
    n_symbols: int = 64
    n_trials: int = 1000
    max_depth: int = 25
    seed: int = 0
    n_cells: int = 100_000
    max_paths_budget: int = 1 << 22
    crossover_p: float | None = None
    m_paths: int | None = None

    def __post_init__(self):
        if self.n_trials < 1:
            raise ValueError("n_trials must be at least 1")
        if not 1 <= self.max_depth <= self.n_symbols:
            raise ValueError("max_depth must be in [1, n_symbols]")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must fit in 64 bits")
        if self.max_paths_budget < 1:
            raise ValueError("max_paths_budget must be positive")
        if self.crossover_p is not None and not 0.0 <= self.crossover_p <= 0.5:
            raise ValueError("crossover_p must be in [0, 0.5]")
        if self.m_paths is not None and self.m_paths < 1:
            raise ValueError("m_paths must be positive")

    def search_config(self) -> SearchConfig:
        return SearchConfig(
            max_paths_budget=self.max_paths_budget,
            m_paths=self.m_paths or 256,
            max_depth=self.max_depth,
        )


@dataclass(frozen=True)
class ComparisonRow:
    i: int
    gamma_theory: float
    gamma_empirical: float
    abs_diff: float
    mean_j: float


@dataclass(frozen=True)
class ComparisonTable:
    """Theory next to experiment, one row per tree level."""

    rows: tuple[ComparisonRow, ...]
    metadata: dict = field(compare=False)

    @property
    def max_abs_diff(self) -> float:
        diffs = [r.abs_diff for r in self.rows if np.isfinite(r.abs_diff)]
        return max(diffs) if diffs else float("nan")

    def gamma_empirical(self) -> np.ndarray:
        return np.array([r.gamma_empirical for r in self.rows])

    def gamma_theory(self) -> np.ndarray:
        return np.array([r.gamma_theory for r in self.rows])

    def to_csv(self, stream) -> None:
        lines = [COMPARISON_CSV_HEADER]
        for r in self.rows:
            lines.append(
                f"{r.i},{r.gamma_theory!r},{r.gamma_empirical!r},"
                f"{r.abs_diff!r},{r.mean_j!r}"
            )
        stream.write("\n".join(lines) + "\n")

    def to_dict(self) -> dict:
        return {
            "metadata": dict(self.metadata),
            "rows": [
                {
                    "i": r.i,
                    "gamma_theory": r.gamma_theory,
                    "gamma_empirical": r.gamma_empirical,
                    "abs_diff": r.abs_diff,
                    "mean_J_i": r.mean_j,
                }
                for r in self.rows
            ],
        }


@dataclass(frozen=True)
class LevelAggregates:
    """Mergeable per-level sums of trial populations.

    For level i in 1..max_depth, sum_num[i] adds J_i and sum_den[i] adds
    J_{i-1}, both over exactly the trials that completed level i, so the
    ratio pairs each trial's numerator with its own denominator.
    reached[i] counts those trials (index 0 covers every started trial).
    """

    sum_num: np.ndarray
    sum_den: np.ndarray
    reached: np.ndarray

    @property
    def max_depth(self) -> int:
        return len(self.reached) - 1

    def merge(self, other: "LevelAggregates") -> "LevelAggregates":
        if self.max_depth != other.max_depth:
            raise ValueError("cannot merge aggregates of different depths")
        return LevelAggregates(
            sum_num=self.sum_num + other.sum_num,
            sum_den=self.sum_den + other.sum_den,
            reached=self.reached + other.reached,
        )

    def gamma(self) -> np.ndarray:
        """Expansion estimates gamma_1..gamma_max_depth, nan where no
        trial reached the level."""
        out = np.full(self.max_depth, np.nan)
        for i in range(1, self.max_depth + 1):
            if self.reached[i] > 0:
                out[i - 1] = self.sum_num[i] / self.sum_den[i]
        return out

    def mean_population(self) -> np.ndarray:
        """Mean J_i over the trials that reached level i (nan if none)."""
        out = np.full(self.max_depth, np.nan)
        for i in range(1, self.max_depth + 1):
            if self.reached[i] > 0:
                out[i - 1] = self.sum_num[i] / self.reached[i]
        return out


def aggregate_path_counts(count_tables, max_depth: int) -> LevelAggregates:
    """Reduce per-trial population tables (possibly budget-shortened) to
    mergeable per-level sums."""
    sum_num = np.zeros(max_depth + 1, dtype=np.float64)
    sum_den = np.zeros(max_depth + 1, dtype=np.float64)
    reached = np.zeros(max_depth + 1, dtype=np.int64)
    for counts in count_tables:
        d = len(counts) - 1
        if d > max_depth:
            raise ValueError("trial table deeper than max_depth")
        c = np.asarray(counts, dtype=np.float64)
        sum_num[1:d + 1] += c[1:]
        sum_den[1:d + 1] += c[:-1]
        reached[:d + 1] += 1
    return LevelAggregates(sum_num=sum_num, sum_den=sum_den, reached=reached)


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    """Generator for one trial, independent of how trials are batched."""
    return np.random.default_rng(np.random.SeedSequence((master_seed, trial)))


def generate_source(n: int, rng: np.random.Generator) -> np.ndarray:
    """n independent fair bits."""
    if n < 1:
        raise ValueError("source length must be at least 1")
    return rng.integers(0, 2, size=n, dtype=np.uint8)


def generate_si(x: np.ndarray, p: float, rng: np.random.Generator) -> SideInfo:
    """Copy of x with each symbol flipped independently with probability p."""
    flips = (rng.random(len(x)) < p).astype(np.uint8)
    return SideInfo(symbols=x ^ flips, crossover_p=p)


def trial_path_counts(cfg: ExperimentConfig, trial: int) -> np.ndarray:
    """Level populations J_0..J_d for one seeded trial.

    d equals cfg.max_depth unless the path budget cut the trial short, in
    which case the counts stop at the last completed level.  Every trial
    verifies that the true source stays among the enumerated paths.
    """
    rng = trial_rng(cfg.seed, trial)
    x = generate_source(cfg.n_symbols, rng)
    codeword = encode(x, cfg.params)
    try:
        levels = enumerate_tree(codeword, cfg.max_depth, cfg.search_config(),
                                source=x)
    except BudgetExceeded as e:
        levels = e.levels
    return path_counts(levels)


def run_expansion_experiment(cfg: ExperimentConfig) -> ComparisonTable:
    """Theory pipeline once, then n_trials encode/enumerate runs, merged.

    Trials stopped early by the path budget still contribute to the
    levels they completed; the table row for level i averages over
    exactly the trials that reached i.  Raises BudgetExceeded if no
    trial survives past the first level pair.
    """
    theory = expansion_series(cfg.params, cfg.n_cells, cfg.max_depth)

    tables = [trial_path_counts(cfg, t) for t in range(cfg.n_trials)]
    agg = aggregate_path_counts(tables, cfg.max_depth)

    gate = min(2, cfg.max_depth)
    if agg.reached[gate] == 0:
        raise BudgetExceeded(paths=cfg.max_paths_budget, level=gate)

    gamma_emp = agg.gamma()
    mean_j = agg.mean_population()
    rows = []
    for i in range(1, cfg.max_depth + 1):
        g_th = float(theory.gamma[i - 1])
        g_emp = float(gamma_emp[i - 1])
        rows.append(ComparisonRow(
            i=i,
            gamma_theory=g_th,
            gamma_empirical=g_emp,
            abs_diff=float(abs(g_th - g_emp)),
            mean_j=float(mean_j[i - 1]),
        ))

    p = cfg.params
    metadata = {
        "q": p.q,
        "alpha": p.alpha,
        "bits": p.bits,
        "n_cells": cfg.n_cells,
        "n_symbols": cfg.n_symbols,
        "n_trials": cfg.n_trials,
        "max_depth": cfg.max_depth,
        "seed": cfg.seed,
        "max_paths_budget": cfg.max_paths_budget,
        "trials_complete": int(agg.reached[cfg.max_depth]),
        "trials_budget_exceeded": int(cfg.n_trials - agg.reached[cfg.max_depth]),
    }
    return ComparisonTable(rows=tuple(rows), metadata=metadata)
