"""Decoding-tree exploration.

Two consumers of the branch machinery live here.  `enumerate_tree` walks
the tree breadth first with no pruning and reports the exact population
of every level; it is the measurement instrument behind the expansion
experiments.  `m_algorithm_decode` is the practical decoder: same
breadth-first walk, but each level is truncated to the best `m_paths`
candidates under a side-information log-likelihood metric.

Levels are stored as parallel arrays (one row per live path) rather than
as lists of state objects; `PathSet.branch` materializes a single path,
prefix included, by walking the parent chain back to the root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .codec import AMBIGUOUS, Codeword, DecoderBranchState, initial_state, validate_symbols
from .errors import AllPathsEliminated, BudgetExceeded
from .spectrum import ExpansionSeries


@dataclass(frozen=True)
class SideInfo:
    """Decoder-side sequence correlated with the source.

    Each symbol of `symbols` equals the corresponding source symbol
    except with probability `crossover_p`, independently per position.
    """

    symbols: np.ndarray
    crossover_p: float

    def __post_init__(self):
        object.__setattr__(self, "symbols", validate_symbols(self.symbols))
        if not 0.0 <= self.crossover_p <= 0.5:
            raise ValueError(f"crossover_p must be in [0, 0.5], got {self.crossover_p}")

    def __len__(self) -> int:
        return len(self.symbols)


@dataclass(frozen=True)
class SearchConfig:
    """Resource limits for tree exploration.

    max_paths_budget caps the live-path count of exhaustive enumeration
    (expected growth is exponential, so the cap binds quickly); m_paths
    is the per-level survivor count of the list decoder; max_depth caps
    how deep enumerate_tree may be asked to go.
    """

    max_paths_budget: int = 1 << 22
    m_paths: int = 256
    max_depth: int = 64

    def __post_init__(self):
        for name in ("max_paths_budget", "m_paths", "max_depth"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


class PathSet:
    """All live decoding paths at one tree level, as parallel arrays.

    Prefixes are distinct by construction: siblings differ in their last
    symbol and children of distinct parents inherit distinct prefixes.
    `proper[j]` is 1 iff path j's prefix equals the true source prefix;
    it is only meaningful when the enumeration was given the source.
    """

    __slots__ = ("depth", "low", "high", "code", "cursor", "proper",
                 "parent_index", "symbol", "parent")

    def __init__(self, depth, low, high, code, cursor, proper,
                 parent_index=None, symbol=None, parent=None):
        self.depth = depth
        self.low = low
        self.high = high
        self.code = code
        self.cursor = cursor
        self.proper = proper
        self.parent_index = parent_index
        self.symbol = symbol
        self.parent = parent

    @property
    def count(self) -> int:
        return len(self.low)

    def prefix(self, j: int) -> tuple[int, ...]:
        """Symbols on the path from the root to branch j."""
        out = []
        level, idx = self, j
        while level.parent is not None:
            out.append(int(level.symbol[idx]))
            idx = int(level.parent_index[idx])
            level = level.parent
        out.reverse()
        return tuple(out)

    def branch(self, j: int) -> DecoderBranchState:
        return DecoderBranchState(
            low=int(self.low[j]),
            high=int(self.high[j]),
            code=int(self.code[j]),
            bit_cursor=int(self.cursor[j]),
            prefix=self.prefix(j),
        )

    @property
    def branches(self) -> list[DecoderBranchState]:
        return [self.branch(j) for j in range(self.count)]

    def proper_index(self) -> int:
        """Index of the path matching the true source prefix, or -1."""
        hits = np.flatnonzero(self.proper)
        return int(hits[0]) if len(hits) == 1 else -1


def _root_level(codeword: Codeword) -> PathSet:
    s = initial_state(codeword)
    return PathSet(
        depth=0,
        low=np.array([s.low], dtype=np.uint64),
        high=np.array([s.high], dtype=np.uint64),
        code=np.array([s.code], dtype=np.uint64),
        cursor=np.array([s.bit_cursor], dtype=np.int64),
        proper=np.ones(1, dtype=np.uint8),
    )


def enumerate_tree(codeword: Codeword, depth: int, cfg: SearchConfig,
                   source: np.ndarray | None = None) -> list[PathSet]:
    """Exhaustively expand the decoding tree to `depth` levels.

    Returns one PathSet per level 0..depth; the level populations are
    exact (no pruning).  When `source` is given, proper-path flags are
    tracked and each level is checked to contain the source prefix
    exactly once.  Raises BudgetExceeded (carrying the completed levels
    in `.levels`) when a level would exceed cfg.max_paths_budget.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    if depth > cfg.max_depth:
        raise ValueError(f"depth {depth} exceeds cfg.max_depth {cfg.max_depth}")
    if codeword.params.n_symbols and depth > codeword.params.n_symbols:
        raise ValueError("depth exceeds the number of encoded symbols")
    if source is not None:
        source = validate_symbols(source)
        if len(source) < depth:
            raise ValueError("source shorter than requested depth")

    params = codeword.params
    levels = [_root_level(codeword)]
    for d in range(depth):
        cur = levels[-1]
        x_sym = int(source[d]) if source is not None else -1
        try:
            low, high, code, cursor, proper, parent_idx, symbol = kernels.expand_level(
                cur.low, cur.high, cur.code, cur.cursor, cur.proper,
                codeword.bits, params.q_fix, params.bits, x_sym,
                cfg.max_paths_budget,
            )
        except BudgetExceeded as e:
            e.level = d + 1
            e.levels = levels
            raise
        nxt = PathSet(d + 1, low, high, code, cursor, proper,
                      parent_index=parent_idx, symbol=symbol, parent=cur)
        if source is not None and int(proper.sum()) != 1:
            raise AssertionError(
                f"proper-path containment violated at depth {d + 1}"
            )
        levels.append(nxt)
    return levels


def path_counts(levels: list[PathSet]) -> np.ndarray:
    """Level populations J_0..J_depth as an int64 array."""
    return np.array([lv.count for lv in levels], dtype=np.int64)


def empirical_expansion(j_tables) -> ExpansionSeries:
    """Expansion factors from per-trial level populations.

    `j_tables` holds one row per trial, columns J_0..J_T (equal depth
    across trials).  The estimate is the ratio of across-trial means,
    mean(J_i) / mean(J_{i-1}), not the mean of per-trial ratios.
    """
    table = np.asarray(j_tables, dtype=np.float64)
    if table.ndim == 1:
        table = table[None, :]
    if table.ndim != 2 or table.shape[0] < 1 or table.shape[1] < 2:
        raise ValueError("need at least one trial and two levels")
    if np.any(table < 1):
        raise ValueError("populations must be at least 1")
    means = table.mean(axis=0)
    return ExpansionSeries(gamma=means[1:] / means[:-1])


def m_algorithm_decode(codeword: Codeword, si: SideInfo,
                       cfg: SearchConfig) -> np.ndarray:
    """List-decode with side information, keeping m_paths survivors.

    Breadth-first: every ambiguous branch forks, then the level is cut
    to the cfg.m_paths best metrics.  A branch scores log2(1-p) when its
    symbol agrees with the side information and log2(p) otherwise, so
    p = 0 eliminates disagreeing branches outright (AllPathsEliminated
    if nothing survives).  Ties break toward fewer disagreements, then
    earlier creation, making the output deterministic.
    """
    params = codeword.params
    n = params.n_symbols
    if n == 0:
        raise ValueError("codeword does not record its symbol count")
    if len(si) != n:
        raise ValueError(f"side information length {len(si)} != {n} symbols")
    p = si.crossover_p
    log_match = math.log2(1.0 - p) if p < 1.0 else -math.inf
    log_miss = math.log2(p) if p > 0.0 else -math.inf
    y = si.symbols

    root = _root_level(codeword)
    low, high, code, cursor = root.low, root.high, root.code, root.cursor
    metric = np.zeros(1, dtype=np.float64)
    mismatches = np.zeros(1, dtype=np.int64)
    creation = np.zeros(1, dtype=np.int64)
    created = 1
    records: list[tuple[np.ndarray, np.ndarray]] = []

    for d in range(n):
        k = len(low)
        dummy = np.zeros(k, dtype=np.uint8)
        low, high, code, cursor, _, parent_idx, symbol = kernels.expand_level(
            low, high, code, cursor, dummy, codeword.bits,
            params.q_fix, params.bits, -1, max(cfg.max_paths_budget, 2 * k),
        )
        match = symbol == y[d]
        child_metric = metric[parent_idx] + np.where(match, log_match, log_miss)
        child_mism = mismatches[parent_idx] + (~match)
        child_creation = created + np.arange(len(symbol), dtype=np.int64)
        created += len(symbol)

        alive = child_metric > -math.inf
        if not alive.any():
            raise AllPathsEliminated(depth=d + 1)
        order = np.lexsort((child_creation[alive], child_mism[alive],
                            -child_metric[alive]))
        keep = np.flatnonzero(alive)[order[:cfg.m_paths]]

        records.append((parent_idx[keep], symbol[keep]))
        low, high, code, cursor = low[keep], high[keep], code[keep], cursor[keep]
        metric = child_metric[keep]
        mismatches = child_mism[keep]
        creation = child_creation[keep]

    out = np.empty(n, dtype=np.uint8)
    j = 0
    for d in range(n - 1, -1, -1):
        parent_idx, symbol = records[d]
        out[d] = symbol[j]
        j = int(parent_idx[j])
    return out


def count_ambiguous(levels: list[PathSet], params) -> np.ndarray:
    """Per-level count of branches whose next symbol is ambiguous."""
    out = np.zeros(len(levels), dtype=np.int64)
    for i, lv in enumerate(levels):
        cls = kernels.classify_batch(lv.low, lv.high, lv.code, params.q_fix)
        out[i] = int((cls == AMBIGUOUS).sum())
    return out
