"""Numeric engine for code-point densities and path-population growth.

Everything here lives on a uniform grid over [0, 1] with N + 1 samples.
`solve_path_spectrum` computes f, the stationary density of the encoder's
normalized code point: a fixed-point sweep of the piecewise dilation
constraints that relate f on the overlap region to f on its preimages.
`evolve_time_spectrum` pushes a density one decoding step forward, pooled
over all live decoding paths, and reports the expansion factor (expected
ratio of successive path populations) of that step.  Chaining the two
yields the whole expansion series, whose running log-average estimates
the per-symbol uncertainty left in the codeword.

All index arithmetic uses half-up rounding, floor(x + 0.5), applied
identically in the solver and the evolution so the two discretizations
agree.  Grids renormalize to sum N after every sweep and every step.
"""

from __future__ import annotations

import numpy as np

from dataclasses import dataclass

from .codec import CodecParams
from .errors import NonConvergence

GRID_CSV_HEADER = "n,u,value"
SERIES_CSV_HEADER = "i,gamma,population_log2,entropy_estimate"


def _round_half_up(x: np.ndarray) -> np.ndarray:
    # round-to-even would bias the index maps; always round .5 up
    return np.floor(x + 0.5).astype(np.int64)


def overlap_band(n_cells: int, q: float) -> tuple[int, int]:
    """Grid indices [L, H] covering the ambiguous region [1-q, q]."""
    low = int(np.floor(n_cells * (1.0 - q) + 0.5))
    high = int(np.floor(n_cells * q + 0.5))
    return low, high


@dataclass(frozen=True)
class SpectrumGrid:
    """Density samples at u = n/N for n = 0..N, normalized to sum N."""

    n_cells: int
    values: np.ndarray

    def __post_init__(self):
        if self.n_cells < 1:
            raise ValueError("n_cells must be positive")
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (self.n_cells + 1,):
            raise ValueError(
                f"expected {self.n_cells + 1} samples, got shape {vals.shape}"
            )
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ValueError("density samples must be finite and nonnegative")
        object.__setattr__(self, "values", vals)

    @property
    def delta(self) -> float:
        return 1.0 / self.n_cells

    @property
    def u(self) -> np.ndarray:
        return np.arange(self.n_cells + 1, dtype=np.float64) / self.n_cells

    def normalization_error(self) -> float:
        return abs(float(self.values.sum()) - self.n_cells) / self.n_cells

    def symmetry_error(self) -> float:
        return float(np.max(np.abs(self.values - self.values[::-1])))


@dataclass(frozen=True)
class ExpansionSeries:
    """Expansion factors gamma_1..gamma_T and quantities derived from them.

    population[i-1] is the expected path count after i steps (the running
    product of gammas); entropy_estimate[i-1] is the running average of
    log2 gamma, an estimate of the residual per-symbol uncertainty.
    """

    gamma: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=np.float64)
        if g.ndim != 1 or len(g) == 0:
            raise ValueError("gamma must be a nonempty 1-d sequence")
        if np.any(g < 1.0 - 1e-9) or np.any(g > 2.0 + 1e-9):
            raise ValueError("expansion factors must lie in [1, 2]")
        object.__setattr__(self, "gamma", np.clip(g, 1.0, 2.0))

    def __len__(self) -> int:
        return len(self.gamma)

    @property
    def population(self) -> np.ndarray:
        return np.cumprod(self.gamma)

    @property
    def population_log2(self) -> np.ndarray:
        return np.cumsum(np.log2(self.gamma))

    @property
    def entropy_estimate(self) -> np.ndarray:
        return self.population_log2 / np.arange(1, len(self.gamma) + 1)


def _check_solver_inputs(params: CodecParams, n_cells: int) -> float:
    q = params.q
    if q >= 1.0:
        raise ValueError("density solver requires q < 1")
    if n_cells < 1000:
        raise ValueError("n_cells below 1000 makes the index maps too coarse")
    return q


def _sweep_maps(n_cells: int, q: float):
    """Index maps and band masks for one constraint sweep."""
    n = np.arange(n_cells + 1, dtype=np.float64)
    shift = n_cells * (1.0 - q)
    idx_a = np.clip(_round_half_up(n / q), 0, n_cells)
    idx_b = np.clip(_round_half_up((n - shift) / q), 0, n_cells)
    low, high = overlap_band(n_cells, q)
    band_lo = np.arange(n_cells + 1) < low
    band_hi = np.arange(n_cells + 1) >= high
    band_mid = ~(band_lo | band_hi)
    return idx_a, idx_b, band_lo, band_mid, band_hi


def _apply_sweep(f, idx_a, idx_b, band_lo, band_mid, band_hi, q, n_cells):
    scale = 1.0 / (2.0 * q)
    new = np.empty_like(f)
    new[band_lo] = f[idx_a[band_lo]] * scale
    new[band_mid] = (f[idx_a[band_mid]] + f[idx_b[band_mid]]) * scale
    new[band_hi] = f[idx_b[band_hi]] * scale
    new = 0.5 * (new + new[::-1])
    total = new.sum()
    if total <= 0:
        raise NonConvergence(0, float("nan"), 0.0)
    return new * (n_cells / total)


def solve_path_spectrum(params: CodecParams, n_cells: int,
                        tol: float = 1e-9, max_iters: int = 10000) -> SpectrumGrid:
    """Solve the stationary code-point density by fixed-point sweeps.

    Starts from the uniform density and repeatedly applies the piecewise
    dilation constraints, symmetrizing and renormalizing after every
    sweep, until successive iterates differ by less than `tol` in
    max-norm.  Raises NonConvergence if max_iters sweeps do not get
    there.  q = 0.5 is the degenerate edge: the overlap is a single
    cell and the solution is uniform.
    """
    q = _check_solver_inputs(params, n_cells)
    maps = _sweep_maps(n_cells, q)
    f = np.ones(n_cells + 1, dtype=np.float64)
    for it in range(1, max_iters + 1):
        new = _apply_sweep(f, *maps, q, n_cells)
        residual = float(np.max(np.abs(new - f)))
        f = new
        if residual < tol:
            return SpectrumGrid(n_cells=n_cells, values=f)
    raise NonConvergence(iterations=max_iters, residual=residual, tol=tol)


def constraint_residuals(grid: SpectrumGrid, params: CodecParams) -> dict[str, float]:
    """Diagnostics for how well a grid satisfies the density constraints.

    `sweep` is the max-norm change under one more full sweep (the
    self-consistency residual the solver drives to zero).  The `band_*`
    entries evaluate each piecewise constraint literally, f(n) minus the
    scaled right-hand side; the converged density is the dominant
    eigenvector of the sweep operator, whose eigenvalue is close to but
    not exactly 2q, so these carry a small systematic floor that shrinks
    with the grid but does not vanish.
    """
    q = _check_solver_inputs(params, grid.n_cells)
    n_cells = grid.n_cells
    f = grid.values
    idx_a, idx_b, band_lo, band_mid, band_hi = _sweep_maps(n_cells, q)
    new = _apply_sweep(f, idx_a, idx_b, band_lo, band_mid, band_hi, q, n_cells)
    scale = 1.0 / (2.0 * q)
    rhs = np.empty_like(f)
    rhs[band_lo] = f[idx_a[band_lo]] * scale
    rhs[band_mid] = (f[idx_a[band_mid]] + f[idx_b[band_mid]]) * scale
    rhs[band_hi] = f[idx_b[band_hi]] * scale
    diff = np.abs(f - rhs)
    return {
        "sweep": float(np.max(np.abs(new - f))),
        "band_low": float(diff[band_lo].max()) if band_lo.any() else 0.0,
        "band_mid": float(diff[band_mid].max()) if band_mid.any() else 0.0,
        "band_high": float(diff[band_hi].max()) if band_hi.any() else 0.0,
        "symmetry": grid.symmetry_error(),
        "normalization": grid.normalization_error(),
    }


def grid_expansion(grid: SpectrumGrid, params: CodecParams) -> float:
    """Expansion factor implied by a density: one extra path per unit of
    mass in the ambiguous band."""
    low, high = overlap_band(grid.n_cells, params.q)
    return 1.0 + float(grid.values[low:high + 1].sum()) / grid.n_cells


def evolve_time_spectrum(g: SpectrumGrid, params: CodecParams) -> tuple[SpectrumGrid, float]:
    """One decoding step of the pooled density over all live paths.

    Every point maps back through the two symbol branches: the new
    density at u is the old density at qu plus the old at qu + (1 - q),
    renormalized to sum N.  Also returns the expansion factor of the
    advanced density.
    """
    q = _check_solver_inputs(params, g.n_cells)
    n_cells = g.n_cells
    n = np.arange(n_cells + 1, dtype=np.float64)
    idx_zero = np.clip(_round_half_up(n * q), 0, n_cells)
    idx_one = np.clip(_round_half_up(n * q + n_cells * (1.0 - q)), 0, n_cells)
    new = g.values[idx_zero] + g.values[idx_one]
    new *= n_cells / new.sum()
    out = SpectrumGrid(n_cells=n_cells, values=new)
    return out, grid_expansion(out, params)


def expansion_series(params: CodecParams, n_cells: int, depth: int,
                     tol: float = 1e-9, max_iters: int = 10000) -> ExpansionSeries:
    """Theoretical expansion factors gamma_1..gamma_depth.

    The first factor comes straight from the stationary density (after
    one symbol the pooled density equals the path density); each later
    factor comes from one more evolution step.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    f = solve_path_spectrum(params, n_cells, tol=tol, max_iters=max_iters)
    gammas = [grid_expansion(f, params)]
    g = f
    for _ in range(depth - 1):
        g, gamma = evolve_time_spectrum(g, params)
        gammas.append(gamma)
    return ExpansionSeries(gamma=np.array(gammas))


def residual_entropy(series: ExpansionSeries) -> float:
    """Average log2 expansion over the series: bits of source uncertainty
    per symbol left by the codeword.  Converges to 1 - alpha."""
    return float(series.entropy_estimate[-1])


def mutual_information(series: ExpansionSeries) -> float:
    """Per-symbol information the codeword carries about the source,
    via the identity rate = 1 - residual uncertainty."""
    return 1.0 - residual_entropy(series)


def write_grid_csv(grid: SpectrumGrid, stream) -> None:
    n_cells = grid.n_cells
    lines = [GRID_CSV_HEADER]
    vals = grid.values.tolist()
    for n in range(n_cells + 1):
        lines.append(f"{n},{n / n_cells!r},{vals[n]!r}")
    stream.write("\n".join(lines) + "\n")


def write_series_csv(series: ExpansionSeries, stream) -> None:
    lines = [SERIES_CSV_HEADER]
    pop = series.population_log2.tolist()
    ent = series.entropy_estimate.tolist()
    for i, gamma in enumerate(series.gamma.tolist()):
        lines.append(f"{i + 1},{gamma!r},{pop[i]!r},{ent[i]!r}")
    stream.write("\n".join(lines) + "\n")
