import io
import math

import numpy as np
import pytest

from dactk.codec import CodecParams
from dactk.errors import NonConvergence
from dactk.spectrum import (ExpansionSeries, SpectrumGrid, _round_half_up,
                            constraint_residuals, evolve_time_spectrum,
                            expansion_series, grid_expansion,
                            mutual_information, overlap_band,
                            residual_entropy, solve_path_spectrum,
                            write_grid_csv, write_series_csv)


def test_round_half_up_never_rounds_to_even():
    x = np.array([0.5, 1.5, 2.5, 3.49, -0.25])
    assert _round_half_up(x).tolist() == [1, 2, 3, 3, 0]


def test_overlap_band_endpoints():
    assert overlap_band(1000, 0.8) == (200, 800)
    assert overlap_band(1000, 0.5) == (500, 500)


def test_grid_validation():
    with pytest.raises(ValueError):
        SpectrumGrid(n_cells=10, values=np.ones(10))  # needs 11 samples
    with pytest.raises(ValueError):
        SpectrumGrid(n_cells=10, values=-np.ones(11))
    with pytest.raises(ValueError):
        SpectrumGrid(n_cells=0, values=np.ones(1))


def test_solver_output_is_symmetric_and_normalized():
    for q in (0.6, 0.75, 0.9):
        p = CodecParams.from_q(q)
        f = solve_path_spectrum(p, 5000)
        assert f.symmetry_error() == 0.0
        assert f.normalization_error() <= 1e-9
        assert np.all(f.values >= 0)


def test_solver_rejects_bad_inputs():
    p = CodecParams.from_q(0.7)
    with pytest.raises(ValueError):
        solve_path_spectrum(p, 500)  # grid too coarse
    with pytest.raises(ValueError):
        solve_path_spectrum(CodecParams.from_q(1.0), 5000)


def test_solver_reports_non_convergence():
    p = CodecParams.from_q(0.6)
    with pytest.raises(NonConvergence) as info:
        solve_path_spectrum(p, 5000, tol=1e-15, max_iters=3)
    err = info.value
    assert err.iterations == 3
    assert err.residual > err.tol


def test_degenerate_overlap_gives_uniform_density():
    p = CodecParams.from_q(0.5)
    f = solve_path_spectrum(p, 4000)
    # flat exactly; its level sits at N/(N+1) because N+1 samples sum to N
    assert float(np.ptp(f.values)) <= 1e-12
    assert np.allclose(f.values, 1.0, atol=2.0 / 4000)
    assert grid_expansion(f, p) <= 1.0 + 2.0 / 4000


def test_sweep_self_consistency_and_residual_keys():
    p = CodecParams.from_q(0.7)
    f = solve_path_spectrum(p, 10000)
    res = constraint_residuals(f, p)
    assert set(res) == {"sweep", "band_low", "band_mid", "band_high",
                        "symmetry", "normalization"}
    assert res["sweep"] <= 1e-6
    assert res["symmetry"] == 0.0
    assert res["normalization"] <= 1e-9


def test_uniform_density_is_evolution_fixed_point():
    p = CodecParams.from_q(0.8)
    n = 5000
    g = SpectrumGrid(n_cells=n, values=np.ones(n + 1))
    out, gamma = evolve_time_spectrum(g, p)
    assert float(np.ptp(out.values)) <= 1e-12
    assert np.allclose(out.values, 1.0, atol=2.0 / n)
    low, high = overlap_band(n, p.q)
    # flat value is n/(n+1), so the band mass is (high-low+1)/(n+1)
    assert math.isclose(gamma, 1.0 + (high - low + 1) / (n + 1))
    assert abs(gamma - 2 * p.q) < 0.01


def test_evolution_preserves_symmetry_and_normalization():
    p = CodecParams.from_q(0.7)
    g = solve_path_spectrum(p, 5000)
    for _ in range(5):
        g, _ = evolve_time_spectrum(g, p)
        assert g.normalization_error() <= 1e-9
        assert g.symmetry_error() <= 0.05  # rounding can shift one cell


def test_expansion_series_shape_and_bounds():
    p = CodecParams.from_q(0.8)
    series = expansion_series(p, 5000, 40)
    assert len(series) == 40
    assert np.all(series.gamma >= 1.0)
    assert np.all(series.gamma <= 2.0)
    assert np.allclose(series.population, np.cumprod(series.gamma))
    assert np.allclose(series.population_log2,
                       np.cumsum(np.log2(series.gamma)))


def test_expansion_series_converges_to_twice_q():
    for q in (0.6, 0.7, 0.8):
        p = CodecParams.from_q(q)
        series = expansion_series(p, 20000, 60)
        assert np.max(np.abs(series.gamma[29:] - 2 * q)) <= 0.01


def test_series_validation():
    with pytest.raises(ValueError):
        ExpansionSeries(gamma=np.array([]))
    with pytest.raises(ValueError):
        ExpansionSeries(gamma=np.array([0.5]))
    with pytest.raises(ValueError):
        ExpansionSeries(gamma=np.array([2.5]))


def test_residual_entropy_constant_series():
    series = ExpansionSeries(gamma=np.full(10, 1.6))
    assert math.isclose(residual_entropy(series), math.log2(1.6))
    assert math.isclose(mutual_information(series), 1 - math.log2(1.6))


def test_residual_entropy_no_overlap():
    series = ExpansionSeries(gamma=np.ones(10))
    assert residual_entropy(series) == 0.0


def test_residual_entropy_approaches_rate_complement():
    p = CodecParams.from_q(0.6)
    series = expansion_series(p, 20000, 200)
    assert abs(residual_entropy(series) - (1 - p.alpha)) <= 0.02
    assert abs(mutual_information(series) - p.alpha) <= 0.02


def test_grid_refinement_stability():
    p = CodecParams.from_q(0.7)
    g1 = grid_expansion(solve_path_spectrum(p, 10000), p)
    g2 = grid_expansion(solve_path_spectrum(p, 20000), p)
    assert abs(g1 - g2) <= 0.005


def test_grid_csv_format():
    g = SpectrumGrid(n_cells=4, values=np.array([1.0, 0.5, 2.0, 0.5, 1.0]))
    buf = io.StringIO()
    write_grid_csv(g, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "n,u,value"
    assert lines[1] == "0,0.0,1.0"
    assert lines[3] == "2,0.5,2.0"
    assert len(lines) == 6


def test_series_csv_format():
    series = ExpansionSeries(gamma=np.array([2.0, 1.0]))
    buf = io.StringIO()
    write_series_csv(series, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "i,gamma,population_log2,entropy_estimate"
    assert lines[1] == "1,2.0,1.0,1.0"
    assert lines[2] == "2,1.0,1.0,0.5"
