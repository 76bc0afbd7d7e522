import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wavehit.errors import ParameterError
from wavehit.field_sampler import GridBox, assemble_cov, build_grid
from wavehit.hitting_mc import (HitExperiment, HittingEstimate, cell_enlargement, estimate_from_hits,
                                min_distances, run_hit, run_hit_schedule, run_slice_hit, slice_grid,
                                wilson_interval, write_hits_csv)
from wavehit.spectral_core import ModelParams, variance_array
from wavehit.targets import Ball, Box, PointCloud

MODEL = ModelParams(1, 0.5, 2, 1.0, 2.0)
BOX = GridBox(1.0, 2.0, [0.0], [1.0])
GRID = build_grid(BOX, 8, 8)
COV = assemble_cov(GRID, MODEL)


def test_wilson_interval_known_values():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0.0 and hi == pytest.approx(0.036994, abs=1e-6)
    lo, hi = wilson_interval(50, 100)
    assert (lo, hi) == pytest.approx((0.403832, 0.596168), abs=1e-6)


@settings(max_examples=50)
@given(n=st.integers(1, 10**6), frac=st.floats(0, 1))
def test_estimate_invariants(n, frac):
    hits = int(frac * n)
    e = estimate_from_hits(hits, n)
    assert isinstance(e, HittingEstimate)
    assert 0 <= e.ci_low <= e.p_hat <= e.ci_high <= 1 and e.hits <= e.replicates


def test_experiment_validation():
    with pytest.raises(ParameterError):
        HitExperiment(MODEL, GRID, Ball((0, 0), 0.1), replicates=0)
    with pytest.raises(ParameterError):
        HitExperiment(MODEL, GRID, Ball((0, 0), 0.1), eta=-0.1)
    with pytest.raises(ParameterError):
        HitExperiment(MODEL, build_grid(GridBox(0.5, 1.5, [0.0], [1.0]), 2, 2), Ball((0, 0), 0.1))


def test_empty_target_never_hit():
    e = run_hit(HitExperiment(MODEL, GRID, PointCloud((), dim_=2), eta=0.5, replicates=200), COV)
    assert e.p_hat == 0.0 and e.hits == 0


def test_huge_box_always_hit():
    var, _ = variance_array(GRID.times, MODEL)
    L = 10 * np.sqrt(var.max())
    e = run_hit(HitExperiment(MODEL, GRID, Box((-L, -L), (L, L)), replicates=10_000), COV)
    assert e.p_hat >= 0.999


def test_deterministic_given_seed():
    exp = HitExperiment(MODEL, GRID, Ball((0, 0), 0.3), replicates=500, seed=3)
    assert run_hit(exp, COV) == run_hit(exp, COV)
    threaded = HitExperiment(MODEL, GRID, Ball((0, 0), 0.3), replicates=500, seed=3, threads=3, block=64)
    assert run_hit(threaded, COV) == run_hit(exp, COV)


def test_monotone_in_target_and_eta():
    radii = [0.05, 0.1, 0.2, 0.4]
    table = run_hit_schedule(MODEL, GRID, [Ball((0, 0), r) for r in radii], [0.0, 0.05, 0.1], 2000, 1, COV)
    hits = np.array([[e.hits for e in row] for row in table])
    assert np.all(np.diff(hits, axis=0) >= 0)
    assert np.all(np.diff(hits, axis=1) >= 0)


def test_refined_grid_hits_at_least_as_often_statistically():
    coarse = run_hit(HitExperiment(MODEL, build_grid(BOX, 4, 4), Ball((0, 0), 0.1), replicates=4000))
    fine = run_hit(HitExperiment(MODEL, build_grid(BOX, 16, 16), Ball((0, 0), 0.1), replicates=4000, seed=1))
    assert fine.ci_high >= coarse.ci_low


def test_min_distances_against_direct_scan():
    d = min_distances(MODEL, GRID, [Ball((0.1, 0.0), 0.2)], 5, 0, cov=COV)[0]
    from wavehit.field_sampler import sample_replicates
    u = sample_replicates(COV, 2, 0, np.arange(5))
    ref = np.maximum(np.linalg.norm(u - np.array([0.1, 0.0]), axis=2) - 0.2, 0).min(axis=1)
    assert np.allclose(d, ref)


def test_cell_enlargement():
    assert cell_enlargement(build_grid(GridBox(1.0, 1.0, [0.0], [0.0]), 1, 1), MODEL) == 0.0
    fine = cell_enlargement(build_grid(BOX, 32, 32), MODEL)
    coarse = cell_enlargement(build_grid(BOX, 8, 8), MODEL)
    assert 0 < fine < coarse
    # increments scale with exponent (2 - beta)/2 in the step
    assert np.log(coarse / fine) / np.log(31 / 7) == pytest.approx(0.75, abs=0.1)
    assert cell_enlargement(build_grid(BOX, 8, 8), MODEL, kappa=2.0) == pytest.approx(2 * coarse)


def test_slice_grids():
    g = slice_grid(BOX, "fixed_time", 1.5, 5)
    assert np.all(g.t == 1.5) and g.n == 5
    g = slice_grid(BOX, "fixed_space", 0.25, 6)
    assert np.all(g.x == 0.25) and g.n == 6 and g.t.min() == 1.0 and g.t.max() == 2.0
    with pytest.raises(ParameterError):
        slice_grid(BOX, "diagonal", 0.0, 4)


def test_slice_empty_target():
    exp = HitExperiment(MODEL, GRID, PointCloud((), dim_=2), replicates=50)
    assert run_slice_hit(exp, "fixed_time", 1.5).p_hat == 0.0


def _slice_slope(kind, where, d, n_nodes):
    model = ModelParams(1, 0.5, d, 1.0, 2.0)
    grid = slice_grid(BOX, kind, where, n_nodes)
    radii = np.array([0.05, 0.1, 0.2, 0.4])
    eta = cell_enlargement(grid, model)
    dist = min_distances(model, grid, [Ball([0.0] * d, r) for r in radii], 10_000, 0)
    p = np.array([np.mean(dj <= eta) for dj in dist])
    return np.polyfit(np.log(radii), np.log(p), 1)[0]


def test_fixed_time_slice_slope():
    # index d - 2k/(2 - beta) = 3 - 4/3
    assert _slice_slope("fixed_time", 1.5, 3, 256) == pytest.approx(5 / 3, abs=0.3)


def test_fixed_space_slice_slope():
    # index d - 2/(2 - beta) = 2 - 4/3
    assert _slice_slope("fixed_space", 0.5, 2, 64) == pytest.approx(2 / 3, abs=0.3)


def test_hits_csv(tmp_path):
    rows = [(0.1, estimate_from_hits(3, 10, 0.05))]
    write_hits_csv(tmp_path / "h.csv", rows, {"seed": 1})
    lines = (tmp_path / "h.csv").read_text().splitlines()
    assert lines[1] == "r,p_hat,ci_low,ci_high,hits,replicates,eta"
    assert lines[2].startswith("0.1,0.3,") and lines[2].endswith(",3,10,0.05")
