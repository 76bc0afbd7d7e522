import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wavehit.errors import ConditioningError, GridTooLargeError, InvalidDomainError, ParameterError
from wavehit.field_sampler import (JITTER_LADDER, GridBox, assemble_cov, build_grid, factorize,
                                   grid_from_points, normal_stream, normals, sample_field,
                                   sample_replicates, write_cov_csv, write_sample_csv)
from scipy.stats import chi2

from wavehit.spectral_core import ModelParams, covariance_array, variance_array
from wavehit.verifier import check_sup_increments

MODEL = ModelParams(1, 0.5)

# covariance at (min time, max time, distance) from the Mellin-transform oracle
GRID_ORACLE = {
    (1.0, 1.0, 0.0): 1.8906174409658838,
    (1.0, 1.0, 0.5): 1.5210654422765857,
    (1.0, 1.0, 1.0): 1.1009875516311634,
    (1.0, 1.5, 0.0): 2.6528730026729868,
    (1.0, 1.5, 0.5): 2.5476219270403053,
    (1.0, 1.5, 1.0): 2.02887740864282,
    (1.0, 2.0, 0.0): 3.2046264131147266,
    (1.0, 2.0, 0.5): 3.160684969039221,
    (1.0, 2.0, 1.0): 2.9842018513387796,
    (1.5, 1.5, 0.0): 5.209929032819527,
    (1.5, 1.5, 0.5): 4.594894996748127,
    (1.5, 1.5, 1.0): 3.7861540983980757,
    (1.5, 2.0, 0.0): 6.714162375913819,
    (1.5, 2.0, 0.5): 6.532015479998331,
    (1.5, 2.0, 1.0): 5.653269793503038,
    (2.0, 2.0, 0.0): 10.694947305092269,
    (2.0, 2.0, 0.5): 9.826537743762042,
    (2.0, 2.0, 1.0): 8.60444551089831,
}


def small_grid(nt=3, nx=4):
    return build_grid(GridBox(0.5, 1.5, [0.0], [1.0]), nt, nx)


def test_lexicographic_order_time_slowest():
    g = small_grid()
    assert g.shape == (3, 4) and g.n == 12
    assert np.all(g.t[:4] == 0.5) and np.allclose(g.x[:4, 0], np.linspace(0, 1, 4))
    assert g.index(1, 2) == 6
    assert g.t[g.index(2, 3)] == 1.5 and g.x[g.index(2, 3), 0] == 1.0
    assert np.allclose(g.spacing(), [0.5, 1 / 3])


def test_two_spatial_axes():
    g = build_grid(GridBox(1.0, 2.0, [0.0, -1.0], [1.0, 1.0]), 2, [2, 3])
    assert g.shape == (2, 2, 3)
    assert np.allclose(g.x[:3], [[0, -1], [0, 0], [0, 1]])


def test_single_node_axis_sits_at_lower_end():
    g = build_grid(GridBox(1.0, 1.0, [0.2], [0.9]), 1, 3)
    assert np.all(g.t == 1.0) and g.spacing()[0] == 0.0


@pytest.mark.parametrize("box,nt,nx", [
    (GridBox(1.0, 1.0, [0.0], [1.0]), 2, 2),
    (GridBox(1.0, 0.5, [0.0], [1.0]), 2, 2),
    (GridBox(-0.5, 0.5, [0.0], [1.0]), 2, 2),
])
def test_invalid_boxes(box, nt, nx):
    with pytest.raises(InvalidDomainError):
        build_grid(box, nt, nx)


def test_bad_node_counts():
    with pytest.raises(ParameterError):
        build_grid(GridBox(0.5, 1.0, [0.0], [1.0]), 0, 2)
    with pytest.raises(ParameterError):
        build_grid(GridBox(0.5, 1.0, [0.0, 0.0], [1.0, 1.0]), 2, [2])


def test_grid_too_large():
    g = build_grid(GridBox(0.5, 1.0, [0.0], [1.0]), 65, 64)
    with pytest.raises(GridTooLargeError):
        assemble_cov(g, MODEL)


def test_gram_matches_pointwise_covariance():
    g = small_grid()
    cov = assemble_cov(g, MODEL)
    i, j = np.triu_indices(g.n)
    ref, _ = covariance_array(g.t[i], g.x[i], g.t[j], g.x[j], MODEL)
    assert np.allclose(cov.matrix[i, j], ref, rtol=1e-13)
    assert np.allclose(cov.matrix, cov.matrix.T)
    assert cov.jitter_applied == 0.0
    assert np.allclose(cov.factor @ cov.factor.T, cov.matrix, rtol=1e-10)


def test_duplicate_points_rejected():
    with pytest.raises(InvalidDomainError):
        grid_from_points([1.0, 1.0, 1.5], [[0.0], [0.0], [0.3]])


def test_near_duplicate_points_need_jitter():
    g = grid_from_points([1.0, 1.0, 1.5], [[0.0], [1e-12], [0.3]])
    cov = assemble_cov(g, MODEL)
    assert cov.jitter_applied > 0
    assert cov.jitter_applied <= JITTER_LADDER[-1] * np.trace(cov.matrix) / 3


def test_indefinite_matrix_fails_conditioning():
    with pytest.raises(ConditioningError) as exc:
        factorize(np.array([[2.0, 0.0], [0.0, -1.0]]))
    assert exc.value.jitter > 0


def test_streams_are_addressable_and_distinct():
    a = normal_stream(7, 3, 1, 50)
    assert np.array_equal(a, normal_stream(7, 3, 1, 50))
    assert np.array_equal(a[:20], normal_stream(7, 3, 1, 20))
    for other in [(8, 3, 1), (7, 4, 1), (7, 3, 0)]:
        assert not np.allclose(a, normal_stream(*other, 50))


def test_stream_normals_look_standard():
    z = normal_stream(0, 0, 0, 200_000)
    assert abs(z.mean()) < 0.01 and abs(z.std() - 1) < 0.01
    assert np.all(np.isfinite(z))


def test_sample_is_factor_times_normals():
    g = small_grid()
    cov = assemble_cov(g, MODEL)
    s = sample_field(cov, 2, seed=5, replicate_id=9)
    z = normals(5, [9], 2, g.n)[0]
    assert np.allclose(s.values, cov.factor @ z)
    assert (s.seed, s.replicate_id) == (5, 9)


@settings(max_examples=10, deadline=None)
@given(threads=st.integers(1, 4), block=st.sampled_from([1, 3, 16, 256]), seed=st.integers(0, 2**40))
def test_replicates_independent_of_threads_and_blocks(threads, block, seed):
    cov = assemble_cov(small_grid(2, 3), MODEL)
    ref = sample_replicates(cov, 2, seed, np.arange(20))
    out = sample_replicates(cov, 2, seed, np.arange(20), threads=threads, block=block)
    assert np.array_equal(ref, out)
    # replicate r is the same whichever batch it is drawn in
    assert np.array_equal(out[7:9], sample_replicates(cov, 2, seed, [7, 8]))


def test_csv_writers_embed_metadata(tmp_path):
    g = small_grid(2, 2)
    cov = assemble_cov(g, MODEL)
    write_cov_csv(tmp_path / "c.csv", cov, g, {"beta": 0.5})
    write_sample_csv(tmp_path / "s.csv", sample_field(cov, 1, 0, 0), g, {"beta": 0.5})
    c = (tmp_path / "c.csv").read_text().splitlines()
    s = (tmp_path / "s.csv").read_text().splitlines()
    assert "# beta: 0.5" in c and "# n_points: 4" in c
    assert [l for l in s if not l.startswith("#")][0] == "t,x0,u0"
    assert len([l for l in s if not l.startswith("#")]) == 5


def test_two_by_two_grid_points():
    g = build_grid(GridBox(1.0, 2.0, [0.0], [1.0]), 2, 2)
    assert [(t, x[0]) for t, x in zip(g.t, g.x)] == [(1.0, 0.0), (1.0, 1.0), (2.0, 0.0), (2.0, 1.0)]


def test_single_point_matrix_is_variance():
    g = grid_from_points([1.3], [[0.2]])
    v, _ = variance_array([1.3], MODEL)
    assert assemble_cov(g, MODEL).matrix == pytest.approx(v.reshape(1, 1), rel=1e-14)


def test_three_by_three_grid_against_oracle():
    g = build_grid(GridBox(1.0, 2.0, [0.0], [1.0]), 3, 3)
    C = assemble_cov(g, MODEL).matrix
    for i in range(g.n):
        for j in range(g.n):
            key = (min(g.t[i], g.t[j]), max(g.t[i], g.t[j]), abs(g.x[i, 0] - g.x[j, 0]))
            assert C[i, j] == pytest.approx(GRID_ORACLE[key], rel=1e-8)
    # stationarity: constant diagonal within each time slice
    for k in range(3):
        assert np.ptp(np.diag(C)[3 * k:3 * k + 3]) == 0.0


def test_sample_mean_and_marginal_variance():
    g = grid_from_points([0.6, 1.0, 1.4, 1.9], [[0.0], [0.3], [0.8], [-0.3]])
    cov = assemble_cov(g, MODEL)
    var = np.diag(cov.matrix)
    n = 100_000
    u = sample_replicates(cov, 1, 4, np.arange(n))[:, :, 0]
    assert np.all(np.abs(u.mean(axis=0)) <= 4 * np.sqrt(var / n))
    # chi-square test of the marginal variance on 10^4 replicates at level 1e-3
    m = 10_000
    stat = np.sum(u[:m] ** 2, axis=0) / var
    lo, hi = chi2.ppf([0.0005, 0.9995], m)
    assert np.all((stat > lo) & (stat < hi))


def test_sup_increment_moments_include_fourth():
    r = check_sup_increments(ModelParams(1, 0.5), q_list=(1, 2, 4), replicates=4000)
    assert r.passed, r.diagnostics["slopes"]
