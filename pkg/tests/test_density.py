import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from samplerec.density import (batch_from_points, concentration_check, default_sample_count,
                               density_eval, deviation, draw_points, grid_mass, info_vectors,
                               resample_until_concentrated, target_diagonal, attempt_seed)
from samplerec.errors import ConcentrationFailure, DegenerateDensity, InvalidArgument
from samplerec.spectral import DomainGrid, SpectralModel
from samplerec.zoo import fourier_sobolev

from conftest import cosine_model


def test_fourier_density_is_one(small_sobolev):
    for m in (1, 4, 20):
        assert np.allclose(density_eval(small_sobolev, m), 1.0, atol=1e-13)


def test_cosine_density_formula():
    model = cosine_model()
    x = model.grid.nodes
    # finite rank with m = 1 < rank keeps both branches
    assert np.allclose(density_eval(model, 1), 0.5 * (1 + 2 * np.cos(2 * np.pi * x) ** 2))


def test_density_normalization():
    model = cosine_model(128)
    rho = density_eval(model, 1)
    assert abs(float(np.sum(rho * model.grid.weights)) - 1.0) <= 1e-10


def test_finite_rank_head_only():
    model = cosine_model()
    rho = density_eval(model, 2)
    x = model.grid.nodes
    assert np.allclose(rho, 0.5 * (1 + 2 * np.cos(2 * np.pi * x) ** 2))
    assert np.allclose(target_diagonal(model, 2), 1.0)


def test_degenerate_tail():
    grid = DomainGrid.uniform(4)
    # tail basis vanishes nowhere, but a tail of zero mass cannot be built with
    # positive sigma; the empty-mass case is exercised through invalid nodes
    basis = np.ones((4, 1)) * 1.0
    model = SpectralModel(np.array([1.0]), basis, grid, rank_exact=True)
    masked = SpectralModel(np.array([1.0]), basis,
                           DomainGrid(grid.nodes, grid.weights, invalid=(0, 1, 2, 3)),
                           rank_exact=True)
    assert np.allclose(density_eval(model, 1), 1.0)
    with pytest.raises(DegenerateDensity):
        draw_points(masked, 1, 5)


def test_target_has_unit_norm():
    for model in (fourier_sobolev(1.0, 0.0, 64, 128), fourier_sobolev(0.6, 0.0, 64, 128)):
        for m in (1, 3, 10, 63):
            t = target_diagonal(model, m)
            assert t.max() == 1.0
            assert np.all(t > 0) and np.all(t <= 1.0)
            assert np.all(t[:m] == 1.0)


def test_info_vector_entries(small_sobolev):
    m = 5
    pts = np.array([0, 7, 33])
    rho = density_eval(small_sobolev, m, pts)
    y = info_vectors(small_sobolev, m, pts, rho)
    from samplerec.spectral import gamma_m
    g = gamma_m(small_sobolev, m)
    b = small_sobolev.basis[pts]
    assert np.allclose(y[:, :m], b[:, :m] / np.sqrt(rho)[:, None])
    assert np.allclose(y[:, m:], b[:, m:] * small_sobolev.sigma[m:] / g / np.sqrt(rho)[:, None])


@settings(max_examples=30, deadline=None)
@given(st.floats(0.55, 3.0), st.integers(1, 30), st.integers(0, 2 ** 32))
def test_info_vector_norms_bounded(alpha, m, seed):
    model = fourier_sobolev(alpha, 0.0, 32, 64)
    m = min(m, 31)
    batch = draw_points(model, m, 40, seed=seed)
    norms = np.sum(np.abs(batch.info_vectors) ** 2, axis=1)
    assert np.all(norms <= 2 * m * (1 + 1e-12))


def test_info_vector_norms_nonuniform():
    model = cosine_model(64)
    batch = batch_from_points(model, 1, np.arange(64))
    assert batch.max_norm_sq() <= 2 * 1 * (1 + 1e-12)


def test_draw_deterministic(small_sobolev):
    a = draw_points(small_sobolev, 4, 50, seed=123)
    b = draw_points(small_sobolev, 4, 50, seed=123)
    assert np.array_equal(a.points, b.points)
    assert np.array_equal(a.info_vectors, b.info_vectors)
    assert a.residual == b.residual
    assert np.all(a.density_vals > 0)
    with pytest.raises(InvalidArgument):
        draw_points(small_sobolev, 4, 0)
    with pytest.raises(InvalidArgument):
        draw_points(small_sobolev, 4, 5, seed=2 ** 64)


def test_draw_support_restricted():
    model = cosine_model(64)
    batch = draw_points(model, 1, 500, seed=0)
    assert np.all(density_eval(model, 1, batch.points) > 0)


def test_histogram_total_variation():
    model = fourier_sobolev(1.0, 0.0, 16, 32)
    batch = draw_points(model, 4, 10 ** 5, seed=7)
    counts = np.bincount(batch.points, minlength=model.grid.size) / batch.n
    mass = grid_mass(model, 4)
    tv = 0.5 * np.abs(counts - mass / mass.sum()).sum()
    assert tv <= 0.01


def test_histogram_nonuniform_density():
    model = cosine_model(32)
    batch = draw_points(model, 1, 10 ** 5, seed=3)
    counts = np.bincount(batch.points, minlength=32) / batch.n
    mass = grid_mass(model, 1)
    assert 0.5 * np.abs(counts - mass / mass.sum()).sum() <= 0.01


def test_zero_vector_residual_is_one(small_sobolev):
    target = target_diagonal(small_sobolev, 4)
    res = deviation(np.zeros((1, small_sobolev.M)), target)
    assert res == pytest.approx(1.0)
    from dataclasses import replace
    batch = replace(batch_from_points(small_sobolev, 4, [0]), residual=res)
    assert not concentration_check(batch, 0.5).passed


def test_deviation_matches_dense(small_sobolev):
    batch = draw_points(small_sobolev, 6, 30, seed=2)
    y = batch.info_vectors
    dev = y.T @ y.conj() / batch.n - np.diag(batch.target)
    assert batch.residual == pytest.approx(np.abs(np.linalg.eigvalsh(dev)).max(), abs=1e-12)


def test_concentration_fraction_reproducible():
    model = fourier_sobolev(1.0, 0.0, 64, 128)
    m = 8
    n = 8 * default_sample_count(m)
    def fraction():
        return np.mean([concentration_check(draw_points(model, m, n, seed=s)).passed
                        for s in range(100)])
    f1, f2 = fraction(), fraction()
    assert f1 == f2
    assert f1 > 0.5


def test_resample_returns_first_passing(small_sobolev):
    batch = draw_points(small_sobolev, 4, 400, seed=5)
    assert batch.residual <= 0.5
    again = resample_until_concentrated(small_sobolev, 4, 400, 0.5, 3, seed=5)
    assert np.array_equal(again.points, batch.points)
    assert again.attempts == 1 and again.residual == batch.residual


def test_resample_exhaustion(small_sobolev):
    with pytest.raises(ConcentrationFailure) as exc:
        resample_until_concentrated(small_sobolev, 8, 2, 0.5, max_attempts=1, seed=0)
    assert exc.value.attempts == 1
    assert exc.value.best_residual > 0.5
    with pytest.raises(InvalidArgument):
        resample_until_concentrated(small_sobolev, 8, 2, 0.5, max_attempts=0)


def test_resample_terminates_across_seeds():
    # single-attempt pass rate at C = 8, m = 16 is near 0.2, so a seed list
    # exhausts 20 attempts with probability about 0.015
    model = fourier_sobolev(1.0, 0.0, 128, 256)
    m = 16
    done = 0
    for s in range(50):
        try:
            b = resample_until_concentrated(model, m, None, 0.5, 20, seed=s)
        except ConcentrationFailure:
            continue
        assert b.residual <= 0.5 and 1 <= b.attempts <= 20
        done += 1
    assert done >= 48


def test_attempt_seeds_distinct():
    seeds = {attempt_seed(11, k) for k in range(20)}
    assert len(seeds) == 20
    assert attempt_seed(11, 0) == 11


def test_residual_decreases_with_n():
    model = fourier_sobolev(1.0, 0.0, 64, 128)
    med = [np.median([draw_points(model, 4, n, seed=s).residual for s in range(7)])
           for n in (100, 1000, 10000)]
    assert med[0] > med[1] > med[2]
