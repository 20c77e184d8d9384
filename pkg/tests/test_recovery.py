
import numpy as np
import pytest

from samplerec.density import batch_from_points, resample_until_concentrated
from samplerec.errors import InvalidArgument, PlanFailure
from samplerec.recovery import (RecoveryPlan, build_plan, plan_from_points, recover,
                                recovery_error, sample_values, spline_interpolant)
from samplerec.spectral import tail_stats
from samplerec.subsample import certify, greedy_sparsify, pad_identity, reduce_to_finite
from samplerec.zoo import finite_rank, fourier_sobolev

from conftest import cosine_model


@pytest.fixture(scope="module")
def plan8(sobolev):
    batch = resample_until_concentrated(sobolev, 8, None, 0.5, 20, seed=1)
    cert = greedy_sparsify(pad_identity(reduce_to_finite(batch)), 8)
    return build_plan(sobolev, batch, certify(batch, cert.J, 8, budget=480)), batch


def test_unit_density_entries(sobolev, plan8):
    plan, _ = plan8
    assert np.allclose(plan.rho_vals, 1.0)
    assert np.allclose(plan.G, sobolev.basis[plan.points, :8])
    assert np.allclose(plan.Phi, sobolev.basis[plan.points, 8:] * sobolev.sigma[8:])


def test_pinv_identity_and_norm(plan8):
    plan, _ = plan8
    assert np.allclose(plan.G_pinv @ plan.G, np.eye(8), atol=1e-10)
    s = np.linalg.svd(plan.G, compute_uv=False)
    assert 1 / s[-1] <= (plan.certificate.head_floor * 8) ** -0.5 + 1e-10
    assert plan.checks["pinv_ok"] and plan.checks["phi_ok"]
    gamma = plan.gamma
    assert np.linalg.norm(plan.Phi, 2) ** 2 <= plan.certificate.full_cap * 8 * gamma ** 2 + 1e-10


def test_rank_deficient_plan_fails(sobolev):
    batch = batch_from_points(sobolev, 4, [0, 0, 0, 0, 0])
    with pytest.raises(PlanFailure):
        build_plan(sobolev, batch, certify(batch, np.arange(5)))


def test_reproduces_head(sobolev, plan8):
    plan, _ = plan8
    for j in range(8):
        coef = np.zeros(sobolev.M)
        coef[j] = 1.0
        g = recover(plan, sample_values(sobolev, coef, plan.points))
        assert np.allclose(g, np.eye(8)[j], atol=1e-10)
    assert np.allclose(recover(plan, np.zeros(plan.n)), 0)
    with pytest.raises(InvalidArgument):
        recover(plan, np.zeros(plan.n + 1))


def test_single_tail_function_bound(sobolev, plan8):
    plan, _ = plan8
    st = tail_stats(sobolev, 8)
    const = plan.certificate.local_constant
    for j in (8, 9, 20, 100, 255):
        coef = np.zeros(sobolev.M)
        coef[j] = sobolev.sigma[j]  # unit H-norm
        err = recovery_error(sobolev, plan, coef)
        assert err ** 2 <= const * st.gamma ** 2 + 1e-10


def test_error_split_and_local_bound(sobolev, plan8):
    plan, _ = plan8
    m = 8
    rng = np.random.default_rng(0)
    st = tail_stats(sobolev, m)
    const = plan.certificate.local_constant
    for _ in range(50):
        c = rng.standard_normal(sobolev.M) + 1j * rng.standard_normal(sobolev.M)
        coef = sobolev.sigma * c / np.linalg.norm(c)
        total = recovery_error(sobolev, plan, coef) ** 2
        g = recover(plan, sample_values(sobolev, coef, plan.points))
        q = float(np.sum(np.abs(coef[m:]) ** 2))
        p = float(np.sum(np.abs(coef[:m] - g) ** 2))
        assert abs(total - (q + p)) <= 1e-10
        qh = float(np.sum(np.abs(coef[m:] / sobolev.sigma[m:]) ** 2))
        assert total <= const * st.gamma ** 2 * qh + 1e-10


def test_plan_from_points_finite_rank():
    model = finite_rank(np.array([1.0, 0.7, 0.5, 0.3, 0.2]), 64)
    plan = plan_from_points(model, 5, [0, 9, 20, 33, 50])
    assert plan.gamma == 1.0
    coef = np.array([0.3, -1.0, 2.0, 0.5j, 1.0])
    assert recovery_error(model, plan, coef) <= 1e-12


def test_zero_plan():
    model = cosine_model()
    plan = RecoveryPlan.zero(model, 1)
    assert plan.n == 0 and plan.G_pinv.shape == (1, 0)


def test_spline_interpolates_representer_span(small_sobolev):
    pts = np.array([1, 8, 30, 41, 60])
    from samplerec.spectral import kernel_eval
    a = np.array([1.0, -2.0, 0.5, 1j, 3.0])
    # f = sum_j a_j K(x_j, .) has H-coordinates c_k = sigma_k sum_j a_j conj(b_k(x_j))
    c = small_sobolev.sigma * (small_sobolev.basis[pts].conj().T @ a)
    values = small_sobolev.evaluate(small_sobolev.sigma * c, pts)
    res = spline_interpolant(small_sobolev, pts, values)
    assert res.residue <= 1e-10
    assert np.allclose(res.coef_h, c, atol=1e-10)
    assert res.rank == 5


def test_spline_zero_data(small_sobolev):
    res = spline_interpolant(small_sobolev, [2, 7], np.zeros(2))
    assert np.allclose(res.coef_h, 0)
    with pytest.raises(InvalidArgument):
        spline_interpolant(small_sobolev, [2, 7], np.zeros(3))


def test_spline_reproduces_finite_rank():
    model = finite_rank(np.array([1.0, 0.5, 0.25, 0.125, 0.1]), 40)
    pts = [0, 3, 11, 17, 29]
    rng = np.random.default_rng(1)
    for _ in range(5):
        c = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        values = model.evaluate(model.sigma * c, pts)
        res = spline_interpolant(model, pts, values)
        assert np.allclose(res.coef_h, c, atol=1e-9)
        assert np.allclose(res.l2_coefficients(model), model.sigma * c, atol=1e-9)
