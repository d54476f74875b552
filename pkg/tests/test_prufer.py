"""Phase integration: closed forms, dual-formulation oracles, invariants."""

import math

import numpy as np
import pytest

import shwave as sw
from shwave.errors import IntegrationError
from shwave.prufer import (HALF_PI, IntegratorSettings, integrate_phase,
                           phase_batch, surface_phase)
from tests.conftest import lift_from_samples, ones, rk4_uw


def test_linear_phase():
    st = integrate_phase(ones, ones, HALF_PI, 0.0, 3.0)
    assert abs(st.phi - (HALF_PI + 3.0)) < 1e-10


def test_stationary_point_backward():
    neg = lambda y: -ones(y)
    st = integrate_phase(neg, ones, 3 * math.pi / 4, 5.0, 0.0)
    assert abs(st.phi - 3 * math.pi / 4) < 1e-12


def test_constant_coefficient_cosine_oracle():
    # oracle: u'' + 4u = 0, u(0)=1, u'(0)=0 -> u = cos 2y; lift computed
    # from the closed form first
    ys = np.linspace(0.0, 1.0, 200001)
    u = np.cos(2 * ys)
    w = -2 * np.sin(2 * ys)
    expected = lift_from_samples(u, w, HALF_PI)[-1]
    st = integrate_phase(lambda y: 4.0 * ones(y), ones, HALF_PI, 0.0, 1.0)
    assert abs(st.phi - expected) < 1e-9


def test_surface_phase_quadrant_invariance(constant_profile):
    st = surface_phase(constant_profile, (4.0, 1.0), 6.0)
    assert 0.0 < st.phi < HALF_PI


def test_surface_phase_linear(constant_profile):
    # gamma = 1, mu = 1 at A=(1,2): phase speed is exactly one
    p = constant_profile
    st = surface_phase(p, (1.0, 2.0), math.pi)
    assert abs(st.phi - 3 * math.pi / 2) < 1e-9


def test_surface_phase_dual_formulation_oracle(exp_profile):
    A = (1.0, 0.9)
    y_end = 10.0
    st = surface_phase(exp_profile, A, y_end)
    gam = lambda y: exp_profile.gamma(A, y)
    n = 400000
    ys = np.linspace(0.0, y_end, n + 1)
    us = np.empty(n + 1)
    ws = np.empty(n + 1)
    u, w = 1.0, 0.0
    us[0], ws[0] = u, w
    # independent fixed-step RK4 on (u, w), sampled for the lift
    h = y_end / n
    for i in range(n):
        y = ys[i]

        def f(yy, uu, ww):
            return ww, -gam(yy) * uu

        k1u, k1w = f(y, u, w)
        k2u, k2w = f(y + h / 2, u + h / 2 * k1u, w + h / 2 * k1w)
        k3u, k3w = f(y + h / 2, u + h / 2 * k2u, w + h / 2 * k2w)
        k4u, k4w = f(y + h, u + h * k3u, w + h * k3w)
        u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u)
        w += h / 6 * (k1w + 2 * k2w + 2 * k3w + k4w)
        us[i + 1], ws[i + 1] = u, w
    expected = lift_from_samples(us, ws, HALF_PI)[-1]
    assert abs(st.phi - expected) < 1e-7


def test_phase_batch_matches_scalar(exp_profile):
    A_list = [(1.0, 0.4), (1.0, 0.7), (4.0, 2.0)]
    omegas = np.array([a[1] for a in A_list])

    def gv(y):
        rho, mu = exp_profile.coef_pair(y)
        return omegas * rho - np.array([1.0, 1.0, 4.0]) * mu

    batch = phase_batch(gv, exp_profile.stiffness,
                        np.full(3, HALF_PI), 0.0, 6.0)
    for j, (K, Om) in enumerate(A_list):
        st = surface_phase(exp_profile, (K, Om), 6.0)
        assert abs(batch[j] - st.phi) < 5e-8


def test_phase_batch_read_at(exp_profile):
    omegas = np.array([0.4, 0.7])

    def gv(y):
        rho, mu = exp_profile.coef_pair(y)
        return omegas * rho - 1.0 * mu

    reads = np.array([2.0, 5.0])
    vals = phase_batch(gv, exp_profile.stiffness, np.full(2, HALF_PI),
                       0.0, 5.0, read_at=reads)
    for j, (om, r) in enumerate(zip(omegas, reads)):
        st = surface_phase(exp_profile, (1.0, om), float(r))
        assert abs(vals[j] - st.phi) < 5e-8


def test_propagator_vs_rk_engines_random():
    rng = np.random.default_rng(11)
    for _ in range(25):
        K = rng.uniform(0.5, 50)
        Om = rng.uniform(0.3, 1.2) * K
        q = rng.uniform(0.5, 8.0)
        d = rng.uniform(0.4, 2.0)

        def gam(y):
            return Om * (1 + q * np.exp(-np.asarray(y, dtype=float) / d)) - K

        y1 = rng.uniform(0.5, 10.0)
        st = integrate_phase(gam, ones, HALF_PI, 0.0, y1)
        pb = phase_batch(lambda y: np.atleast_1d(gam(y)), ones,
                         [HALF_PI], 0.0, y1)
        assert abs(st.phi - pb[0]) < 2e-7


def test_propagator_constant_coefficient_exact():
    g = 4000.0
    om = math.sqrt(g)
    ys = np.linspace(0.0, 5.43, 4000001)
    u = np.cos(om * ys)
    w = -om * np.sin(om * ys)
    truth = lift_from_samples(u, w, HALF_PI)[-1]
    pb = phase_batch(lambda y: np.array([g]), ones, [HALF_PI], 0.0, 5.43)
    assert abs(pb[0] - truth) < 1e-9


def test_monotone_where_gamma_nonnegative(exp_profile):
    # phase is nondecreasing wherever gamma >= 0 along the trajectory
    A = (1.0, 0.8)
    st, path = surface_phase(exp_profile, A, 8.0, with_path=True)
    ys, vals = path.sample(6)
    phis = vals[:, 0]
    g = exp_profile.gamma(A, ys)
    inc = np.diff(phis)
    both_nonneg = (g[:-1] >= 0) & (g[1:] >= 0)
    assert np.all(inc[both_nonneg] >= -1e-9)


def test_barrier_no_downward_pi_crossing(exp_profile):
    A = (4.0, 3.0)
    st, path = surface_phase(exp_profile, A, 12.0, with_path=True)
    ys, vals = path.sample(6)
    phis = vals[:, 0]
    run_max_band = np.maximum.accumulate(np.floor(phis / math.pi))
    assert np.all(phis >= math.pi * run_max_band - 1e-8)


def test_uw_nondecreasing_where_gamma_nonpositive(exp_profile):
    A = (1.0, 0.3)
    st, path = surface_phase(exp_profile, A, 9.0, with_path=True)
    ys, vals = path.sample(6)
    phis, logr = vals[:, 0], vals[:, 1]
    uw = np.exp(2 * logr) * 0.5 * np.sin(2 * phis)
    g = exp_profile.gamma(A, ys)
    both_nonpos = (g[:-1] <= 0) & (g[1:] <= 0)
    duw = np.diff(uw)
    scale = 1e-8 * (1.0 + np.abs(uw[:-1]))
    assert np.all(duw[both_nonpos] >= -scale[both_nonpos])


def test_prufer_agrees_with_uw_system(exp_profile):
    # forward integration of the raw first-order system gives the same
    # lift as the direct phase equation
    A = (1.0, 0.6)
    gam = lambda y: float(exp_profile.gamma(A, float(y)))
    n = 200000
    ys = np.linspace(0.0, 6.0, n + 1)
    us = np.empty(n + 1)
    ws = np.empty(n + 1)
    u, w = 1.0, 0.0
    us[0], ws[0] = u, w
    h = 6.0 / n
    for i in range(n):
        y = float(ys[i])

        def f(yy, uu, ww):
            return ww, -gam(yy) * uu

        k1u, k1w = f(y, u, w)
        k2u, k2w = f(y + h / 2, u + h / 2 * k1u, w + h / 2 * k1w)
        k3u, k3w = f(y + h / 2, u + h / 2 * k2u, w + h / 2 * k2w)
        k4u, k4w = f(y + h, u + h * k3u, w + h * k3w)
        u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u)
        w += h / 6 * (k1w + 2 * k2w + 2 * k3w + k4w)
        us[i + 1], ws[i + 1] = u, w
    expected = lift_from_samples(us, ws, HALF_PI)[-1]
    st = surface_phase(exp_profile, A, 6.0)
    assert abs(st.phi - expected) < 1e-8


def test_integration_failure_carries_state():
    def bad(y):
        return float("nan") if y > 1.0 else 1.0

    with pytest.raises(IntegrationError) as exc:
        integrate_phase(bad, ones, HALF_PI, 0.0, 3.0)
    assert exc.value.last_state is not None
    assert exc.value.last_state.y <= 1.0 + 1e-6


def test_settings_validation():
    with pytest.raises(ValueError):
        IntegratorSettings(rel_tol=-1.0)


def test_mode_shape_normalization_and_decay(exp_profile):
    res = sw.find_modes(exp_profile, 1.0)
    mode = res.modes[0]
    ys = np.linspace(0.0, 25.0, 400)
    u = sw.reconstruct_mode_shape(exp_profile, mode, ys)
    assert abs(u[0] - 1.0) < 1e-9
    assert np.max(np.abs(u)) < 10.0
    assert abs(u[-1]) < 1e-6


def test_mode_shape_sign_change_count(exp_profile):
    res = sw.find_modes(exp_profile, 4.0)
    for mode in res.modes:
        ys = np.linspace(0.0, mode.matching.y_tail, 4000)
        u = sw.reconstruct_mode_shape(exp_profile, mode, ys)
        signs = np.sign(u[np.abs(u) > 1e-9])
        changes = int(np.sum(signs[1:] != signs[:-1]))
        assert changes == int(math.floor(mode.phi_surface / math.pi))
        assert changes == mode.m - 1


def test_mode_shape_against_bessel_oracle(exp_profile):
    from shwave.oracle import bessel_mode_shape

    res = sw.find_modes(exp_profile, 1.0)
    mode = res.modes[0]
    ys = np.linspace(0.0, 12.0, 200)
    u = sw.reconstruct_mode_shape(exp_profile, mode, ys)
    u_oracle = bessel_mode_shape(5.0, 1.0, 1.0, mode.Omega, ys)
    assert np.max(np.abs(u - u_oracle)) < 1e-5
