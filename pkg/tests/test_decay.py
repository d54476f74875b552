"""Tail construction: matching point, tail start, decaying angle."""

import math

import numpy as np
import pytest

import shwave as sw
from shwave.decay import (MatchingConfig, decaying_phase, decaying_phase_at_tail,
                          matching_config, select_matching_point,
                          select_tail_start)
from shwave.errors import ThresholdError
from tests.conftest import lift_from_samples, ones


def test_matching_point_negative_everywhere(constant_profile):
    assert select_matching_point(constant_profile, (4.0, 1.0)) == 1.0


def test_matching_point_exponential(exp_profile):
    y_bar = select_matching_point(exp_profile, (1.0, 0.5))
    assert abs(y_bar - (math.log(5.0) + 0.5)) < 0.02


def test_matching_point_threshold_guard(exp_profile):
    with pytest.raises(ThresholdError):
        select_matching_point(exp_profile, (1.0, 1.0))
    with pytest.raises(ThresholdError):
        select_matching_point(exp_profile, (1.0, 1.0 - 1e-12))


def test_tail_start_clamped_table():
    table = sw.from_table([(0.0, 3.0, 1.0), (1.5, 1.0, 1.0)], rho_inf=1.0)
    Y, strict = select_tail_start(table, (1.0, 0.5), y_bar=0.7)
    assert Y == 1.5
    assert strict


def test_tail_start_exponential_formula(exp_profile):
    A = (1.0, 0.5)
    y_bar = select_matching_point(exp_profile, A)
    Y, strict = select_tail_start(exp_profile, A, y_bar=y_bar)
    # |beta(Y)| = 2.5 exp(-Y) <= 1e-8 * 0.5  =>  Y >= ln(5e8)
    assert strict
    assert math.log(5e8) - 1e-9 <= Y <= math.log(5e8) + 0.1


def test_tail_start_constant(constant_profile):
    Y, strict = select_tail_start(constant_profile, (4.0, 1.0), y_bar=1.0)
    assert Y == 1.0


def test_tail_start_power_law_fallback(power_profile):
    # the literal residual criterion is unattainable for (1+y)^{-3/2};
    # the contraction-budget fallback must fire instead of erroring
    A = (4.0, 3.5)
    y_bar = select_matching_point(power_profile, A)
    Y, strict = select_tail_start(power_profile, A, y_bar=y_bar)
    assert not strict
    assert Y > y_bar


def test_decaying_phase_at_tail_values(constant_profile):
    # gamma(Y) = -1: w/u = -1, angle 3pi/4
    p = sw.from_registry("constant", {"rho": 1.0, "mu": 1.0})
    assert abs(decaying_phase_at_tail(p, (2.0, 1.0), 1.0) - 3 * math.pi / 4) < 1e-14
    # gamma(Y) = -3: angle 5pi/6
    assert abs(decaying_phase_at_tail(p, (4.0, 1.0), 1.0) - 5 * math.pi / 6) < 1e-14
    # slow-decay limit: angle approaches pi/2 from above
    phi = decaying_phase_at_tail(p, (1.0, 1.0 - 1e-8), 1.0)
    assert 0 < phi - math.pi / 2 < 1e-3
    with pytest.raises(ThresholdError):
        decaying_phase_at_tail(p, (1.0, 2.0), 1.0)


def test_decaying_phase_constant_exact(constant_profile):
    cfg = matching_config(constant_profile, (4.0, 1.0))
    st = decaying_phase(constant_profile, (4.0, 1.0), cfg)
    assert abs(st.phi - 5 * math.pi / 6) < 1e-12


def test_decaying_phase_dual_formulation_oracle(exp_profile):
    A = (1.0, 0.5)
    cfg = matching_config(exp_profile, A)
    st = decaying_phase(exp_profile, A, cfg)
    # independent backward fixed-step RK4 on (u, w) from the frozen seed
    gam = lambda y: float(exp_profile.gamma(A, float(y)))
    n = 400000
    h = (cfg.y_bar - cfg.y_tail) / n   # negative step
    u, w = 1.0, -math.sqrt(-gam(cfg.y_tail))
    us, ws = [u], [w]
    y = cfg.y_tail
    for _ in range(n):
        def f(yy, uu, ww):
            return ww, -gam(yy) * uu

        k1u, k1w = f(y, u, w)
        k2u, k2w = f(y + h / 2, u + h / 2 * k1u, w + h / 2 * k1w)
        k3u, k3w = f(y + h / 2, u + h / 2 * k2u, w + h / 2 * k2w)
        k4u, k4w = f(y + h, u + h * k3u, w + h * k3w)
        u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u)
        w += h / 6 * (k1w + 2 * k2w + 2 * k3w + k4w)
        s = math.hypot(u, w)
        u, w = u / s, w / s
        us.append(u)
        ws.append(w)
        y += h
    seed_phi = math.atan2(1.0, -math.sqrt(-gam(cfg.y_tail)))
    expected = lift_from_samples(np.array(us), np.array(ws), seed_phi)[-1]
    assert abs(st.phi - expected) < 1e-7


def test_decaying_phase_bessel_oracle(exp_profile):
    # the exact decaying solution is a Bessel function; its logarithmic
    # derivative fixes the angle at the matching depth
    from shwave.oracle import bessel_j, bessel_j_prime

    K = 1.0
    res = sw.find_modes(exp_profile, K)
    mode = res.modes[0]
    Om = mode.Omega
    cfg = mode.matching
    st = decaying_phase(exp_profile, (K, Om), cfg)
    nu = 2.0 * math.sqrt(K - Om)
    x = 2.0 * math.sqrt(5.0 * Om) * math.exp(-cfg.y_bar / 2.0)
    u = bessel_j(nu, x)
    w = -0.5 * x * bessel_j_prime(nu, x)    # du/dy by the chain rule
    expected = math.atan2(u, w) % math.pi
    if expected <= math.pi / 2:
        expected += math.pi
    assert abs(st.phi - expected) < 1e-7


def test_band_invariant(exp_profile):
    rng = np.random.default_rng(3)
    for _ in range(20):
        K = rng.uniform(0.3, 20.0)
        Om = rng.uniform(0.2, 0.95) * K
        cfg = matching_config(exp_profile, (K, Om))
        st, path = decaying_phase(exp_profile, (K, Om), cfg, with_path=True)
        ys, vals = path.sample(4)
        assert np.all(vals[:, 0] > math.pi / 2 - 1e-9)
        assert np.all(vals[:, 0] < math.pi + 1e-9)


def test_monotone_response_to_omega(exp_profile):
    # decaying angle is nonincreasing in Omega at a common matching point
    K = 4.0
    oms = np.array([1.2, 1.8, 2.4, 3.0, 3.5])
    cfg = matching_config(exp_profile, (K, float(oms[-1])))
    phis = [decaying_phase(exp_profile, (K, float(om)), cfg).phi for om in oms]
    assert all(a >= b - 1e-10 for a, b in zip(phis, phis[1:]))


def test_tail_insensitivity(exp_profile):
    A = (1.0, 0.5)
    cfg = matching_config(exp_profile, A)
    st1 = decaying_phase(exp_profile, A, cfg)
    st2 = decaying_phase(exp_profile, A, cfg.stretched(2.0))
    assert abs(st1.phi - st2.phi) <= 1e-8


def test_matching_config_verifies_negativity(exp_profile):
    cfg = matching_config(exp_profile, (1.0, 0.5))
    assert 0 < cfg.y_bar <= cfg.y_tail
    ys = np.linspace(cfg.y_bar, cfg.y_tail, 500)
    assert np.all(exp_profile.gamma((1.0, 0.5), ys) < 0)
