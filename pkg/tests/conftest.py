"""Shared fixtures and independent mini-oracles for the test suite."""

import math

import numpy as np
import pytest

import shwave as sw


def ones(y):
    """Constant-one coefficient accessor usable on scalars and arrays."""
    if isinstance(y, float):
        return 1.0
    return np.ones_like(np.asarray(y, dtype=float)) if np.ndim(y) else 1.0


def mu_exp_bump(y):
    y = np.asarray(y, dtype=float)
    out = 1.0 + np.exp(-y)
    return float(out) if out.ndim == 0 else out


def rho_one(y):
    return ones(y)


@pytest.fixture(scope="session")
def exp_profile():
    """rho = 1 + 5 exp(-y), mu = 1."""
    return sw.from_registry("exp_density", {"rho_inf": 1.0, "drho": 5.0, "d": 1.0})


@pytest.fixture(scope="session")
def shallow_profile():
    """rho = 1 - 0.5 exp(-y), mu = 1: globally negative monotonicity."""
    return sw.from_registry("exp_density", {"rho_inf": 1.0, "drho": -0.5, "d": 1.0})


@pytest.fixture(scope="session")
def stiff_profile():
    """rho = 1, mu = 1 + exp(-y): globally negative monotonicity."""
    return sw.from_callables(rho_one, mu_exp_bump, 1.0, 1.0)


@pytest.fixture(scope="session")
def constant_profile():
    return sw.from_registry("constant", {"rho": 1.0, "mu": 1.0})


@pytest.fixture(scope="session")
def power_profile():
    """rho = 1 + 3 (1+y)^{-3/2}, mu = 1: oscillatory limit-ray equation."""
    return sw.from_registry("power_density", {"rho_inf": 1.0, "c": 3.0, "p": 1.5})


@pytest.fixture(scope="session")
def layer_profile():
    """Soft layer over a homogeneous substrate, constant beyond y = 2."""
    return sw.from_registry("smoothed_layer", {
        "rho_1": 2.5, "mu_1": 1.0, "rho_s": 1.0, "mu_s": 1.0,
        "y_s": 2.0, "width": 1.0})


def rk4_uw(gamma, mu, u0, w0, y0, y1, n=200000):
    """Fixed-step classical RK4 on the first-order (u, w) system.

    Independent of the package's integrators on purpose: this is the
    dual-formulation oracle for the phase solvers.
    """
    h = (y1 - y0) / n
    u, w = float(u0), float(w0)
    y = y0

    def f(yy, uu, ww):
        return ww / mu(yy), -gamma(yy) * uu

    for _ in range(n):
        k1u, k1w = f(y, u, w)
        k2u, k2w = f(y + h / 2, u + h / 2 * k1u, w + h / 2 * k1w)
        k3u, k3w = f(y + h / 2, u + h / 2 * k2u, w + h / 2 * k2w)
        k4u, k4w = f(y + h, u + h * k3u, w + h * k3w)
        u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u)
        w += h / 6 * (k1w + 2 * k2w + 2 * k3w + k4w)
        # renormalize to keep the direction in range; the angle only
        # depends on the direction of (w, u)
        s = math.hypot(u, w)
        if s > 1e100 or s < 1e-100:
            u, w = u / s, w / s
        y += h
    return u, w


def lift_from_samples(u, w, phi0):
    """Continuous angle lift of sampled (w, u), pinned to phi0 at the start."""
    raw = np.unwrap(np.arctan2(u, w))
    return raw + (phi0 - raw[0])
