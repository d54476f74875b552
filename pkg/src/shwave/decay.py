"""Construction of the decaying tail solution.

When the coefficient limit gamma_inf = Omega*rho_inf - K*mu_inf is
negative, the equation has a one-dimensional family of solutions
vanishing at infinity.  Its phase angle is recovered by (i) picking a
matching depth y_bar behind the last sign change of gamma_A, (ii)
picking a tail-start depth Y where the coefficient is close to its
limit, (iii) seeding the angle with the frozen-coefficient decaying
direction at Y and integrating the phase equation backward to y_bar.
The decay direction is an attractor of the backward flow, so the
seeding error shrinks exponentially; a tail-window doubling re-solve
verifies that the delivered angle is insensitive to the truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (NoNegativeTailError, TailConvergenceError,
                     TailSelectionError, ThresholdError)
from .prufer import (DEFAULT_SETTINGS, IntegratorSettings,
                     _gamma_accessor, integrate_phase)
from .profile import _as_param

NEAR_THRESHOLD_DELTA = 1e-9     # reject Omega above (1 - delta) * cutoff
DEFAULT_MARGIN = 0.5            # depth margin behind the last sign change
DEFAULT_Y_BAR = 1.0             # matching depth when gamma_A < 0 everywhere
TAIL_ANGLE_TOL = 1e-8           # doubling-robustness tolerance on phi+(y_bar)
_CONTRACTION_BUDGET = 14.0      # integral of the decay rate over [y_bar, Y]


@dataclass(frozen=True)
class MatchingConfig:
    """Matching depth, tail-start depth and the tolerances that chose them."""

    y_bar: float
    y_tail: float
    tail_rel_tol: float = 1e-8
    tail_residual_tol: float = 1e-8
    strict_tail: bool = True    # False when the contraction fallback chose Y

    def __post_init__(self):
        if not (0 < self.y_bar <= self.y_tail):
            raise ValueError("need 0 < y_bar <= y_tail")

    def stretched(self, factor: float) -> "MatchingConfig":
        """Same matching depth with the tail window scaled by ``factor``."""
        return MatchingConfig(
            y_bar=self.y_bar,
            y_tail=self.y_bar + factor * (self.y_tail - self.y_bar),
            tail_rel_tol=self.tail_rel_tol,
            tail_residual_tol=self.tail_residual_tol,
            strict_tail=self.strict_tail)


def _gamma_inf(problem, A):
    p_inf, q_inf = problem.coef_pair_inf
    return A.Omega * p_inf - A.K * q_inf


def _guard_threshold(problem, A):
    """Raise if Omega sits inside the guard band below the cutoff."""
    p_inf, q_inf = problem.coef_pair_inf
    cutoff = A.K * q_inf / p_inf
    if A.Omega > cutoff * (1.0 - NEAR_THRESHOLD_DELTA):
        raise ThresholdError(
            "Omega=%.17g is within the guard band of the cutoff %.17g; "
            "the decaying direction is numerically indistinct there"
            % (A.Omega, cutoff))


def select_matching_point(problem, A, margin: float = DEFAULT_MARGIN,
                          y_cap: float = 1e8) -> float:
    """Depth y_bar with gamma_A < 0 on [y_bar, infinity).

    Scans outward for the last sign change of gamma_A, adds a margin,
    and verifies negativity on a fine grid behind the chosen depth.
    The scan stops only once a whole window shows |beta| < |gamma_inf|/2
    with no nonnegative values, which certifies gamma_A < 0 from there
    on (beta decays to zero).  If gamma_A is negative from the surface
    the default interior depth is returned so the mismatch is never
    evaluated on the boundary.
    """
    A = _as_param(A)
    _guard_threshold(problem, A)
    ginf = _gamma_inf(problem, A)
    if ginf >= 0:
        raise ThresholdError("gamma_inf >= 0: no decaying tail exists")

    def gamma(y):
        p, q = problem.coef_pair(np.asarray(y, dtype=float))
        return A.Omega * p - A.K * q

    last_nonneg = None
    a, b = 0.0, 16.0
    while True:
        if b - a <= 64.0:
            ys = np.linspace(a, b, max(int((b - a) / 0.01), 64) + 1)
        else:
            ys = np.geomspace(max(a, 1e-3), b, 4096)
        g = gamma(ys)
        nonneg = np.nonzero(g >= 0)[0]
        if len(nonneg):
            seen = float(ys[nonneg[-1]])
            last_nonneg = seen if last_nonneg is None else max(last_nonneg, seen)
        settled = np.max(np.abs(g - ginf)) < 0.5 * abs(ginf)
        if settled and not len(nonneg) and (last_nonneg is None or a >= last_nonneg):
            break
        a, b = b, 2.0 * b
        if b > y_cap:
            raise NoNegativeTailError(
                "gamma_A keeps returning to >= 0 up to y=%.3g; parameters too "
                "close to or above the limit ray" % y_cap)

    if last_nonneg is None:
        y_bar = DEFAULT_Y_BAR
    else:
        y_bar = last_nonneg + margin
    # verification pass behind y_bar
    step = min(0.01, margin / 10.0)
    for _ in range(64):
        ys = np.arange(y_bar, y_bar + 5.0 + step, step)
        g = gamma(ys)
        bad = np.nonzero(g >= 0)[0]
        if not len(bad):
            return float(y_bar)
        y_bar = float(ys[bad[-1]]) + margin
        if y_bar > y_cap:
            break
    raise NoNegativeTailError(
        "could not verify a negative tail behind y=%.6g" % y_bar)


def select_tail_start(problem, A, cfg: Optional[MatchingConfig] = None,
                      y_bar: Optional[float] = None,
                      tail_rel_tol: float = 1e-8,
                      tail_residual_tol: float = 1e-8):
    """Tail-start depth Y where the coefficient has settled to its limit.

    Primary criterion: the smallest scanned Y >= y_bar with
    |beta(Y)| <= tail_rel_tol*|gamma_inf| and an estimated remaining
    integral of |beta| below tail_residual_tol.  For exactly-clamped
    profiles Y = y_max_data suffices (beta vanishes beyond).  For
    slowly decaying tails (power laws) the literal integral criterion
    can be unattainable at any reachable depth; the fallback then picks
    the smallest Y whose backward contraction budget
    integral of sqrt(-gamma/mu) over [y_bar, Y] exceeds a fixed budget,
    which the doubling re-solve in :func:`decaying_phase` validates.

    Returns (Y, strict) where ``strict`` records which criterion fired.
    """
    A = _as_param(A)
    if cfg is not None:
        y_bar = cfg.y_bar
        tail_rel_tol = cfg.tail_rel_tol
        tail_residual_tol = cfg.tail_residual_tol
    if y_bar is None:
        y_bar = select_matching_point(problem, A)
    ginf = _gamma_inf(problem, A)
    if ginf >= 0:
        raise ThresholdError("gamma_inf >= 0: no decaying tail exists")

    tail_from = getattr(problem, "tail_constant_from", None)
    if tail_from is not None:
        return max(float(y_bar), float(tail_from)), True

    def beta_abs(y):
        p, q = problem.coef_pair(np.asarray(y, dtype=float))
        return np.abs(A.Omega * p - A.K * q - ginf)

    def gamma(y):
        p, q = problem.coef_pair(np.asarray(y, dtype=float))
        return A.Omega * p - A.K * q

    y_scan_max = max(1000.0, 32.0 * (y_bar + 1.0))
    fine = np.arange(y_bar, min(y_bar + 64.0, y_scan_max), 0.05)
    coarse = np.geomspace(max(y_bar + 64.0, 1.0), y_scan_max, 512) \
        if y_scan_max > y_bar + 64.0 else np.array([])
    ys = np.concatenate([fine, coarse])
    bvals = beta_abs(ys)
    candidates = np.nonzero(bvals <= tail_rel_tol * abs(ginf))[0]
    if len(candidates) > 32:
        picks = np.unique(np.geomspace(1, len(candidates), 32).astype(int) - 1)
        candidates = candidates[picks]
    for i in candidates:
        Y = float(ys[i])
        # residual estimate on doubling windows with geometric extrapolation
        w1 = _quad(beta_abs, Y, 2 * Y)
        w2 = _quad(beta_abs, 2 * Y, 4 * Y)
        if w1 <= 1e-300 or w2 <= 1e-300:
            residual = w1 + w2
        elif w2 < 0.95 * w1:
            residual = w1 + w2 / (1.0 - w2 / w1)
        else:
            residual = math.inf
        if residual <= tail_residual_tol:
            return Y, True

    # contraction-budget fallback
    g = gamma(ys)
    kappa = np.sqrt(np.maximum(-g, 0.0) /
                    np.asarray(problem.stiffness(ys), dtype=float))
    budget = np.concatenate([[0.0], np.cumsum(0.5 * (kappa[1:] + kappa[:-1])
                                              * np.diff(ys))])
    feasible = (budget >= _CONTRACTION_BUDGET) & (bvals <= 0.25 * abs(ginf))
    idx = np.nonzero(feasible)[0]
    if len(idx):
        return float(ys[idx[0]]), False

    raise TailSelectionError(
        "no tail-start depth up to y=%.3g meets the closeness tolerances "
        "(rel %.1e, residual %.1e); increase y_max_data or loosen the "
        "tolerances" % (y_scan_max, tail_rel_tol, tail_residual_tol))


def _quad(f, a, b, n=513):
    ys = np.linspace(a, b, n)
    return float(np.trapezoid(f(ys), ys))


def _verify_negative(problem, A, y_bar, y_tail):
    head = np.arange(y_bar, min(y_bar + 5.0, y_tail), 0.01)
    rest = np.geomspace(max(y_bar + 5.0, 1e-3), y_tail, 2048) \
        if y_tail > y_bar + 5.0 else np.array([])
    ys = np.concatenate([head, rest, [y_tail]])
    p, q = problem.coef_pair(ys)
    g = A.Omega * p - A.K * q
    if np.any(g >= 0):
        raise NoNegativeTailError(
            "gamma_A is nonnegative inside the matching window "
            "[%.6g, %.6g]" % (y_bar, y_tail))


def matching_config(problem, A, tail_rel_tol: float = 1e-8,
                    tail_residual_tol: float = 1e-8,
                    margin: float = DEFAULT_MARGIN) -> MatchingConfig:
    """Select y_bar and Y for a parameter point (see the module docstring)."""
    A = _as_param(A)
    y_bar = select_matching_point(problem, A, margin=margin)
    y_tail, strict = select_tail_start(
        problem, A, y_bar=y_bar, tail_rel_tol=tail_rel_tol,
        tail_residual_tol=tail_residual_tol)
    y_tail = max(y_tail, y_bar)
    _verify_negative(problem, A, y_bar, y_tail)
    return MatchingConfig(y_bar=y_bar, y_tail=y_tail,
                          tail_rel_tol=tail_rel_tol,
                          tail_residual_tol=tail_residual_tol,
                          strict_tail=strict)


def decaying_phase_at_tail(problem, A, Y: float) -> float:
    """Frozen-coefficient decaying angle at the tail start.

    With coefficients frozen at Y the decaying solution is
    u = exp(-kappa*y), kappa = sqrt(-gamma_A(Y)/mu(Y)), so
    w/u = -sqrt(-gamma_A(Y)*mu(Y)) and the angle lands in (pi/2, pi).
    """
    A = _as_param(A)
    p, q = problem.coef_pair(float(Y))
    g = A.Omega * p - A.K * q
    if g >= 0:
        raise ThresholdError("gamma_A(Y) must be negative at the tail start")
    s = problem.stiffness(float(Y))
    return math.atan2(1.0, -math.sqrt(-g * s))


def _backward_phase(problem, A, y_tail, y_bar, settings, with_path=False):
    phi_Y = decaying_phase_at_tail(problem, A, y_tail)
    gamma = _gamma_accessor(problem, A)
    return integrate_phase(gamma, problem.stiffness, phi_Y, y_tail, y_bar,
                           settings=settings, with_path=with_path)


def decaying_phase(problem, A, cfg: MatchingConfig,
                   settings: Optional[IntegratorSettings] = None,
                   with_path: bool = False, max_retries: int = 3):
    """Phase angle of the decaying solution at the matching depth.

    Backward-integrates from the frozen-coefficient seed at y_tail.
    The lifted angle is confirmed to stay inside (pi/2, pi) - the
    invariant band of decaying solutions over a negative-coefficient
    tail - and, unless the profile is exactly constant beyond y_tail,
    a re-solve from a doubled tail window must reproduce phi+(y_bar)
    to within 1e-8, else the window is enlarged and retried.
    """
    A = _as_param(A)
    settings = settings or DEFAULT_SETTINGS
    _guard_threshold(problem, A)
    cfg_cur = cfg
    exact_tail = False
    tail_from = getattr(problem, "tail_constant_from", None)
    if tail_from is not None and cfg.y_tail >= tail_from:
        exact_tail = True

    tol = max(TAIL_ANGLE_TOL, 100.0 * settings.rel_tol)
    for attempt in range(max_retries + 1):
        out = _backward_phase(problem, A, cfg_cur.y_tail, cfg_cur.y_bar,
                              settings, with_path=with_path)
        state, path = out if with_path else (out, None)
        band_slack = 1e-9
        if not (math.pi / 2 - band_slack < state.phi < math.pi + band_slack):
            raise TailConvergenceError(
                "decaying angle left the (pi/2, pi) band: phi=%.12g "
                "at y_bar=%.6g" % (state.phi, cfg_cur.y_bar))
        if exact_tail:
            return (state, path) if with_path else state
        check = _backward_phase(problem, A,
                                cfg_cur.stretched(2.0).y_tail, cfg_cur.y_bar,
                                settings, with_path=False)
        if abs(check.phi - state.phi) <= tol:
            return (state, path) if with_path else state
        cfg_cur = cfg_cur.stretched(2.0)
    raise TailConvergenceError(
        "tail-window doubling failed to stabilize phi+ after %d retries "
        "(last delta %.3e)" % (max_retries, abs(check.phi - state.phi)))


def decaying_phase_batch(problem, K, omegas, cfg: MatchingConfig,
                         settings: Optional[IntegratorSettings] = None,
                         y_bars=None, check: bool = True):
    """Vectorized decaying angle at y_bar for many frequencies at one K.

    All members share the worst-case (largest-Omega) tail window, which
    is valid because gamma decreases pointwise as Omega does.  With
    ``y_bars`` given, each member's angle is read off at its own
    matching depth (the backward sweep covers the hull).  The doubling
    robustness check runs on the whole batch at once; ``check=False``
    skips it for repeat sweeps over a window that already validated.
    """
    from .prufer import phase_batch

    settings = settings or DEFAULT_SETTINGS
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))

    def gamma_vec(y, _om=omegas):
        p, q = problem.coef_pair(y)
        return _om * p - K * q

    def seed(y_tail):
        pY, qY = problem.coef_pair(y_tail)
        g = omegas * pY - K * qY
        if np.any(g >= 0):
            raise ThresholdError("gamma_A(Y) must be negative at the tail start")
        return np.arctan2(1.0, -np.sqrt(-g * problem.stiffness(y_tail)))

    exact_tail = False
    tail_from = getattr(problem, "tail_constant_from", None)
    if tail_from is not None and cfg.y_tail >= tail_from:
        exact_tail = True

    # at loose integration tolerances the two sweeps differ by
    # integration error, not truncation, so the bar scales with rel_tol
    tol = max(TAIL_ANGLE_TOL, 100.0 * settings.rel_tol)
    y_target = cfg.y_bar if y_bars is None else min(float(np.min(y_bars)),
                                                    cfg.y_bar)
    cfg_cur = cfg
    for attempt in range(4):
        phi = phase_batch(gamma_vec, problem.stiffness, seed(cfg_cur.y_tail),
                          cfg_cur.y_tail, y_target, settings=settings,
                          read_at=y_bars)
        if exact_tail or not check:
            return phi
        phi2 = phase_batch(gamma_vec, problem.stiffness,
                           seed(cfg_cur.stretched(2.0).y_tail),
                           cfg_cur.stretched(2.0).y_tail, y_target,
                           settings=settings, read_at=y_bars)
        if float(np.max(np.abs(phi2 - phi))) <= tol:
            return phi
        cfg_cur = cfg_cur.stretched(2.0)
    raise TailConvergenceError("batched tail doubling failed to stabilize")
