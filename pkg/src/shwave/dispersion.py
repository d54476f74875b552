"""Mode search, branch tracing, mode-count estimate, oscillation test.

A matched surface mode at wavenumber-squared K is a frequency-squared
Omega where the lifted surface angle phi0(y_bar) and the decaying-tail
angle phi+(y_bar) agree modulo pi.  The mismatch

    Phi(Omega) = phi0(y_bar; Omega) - phi+(y_bar; Omega)

is strictly increasing in Omega at a fixed matching depth (the forward
angle grows with the coefficient, the decaying angle shrinks), so each
crossing of an integer multiple of pi is a certified bracket, refined
by bisection.  The integer n at the root indexes the mode: the matched
tail angle lies in ((n + 1/2)pi, (n + 1)pi), i.e. mode m = n + 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import liouville
from .decay import (DEFAULT_MARGIN, DEFAULT_Y_BAR, NEAR_THRESHOLD_DELTA,
                    MatchingConfig, decaying_phase_batch, matching_config)
from .errors import NoNegativeTailError, TailSelectionError
from .prufer import DEFAULT_SETTINGS, HALF_PI, IntegratorSettings, phase_batch
from .profile import (MaterialProfile, ProfileClass, _as_param,
                      admissible_interval, classify, interval_is_empty)

_REASON_GLOBAL_NEGATIVE = ("nonexistence: globally negative monotonicity "
                           "(Arg a(y) >= Arg a_inf at every depth)")
_REASON_EMPTY_INTERVAL = "nonexistence: empty admissible frequency interval"


@dataclass(frozen=True)
class Mode:
    """One matched root (K, Omega) with its matching diagnostics."""

    K: float
    Omega: float
    m: int
    phi_surface: float
    phi_decay: float
    residual: float
    matching: MatchingConfig
    flag: Optional[str] = None

    @property
    def k(self) -> float:
        return math.sqrt(self.K)

    @property
    def omega(self) -> float:
        return math.sqrt(self.Omega)


@dataclass
class ModeSearchResult:
    """All modes found at one K, sorted by Omega ascending.

    ``scan_ceiling`` is the largest frequency actually examined; it can
    sit below the cutoff guard band when the decaying tail becomes
    numerically unreachable there (possible only in regimes where no
    modes accumulate toward the cutoff).
    """

    K: float
    modes: list
    interval: tuple
    nonexistence_reason: Optional[str] = None
    truncated: bool = False
    scan_ceiling: Optional[float] = None

    def __iter__(self):
        return iter(self.modes)

    def __len__(self):
        return len(self.modes)


@dataclass(frozen=True)
class Branch:
    """One dispersion curve: points (k, omega) of a fixed mode index."""

    m: int
    points: tuple          # ((k, omega), ...) sorted by k
    gaps: tuple            # k values >= first appearance with the mode missing


@dataclass(frozen=True)
class SearchOptions:
    """Knobs of find_modes; defaults implement the documented strategy."""

    max_modes: int = 64
    omega_grid_n: int = 256
    root_tol: float = 1e-10          # relative, in Omega
    residual_tol: float = 1e-8       # absolute, in angle
    settings: IntegratorSettings = field(default_factory=IntegratorSettings)
    scan_settings: Optional[IntegratorSettings] = None
    tail_stretch: float = 1.0        # >1 widens the tail window (robustness runs)
    space: str = "y"                 # "y" or "tau"
    seeds: Optional[Sequence[float]] = None
    max_bisect: int = 80


DEFAULT_OPTIONS = SearchOptions()


def _problem_for(profile: MaterialProfile, space: str):
    if space == "y":
        return profile
    if space == "tau":
        return liouville.transform(profile)
    raise ValueError("space must be 'y' or 'tau'")


def _mismatch_batch(problem, K, omegas, cfg: MatchingConfig,
                    settings: IntegratorSettings, y_bars=None,
                    tail_check: bool = True):
    """(Phi, phi0, phi_plus) for a vector of frequencies at one K.

    All members share the tail window of cfg, which must be valid for
    the largest Omega in the batch (it then covers the smaller ones).
    ``y_bars`` optionally assigns each member its own matching depth;
    both sweeps then use dense output and are read off per member.
    """
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))

    def gamma_vec(y, _om=omegas):
        p, q = problem.coef_pair(y)
        return _om * p - K * q

    phi0 = phase_batch(gamma_vec, problem.stiffness,
                       np.full(omegas.shape, HALF_PI), 0.0, cfg.y_bar,
                       settings=settings, read_at=y_bars)
    phi_plus = decaying_phase_batch(problem, K, omegas, cfg, settings=settings,
                                    y_bars=y_bars, check=tail_check)
    return phi0 - phi_plus, phi0, phi_plus


def mismatch(profile, K, Omega, cfg: Optional[MatchingConfig] = None,
             settings: Optional[IntegratorSettings] = None,
             space: str = "y") -> float:
    """Lifted angle difference Phi(Omega); roots on pi*Z are matched modes."""
    problem = _problem_for(profile, space) if isinstance(profile, MaterialProfile) \
        else profile
    A = _as_param((K, Omega))
    settings = settings or DEFAULT_SETTINGS
    if cfg is None:
        cfg = matching_config(problem, A)
    phi, _, _ = _mismatch_batch(problem, K, np.array([Omega]), cfg, settings)
    return float(phi[0])


def _grow_cfg(problem, K, omega_top, cfg_prev: Optional[MatchingConfig],
              tail_stretch: float) -> MatchingConfig:
    """Worst-case matching window for everything scanned so far at this K.

    Depths only ever grow while the scan climbs toward the cutoff, so
    every bracket refinement reuses a window that is valid for it.
    """
    cfg = matching_config(problem, (K, omega_top))
    if tail_stretch != 1.0:
        cfg = cfg.stretched(tail_stretch)
    if cfg_prev is not None:
        y_bar = max(cfg.y_bar, cfg_prev.y_bar)
        y_tail = max(cfg.y_tail, cfg_prev.y_tail, y_bar)
        cfg = MatchingConfig(y_bar=y_bar, y_tail=y_tail,
                             tail_rel_tol=cfg.tail_rel_tol,
                             tail_residual_tol=cfg.tail_residual_tol,
                             strict_tail=cfg.strict_tail and cfg_prev.strict_tail)
    return cfg


def find_modes(profile: MaterialProfile, K: float,
               opts: SearchOptions = DEFAULT_OPTIONS,
               classification: Optional[ProfileClass] = None) -> ModeSearchResult:
    """All trapped-mode frequencies at one squared wavenumber.

    The admissible interval is scanned on a uniform grid plus a
    geometric refinement toward the cutoff (where high modes
    accumulate); every upward crossing of Phi through a multiple of pi
    is bisected to ``root_tol`` relative in Omega.  Profiles whose
    material angle never drops below its limit are rejected without
    solving, and frequencies at or below K*min(mu/rho) are never
    scanned - no modes can live there.
    """
    if K <= 0:
        raise ValueError("K must be positive")
    cls = classification or classify(profile)
    lo, hi = admissible_interval(profile, K, cls)
    if cls.global_negative:
        return ModeSearchResult(K=K, modes=[], interval=(lo, hi),
                                nonexistence_reason=_REASON_GLOBAL_NEGATIVE)
    if interval_is_empty(lo, hi):
        return ModeSearchResult(K=K, modes=[], interval=(lo, hi),
                                nonexistence_reason=_REASON_EMPTY_INTERVAL)

    problem = _problem_for(profile, opts.space)
    settings = opts.settings
    scan_settings = opts.scan_settings or IntegratorSettings(
        rel_tol=max(settings.rel_tol, 1e-8), abs_tol=max(settings.abs_tol, 1e-10),
        max_step=settings.max_step)

    cap = hi * (1.0 - NEAR_THRESHOLD_DELTA)
    width = hi - lo
    n = max(opts.omega_grid_n, 8)
    uniform = lo + width * np.arange(1, n) / n
    head = np.array([lo + width * 1e-6])
    uniform = np.concatenate([head, uniform[uniform < cap]])
    seeds = np.asarray(opts.seeds, dtype=float) if opts.seeds is not None else None
    if seeds is not None and len(seeds):
        extra = []
        for s in seeds:
            extra.extend([s * (1 - 2e-3), s * (1 + 2e-3)])
        extra = np.array([e for e in extra if lo < e < cap])
        uniform = np.unique(np.concatenate([uniform, extra]))

    gap0 = hi - uniform[-1]
    geo = []
    g = gap0 * 0.5
    while hi - g > uniform[-1] and g / hi > NEAR_THRESHOLD_DELTA:
        geo.append(hi - g)
        g *= 0.5
    chunks = [uniform]
    if geo:
        chunks.append(np.asarray(geo))

    modes: list[Mode] = []
    cfg_cache: Optional[MatchingConfig] = None
    prev_omega = None
    prev_phi = None
    truncated = False
    scan_ceiling = None
    hit_tail_limit = False

    for chunk in chunks:
        if len(modes) >= opts.max_modes or hit_tail_limit:
            truncated = truncated or len(modes) >= opts.max_modes
            break
        # approaching the cutoff the decay length diverges; when no
        # reachable tail-start depth exists for the top of the chunk,
        # scan the feasible prefix and stop there (modes can hide past
        # that point only in the oscillatory-accumulation regime, whose
        # deeper matching windows keep the tail reachable)
        try:
            cfg_cache = _grow_cfg(problem, K, float(chunk[-1]), cfg_cache,
                                  opts.tail_stretch)
        except (TailSelectionError, NoNegativeTailError):
            feasible = None
            for j in range(len(chunk) - 2, -1, -1):
                try:
                    cfg_cache = _grow_cfg(problem, K, float(chunk[j]),
                                          cfg_cache, opts.tail_stretch)
                    feasible = j
                    break
                except (TailSelectionError, NoNegativeTailError):
                    continue
            if feasible is None:
                if cfg_cache is None:
                    raise
                break
            chunk = chunk[: feasible + 1]
            hit_tail_limit = True
        scan_ceiling = float(chunk[-1])
        phi_chunk, _, _ = _mismatch_batch(problem, K, chunk, cfg_cache,
                                          scan_settings)
        omegas = chunk
        phis = phi_chunk
        if prev_omega is not None:
            omegas = np.concatenate([[prev_omega], omegas])
            phis = np.concatenate([[prev_phi], phis])
        brackets = []
        noisy_flags = []
        for i in range(len(omegas) - 1):
            fa, fb = phis[i], phis[i + 1]
            pair_noisy = bool(fb < fa - 1e-6)
            n_lo = math.floor(fa / math.pi) + 1
            n_hi = math.floor(fb / math.pi)
            for nn in range(max(n_lo, 0), n_hi + 1):
                brackets.append((float(omegas[i]), float(omegas[i + 1]), nn,
                                 float(fa), float(fb)))
                noisy_flags.append(pair_noisy)
        prev_omega = float(omegas[-1])
        prev_phi = float(phis[-1])
        room = opts.max_modes - len(modes)
        if len(brackets) > room:
            truncated = True
            brackets = brackets[:room]
            noisy_flags = noisy_flags[:room]
        if brackets:
            modes.extend(_refine_brackets(problem, K, brackets, cfg_cache,
                                          settings, opts, noisy_flags))

    # dedupe by mode index, keep the smallest residual
    by_m: dict[int, Mode] = {}
    for md in modes:
        cur = by_m.get(md.m)
        if cur is None or md.residual < cur.residual:
            by_m[md.m] = md
    out = sorted(by_m.values(), key=lambda md: md.Omega)
    if len(out) > opts.max_modes:
        out = out[: opts.max_modes]
        truncated = True
    return ModeSearchResult(K=K, modes=out, interval=(lo, hi),
                            truncated=truncated, scan_ceiling=scan_ceiling)


def _polish_depths(problem, K, omega_tops, cfg: MatchingConfig):
    """Per-bracket matching depths, kept close to each turning point.

    The mismatch step between modes sharpens like exp(-2 * integral of
    the decay rate over [turning point, y_bar]); the deep worst-case
    depth of the scan makes low modes at large K exponentially
    ill-conditioned in the residual.  Each bracket therefore matches
    just behind its own last sign change of gamma, with the margin
    shrunk so the contraction integral over it stays O(1).  All
    brackets are resolved on one shared grid; any bracket whose shallow
    depth cannot be verified negative falls back to the scan depth.
    """
    omega_tops = np.asarray(omega_tops, dtype=float)
    hi = cfg.y_bar + 1.0
    ys = np.concatenate([np.linspace(0.0, min(8.0, hi), 2048, endpoint=False),
                         np.linspace(min(8.0, hi), hi, 2048)]) \
        if hi > 8.0 else np.linspace(0.0, hi, 4096)
    p, q = problem.coef_pair(ys)
    G = omega_tops[:, None] * p[None, :] - K * q[None, :]
    nonneg = G >= 0.0
    any_nonneg = np.any(nonneg, axis=1)
    # index of the last nonnegative grid point per bracket
    last_idx = ys.size - 1 - np.argmax(nonneg[:, ::-1], axis=1)

    out = np.full(omega_tops.shape, min(DEFAULT_Y_BAR, cfg.y_bar))
    for j in np.nonzero(any_nonneg)[0]:
        i = last_idx[j]
        y_star = ys[i]
        i2 = min(i + 16, ys.size - 1)
        slope = abs(G[j, i2] - G[j, i]) / max(ys[i2] - ys[i], 1e-9)
        margin = min(DEFAULT_MARGIN,
                     max(0.05, (2.25 / max(math.sqrt(slope), 1e-9)) ** (2.0 / 3.0)))
        y_bar = y_star + margin
        tail = ys >= y_bar
        if np.any(G[j, tail] >= 0) or not np.any(tail):
            y_bar = min(y_star + DEFAULT_MARGIN, cfg.y_bar)
        out[j] = min(y_bar, cfg.y_bar)
    return out


def _refine_brackets(problem, K, brackets, cfg, settings, opts, noisy_flags):
    """Bisect all pending brackets simultaneously, one batch per sweep.

    Each bracket gets its own matching depth near its turning point
    (see _polish_depth); the shared backward sweep starts at the
    worst-case tail depth and every member is read off at its own
    y_bar, so one vector integration per bisection step serves all
    pending roots.
    """
    a = np.array([b[0] for b in brackets])
    b_ = np.array([b[1] for b in brackets])
    targets = np.array([b[2] * math.pi for b in brackets])
    ns = [b[2] for b in brackets]
    y_bars = _polish_depths(problem, K, b_, cfg)
    last_phi0 = np.zeros(len(brackets))
    last_phip = np.zeros(len(brackets))
    resid = np.full(len(brackets), np.inf)

    eps = np.finfo(float).eps
    for it in range(opts.max_bisect):
        widths = b_ - a
        at_float_limit = widths <= 8 * eps * np.abs(b_)
        active = ((widths > opts.root_tol * np.maximum(np.abs(a), np.abs(b_)))
                  | (resid > opts.residual_tol)) & ~at_float_limit
        if not np.any(active):
            break
        mids = 0.5 * (a + b_)
        phi, phi0, phip = _mismatch_batch(problem, K, mids[active], cfg,
                                          settings, y_bars=y_bars[active],
                                          tail_check=(it == 0))
        g = phi - targets[active]
        idx = np.nonzero(active)[0]
        below = g < 0
        a[idx[below]] = mids[idx[below]]
        b_[idx[~below]] = mids[idx[~below]]
        resid[idx] = np.abs(g)
        last_phi0[idx] = phi0
        last_phip[idx] = phip

    out = []
    for j, nn in enumerate(ns):
        omega = 0.5 * (a[j] + b_[j])
        flag = None
        if resid[j] > opts.residual_tol:
            flag = "residual above tolerance"
        if noisy_flags[j]:
            flag = (flag + "; " if flag else "") + "non-monotone scan values"
        mode_cfg = MatchingConfig(
            y_bar=float(y_bars[j]), y_tail=cfg.y_tail,
            tail_rel_tol=cfg.tail_rel_tol,
            tail_residual_tol=cfg.tail_residual_tol,
            strict_tail=cfg.strict_tail)
        out.append(Mode(K=K, Omega=float(omega), m=nn + 1,
                        phi_surface=float(last_phi0[j]),
                        phi_decay=float(last_phip[j]),
                        residual=float(resid[j]), matching=mode_cfg, flag=flag))
    return out


def trace_branches(profile: MaterialProfile, k_grid,
                   opts: SearchOptions = DEFAULT_OPTIONS, workers: int = 1,
                   classification: Optional[ProfileClass] = None):
    """Dispersion branches over a strictly increasing wavenumber grid.

    Runs find_modes at every k (in parallel when ``workers > 1``),
    associates modes across k by their index m, and warm-starts each
    serial step with the previous roots scaled by the K ratio.  Results
    are assembled deterministically regardless of worker count.
    """
    k_grid = np.asarray(k_grid, dtype=float)
    if np.any(k_grid <= 0) or np.any(np.diff(k_grid) <= 0):
        raise ValueError("k_grid must be positive and strictly increasing")
    cls = classification or classify(profile)

    # Per-k searches are independent and share nothing mutable.  No
    # state is carried between wavenumbers, so serial and parallel
    # execution produce bit-identical results.
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        args = [(profile, float(k) ** 2, opts, cls) for k in k_grid]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_find_modes_star, args))
    else:
        results = [find_modes(profile, float(k) ** 2, opts, classification=cls)
                   for k in k_grid]

    by_m: dict[int, list] = {}
    found_at: dict[int, set] = {}
    for k, res in zip(k_grid, results):
        for md in res.modes:
            by_m.setdefault(md.m, []).append((float(k), md.omega))
            found_at.setdefault(md.m, set()).add(float(k))
    branches = []
    for m in sorted(by_m):
        pts = tuple(sorted(by_m[m]))
        first_k = pts[0][0]
        gaps = tuple(float(k) for k in k_grid
                     if k >= first_k and float(k) not in found_at[m])
        branches.append(Branch(m=m, points=pts, gaps=gaps))
    return branches, results


def _find_modes_star(args):
    profile, K, opts, cls = args
    return find_modes(profile, K, opts, classification=cls)


# ---------------------------------------------------------------------------
# mode-count estimate and oscillation test


def estimate_mode_count(profile: MaterialProfile, K: float,
                        tiny: float = 1e-14):
    """Phase-integral estimate of the number of modes at wavenumber^2 K.

    Evaluates (1/pi) * integral of sqrt(max(gamma_{A_inf}, 0)/mu) dy at
    the limit-ray parameter A_inf = (K, K*mu_inf/rho_inf); the division
    by mu renders the count invariant under the coordinate substitution
    that removes a variable stiffness.  Returns +inf when the integrand
    fails to decay (the oscillatory regime has unbounded counts).
    """
    if K <= 0:
        raise ValueError("K must be positive")
    omega_bar = K * profile.mu_inf / profile.rho_inf

    def f(y):
        rho, mu = profile.eval(np.asarray(y, dtype=float))
        g = omega_bar * rho - K * mu
        return np.sqrt(np.maximum(g, 0.0) / mu)

    # doubling-window divergence screen
    windows = []
    a = 1.0
    for _ in range(24):
        windows.append(_panel_integral(f, a, 2 * a))
        a *= 2.0
    windows = np.asarray(windows)
    scale = max(float(np.max(windows)), 1e-300)
    for j in range(len(windows) - 3):
        if windows[j + 3] > 0.5 * windows[j] and windows[j + 3] > 1e-10 * scale:
            return math.inf
    # truncation depth: integrand below `tiny` and negligible windows
    y_cut = 2.0 * a
    ys = np.geomspace(1.0, y_cut, 512)
    vals = f(ys)
    below = np.nonzero(vals >= tiny)[0]
    y_tr = float(ys[below[-1]] * 1.05) if len(below) else 2.0
    turning = _sign_changes(lambda y: omega_bar * profile.eval(y)[0]
                            - K * profile.eval(y)[1], 0.0, y_tr)
    pieces = [0.0] + turning + [y_tr]
    total = 0.0
    for aa, bb in zip(pieces[:-1], pieces[1:]):
        total += _adaptive_integral(f, aa, bb, tol=1e-11)
    return total / math.pi


def _panel_integral(f, a, b, n=256):
    ys = np.linspace(a, b, n + 1)
    return float(np.trapezoid(f(ys), ys))


def _sign_changes(g, a, b, n=4096):
    ys = np.linspace(a, b, n)
    vals = np.asarray(g(ys))
    s = np.signbit(vals)
    idx = np.nonzero(s[1:] != s[:-1])[0]
    return [float(0.5 * (ys[i] + ys[i + 1])) for i in idx]


def _adaptive_integral(f, a, b, tol=1e-11, depth=0):
    from numpy.polynomial.legendre import leggauss

    if not hasattr(_adaptive_integral, "_nodes"):
        _adaptive_integral._nodes = (leggauss(10), leggauss(20))
    (x1, w1), (x2, w2) = _adaptive_integral._nodes
    half, mid = 0.5 * (b - a), 0.5 * (a + b)
    c = half * float(np.dot(w1, f(mid + half * x1)))
    fine = half * float(np.dot(w2, f(mid + half * x2)))
    if abs(fine - c) <= tol * max(1.0, abs(fine)) or depth > 48:
        return fine
    m = 0.5 * (a + b)
    return (_adaptive_integral(f, a, m, tol, depth + 1)
            + _adaptive_integral(f, m, b, tol, depth + 1))


@dataclass(frozen=True)
class OscillationVerdict:
    """Outcome of the oscillation test with its window evidence."""

    verdict: str                # "oscillatory" | "non_oscillatory" | "inconclusive"
    reason: str
    windows: tuple              # (T, I_window, V_window) rows


def oscillation_test(profile: MaterialProfile, Y_max: float = 2.0 ** 20,
                     t0: float = 1.0) -> OscillationVerdict:
    """Decide whether the limit-ray equation oscillates.

    The limit-ray coefficient gamma_hat = mu_inf*rho_hat - rho_inf*mu_hat
    must be positive on the tail with a divergent integral of
    sqrt(gamma_hat/mu) while the relative variation of log(mu*gamma_hat)
    stays subordinate to it; then every solution oscillates all the way
    to infinity and modes accumulate at the cutoff for every K.
    Evidence is gathered on doubling windows up to Y_max.
    """
    ghat = profile.limit_gamma_hat
    floor = 1e-14 * profile.mu_inf * profile.rho_inf

    rows = []          # (T, I_window, V_window, has_pos, has_neg)
    t = t0
    while 2 * t <= Y_max:
        ys = np.geomspace(t, 2 * t, 512)
        g = np.asarray(ghat(ys), dtype=float)
        mu = np.asarray(profile.mu(ys), dtype=float)
        has_pos = bool(np.any(g > floor))
        has_neg = bool(np.any(g < -floor))
        iw = float(np.trapezoid(np.sqrt(np.maximum(g, 0.0) / mu), ys))
        if np.all(g > floor):
            logv = np.log(mu * g)
            vw = float(np.sum(np.abs(np.diff(logv))))
        else:
            vw = math.inf
        rows.append((float(t), iw, vw, has_pos, has_neg))
        t *= 2.0

    tail_rows = rows[-4:]
    if any(r[4] for r in tail_rows):
        if not any(r[3] for r in rows):
            return OscillationVerdict(
                "non_oscillatory",
                "limit-ray coefficient is nonpositive on the tail",
                tuple(rows))
        return OscillationVerdict(
            "inconclusive", "limit-ray coefficient changes sign on the tail",
            tuple(rows))
    if not any(r[3] for r in rows):
        return OscillationVerdict(
            "non_oscillatory",
            "limit-ray coefficient is nonpositive on the tail",
            tuple(rows))

    iw = np.array([r[1] for r in rows])
    # convergent phase integral: windows collapse over three doublings
    converged = all(
        iw[j + 3] <= 0.5 * iw[j] or iw[j + 3] <= 1e-12 * max(iw.max(), 1e-300)
        for j in range(max(len(iw) - 6, 0), len(iw) - 3))
    if converged:
        return OscillationVerdict(
            "non_oscillatory",
            "the phase integral of the limit-ray equation converges",
            tuple(rows))
    growing = all(iw[j + 1] >= 0.8 * iw[j] for j in range(len(iw) - 4, len(iw) - 1))
    icum = np.cumsum(iw)
    vcum = np.cumsum([r[2] for r in rows])
    ratios = vcum[-4:] / icum[-4:]
    subordinate = bool(np.all(np.isfinite(ratios)) and np.all(np.diff(ratios) < 0))
    if growing and subordinate:
        return OscillationVerdict(
            "oscillatory",
            "unsaturated phase integral with subordinate relative variation",
            tuple(rows))
    return OscillationVerdict(
        "inconclusive", "window growth pattern matches neither regime",
        tuple(rows))
