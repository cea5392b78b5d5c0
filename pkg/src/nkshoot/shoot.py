"""End-to-end family solves: series handoff, integration to the
maximal-volume event, curve tracing, and the doubling/matching root solves
that produce complete solutions.

A family member is solved by evaluating its singular-orbit series at the
handoff time t*, integrating the fundamental system until the maximal-volume
event 2 lambda^4 u1 = 3 u2 v2 fires, and recording the event state together
with its wedge and hyperboloid projections. Complete solutions arise from

  doubling: a parameter where v0(T) = 0 (wedge boundary mu = lambda) or
            u0(T) = 0 (boundary lambda = 1), glued to itself;
  matching: a pair (a, b) where the alpha curve meets a reflected beta curve
            in the hyperboloid chart, glued across the common orbit.

The gluing word (which of the two time-reversing sign tables identifies the
right half with the left at the junction) is selected by testing both.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq, minimize

from .errors import (BoundaryAmbiguousError, EventNotFoundError,
                     JunctionMismatchError, NoCrossingError,
                     NoSignChangeError, RefinementStallError)
from .geometry import MaxOrbitRecord, bohm, count_v0_zeros
from .integrate import (MAX_VOLUME_EVENT, V0_ZERO_EVENT, EventSpec,
                        Trajectory, integrate)
from .series import (DEFAULT_ORDER, SeriesSolution, _pint, _pmul, _horner,
                     eval_series, family_series, handoff)
from .state import GLUE_MINUS, GLUE_PLUS, State, rhs_vec

S6_STD_TOTAL_VOLUME = 9.0 / 5.0     # normalization for the vol column
EVENT_GUARD_INTERVAL = 0.1          # uniqueness confirmation window
JUNCTION_TOL = 1e-7
MATCH_RESIDUAL = 1e-9
ROOT_XTOL = 1e-10
_REFLECTIONS = {"w1": (-1.0, 1.0), "w2": (1.0, -1.0), "both": (-1.0, -1.0),
                "none": (1.0, 1.0)}


@dataclass(frozen=True)
class FamilySolve:
    """One half of a complete solution: the series, its handoff, the
    trajectory up to the maximal-volume event, the event record, and the
    volume integral over [0, T]."""

    family: str
    param: float
    series: SeriesSolution
    t_star: float
    traj: Trajectory
    record: MaxOrbitRecord
    vol_integral: float

    def state_at(self, t: float) -> State:
        """Profile on [0, T]: series below the handoff, dense output above."""
        if t <= self.t_star:
            x = self.series.var_of_time(t)
            st, _ = eval_series(self.series, x, tol=math.inf)
            return st
        return self.traj.state_at(min(t, self.record.T))


def _series_volume_integral(sol: SeriesSolution, t_star: float) -> float:
    """Exact term-by-term integral of V = lambda mu^2 over [0, t*]."""
    n = len(sol.coeffs["lam"]) - 1
    mu2 = (_pmul(sol.coeffs["u1"], sol.coeffs["u1"], n)
           + _pmul(sol.coeffs["u2"], sol.coeffs["u2"], n)
           - _pmul(sol.coeffs["u0"], sol.coeffs["u0"], n))
    V = _pmul(sol.coeffs["lam"], mu2, n)
    if sol.var == "t":
        return _horner(_pint(V), t_star)
    # dt = lambda ds: integrate lambda^2 mu^2 in s
    integrand = _pmul(sol.coeffs["lam"], V, n)
    s_star = sol.var_of_time(t_star)
    return _horner(_pint(integrand), s_star)


def solve_family(family: str, param: float, order: int = DEFAULT_ORDER,
                 rtol: float = 1e-12, atol: float = 1e-12,
                 extra_events: tuple[EventSpec, ...] = (V0_ZERO_EVENT,),
                 guard: float = EVENT_GUARD_INTERVAL) -> FamilySolve:
    """Series handoff, integrate to the maximal-volume event, build the
    record, and confirm the event is unique over a short guard interval."""
    sol = family_series(family, param, order)
    t_star, start = handoff(sol)
    traj = integrate(start, math.pi, events=(MAX_VOLUME_EVENT, *extra_events),
                     rtol=rtol, atol=atol)
    hit = traj.first_hit("max-volume")
    if traj.termination != "event" or hit is None:
        raise EventNotFoundError(
            f"no maximal-volume event for {family}({param}); "
            f"termination = {traj.termination}")
    record = MaxOrbitRecord.from_state(family, param, hit.t, hit.state)
    _confirm_unique_maximum(hit.state, guard, rtol, atol)
    vol = _series_volume_integral(sol, t_star) + _ode_volume_integral(traj, t_star, hit.t)
    return FamilySolve(family=family, param=param, series=sol, t_star=t_star,
                       traj=traj, record=record, vol_integral=vol)


def _ode_volume_integral(traj: Trajectory, t_lo: float, t_hi: float) -> float:
    val, _ = quad(lambda t: State.from_vec(t, traj.dense(t)).volume,
                  t_lo, t_hi, epsabs=1e-12, epsrel=1e-12, limit=200)
    return val


def _confirm_unique_maximum(event_state: State, guard: float,
                            rtol: float, atol: float) -> None:
    """Every critical point of V is a strict maximum, so a second event in a
    short continuation would signal a located non-maximum; check none fires."""
    if guard <= 0.0:
        return
    probe = integrate(event_state, event_state.t + guard,
                      events=(EventSpec("second-max",
                                        fn_vec=MAX_VOLUME_EVENT.fn_vec,
                                        direction=0, terminal=True),),
                      rtol=max(rtol, 1e-10), atol=max(atol, 1e-10))
    hits = [h for h in probe.hits_named("second-max")
            if h.t > event_state.t + 1e-10]
    if hits:
        raise EventNotFoundError(
            f"second volume-critical point at t = {hits[0].t}; the located "
            f"event was not the unique maximum")


def max_orbit(family: str, param: float, order: int = DEFAULT_ORDER,
              rtol: float = 1e-12, atol: float = 1e-12) -> MaxOrbitRecord:
    """Maximal-volume orbit record of one family member."""
    return solve_family(family, param, order, rtol, atol).record


# ---------------------------------------------------------------------------
# curves

@dataclass(frozen=True)
class Curve:
    """Parameter-ordered maximal-volume records of one family."""

    family: str
    params: np.ndarray
    records: tuple[MaxOrbitRecord, ...]

    @property
    def h_points(self) -> np.ndarray:
        return np.array([r.h_point for r in self.records])

    @property
    def w_points(self) -> np.ndarray:
        return np.array([(r.lam, r.mu) for r in self.records])


def trace_curve(family: str, param_lo: float, param_hi: float,
                n_samples: int = 15, spacing_cap: float = 0.2,
                max_points: int = 120, order: int = DEFAULT_ORDER,
                rtol: float = 1e-12, atol: float = 1e-12) -> Curve:
    """Sample max_orbit on a log-spaced grid, bisecting any gap whose
    consecutive hyperboloid points are farther apart than spacing_cap."""
    if not 0.0 < param_lo < param_hi:
        raise ValueError("need 0 < param_lo < param_hi")
    params = list(np.geomspace(param_lo, param_hi, n_samples))
    recs = {p: max_orbit(family, p, order, rtol, atol) for p in params}
    i = 0
    while i < len(params) - 1 and len(params) < max_points:
        p0, p1 = params[i], params[i + 1]
        h0 = np.array(recs[p0].h_point)
        h1 = np.array(recs[p1].h_point)
        if np.hypot(*(h1 - h0)) > spacing_cap:
            mid = math.sqrt(p0 * p1)
            recs[mid] = max_orbit(family, mid, order, rtol, atol)
            params.insert(i + 1, mid)
        else:
            i += 1
    params_arr = np.array(params)
    return Curve(family=family, params=params_arr,
                 records=tuple(recs[p] for p in params))


# ---------------------------------------------------------------------------
# complete solutions

@dataclass(frozen=True)
class CompleteSolution:
    """A glued solution over [0, T_total] with its classification."""

    construction: str            # 'doubling' | 'matching'
    left: FamilySolve = field(repr=False)
    right: FamilySolve = field(repr=False)
    word: str                    # gluing symmetry word
    manifold: str                # 'S6' | 'S3xS3' | 'CP3' | 'S2xS4'
    T_total: float
    Vmax: float
    vol: float
    junction_gap: float

    @property
    def family_left(self) -> str:
        return self.left.family

    @property
    def family_right(self) -> str:
        return self.right.family

    @property
    def param_left(self) -> float:
        return self.left.param

    @property
    def param_right(self) -> float:
        return self.right.param

    def profile(self, t: float) -> State:
        """Glued profile: left half below T1, transformed right half above."""
        T1 = self.left.record.T
        if t <= T1:
            return self.left.state_at(t)
        tau = min(self.T_total - t, self.right.record.T)
        signs = GLUE_PLUS.signs if self.word == GLUE_PLUS.label else GLUE_MINUS.signs
        st = self.right.state_at(max(tau, 0.0))
        return State.from_vec(t, st.vec * np.asarray(signs, dtype=float))

    def as_dict(self) -> dict:
        return {
            "type": self.construction,
            "family_left": self.family_left,
            "param_left": self.param_left,
            "family_right": self.family_right,
            "param_right": self.param_right,
            "symmetry": self.word,
            "manifold": self.manifold,
            "T_total": self.T_total,
            "Vmax": self.Vmax,
            "vol": self.vol,
        }


def _classify(left: FamilySolve, right: FamilySolve, word: str) -> str:
    fams = {left.family, right.family}
    if fams == {"alpha", "beta"}:
        return "S6"
    if fams == {"beta"}:
        return "S3xS3"
    # alpha-alpha: (5.17)-type word closes on two S^2 x S^4 halves,
    # (5.18)-type on CP^3
    return "S2xS4" if word == GLUE_PLUS.label else "CP3"


def glue(left: FamilySolve, right: FamilySolve,
         word: str | None = None, construction: str = "matching",
         junction_tol: float = JUNCTION_TOL) -> CompleteSolution:
    """Glue two family solves across their maximal-volume orbits.

    Requires the wedge points to agree within tolerance; the right half is
    time-reversed and sign-transformed, with the word chosen automatically
    by testing which transform matches the left state at the junction.
    """
    sl, sr = left.record.state, right.record.state
    scale = max(1.0, float(np.max(np.abs(sl.vec))))
    w_gap = max(abs(left.record.lam - right.record.lam),
                abs(left.record.mu - right.record.mu))
    if w_gap > junction_tol * scale:
        raise JunctionMismatchError(
            f"wedge points differ by {w_gap:.3e}: "
            f"({left.record.lam}, {left.record.mu}) vs "
            f"({right.record.lam}, {right.record.mu})")
    gaps = {}
    for sym in (GLUE_PLUS, GLUE_MINUS):
        transformed = sr.vec * np.asarray(sym.signs, dtype=float)
        gaps[sym.label] = float(np.max(np.abs(sl.vec - transformed)))
    if word is None:
        word = min(gaps, key=gaps.get)
    gap = gaps[word]
    if gap > junction_tol * scale:
        raise JunctionMismatchError(
            f"junction mismatch: best word {word} leaves gap {gap:.3e} "
            f"(plus: {gaps[GLUE_PLUS.label]:.3e}, "
            f"minus: {gaps[GLUE_MINUS.label]:.3e})")
    manifold = _classify(left, right, word)
    if manifold == "S2xS4":
        warnings.warn("constructed an S2xS4 doubling, which is conjectured "
                      "not to exist; inspect the root carefully",
                      stacklevel=2)
    vol = (left.vol_integral + right.vol_integral) / S6_STD_TOTAL_VOLUME
    return CompleteSolution(
        construction=construction, left=left, right=right, word=word,
        manifold=manifold, T_total=left.record.T + right.record.T,
        Vmax=0.5 * (left.record.Vmax + right.record.Vmax), vol=vol,
        junction_gap=gap)


def junction_derivative_gap(solution: CompleteSolution) -> float:
    """Residual of the glued profile's derivative across the junction: the
    transformed right derivative (time reversal included) must equal the
    left one."""
    sl = solution.left.record.state
    sr = solution.right.record.state
    sym = GLUE_PLUS if solution.word == GLUE_PLUS.label else GLUE_MINUS
    dl = rhs_vec(sl.t, sl.vec)
    dr = rhs_vec(sr.t, sr.vec)
    transformed = -np.asarray(sym.signs, dtype=float) * dr
    return float(np.max(np.abs(dl - transformed)))


# ---------------------------------------------------------------------------
# doubling roots

def find_doubling(family: str, bracket: tuple[float, float],
                  which: str = "v0", order: int = DEFAULT_ORDER,
                  rtol: float = 1e-12, atol: float = 1e-12,
                  xtol: float = ROOT_XTOL) -> CompleteSolution:
    """Locate a parameter where v0(T) (or u0(T)) vanishes and build the
    doubled solution."""
    if which not in ("v0", "u0"):
        raise ValueError("which must be 'v0' or 'u0'")
    idx = 4 if which == "v0" else 1

    def g(p: float) -> float:
        rec = max_orbit(family, p, order, rtol, atol)
        return rec.state.vec[idx]

    lo, hi = bracket
    g_lo, g_hi = g(lo), g(hi)
    if g_lo * g_hi > 0.0:
        raise NoSignChangeError(
            f"{which}(T) has no sign change on [{lo}, {hi}]: "
            f"({g_lo:.3e}, {g_hi:.3e})")
    root = brentq(g, lo, hi, xtol=xtol, rtol=8.9e-16)
    fs = solve_family(family, root, order, rtol, atol)
    # the Sasaki-Einstein point (1, 1) is excluded
    if fs.record.on_boundary_mu_eq_lambda and fs.record.on_boundary_lambda_one:
        raise BoundaryAmbiguousError(
            f"doubling root at parameter {root} lands on the excluded "
            f"Sasaki-Einstein point (lambda, mu) = (1, 1)")
    return glue(fs, fs, construction="doubling")


# ---------------------------------------------------------------------------
# matching roots

def _segments_cross(p0, p1, q0, q1) -> tuple[bool, float, float]:
    """Proper segment intersection test; returns (crossing, s, u) with s, u
    the parameters along (p0, p1) and (q0, q1)."""
    d1 = p1 - p0
    d2 = q1 - q0
    denom = d1[0] * d2[1] - d1[1] * d2[0]
    if denom == 0.0:
        return False, 0.0, 0.0
    rel = q0 - p0
    s = (rel[0] * d2[1] - rel[1] * d2[0]) / denom
    u = (rel[0] * d1[1] - rel[1] * d1[0]) / denom
    return (0.0 <= s <= 1.0) and (0.0 <= u <= 1.0), s, u


def matching_candidates(alpha: Curve, beta: Curve,
                        reflection: str) -> list[tuple[float, float]]:
    """Seed pairs (a, b) from polyline crossings of alpha_H with the
    reflected beta_H arc."""
    refl = np.asarray(_REFLECTIONS[reflection])
    ah = alpha.h_points
    bh = beta.h_points * refl
    seeds = []
    for i in range(len(ah) - 1):
        for j in range(len(bh) - 1):
            ok, s, u = _segments_cross(ah[i], ah[i + 1], bh[j], bh[j + 1])
            if ok:
                a = alpha.params[i] * (alpha.params[i + 1] / alpha.params[i]) ** s
                b = beta.params[j] * (beta.params[j + 1] / beta.params[j]) ** u
                seeds.append((float(a), float(b)))
    return seeds


def refine_matching(seed: tuple[float, float], reflection: str,
                    order: int = DEFAULT_ORDER, rtol: float = 1e-12,
                    atol: float = 1e-12,
                    residual_tol: float = MATCH_RESIDUAL) -> tuple[float, float]:
    """Derivative-free local minimization of |alpha_H(a) - R(beta_H(b))|^2
    seeded at a polyline crossing."""
    refl = np.asarray(_REFLECTIONS[reflection])

    def objective(x):
        a, b = x
        if a <= 1e-3 or b <= 1e-3:
            return 1e6
        ra = max_orbit("alpha", a, order, rtol, atol)
        rb = max_orbit("beta", b, order, rtol, atol)
        d = np.asarray(ra.h_point) - refl * np.asarray(rb.h_point)
        return float(d @ d)

    a0, b0 = seed
    res = minimize(objective, [a0, b0], method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-22,
                            "initial_simplex": [[a0, b0],
                                                [a0 * 1.02, b0],
                                                [a0, b0 * 1.02]],
                            "maxfev": 600})
    dist = math.sqrt(max(res.fun, 0.0))
    if dist > residual_tol:
        raise RefinementStallError(
            f"matching refinement stalled at distance {dist:.3e} "
            f"from seed {seed} with reflection {reflection!r}")
    return float(res.x[0]), float(res.x[1])


def find_matching(alpha_range: tuple[float, float],
                  beta_range: tuple[float, float],
                  reflection: str = "both-single",
                  n_samples: int = 12, order: int = DEFAULT_ORDER,
                  rtol: float = 1e-12, atol: float = 1e-12,
                  curves: tuple[Curve, Curve] | None = None) -> CompleteSolution:
    """Find an alpha-beta crossing in the hyperboloid chart and build the
    glued S6 solution.

    reflection: 'w1', 'w2', a single axis reflection, or 'both-single' to try
    both (the double reflection 'both' is redundant for crossing detection
    and kept only for consistency scans).
    """
    if curves is None:
        alpha = trace_curve("alpha", *alpha_range, n_samples=n_samples,
                            order=order, rtol=rtol, atol=atol)
        beta = trace_curve("beta", *beta_range, n_samples=n_samples,
                           order=order, rtol=rtol, atol=atol)
    else:
        alpha, beta = curves
    reflections = ("w1", "w2") if reflection == "both-single" else (reflection,)
    stalls = []
    for refl in reflections:
        for seed in matching_candidates(alpha, beta, refl):
            try:
                a, b = refine_matching(seed, refl, order, rtol, atol)
            except RefinementStallError as e:
                stalls.append(str(e))
                continue
            fa = solve_family("alpha", a, order, rtol, atol)
            fb = solve_family("beta", b, order, rtol, atol)
            return glue(fa, fb, construction="matching")
    if stalls:
        raise RefinementStallError("; ".join(stalls))
    raise NoCrossingError(
        f"no crossing of alpha_H over {alpha_range} with reflected beta_H "
        f"over {beta_range} (reflections {reflections})")


# ---------------------------------------------------------------------------
# negative scan for the lambda = 1 boundary of the alpha family

@dataclass(frozen=True)
class BoundaryScanReport:
    """Sign survey of u0(T) over the alpha family: a sign change would be an
    S2xS4 doubling root (conjectured not to exist). Always emitted."""

    params: np.ndarray
    u0_values: np.ndarray
    crossings: tuple[tuple[float, float], ...]
    vmax_values: np.ndarray

    @property
    def found_root(self) -> bool:
        return len(self.crossings) > 0

    def as_dict(self) -> dict:
        return {
            "family": "alpha",
            "boundary": "lambda=1 (u0(T) = 0)",
            "params": [float(p) for p in self.params],
            "u0_at_event": [float(v) for v in self.u0_values],
            "vmax": [float(v) for v in self.vmax_values],
            "crossing_brackets": [[float(x), float(y)]
                                  for x, y in self.crossings],
            "found_root": self.found_root,
        }


def scan_s2s4_boundary(param_lo: float = 0.1, param_hi: float = 10.0,
                       n_samples: int = 40, order: int = DEFAULT_ORDER,
                       rtol: float = 1e-12, atol: float = 1e-12) -> BoundaryScanReport:
    params = np.geomspace(param_lo, param_hi, n_samples)
    u0 = np.empty(n_samples)
    vmax = np.empty(n_samples)
    for i, p in enumerate(params):
        rec = max_orbit("alpha", float(p), order, rtol, atol)
        u0[i] = rec.state.u[0]
        vmax[i] = rec.Vmax
    crossings = tuple((float(params[i]), float(params[i + 1]))
                      for i in range(n_samples - 1)
                      if u0[i] * u0[i + 1] < 0.0)
    if crossings:
        warnings.warn(f"u0(T) sign change detected in brackets {crossings}: "
                      f"possible S2xS4 doubling root", stacklevel=2)
    return BoundaryScanReport(params=params, u0_values=u0,
                              crossings=crossings, vmax_values=vmax)
