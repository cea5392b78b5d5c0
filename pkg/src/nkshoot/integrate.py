"""Adaptive integration of the fundamental system with dense output, event
location and singularity detection.

Thin layer over scipy's DOP853 via solve_ivp: the right-hand side, the guard
events and all monitoring are ours; scipy supplies the embedded pair, its
dense interpolants and the bracketed event refinement. First integrals are
recorded at every accepted node and a relative drift above 1e-6 aborts the
run; drift is monitored, never projected out.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import (ConstraintDriftError, DegenerateStateError,
                     StepSizeCollapseError)
from .state import (LAMBDA_MIN, MU2_MIN, State, constraints, rhs_vec)

DEFAULT_RTOL = 1e-12
DEFAULT_ATOL = 1e-12
DRIFT_ABORT = 1e-6
COMPONENT_MAGNITUDE_MAX = 1e8
EVENT_REFINE_TOL = 1e-13


@dataclass(frozen=True)
class EventSpec:
    """Scalar event function of the state with a direction filter.

    fn takes a State; fn_vec, when given, takes (t, y7) and is used in the
    integration hot loop instead.
    """

    name: str
    fn: Callable[[State], float] | None = None
    fn_vec: Callable[[float, np.ndarray], float] | None = None
    direction: int = 0          # 0 any, +1 rising, -1 falling
    terminal: bool = False

    def value(self, t: float, y: np.ndarray) -> float:
        if self.fn_vec is not None:
            return self.fn_vec(t, y)
        return self.fn(State.from_vec(t, y))


def _volume_event_vec(t: float, y: np.ndarray) -> float:
    lam, u0, u1, u2, v0, v1, v2 = y
    return 2.0 * lam ** 4 * u1 - 3.0 * u2 * v2


#: The flagship event: the maximal-volume orbit, where 2 lambda^4 u1 = 3 u2 v2.
MAX_VOLUME_EVENT = EventSpec("max-volume", fn_vec=_volume_event_vec,
                             direction=0, terminal=True)

V0_ZERO_EVENT = EventSpec("v0-zero", fn_vec=lambda t, y: y[4], direction=0)


@dataclass(frozen=True)
class EventHit:
    name: str
    t: float
    state: State


@dataclass
class Trajectory:
    """Result of one integration: strictly increasing nodes, per-step dense
    interpolants, the event log, constraint drift per node and the
    termination reason ('event' | 'singularity' | 'horizon')."""

    times: np.ndarray
    states: np.ndarray                  # shape (n, 7)
    dense: object = field(repr=False)   # scipy OdeSolution
    hits: list[EventHit] = field(default_factory=list)
    termination: str = "horizon"
    drift: np.ndarray = None            # relative max|I_i| per node

    @property
    def t_start(self) -> float:
        return float(self.times[0])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def state_at(self, t: float) -> State:
        lo, hi = sorted((self.t_start, self.t_end))
        if not lo <= t <= hi:
            raise ValueError(f"t = {t} outside trajectory span [{lo}, {hi}]")
        return State.from_vec(t, self.dense(t))

    def resample(self, times: Sequence[float]) -> list[State]:
        return [self.state_at(float(t)) for t in times]

    def node_states(self) -> list[State]:
        return [State.from_vec(t, y) for t, y in zip(self.times, self.states)]

    def first_hit(self, name: str) -> EventHit | None:
        for h in self.hits:
            if h.name == name:
                return h
        return None

    def hits_named(self, name: str) -> list[EventHit]:
        return [h for h in self.hits if h.name == name]


def _wrap_event(spec: EventSpec):
    def g(t, y):
        return spec.value(t, y)
    g.terminal = spec.terminal
    g.direction = float(spec.direction)
    return g


def integrate(start: State, horizon: float,
              events: Sequence[EventSpec] = (),
              rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
              method: str = "DOP853",
              allow_unoriented: bool = False) -> Trajectory:
    """Integrate from start.t to horizon with adaptive step control.

    Terminal events stop the run; the singularity guard stops when
    |lambda| < 1e-8, mu^2 < 1e-12 or any component exceeds 1e8 in magnitude.
    allow_unoriented skips the lambda > 0 / orientation precondition (used
    for symmetry-image integrations; mu^2 > 0 is always required).
    """
    if start.mu2 <= MU2_MIN:
        raise DegenerateStateError(f"start has mu^2 = {start.mu2}")
    if not allow_unoriented:
        if start.lam <= LAMBDA_MIN:
            raise DegenerateStateError(f"start has lambda = {start.lam}")
        if start.orient <= 0.0:
            raise DegenerateStateError(
                f"start violates orientation: u1 v2 - u2 v1 = {start.orient}")

    user_events = list(events)
    # the lambda guard is signed so that a transversal crossing of the
    # threshold is always a detectable sign change
    lam_sign = 1.0 if start.lam >= 0.0 else -1.0
    guards = [
        EventSpec("guard-lambda",
                  fn_vec=lambda t, y: lam_sign * y[0] - LAMBDA_MIN,
                  direction=-1, terminal=True),
        EventSpec("guard-mu2",
                  fn_vec=lambda t, y: (-y[1] * y[1] + y[2] * y[2]
                                       + y[3] * y[3]) - MU2_MIN,
                  direction=-1, terminal=True),
        EventSpec("guard-magnitude",
                  fn_vec=lambda t, y: COMPONENT_MAGNITUDE_MAX
                  - float(np.max(np.abs(y))),
                  direction=-1, terminal=True),
    ]
    all_events = user_events + guards
    sol = solve_ivp(rhs_vec, (start.t, horizon), start.vec, method=method,
                    rtol=rtol, atol=atol, dense_output=True,
                    events=[_wrap_event(e) for e in all_events])
    if sol.status == -1:
        last = State.from_vec(sol.t[-1], sol.y[:, -1]) if sol.t.size else start
        raise StepSizeCollapseError(
            f"integrator failed at t = {last.t}: {sol.message}", last)

    times = sol.t
    states = sol.y.T
    # first-integral drift at every node
    drift = np.empty(len(times))
    bad = None
    for i, (t, y) in enumerate(zip(times, states)):
        st = State.from_vec(t, y)
        drift[i] = constraints(st).rel_drift(st)
        if drift[i] > DRIFT_ABORT and bad is None:
            bad = i
    if bad is not None:
        good = State.from_vec(times[bad - 1], states[bad - 1]) if bad else start
        raise ConstraintDriftError(
            f"relative first-integral drift {drift[bad]:.3e} > {DRIFT_ABORT} "
            f"at t = {times[bad]}", t_bad=float(times[bad]), last_state=good)

    hits = []
    for spec, te, ye in zip(all_events, sol.t_events, sol.y_events):
        for t, y in zip(te, ye):
            hits.append(EventHit(spec.name, float(t), State.from_vec(t, y)))
    hits.sort(key=lambda h: h.t)

    if sol.status == 1:
        fired = {h.name for h in hits
                 if np.isclose(h.t, times[-1], rtol=0, atol=1e-12)}
        if fired & {"guard-lambda", "guard-mu2", "guard-magnitude"}:
            termination = "singularity"
        else:
            termination = "event"
    else:
        termination = "horizon"
    return Trajectory(times=times, states=states, dense=sol.sol, hits=hits,
                      termination=termination, drift=drift)


def refine_event(traj: Trajectory, spec: EventSpec, t_guess: float,
                 half_width: float = 1e-6) -> float:
    """Re-refine an event time on the dense output by bracketed root finding.

    Idempotent: re-refining a located event moves it by < 1e-13.
    """
    lo_span, hi_span = sorted((traj.t_start, traj.t_end))

    def g(t):
        return spec.value(t, traj.dense(t))

    w = half_width
    for _ in range(60):
        lo = max(lo_span, t_guess - w)
        hi = min(hi_span, t_guess + w)
        if g(lo) * g(hi) <= 0.0:
            return brentq(g, lo, hi, xtol=EVENT_REFINE_TOL, rtol=8.9e-16)
        w *= 2.0
        if lo == lo_span and hi == hi_span:
            break
    raise ValueError(f"no sign change of event {spec.name!r} near {t_guess}")
