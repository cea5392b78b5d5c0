"""Scalar geometric quantities of a state (orbital volume, mean curvature,
scalar curvature, traceless second-fundamental-form norm, the Lyapunov
functional) plus the wedge/hyperboloid projections of maximal-volume orbits,
zero counting and comparison bounds.

Conventions: V = lambda * mu^2 with the reference volume normalized to 1;
conversion to the matrix entries used by the curvature formulas is
x1 = u1/mu, y1 = mu/lambda, y2 = v2/(lambda mu), x2 = -lambda, and the
hyperboloid coordinates are the Minkowski cross product

    w0 = (u1 v2 - u2 v1)/V,  w1 = (u0 v2 - u2 v0)/V,  w2 = (u1 v0 - u0 v1)/V,

normalized so w0^2 - w1^2 - w2^2 = 1 with w0 > 0 on constraint-satisfying
states.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import (BoundaryAmbiguousError, BoundViolationError,
                     DegenerateStateError)
from .integrate import Trajectory
from .state import LAMBDA_MIN, MU2_MIN, State, constraints, rhs

# dimension of the principal orbit and the Einstein constant of the ambient
N_DIM = 5
LAMBDA_EINSTEIN = 5
BOUNDARY_TOL = 1e-7       # on-boundary classification, after normalizing by mu
L_AGREE_RTOL = 1e-9
CONSTRAINT_OK = 1e-8      # treat a state as on-shell below this relative drift


def _require_admissible(s: State) -> None:
    if s.lam <= LAMBDA_MIN or s.mu2 <= MU2_MIN:
        raise DegenerateStateError(
            f"degenerate state at t = {s.t}: lambda = {s.lam}, mu^2 = {s.mu2}")


def volume_and_mean_curvature(s: State, check: bool = True) -> tuple[float, float]:
    """(V, l) with l = V'/V computed from the evolution equations; on
    constraint-satisfying states the independent matrix-entry formula
    l = 2 x1/y1 - 3 y2/x2 must agree to relative 1e-9 (checked when the
    state is on shell and check=True)."""
    _require_admissible(s)
    lam = s.lam
    mu2 = s.mu2
    u1, u2 = s.u[1], s.u[2]
    v2 = s.v[2]
    V = lam * mu2
    l = 4 * lam * u1 / mu2 - (2 * lam ** 4 * u1 + 3 * u2 * v2) / (lam ** 3 * mu2)
    if check and constraints(s).rel_drift(s) < CONSTRAINT_OK:
        l_alt = mean_curvature_matrix_form(s)
        scale = max(1.0, abs(l))
        if abs(l - l_alt) > 1e3 * L_AGREE_RTOL * scale:
            raise AssertionError(
                f"mean-curvature paths disagree: {l} vs {l_alt} at t = {s.t}")
    return V, l


def mean_curvature_matrix_form(s: State) -> float:
    """l = 2 x1/y1 - 3 y2/x2 after the change of variables (independent
    evaluation path; exact only on constraint-satisfying states)."""
    _require_admissible(s)
    mu = s.mu
    x1 = s.u[1] / mu
    y1 = mu / s.lam
    y2 = s.v[2] / (s.lam * mu)
    x2 = -s.lam
    return 2 * x1 / y1 - 3 * y2 / x2


def project_H(s: State) -> tuple[float, float, float]:
    """Hyperboloid coordinates (w0, w1, w2); requires V > 0."""
    _require_admissible(s)
    V = s.volume
    u0, u1, u2 = s.u
    v0, v1, v2 = s.v
    return ((u1 * v2 - u2 * v1) / V,
            (u0 * v2 - u2 * v0) / V,
            (u1 * v0 - u0 * v1) / V)


def scalar_curvature(s: State) -> float:
    """Scal = 20 - 4 l^2 x1^2/mu^2 + 24 x1 y2/mu - 4 l^2 w1^2/mu^2
    - 9 w2^2/l^2 (l = lambda here); assumes the constraints hold."""
    _require_admissible(s)
    lam = s.lam
    mu = s.mu
    mu2 = s.mu2
    x1 = s.u[1] / mu
    y2 = s.v[2] / (lam * mu)
    _, w1, w2 = project_H(s)
    return (20.0 - 4 * lam * lam * x1 * x1 / mu2 + 24 * x1 * y2 / mu
            - 4 * lam * lam * w1 * w1 / mu2 - 9 * w2 * w2 / (lam * lam))


def traceless_L_norm2(s: State) -> float:
    """|L_0|^2 = (36/5)(lambda x1/mu - y2/lambda)^2 + 4 lambda^2 w1^2/mu^2
    + 9 w2^2/lambda^2."""
    _require_admissible(s)
    lam = s.lam
    mu = s.mu
    mu2 = s.mu2
    x1 = s.u[1] / mu
    y2 = s.v[2] / (lam * mu)
    _, w1, w2 = project_H(s)
    return ((36.0 / 5.0) * (lam * x1 / mu - y2 / lam) ** 2
            + 4 * lam * lam * w1 * w1 / mu2 + 9 * w2 * w2 / (lam * lam))


@dataclass(frozen=True)
class BohmValue:
    """Scale-invariant Lyapunov data of a state.

    B is V^{2/5}(20 + l^2); B_alt is the defining form V^{2/5}(|L_0|^2+Scal).
    The two coincide on maximal-volume orbits (l = 0), which is where every
    acceptance-facing use evaluates them; off that locus they differ by the
    l^2-weight (see the (5.4b) closure identity).
    """

    B: float
    B_alt: float
    V: float
    l: float
    Ldot_norm2: float
    Scal: float
    n: int = N_DIM
    Lambda: int = LAMBDA_EINSTEIN


def bohm(s: State) -> BohmValue:
    V, l = volume_and_mean_curvature(s, check=False)
    scal = scalar_curvature(s)
    l0sq = traceless_L_norm2(s)
    w = V ** 0.4
    return BohmValue(B=w * (20.0 + l * l), B_alt=w * (l0sq + scal),
                     V=V, l=l, Ldot_norm2=l0sq, Scal=scal)


# ---------------------------------------------------------------------------
# maximal-volume orbit records

@dataclass(frozen=True)
class MaxOrbitRecord:
    """A located maximal-volume orbit: event time T, the state there, its
    wedge point (lambda, mu) and hyperboloid point (w0, w1, w2)."""

    family: str
    param: float
    T: float
    state: State
    lam: float
    mu: float
    w: tuple[float, float, float]
    Vmax: float
    B: float

    @classmethod
    def from_state(cls, family: str, param: float, T: float,
                   state: State) -> "MaxOrbitRecord":
        w = project_H(state)
        return cls(family=family, param=param, T=T, state=state,
                   lam=state.lam, mu=state.mu, w=w, Vmax=state.volume,
                   B=bohm(state).B)

    @property
    def h_point(self) -> tuple[float, float]:
        return (self.w[1], self.w[2])

    @property
    def on_boundary_mu_eq_lambda(self) -> bool:
        """v0(T) = 0 boundary (mu = lambda side of the wedge)."""
        return abs(self.state.v[0]) / self.mu < BOUNDARY_TOL

    @property
    def on_boundary_lambda_one(self) -> bool:
        """u0(T) = 0 boundary (lambda = 1 side of the wedge)."""
        return abs(self.state.u[0]) / self.mu < BOUNDARY_TOL

    def validate(self, wedge_tol: float = 1e-7, hyp_tol: float = 1e-8) -> None:
        """Assert wedge membership, hyperboloid normalization and the
        boundary correspondences."""
        if not (self.mu >= self.lam - wedge_tol
                and self.lam >= 1.0 - wedge_tol):
            raise BoundViolationError(
                f"wedge violation: (lambda, mu) = ({self.lam}, {self.mu}) "
                f"for {self.family}({self.param})")
        w0, w1, w2 = self.w
        norm = w0 * w0 - w1 * w1 - w2 * w2
        if abs(norm - 1.0) > hyp_tol or w0 <= 0:
            raise BoundViolationError(
                f"hyperboloid normalization violated: |w|^2 = {norm}, w0 = {w0}")
        u0_small = abs(self.state.u[0]) < BOUNDARY_TOL * self.mu
        if (abs(w2) < BOUNDARY_TOL) != u0_small:
            raise BoundViolationError(
                f"boundary dictionary violated: |w2| = {abs(w2)}, "
                f"|u0|/mu = {abs(self.state.u[0]) / self.mu}")
        v0_small = abs(self.state.v[0]) < BOUNDARY_TOL * self.mu
        if (abs(w1) < BOUNDARY_TOL) != v0_small:
            raise BoundViolationError(
                f"boundary dictionary violated: |w1| = {abs(w1)}, "
                f"|v0|/mu = {abs(self.state.v[0]) / self.mu}")


# ---------------------------------------------------------------------------
# zero counting

@dataclass(frozen=True)
class ZeroCount:
    """Sign-change count of v0 on the open interval (0, T)."""

    count: int
    zeros: tuple[float, ...]
    boundary_ambiguous: bool


def count_v0_zeros(traj: Trajectory, T: float | None = None,
                   boundary_tol: float = BOUNDARY_TOL) -> ZeroCount:
    """Count simple zeros of v0 strictly before the maximal-volume time.

    The trajectory must carry 'v0-zero' event hits or enough nodes to
    bracket every sign change (zeros of v0 are non-degenerate away from the
    sine-cone locus). If |v0(T)|/mu(T) is below the boundary tolerance the
    count is flagged ambiguous.
    """
    if T is None:
        hit = traj.first_hit("max-volume")
        if hit is None:
            raise ValueError("trajectory carries no maximal-volume event")
        T = hit.t
    end_state = traj.state_at(min(T, traj.t_end))
    ambiguous = abs(end_state.v[0]) / end_state.mu < boundary_tol

    zeros = [h.t for h in traj.hits_named("v0-zero") if traj.t_start < h.t < T]
    if not traj.hits_named("v0-zero"):
        # node-scan fallback with dense refinement
        ts = traj.times
        v0 = traj.states[:, 4]
        for i in range(len(ts) - 1):
            if ts[i + 1] > T:
                break
            if v0[i] == 0.0:
                continue
            if v0[i] * v0[i + 1] < 0.0:
                z = brentq(lambda t: traj.dense(t)[4], ts[i], ts[i + 1],
                           xtol=1e-13, rtol=8.9e-16)
                if traj.t_start < z < T:
                    zeros.append(z)
    zeros = sorted(zeros)
    # discard near-zero touches: require an actual sign change across each
    kept = []
    for z in zeros:
        left = traj.dense(max(traj.t_start, z - 1e-7))[4]
        right = traj.dense(min(traj.t_end, z + 1e-7))[4]
        if left * right < 0.0 or left == 0.0 or right == 0.0:
            kept.append(z)
    return ZeroCount(count=len(kept), zeros=tuple(kept),
                     boundary_ambiguous=ambiguous)


def require_unambiguous(zc: ZeroCount) -> int:
    if zc.boundary_ambiguous:
        raise BoundaryAmbiguousError(
            "v0(T) below the on-boundary tolerance; zero count is ambiguous")
    return zc.count


# ---------------------------------------------------------------------------
# comparison bounds

@dataclass(frozen=True)
class ComparisonReport:
    t0: float
    max_l_slack: float      # min over nodes of bound - l  (>= -tol)
    max_v_slack: float      # min over nodes of bound - V
    existence_ok: bool      # elapsed time + t0 <= pi within tolerance
    n_nodes: int


def comparison_bounds(traj: Trajectory, tol: float = 1e-8) -> ComparisonReport:
    """Check the mean-curvature and volume comparison bounds forward along a
    trajectory:

        l(t) <= 5 cot(t - t_start + t0),
        V(t) <= V(start) sin^5(t - t_start + t0) / sin^5(t0),

    with t0 in (0, pi) solved from l(start) = 5 cot(t0). Violations beyond
    tol raise BoundViolationError.
    """
    start = traj.node_states()[0]
    V0, l0 = volume_and_mean_curvature(start, check=False)
    t0 = brentq(lambda x: 5.0 * math.cos(x) / math.sin(x) - l0,
                1e-12, math.pi - 1e-12, xtol=1e-15)
    min_l_slack = math.inf
    min_v_slack = math.inf
    for st in traj.node_states():
        rel = st.t - start.t
        if rel <= 0.0:
            continue
        arg = rel + t0
        if arg >= math.pi:
            raise BoundViolationError(
                f"existence bound violated: elapsed + t0 = {arg} >= pi")
        V, l = volume_and_mean_curvature(st, check=False)
        l_bound = 5.0 * math.cos(arg) / math.sin(arg)
        v_bound = V0 * math.sin(arg) ** 5 / math.sin(t0) ** 5
        l_slack = l_bound - l
        v_slack = v_bound - V
        if l_slack < -tol * max(1.0, abs(l_bound)):
            raise BoundViolationError(
                f"mean-curvature bound violated at t = {st.t}: "
                f"l = {l} > {l_bound}")
        if v_slack < -tol * max(1.0, v_bound):
            raise BoundViolationError(
                f"volume bound violated at t = {st.t}: V = {V} > {v_bound}")
        min_l_slack = min(min_l_slack, l_slack)
        min_v_slack = min(min_v_slack, v_slack)
    elapsed = traj.t_end - traj.t_start
    return ComparisonReport(t0=t0, max_l_slack=min_l_slack,
                            max_v_slack=min_v_slack,
                            existence_ok=elapsed + t0 <= math.pi + tol,
                            n_nodes=len(traj.times))


def derivative_consistency(s: State) -> float:
    """|mu mu' - 2 lambda u1| on a state, using the evolution equations
    (vanishes on shell)."""
    dy = rhs(s)
    u0, u1, u2 = s.u
    mu_mu_dot = -u0 * dy[1] + u1 * dy[2] + u2 * dy[3]
    return abs(mu_mu_dot - 2.0 * s.lam * u1)
