"""Formal power-series solutions of the singular initial value problems at
the two singular orbits.

A singular IVP has the shape

    y' = (1/x) M_-1(y) + M(x, y),        y(0) = y0,

with M_-1(y0) = 0 and h*Id - d_{y0}M_-1 invertible for every integer h >= 1.
Writing y(x) = sum_h y_h x^h, the coefficients satisfy

    (h*Id - A) y_h = [x^h] ( N(y(x)) + x*M(x, y(x)) ),     A = d_{y0}M_-1,

where N collects the beyond-linear part of M_-1; the bracket depends only on
y_1 .. y_{h-1}, so the series is built order by order with one 7x7 solve per
order. Both M_-1 and x*M are supplied as truncated-power-series evaluators,
which also yields A exactly: the x^1 coefficient of M_-1(y0 + e_j x) is the
j-th column.

Four solution families are produced:
  S2        u_i(0) = (a^2, a^2, 0), v(0) = 0, lambda ~ (3/2) t; variable t.
  S3        lambda(0) = b, v0(0) = -v2(0) = -(2/3) b^3; stored in the bubble
            variable s with ds/dt = 1/lambda and a t(s) conversion series.
  S2-bubble the epsilon = a rescaling of S2 (coefficient scaling).
  S3-bubble the epsilon = b rescaled solution solved directly in s.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import (OutOfRadiusError, ResonanceError, SeriesConsistencyError)
from .state import State

DEFAULT_ORDER = 40
HANDOFF_TAIL_TOL = 1e-12
COND_LIMIT = 1e8

_COMPONENTS = ("lam", "u0", "u1", "u2", "v0", "v1", "v2")


# ---------------------------------------------------------------------------
# truncated power series arithmetic (plain coefficient ndarrays, index=order)

def _pmul(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    return np.convolve(a[:n + 1], b[:n + 1])[:n + 1]


def _pdiv(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """a/b as truncated series; requires b[0] != 0."""
    q = np.zeros(n + 1)
    q[0] = a[0] / b[0]
    for k in range(1, n + 1):
        acc = a[k] if k < len(a) else 0.0
        m = min(k, len(b) - 1)
        acc -= np.dot(q[k - m:k], b[m:0:-1])
        q[k] = acc / b[0]
    return q


def _psqrt(a: np.ndarray, n: int) -> np.ndarray:
    """sqrt of a series with a[0] > 0."""
    s = np.zeros(n + 1)
    s[0] = np.sqrt(a[0])
    for k in range(1, n + 1):
        acc = np.dot(s[1:k], s[k - 1:0:-1]) if k > 1 else 0.0
        s[k] = ((a[k] if k < len(a) else 0.0) - acc) / (2.0 * s[0])
    return s


def _pint(a: np.ndarray) -> np.ndarray:
    """Antiderivative with zero constant term."""
    out = np.zeros(len(a) + 1)
    out[1:] = a / (np.arange(len(a)) + 1.0)
    return out


def _horner(c: np.ndarray, x: float) -> float:
    r = 0.0
    for k in range(len(c) - 1, -1, -1):
        r = r * x + c[k]
    return float(r)


# ---------------------------------------------------------------------------
# generic recurrence

@dataclass(frozen=True)
class SingularIVP:
    """A singular IVP instance given by series evaluators.

    evaluate(y_series, n) must return (Mm1, xM): lists of coefficient arrays
    for M_-1(y(x)) and x*M(x, y(x)) truncated at order n.
    """

    dim: int
    y0: np.ndarray
    evaluate: Callable[[list[np.ndarray], int], tuple[list[np.ndarray], list[np.ndarray]]]
    name: str = ""

    def consistency_residual(self) -> float:
        series = [np.array([v]) for v in self.y0]
        mm1, _ = self.evaluate(series, 0)
        return float(max(abs(m[0]) for m in mm1))

    def linearization(self) -> np.ndarray:
        """d_{y0}M_-1, extracted exactly as the x^1 response of M_-1."""
        k = self.dim
        A = np.empty((k, k))
        for j in range(k):
            series = [np.zeros(2) for _ in range(k)]
            for i in range(k):
                series[i][0] = self.y0[i]
            series[j][1] = 1.0
            mm1, _ = self.evaluate(series, 1)
            A[:, j] = [m[1] for m in mm1]
        return A


def solve_singular_ivp(problem: SingularIVP, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Coefficient table Y (dim x order+1) of the unique series solution.

    Raises SeriesConsistencyError if M_-1(y0) != 0 and ResonanceError if some
    h*Id - d_{y0}M_-1 with 1 <= h <= order is ill conditioned.
    """
    k = problem.dim
    scale = 1.0 + float(np.max(np.abs(problem.y0)))
    res = problem.consistency_residual()
    if res > 1e-13 * scale:
        raise SeriesConsistencyError(
            f"{problem.name or 'singular IVP'}: |M_-1(y0)| = {res:.3e}")
    A = problem.linearization()
    Y = np.zeros((k, order + 1))
    Y[:, 0] = problem.y0
    eye = np.eye(k)
    for h in range(1, order + 1):
        Mm1, xM = problem.evaluate([Y[i][:h + 1] for i in range(k)], h)
        c = np.array([Mm1[i][h] + xM[i][h] for i in range(k)])
        lhs = h * eye - A
        cond = np.linalg.cond(lhs)
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise ResonanceError(
                f"{problem.name or 'singular IVP'}: h*Id - dM_-1 ill "
                f"conditioned at h = {h} (cond = {cond:.3e})")
        Y[:, h] = np.linalg.solve(lhs, c)
    return Y, A


def recurrence_residuals(problem: SingularIVP, Y: np.ndarray) -> np.ndarray:
    """Per-order residual |h y_h - [x^h](M_-1 + x M)| of a computed table."""
    k, n1 = Y.shape
    n = n1 - 1
    Mm1, xM = problem.evaluate([Y[i] for i in range(k)], n)
    res = np.zeros(n + 1)
    for h in range(1, n + 1):
        r = np.array([h * Y[i][h] - Mm1[i][h] - xM[i][h] for i in range(k)])
        res[h] = np.max(np.abs(r))
    return res


# ---------------------------------------------------------------------------
# family instances

def s2_problem(a: float, name: str = "S2") -> SingularIVP:
    """Closing on the 2-sphere orbit: substitution u0 = a^2 + t^2 y1,
    u1 = a^2 + t^2 y2, u2 = t^2 y3, v_i = t^2 y_{3+i}, lambda = t y7."""
    if a <= 0:
        raise ValueError("parameter a must be positive")
    a2 = a * a
    sq3 = np.sqrt(3.0)
    y0 = np.array([-3 * a2, -3 * a2 + 1.5, -1.5 * sq3 * a,
                   3 * a2, 3 * a2, 1.5 * sq3 * a, 1.5])

    def evaluate(y, n):
        y1, y2, y3, y4, y5, y6, y7 = y
        one = np.zeros(n + 1)
        one[0] = 1.0
        x2 = np.zeros(n + 1)
        if n >= 2:
            x2[2] = 1.0
        r7 = _pdiv(one, y7, n)
        r72 = _pmul(r7, r7, n)
        d21 = y2 - y1
        rd = _pdiv(one, d21, n)
        y36 = _pmul(y3, y6, n)
        y77 = _pmul(y7, y7, n)
        mm1 = [
            -(2 * y1 + 3 * _pmul(y4, r7, n)),
            -(2 * y2 + 3 * _pmul(y5, r7, n) - 2 * y7),
            -(2 * y3 + 3 * _pmul(y6, r7, n)),
            -(2 * y4 - 4 * a2 * y7),
            -(2 * y5 - 4 * a2 * y7),
            -(2 * y6 + 3 * _pmul(y3, r7, n)),
            -(y7 + _pmul(y77, rd, n)
              + (1.5 / a2) * _pmul(_pmul(y36, r72, n), rd, n)),
        ]
        # x*M rows; D = mu^2 / t^2 = 2 a^2 (y2-y1) + t^2 (y2^2 - y1^2 + y3^2)
        D = 2 * a2 * d21 + _pmul(
            x2, _pmul(y2, y2, n) - _pmul(y1, y1, n) + _pmul(y3, y3, n), n)
        rD = _pdiv(one, D, n)
        u1_full = a2 * one + _pmul(x2, y2, n)
        xm = [np.zeros(n + 1) for _ in range(7)]
        xm[3] = 4 * _pmul(x2, _pmul(y1, y7, n), n)
        xm[4] = 4 * _pmul(x2, _pmul(y2, y7, n), n)
        xm[5] = 4 * _pmul(x2, _pmul(y3, y7, n), n)
        xm[6] = (_pmul(y77, rd, n)
                 + (1.5 / a2) * _pmul(_pmul(y36, r72, n), rd, n)
                 - 2 * _pmul(_pmul(y77, u1_full, n), rD, n)
                 - 3 * _pmul(_pmul(y36, r72, n), rD, n))
        return mm1, xm

    return SingularIVP(7, y0, evaluate, name=name)


def s3_bubble_problem(b: float, name: str = "S3-bubble") -> SingularIVP:
    """Closing on the 3-sphere orbit, epsilon = b rescaled, in the variable s
    with ds/dt = 1/lambda: u0 = s y1, u1 = s y2, u2 = b s y3,
    v0 = -2/3 + s^2 y4, v1 = s^2 y5, v2 = 2/3 + s^2 y6, lambda^2 = y7.

    b = 0 is allowed and gives the asymptotically conical limit.
    """
    if b < 0:
        raise ValueError("parameter b must be nonnegative")
    b2 = b * b
    y0 = np.array([2 * b, 2.0, -2.0, 4 * b2, 4 * b, 3 - 4 * b2, 1.0])

    def evaluate(y, n):
        y1, y2, y3, y4, y5, y6, y7 = y
        one = np.zeros(n + 1)
        one[0] = 1.0
        x2 = np.zeros(n + 1)
        if n >= 2:
            x2[2] = 1.0
        Q = -_pmul(y1, y1, n) + _pmul(y2, y2, n) + b2 * _pmul(y3, y3, n)
        rQ = _pdiv(one, Q, n)
        m1 = -(y1 - 2 * b * one)
        m2 = -(y2 - 2 * y7)
        m3 = -(y3 + 2 * one)
        m4 = -(2 * y4 - 4 * b * _pmul(y1, y7, n))
        m5 = -(2 * y5 - 4 * b * _pmul(y2, y7, n))
        m6 = -(2 * y6 - 4 * b2 * _pmul(y3, y7, n) + 3 * y3)
        m7 = -4 * _pmul(_pmul(y2, _pmul(y7, y7, n), n) + y3, rQ, n)
        xm = [np.zeros(n + 1) for _ in range(7)]
        xm[0] = -3 * b * _pmul(x2, y4, n)
        xm[1] = -3 * b * _pmul(x2, y5, n)
        xm[2] = -3 * _pmul(x2, y6, n)
        xm[6] = -6 * _pmul(x2, _pmul(_pmul(y3, y6, n), rQ, n), n)
        return [m1, m2, m3, m4, m5, m6, m7], xm

    return SingularIVP(7, y0, evaluate, name=name)


# ---------------------------------------------------------------------------
# assembled solution families

@dataclass(frozen=True)
class SeriesSolution:
    """Truncated Taylor coefficients of one family member about its singular
    orbit.

    coeffs maps component name -> coefficient array in the solution's own
    variable (t for the S2 family and its bubble, s for the S3 family and
    its bubble). For variable-s solutions t_of_var converts to the time of
    the stored, un-rescaled solution (t = integral of lambda ds); for
    variable-t solutions it is the identity series.
    """

    family: str               # 'S2' | 'S3' | 'S2-bubble' | 'S3-bubble'
    param: float
    var: str                  # 't' | 's'
    order: int
    coeffs: dict[str, np.ndarray]
    t_of_var: np.ndarray = field(repr=False, default=None)

    def tail_estimate(self, x: float) -> float:
        """Conservative truncation bound from the last retained coefficients
        of every component (the last four orders cover parity gaps)."""
        ax = abs(x)
        worst = 0.0
        for c in self.coeffs.values():
            n = len(c) - 1
            acc = 0.0
            for k in range(max(0, n - 3), n + 1):
                acc += abs(c[k]) * ax ** k
            worst = max(worst, acc)
        return worst

    def components_at(self, x: float) -> np.ndarray:
        return np.array([_horner(self.coeffs[name], x) for name in _COMPONENTS])

    def time_at(self, x: float) -> float:
        if self.var == "t":
            return float(x)
        return _horner(self.t_of_var, x)

    def var_of_time(self, t: float) -> float:
        """Invert t(s) for variable-s solutions (monotone near 0)."""
        if self.var == "t":
            return float(t)
        if t == 0.0:
            return 0.0
        s_hi = self.validated_radius()
        t_hi = _horner(self.t_of_var, s_hi)
        if not 0.0 <= t <= t_hi:
            raise OutOfRadiusError(
                f"t = {t} outside validated conversion range [0, {t_hi:.3g}]")
        return brentq(lambda s: _horner(self.t_of_var, s) - t, 0.0, s_hi,
                      xtol=1e-15, rtol=8.9e-16)

    def validated_radius(self, tol: float = HANDOFF_TAIL_TOL) -> float:
        """Largest x (by backtracking from 1.0) with tail estimate < tol."""
        x = 1.0
        for _ in range(400):
            if self.tail_estimate(x) < tol:
                return x
            x *= 0.95
        raise OutOfRadiusError(
            f"no evaluation radius with tail < {tol} for {self.family} "
            f"family at parameter {self.param}")


def eval_series(sol: SeriesSolution, x: float,
                tol: float = HANDOFF_TAIL_TOL) -> tuple[State, float]:
    """Horner-evaluate all seven components at x (the solution's own
    variable) and return (state, tail bound). Raises OutOfRadiusError when
    the tail bound exceeds tol."""
    tail = sol.tail_estimate(x)
    if tail > tol:
        raise OutOfRadiusError(
            f"tail estimate {tail:.3e} > {tol:.1e} at {sol.var} = {x}")
    y = sol.components_at(x)
    return State.from_vec(sol.time_at(x), y), tail


def series_psi_a(a: float, order: int = DEFAULT_ORDER) -> SeriesSolution:
    """Family closing on the S^2 orbit; leading data lambda = (3/2) t,
    u0(0) = u1(0) = a^2."""
    Y, _ = solve_singular_ivp(s2_problem(a), order)
    n = order + 2
    c = {name: np.zeros(n + 1) for name in _COMPONENTS}
    c["lam"][1:order + 2] = Y[6]
    c["u0"][0] = a * a
    c["u0"][2:order + 3] = Y[0]
    c["u1"][0] = a * a
    c["u1"][2:order + 3] = Y[1]
    c["u2"][2:order + 3] = Y[2]
    c["v0"][2:order + 3] = Y[3]
    c["v1"][2:order + 3] = Y[4]
    c["v2"][2:order + 3] = Y[5]
    t_id = np.zeros(2)
    t_id[1] = 1.0
    return SeriesSolution("S2", a, "t", order, c, t_id)


def series_bubble_b(b: float, order: int = DEFAULT_ORDER) -> SeriesSolution:
    """Rescaled bubble closing on the S^3 orbit, in the variable s."""
    Y, _ = solve_singular_ivp(s3_bubble_problem(b), order)
    n = order + 2
    c = {name: np.zeros(n + 1) for name in _COMPONENTS}
    lam2 = np.zeros(n + 1)
    lam2[:order + 1] = Y[6]
    c["lam"] = _psqrt(lam2, n)
    c["u0"][1:order + 2] = Y[0]
    c["u1"][1:order + 2] = Y[1]
    c["u2"][1:order + 2] = b * Y[2]
    c["v0"][0] = -2.0 / 3.0
    c["v0"][2:order + 3] = Y[3]
    c["v1"][2:order + 3] = Y[4]
    c["v2"][0] = 2.0 / 3.0
    c["v2"][2:order + 3] = Y[5]
    t_tilde = _pint(c["lam"])[:n + 1]  # dt~/ds = lambda~
    return SeriesSolution("S3-bubble", b, "s", order, c, t_tilde)


def series_psi_b(b: float, order: int = DEFAULT_ORDER) -> SeriesSolution:
    """Family closing on the S^3 orbit, un-rescaled from the bubble via
    lambda = b lambda~(t/b), u = b^2 u~, v = b^3 v~; still a series in s,
    with t(s) = integral of lambda ds."""
    if b <= 0:
        raise ValueError("parameter b must be positive")
    bub = series_bubble_b(b, order)
    c = {}
    for name in _COMPONENTS:
        if name == "lam":
            c[name] = b * bub.coeffs[name]
        elif name.startswith("u"):
            c[name] = b * b * bub.coeffs[name]
        else:
            c[name] = b ** 3 * bub.coeffs[name]
    t_of_s = _pint(c["lam"])[:len(c["lam"])]
    return SeriesSolution("S3", b, "s", order, c, t_of_s)


def series_bubble_a(a: float, order: int = DEFAULT_ORDER) -> SeriesSolution:
    """Rescaled bubble closing on the S^2 orbit: coefficient scaling of the
    S2 family, lambda~_k = lambda_k a^{k-1}, u~_k = u_k a^{k-2},
    v~_k = v_k a^{k-3}."""
    base = series_psi_a(a, order)
    c = {}
    for name in _COMPONENTS:
        arr = base.coeffs[name]
        k = np.arange(len(arr), dtype=float)
        if name == "lam":
            c[name] = arr * a ** (k - 1)
        elif name.startswith("u"):
            c[name] = arr * a ** (k - 2)
        else:
            c[name] = arr * a ** (k - 3)
    t_id = np.zeros(2)
    t_id[1] = 1.0
    return SeriesSolution("S2-bubble", a, "t", order, c, t_id)


def family_series(family: str, param: float,
                  order: int = DEFAULT_ORDER) -> SeriesSolution:
    """Dispatch: 'alpha'/'S2' -> psi_a, 'beta'/'S3' -> psi_b, bubbles by tag."""
    key = family.lower()
    if key in ("alpha", "s2", "psi-a", "a"):
        return series_psi_a(param, order)
    if key in ("beta", "s3", "psi-b", "b"):
        return series_psi_b(param, order)
    if key in ("s2-bubble", "bubble-a"):
        return series_bubble_a(param, order)
    if key in ("s3-bubble", "bubble-b"):
        return series_bubble_b(param, order)
    raise ValueError(f"unknown family {family!r}")


def handoff(sol: SeriesSolution,
            tol: float = HANDOFF_TAIL_TOL) -> tuple[float, State]:
    """Integrator start (t*, state): the largest time with tail < tol,
    capped at 0.1 * min(1, parameter)."""
    cap_t = 0.1 * min(1.0, sol.param)
    if sol.var == "t":
        x = cap_t
        for _ in range(400):
            if sol.tail_estimate(x) < tol:
                st, _ = eval_series(sol, x, tol)
                return x, st
            x *= 0.95
        raise OutOfRadiusError(
            f"no handoff point below cap {cap_t} for {sol.family} "
            f"at parameter {sol.param}")
    # variable-s solution: cap applies to t, search in s
    s_max = sol.validated_radius(tol)
    t_max = _horner(sol.t_of_var, s_max)
    t_star = min(cap_t, 0.999 * t_max)
    x = sol.var_of_time(t_star)
    st, _ = eval_series(sol, x, tol)
    return t_star, st
