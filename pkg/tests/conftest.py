"""Shared oracles and sampling helpers.

The closed-form derivative oracles below are differentiated by hand from the
trigonometric expressions of the four explicit solutions, independently of
the package's right-hand side, so residual tests compare two genuinely
different evaluation paths.
"""
import math

import numpy as np
import pytest

from nkshoot.state import State

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)


def named_derivative(name: str, t: float) -> np.ndarray:
    """d/dt (lambda, u0, u1, u2, v0, v1, v2) of a named solution."""
    s, c = math.sin(t), math.cos(t)
    if name == "sine-cone":
        return np.array([
            c,
            0.0,
            s * (2 * c * c - s * s),
            -3 * s * s * c,
            0.0,
            4 * s ** 3 * c,
            3 * s * s * c * c - s ** 4,
        ])
    if name == "s6-round":
        return np.array([
            -1.5 * s,
            -3 * c + 7.5 * c ** 3 - 15 * s * s * c,
            -3 * c + 6 * c ** 3 - 12 * s * s * c,
            -4.5 * (c ** 3 - 2 * s * s * c),
            -18 * c * s + 45 * c ** 3 * s,
            18 * s * c * (c * c - s * s),
            9 * c * s - 27 * c ** 3 * s,
        ])
    if name == "s3s3-homog":
        x, y = 2 * SQRT3 * t, SQRT3 * t
        return np.array([
            0.0,
            2 * math.cos(x),
            2 * math.cos(x),
            -2 * math.cos(y),
            4 * math.sin(x) / SQRT3,
            4 * math.sin(x) / SQRT3,
            -2 * math.sin(y) / SQRT3,
        ])
    if name == "cp3-homog":
        x = SQRT2 * t
        sx, cx = math.sin(x), math.cos(x)
        return np.array([
            1.5 * cx,
            -2.25 * SQRT2 * cx * sx,
            -0.75 * SQRT2 * sx,
            -2.25 * SQRT2 * sx * cx,
            1.125 * SQRT2 * sx * (2 * cx * cx - sx * sx),
            2.25 * SQRT2 * sx * cx,
            1.125 * SQRT2 * sx * (2 * cx * cx - sx * sx),
        ])
    raise ValueError(name)


def equation_residual(st: State, deriv: np.ndarray) -> float:
    """Max absolute residual of the seven evolution equations in their
    polynomial form, given a state and a candidate time derivative."""
    lam = st.lam
    u0, u1, u2 = st.u
    v0, v1, v2 = st.v
    dlam, du0, du1, du2, dv0, dv1, dv2 = deriv
    mu2 = -u0 * u0 + u1 * u1 + u2 * u2
    eqs = (
        lam * du0 + 3 * v0,
        lam * du1 + 3 * v1 - 2 * lam * lam,
        lam * du2 + 3 * v2,
        dv0 - 4 * lam * u0,
        dv1 - 4 * lam * u1,
        lam * dv2 - 4 * lam * lam * u2 + 3 * u2,
        lam * lam * mu2 * dlam + 2 * lam ** 4 * u1 + 3 * u2 * v2,
    )
    return max(abs(e) for e in eqs)


def random_admissible_states(seed: int, n: int) -> list[State]:
    """Synthetic admissible states (lambda > 0, mu^2 > 0, u2 < 0, oriented);
    not constraint-satisfying."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        lam = rng.uniform(0.3, 2.0)
        u0 = rng.uniform(-1.0, 1.0)
        u1 = rng.uniform(-1.5, 1.5)
        u2 = -rng.uniform(0.7, 2.0)
        v0 = rng.uniform(-1.0, 1.0)
        v1 = rng.uniform(0.2, 2.0)
        v2 = rng.uniform(-1.5, 1.5)
        st = State(rng.uniform(0.0, 1.0), lam, (u0, u1, u2), (v0, v1, v2))
        if st.mu2 > 0.1 and st.orient > 0.05:
            out.append(st)
    return out


@pytest.fixture(scope="session")
def beta1_solve():
    """The homogeneous b = 1 family solve, shared across tests."""
    from nkshoot.shoot import solve_family
    return solve_family("beta", 1.0)


@pytest.fixture(scope="session")
def alpha_sqrt3_solve():
    from nkshoot.shoot import solve_family
    return solve_family("alpha", SQRT3)
