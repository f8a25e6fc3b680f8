"""Jump conditions, shock trajectories and shock strength.

Jumps use the convention ``[u] = u_minus - u_plus``: the state behind the
shock minus the state ahead.  In the traveling frame the jump conditions are

    [q H + (gamma_hat0/2) H**2 + (lambda0/3) H**3] + (c0/2) [G] s = 0,
    [G] + [H] s = 0,

so ``s**2 = (2/c0) [P] / [H]``.  Behind a wavefan
``H = A + sqrt(c0/(2 lambda0)) X/T`` this collapses to ``s = X / (sqrt(3) T)``
and the shock follows ``X = C T**(1/sqrt(3))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import bisect

from ._report import Q_CONSTRAINT, check_constraints
from .errors import ComplexSpeedError, ConstraintError, DomainError, NotFound
from .gas import GasParameters, coefficients

__all__ = [
    "DECAY_EXPONENT",
    "TRAJECTORY_EXPONENT",
    "JumpState",
    "ShockCurve",
    "jump_from_speed",
    "rh_residual",
    "shock_speed_bracket",
    "shock_speed",
    "trajectory_closed_form",
    "integrate_trajectory",
    "lab_frame_trajectory",
    "strength_decay",
    "fit_decay_exponent",
    "classify",
    "strength",
    "strength_table",
    "critical_b_star",
]

TRAJECTORY_EXPONENT = 1.0 / math.sqrt(3.0)
DECAY_EXPONENT = (math.sqrt(3.0) - 1.0) / math.sqrt(3.0)


@dataclass(frozen=True)
class JumpState:
    h_minus: float
    h_plus: float
    g_jump: float = 0.0

    @property
    def h_jump(self):
        return self.h_minus - self.h_plus


@dataclass(frozen=True)
class ShockCurve:
    """Sampled shock path ``X(T)`` in the traveling frame.

    ``sign`` is ``"forward"`` or ``"backward"`` and ``C`` the constant in
    ``X = C T**(+/- 1/sqrt(3))``.
    """

    sign: str
    C: float
    T: np.ndarray
    X: np.ndarray
    frame_q: float | None = None

    def __post_init__(self):
        if self.sign not in ("forward", "backward"):
            raise ValueError(f"sign must be 'forward' or 'backward', got {self.sign!r}")
        T = np.asarray(self.T, dtype=float)
        X = np.asarray(self.X, dtype=float)
        if T.shape != X.shape or T.ndim != 1:
            raise ValueError("T and X must be 1-D arrays of equal length")
        if T.size > 1 and not np.all(np.diff(T) > 0):
            raise ValueError("T must be strictly increasing")
        if not np.all(np.isfinite(X)):
            raise ValueError("X must be finite")
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "X", X)

    @property
    def samples(self):
        return np.column_stack([self.T, self.X])


def jump_from_speed(h_minus, h_plus, speed):
    """Jump state whose ``[G]`` satisfies the second jump condition exactly."""
    return JumpState(h_minus, h_plus, -(h_minus - h_plus) * speed)


def _P(H, coeffs, q):
    return q * H + 0.5 * coeffs.gamma_hat0 * H**2 + coeffs.lambda0 / 3.0 * H**3


def rh_residual(jump, speed, coeffs, q=None):
    """Residuals ``(r1, r2)`` of the two jump conditions."""
    q = coeffs.q if q is None else q
    dP = _P(jump.h_minus, coeffs, q) - _P(jump.h_plus, coeffs, q)
    r1 = dP + 0.5 * coeffs.c0 * jump.g_jump * speed
    r2 = jump.g_jump + jump.h_jump * speed
    return r1, r2


def shock_speed_bracket(h_minus, h_plus, coeffs, q=None):
    """``[P]/[H]`` for any frame speed ``q`` (its limit when the states coincide)."""
    q = coeffs.q if q is None else q
    hm, hp = h_minus, h_plus
    return q + 0.5 * coeffs.gamma_hat0 * (hp + hm) + coeffs.lambda0 / 3.0 * (hp**2 + hp * hm + hm**2)


def _speed_from_bracket(bracket, scale, c0, where=None):
    # clamp roundoff below zero: the bracket vanishes exactly at the constant state
    if bracket < 0.0:
        if bracket >= -1e-12 * scale:
            bracket = 0.0
        else:
            raise ComplexSpeedError(f"negative speed bracket {bracket:.6g}; inadmissible jump", where=where)
    return math.sqrt(2.0 * bracket / c0)


def shock_speed(h_minus, h_plus, coeffs, q=None, where=None):
    """Both shock speeds ``(+s, -s)`` for the jump ``h_minus -> h_plus``.

    Only defined for ``q = gamma_hat0**2 / (4 lambda0)``; use
    :func:`shock_speed_bracket` to study other frames.

    Raises
    ------
    ConstraintError
        If ``q`` is not the critical frame speed.
    ComplexSpeedError
        If the bracket is negative.
    """
    q = coeffs.q if q is None else q
    if not check_constraints((Q_CONSTRAINT,), coeffs, q).admissible:
        raise ConstraintError(f"shock speed needs {Q_CONSTRAINT}; got q={q}")
    br = shock_speed_bracket(h_minus, h_plus, coeffs, q)
    scale = abs(q) + abs(coeffs.gamma_hat0) * (abs(h_plus) + abs(h_minus)) + coeffs.lambda0 * (
        h_plus**2 + abs(h_plus * h_minus) + h_minus**2
    )
    s = _speed_from_bracket(br, scale, coeffs.c0, where)
    return s, -s


def trajectory_closed_form(sign, C, T_range, n=200, frame_q=None):
    """``X = C T**(1/sqrt(3))`` (forward) or ``C T**(-1/sqrt(3))`` (backward)."""
    T0, T1 = (float(v) for v in T_range)
    if not 0.0 < T0 < T1:
        raise DomainError("T_range must satisfy 0 < T0 < T1")
    T = np.geomspace(T0, T1, n)
    p = TRAJECTORY_EXPONENT if sign == "forward" else -TRAJECTORY_EXPONENT
    return ShockCurve(sign, float(C), T, C * T**p, frame_q)


def integrate_trajectory(
    behind_state,
    h_plus,
    coeffs,
    q=None,
    start=(1.0, 1.0),
    T_end=100.0,
    branch="forward",
    n_out=200,
    rtol=1e-12,
    atol=1e-14,
):
    """Integrate ``dX/dT = +/- sqrt((2/c0) [P]/[H])`` from ``start = (T0, X0)``.

    ``branch="forward"`` moves away from ``X = 0`` (speed sign equal to
    ``sign(X0)``), ``"backward"`` moves toward it.  Samples are returned on a
    geometric grid in ``T``.
    """
    q = coeffs.q if q is None else q
    T0, X0 = (float(v) for v in start)
    if not 0.0 < T0 < T_end:
        raise DomainError("need 0 < T0 < T_end")
    if branch not in ("forward", "backward"):
        raise ValueError("branch must be 'forward' or 'backward'")
    orient = math.copysign(1.0, X0) * (1.0 if branch == "forward" else -1.0)

    def fun(T, y):
        hm = float(behind_state(y[0], T))
        s, _ = shock_speed(hm, h_plus, coeffs, q, where=(T, y[0]))
        return [orient * s]

    sol = solve_ivp(fun, (T0, T_end), [X0], method="DOP853", rtol=rtol, atol=atol, dense_output=True)
    if sol.status != 0:
        raise ArithmeticError(f"trajectory integration failed: {sol.message}")
    T = np.geomspace(T0, T_end, n_out)
    X = sol.sol(T)[0]
    p = TRAJECTORY_EXPONENT if branch == "forward" else -TRAJECTORY_EXPONENT
    return ShockCurve(branch, X0 / T0**p, T, X, q)


def lab_frame_trajectory(curve, tau):
    """Map a traveling-frame shock to ``(tau, eta, theta)`` with ``theta = q tau + X(eta)``."""
    if curve.frame_q is None:
        raise ValueError("curve.frame_q is not set")
    tau = np.asarray(tau, dtype=float)
    tau_b, eta = np.broadcast_arrays(tau[..., None] if tau.ndim else tau, curve.T)
    theta = curve.frame_q * tau_b + curve.X
    return tau_b, eta, theta


def strength_decay(eta, coeffs, C1=1.0):
    """``[h] = sqrt(c0/(2 lambda0)) C1 eta**(-alpha)`` with ``alpha = (sqrt(3)-1)/sqrt(3)``."""
    eta = np.asarray(eta, dtype=float)
    if np.any(eta <= 0.0):
        raise DomainError("eta must be positive")
    return coeffs.fan_slope * C1 * eta ** (-DECAY_EXPONENT)


def fit_decay_exponent(curve, behind_state, h_plus):
    """Least-squares slope of ``log|[h]|`` against ``log T`` along ``curve``."""
    jump = np.array([behind_state(x, t) for x, t in zip(curve.X, curve.T)]) - h_plus
    slope, _ = np.polyfit(np.log(curve.T), np.log(np.abs(jump)), 1)
    return float(slope)


def classify(jump):
    """``"compressive"`` if the amplitude drops across the shock, else ``"expansive"``."""
    if jump.h_minus == jump.h_plus:
        raise ValueError("no jump: h_minus == h_plus")
    return "compressive" if jump.h_minus > jump.h_plus else "expansive"


def _default_builder(gamma, a_tilde, b_tilde):
    return coefficients(GasParameters(gamma=gamma, a_tilde=a_tilde, b_tilde=b_tilde))


def strength(gamma, a_tilde, b_tilde, coeffs_builder=None):
    """The strength prefactor ``sqrt(c0/(2 lambda0))``."""
    build = coeffs_builder or _default_builder
    return build(gamma, a_tilde, b_tilde).fan_slope


def strength_table(gamma, a_values, b_values, coeffs_builder=None):
    """Rows ``(a_tilde, b_tilde, strength, ideal)`` over the product of the two ranges."""
    ideal = strength(gamma, 0.0, 0.0, coeffs_builder)
    return [
        (float(a), float(b), strength(gamma, a, b, coeffs_builder), ideal) for a in a_values for b in b_values
    ]


def critical_b_star(a_tilde, gamma=1.4, coeffs_builder=None, scan_step=1e-3, xtol=1e-10):
    """Covolume at which the strength prefactor equals its ideal-gas value.

    The interval ``(0, 1/3)`` is scanned at ``scan_step`` and every sign
    change is refined by bisection.

    Returns
    -------
    float or list of float
        The root, or all roots if the scan finds several.

    Raises
    ------
    NotFound
        If the difference never changes sign.
    """
    if not 0.0 <= a_tilde < 1.0:
        raise DomainError(f"a_tilde must lie in [0, 1), got {a_tilde}")
    ideal = strength(gamma, 0.0, 0.0, coeffs_builder)

    def diff(b):
        return strength(gamma, a_tilde, b, coeffs_builder) - ideal

    grid = np.arange(scan_step, 1.0 / 3.0, scan_step)
    vals = []
    for b in grid:
        try:
            vals.append(diff(b))
        except DomainError:
            vals.append(np.nan)
    vals = np.array(vals)
    roots = []
    for i in range(len(grid) - 1):
        v0, v1 = vals[i], vals[i + 1]
        if np.isfinite(v0) and np.isfinite(v1) and v0 * v1 < 0.0:
            roots.append(bisect(diff, grid[i], grid[i + 1], xtol=xtol))
        elif v0 == 0.0:
            roots.append(float(grid[i]))
    if not roots:
        raise NotFound(f"no b_star in (0, 1/3) at a_tilde={a_tilde}, gamma={gamma}")
    return roots[0] if len(roots) == 1 else roots
