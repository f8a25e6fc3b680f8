r"""Closed-form solutions of the amplitude equation.

In the traveling frame ``X = theta - q tau``, ``T = eta`` every family has
the form ``H = A + u(X, T)`` with ``A = -gamma_hat0 / (2 lambda0)``:

=====================  ==============================================
variant                ``u(X, T)``
=====================  ==============================================
constant               ``0``
wavefan_plus/minus     ``+/- s (X + 3 k2 / 2) / (T + k1)``
cuberoot               ``cbrt(X) (kbar1 T + kbar2)``
case2_linear_*         ``+/- s X / T``
case2_extended_*       ``+/- s X / T + kbar1 / T + kbar2 T**2``
=====================  ==============================================

with ``s = sqrt(c0 / (2 lambda0))``.  Each family also carries its auxiliary
field ``G`` (``G_X = H_T``) so the solver can take Dirichlet data from it.

Residuals are certified by finite differences of the analytic evaluation,
never by the closed forms of the derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._report import INVISCID, Q_CONSTRAINT, check_constraints
from .errors import SingularPointError
from .evolution import to_traveling_frame

__all__ = [
    "VARIANTS",
    "ExactSolutionSpec",
    "ExactBoundary",
    "ResidualPair",
    "frame_speed",
    "evaluate",
    "evaluate_traveling",
    "auxiliary",
    "auxiliary_traveling",
    "boundary",
    "admissibility",
    "traveling_residual_fd",
    "lab_residual_fd",
    "pde_residual_fd",
]

VARIANTS = (
    "constant",
    "wavefan_plus",
    "wavefan_minus",
    "cuberoot",
    "case2_linear_plus",
    "case2_linear_minus",
    "case2_extended_plus",
    "case2_extended_minus",
)


@dataclass(frozen=True)
class ExactSolutionSpec:
    variant: str
    k1: float = 0.0
    k2: float = 0.0
    kbar1: float = 0.0
    kbar2: float = 0.0
    q: float | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; choose from {VARIANTS}")
        for name in ("k1", "k2", "kbar1", "kbar2"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.q is not None and not math.isfinite(self.q):
            raise ValueError("q must be finite")

    @property
    def sign(self):
        return -1.0 if self.variant.endswith("_minus") else 1.0


def frame_speed(spec, coeffs):
    return coeffs.q if spec.q is None else spec.q


def _singular_distance(spec, X, T):
    v = spec.variant
    if v.startswith("wavefan"):
        return np.abs(T + spec.k1)
    if v.startswith("case2"):
        return np.abs(T)
    if v == "cuberoot":
        # the value is finite at X = 0, its X-derivatives are not
        return np.abs(X)
    return np.full(np.broadcast(X, T).shape, np.inf)


def _check_regular(spec, X, T):
    if spec.variant == "cuberoot":
        return
    d = _singular_distance(spec, X, T)
    if np.any(d == 0.0):
        raise SingularPointError(f"{spec.variant} is singular on this point set")


def evaluate_traveling(spec, coeffs, X, T):
    """``H(X, T)`` in the frame moving with ``frame_speed(spec, coeffs)``."""
    X = np.asarray(X, dtype=float)
    T = np.asarray(T, dtype=float)
    _check_regular(spec, X, T)
    A = coeffs.constant_state
    S = spec.sign * coeffs.fan_slope
    v = spec.variant
    if v == "constant":
        u = np.zeros(np.broadcast(X, T).shape)
    elif v.startswith("wavefan"):
        u = S * (X + 1.5 * spec.k2) / (T + spec.k1)
    elif v == "cuberoot":
        u = np.cbrt(X) * (spec.kbar1 * T + spec.kbar2)
    elif v.startswith("case2_linear"):
        u = S * X / T
    else:
        u = S * X / T + spec.kbar1 / T + spec.kbar2 * T**2
    return A + u


def evaluate(spec, coeffs, tau, theta, eta):
    """Lab-frame amplitude ``h(tau, theta, eta)``."""
    X, T = to_traveling_frame(theta, tau, eta, frame_speed(spec, coeffs))
    return evaluate_traveling(spec, coeffs, X, T)


def auxiliary_traveling(spec, coeffs, X, T):
    """Auxiliary field ``G`` with ``G_X = H_T`` for the same family.

    The additive function of ``T`` is fixed so that the undifferentiated
    transport equation also holds, which is what Dirichlet data need.
    """
    X = np.asarray(X, dtype=float)
    T = np.asarray(T, dtype=float)
    _check_regular(spec, X, T)
    c0, lam = coeffs.c0, coeffs.lambda0
    S = spec.sign * coeffs.fan_slope
    dq = frame_speed(spec, coeffs) - coeffs.q_critical
    v = spec.variant
    shape = np.broadcast(X, T).shape
    if v == "constant":
        return np.zeros(shape)
    if v.startswith("wavefan") or v.startswith("case2_linear"):
        if v.startswith("wavefan"):
            Xc, Tc = X + 1.5 * spec.k2, T + spec.k1
        else:
            Xc, Tc = X, T
        return -S * Xc**2 / (2.0 * Tc**2) + (2.0 / c0) * dq * S * np.log(np.abs(Tc))
    if v.startswith("case2_extended"):
        k1b, k2b = spec.kbar1, spec.kbar2
        nu = (-(k1b**2) / (2.0 * T**2) + 2.0 * k1b * k2b * T + k2b**2 * T**4 / 4.0) / S
        nu = nu + (2.0 / c0) * dq * S * np.log(np.abs(T))
        return -S * X**2 / (2.0 * T**2) + (-k1b / T**2 + 2.0 * k2b * T) * X + nu
    # cuberoot
    k1b, k2b = spec.kbar1, spec.kbar2
    if k1b != 0.0:
        nu = lam / (6.0 * c0 * k1b) * ((k1b * T + k2b) ** 4 - k2b**4)
    else:
        nu = 2.0 * lam / (3.0 * c0) * k2b**3 * T
    return 0.75 * k1b * np.abs(X) ** (4.0 / 3.0) + nu + np.zeros(shape)


def auxiliary(spec, coeffs, tau, theta, eta):
    X, T = to_traveling_frame(theta, tau, eta, frame_speed(spec, coeffs))
    return auxiliary_traveling(spec, coeffs, X, T)


class ExactBoundary:
    """Adapter handing an exact family to the solver as Dirichlet data."""

    def __init__(self, spec, coeffs):
        self.spec = spec
        self.coeffs = coeffs

    def h(self, tau, theta, eta):
        return evaluate(self.spec, self.coeffs, tau, theta, eta)

    def g(self, tau, theta, eta):
        return auxiliary(self.spec, self.coeffs, tau, theta, eta)

    def __repr__(self):
        return f"ExactBoundary({self.spec!r})"


def boundary(spec, coeffs):
    return ExactBoundary(spec, coeffs)


_NOTES = {
    "constant": "uniform state, valid for every q and beta_hat",
    "wavefan": "H is affine in X, so the dissipative term and the q*H_XX term vanish; "
    "the generating symmetry needs the q-constraint but the solution itself does not",
    "case2_linear": "affine in X; no constraint on q or beta_hat",
    "case2_extended": "affine in X; no constraint on q or beta_hat for any kbar1, kbar2",
    "cuberoot": "H_XXX != 0 needs beta_hat = 0 and H_XX != 0 needs the q-constraint",
}


def admissibility(spec, coeffs):
    """Constraints the closed form needs to satisfy the evolution equation."""
    family = spec.variant.rsplit("_", 1)[0] if spec.variant.endswith(("_plus", "_minus")) else spec.variant
    required = (Q_CONSTRAINT, INVISCID) if spec.variant == "cuberoot" else ()
    return check_constraints(required, coeffs, frame_speed(spec, coeffs), notes=_NOTES[family])


# fourth-order central stencils: (offsets, weights, derivative order)
_D1 = (np.arange(-2, 3), np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0, 1)
_D2 = (np.arange(-2, 3), np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0, 2)
_D3 = (np.arange(-3, 4), np.array([1.0, -8.0, 13.0, 0.0, -13.0, 8.0, -1.0]) / 8.0, 3)


def _diff(fn, args, axis, stencil, h):
    offsets, weights, order = stencil
    total = 0.0
    for k, w in zip(offsets, weights):
        if w == 0.0:
            continue
        shifted = list(args)
        shifted[axis] = args[axis] + k * h
        total = total + w * fn(*shifted)
    return total / h**order


def traveling_residual_fd(H_fn, coeffs, X, T, step=1e-3, q=None):
    """Residual of ``(beta H_X + P(H))_XX - (c0/2) H_TT`` by finite differences.

    ``P(H) = q H + gamma_hat0 H**2 / 2 + lambda0 H**3 / 3``.
    """
    q = coeffs.q if q is None else q
    G0, lam, beta, c0 = coeffs.gamma_hat0, coeffs.lambda0, coeffs.beta_hat, coeffs.c0
    X = np.asarray(X, dtype=float)
    T = np.asarray(T, dtype=float)

    def flux(x, t):
        H = H_fn(x, t)
        return q * H + 0.5 * G0 * H**2 + lam * H**3 / 3.0

    res = _diff(flux, (X, T), 0, _D2, step) - 0.5 * c0 * _diff(H_fn, (X, T), 1, _D2, step)
    if beta != 0.0:
        res = res + beta * _diff(H_fn, (X, T), 0, _D3, step)
    return res


def lab_residual_fd(h_fn, coeffs, tau, theta, eta, step=1e-3, tau_step=None):
    """Residual of the lab-frame equation by finite differences.

    ``(h_tau - gamma_hat0 h h_theta - lambda0 h**2 h_theta - beta h_thetatheta)_theta
    + (c0/2) h_etaeta``.  The tau step defaults to ``step / max(1, |q|)`` so a
    tau-shift displaces the profile by about one theta step.
    """
    G0, lam, beta, c0 = coeffs.gamma_hat0, coeffs.lambda0, coeffs.beta_hat, coeffs.c0
    if tau_step is None:
        tau_step = step / max(1.0, abs(coeffs.q))
    args = tuple(np.asarray(a, dtype=float) for a in (tau, theta, eta))

    def flux(t, th, e):
        h = h_fn(t, th, e)
        return 0.5 * G0 * h**2 + lam * h**3 / 3.0

    def h_tau(t, th, e):
        return _diff(h_fn, (t, th, e), 0, _D1, tau_step)

    res = _diff(h_tau, args, 1, _D1, step)
    res = res - _diff(flux, args, 1, _D2, step)
    if beta != 0.0:
        res = res - beta * _diff(h_fn, args, 1, _D3, step)
    return res + 0.5 * c0 * _diff(h_fn, args, 2, _D2, step)


class ResidualPair(NamedTuple):
    traveling: np.ndarray
    lab: np.ndarray


def pde_residual_fd(spec, coeffs, pts, step=1e-3, residual_coeffs=None):
    """Finite-difference residuals of ``spec`` in both frames.

    Parameters
    ----------
    pts : tuple of array_like
        ``(tau, theta, eta)`` sample points; each must stay ``10 * step``
        away from the variant's singular set.
    residual_coeffs : WaveCoefficients, optional
        Coefficients used in the residual operator, when they should differ
        from those that built the solution (sensitivity checks).
    """
    tau, theta, eta = (np.asarray(a, dtype=float) for a in pts)
    q = frame_speed(spec, coeffs)
    X, T = to_traveling_frame(theta, tau, eta, q)
    if np.any(_singular_distance(spec, X, T) < 10.0 * step):
        raise SingularPointError(f"sample points within 10*step of the {spec.variant} singular set")
    op = coeffs if residual_coeffs is None else residual_coeffs

    def H_fn(x, t):
        return evaluate_traveling(spec, coeffs, x, t)

    def h_fn(t, th, e):
        return evaluate(spec, coeffs, t, th, e)

    trav = traveling_residual_fd(H_fn, op, X, T, step, q=q)
    lab = lab_residual_fd(h_fn, op, tau, theta, eta, step, tau_step=step / max(1.0, abs(q)))
    return ResidualPair(trav, lab)
