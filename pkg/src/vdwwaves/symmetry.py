"""Nonclassical symmetries of the traveling-frame equation, checked numerically.

Generators and their coefficient functions are held as sympy expressions in
the symbols :data:`X`, :data:`T`, :data:`H` (and :data:`OMEGA` for reduced
profiles) so exact partial derivatives are available.  Nothing here derives
determining equations; the published systems are evaluated at sample
points and must vanish there.

Functions that accept a "function" take either a sympy expression in the
relevant symbol(s), or a plain callable, in which case derivatives fall
back to central differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import sympy as sp
from scipy.integrate import solve_ivp

from ._report import INVISCID, Q_CONSTRAINT, ConstraintReport, check_constraints
from .errors import DomainError, SingularityError, StabilityError

__all__ = [
    "X",
    "T",
    "H",
    "OMEGA",
    "Infinitesimals",
    "FTrajectory",
    "invariant_surface_residual",
    "case1_ode_residuals",
    "case1_determining_residuals",
    "case1_generator",
    "case2_generator",
    "case2_determining_residuals",
    "similarity_reduce",
    "similarity_solution",
    "F_ode_residual",
    "integrate_F_ode",
]

X, T, H = sp.symbols("X T H", real=True)
OMEGA = sp.Symbol("omega", real=True)

# central-difference steps relative to max(1, |x|), by derivative order
_FD_STEP = {1: 1e-6, 2: 1e-4, 3: 1e-3}


def _lambdify(expr, args):
    fn = sp.lambdify(args, expr, "numpy")

    def call(*vals):
        shape = np.broadcast(*vals).shape
        return np.broadcast_to(np.asarray(fn(*vals), dtype=float), shape)

    return call


def _fd(fn, x, order, others=(), pos=0):
    x = np.asarray(x, dtype=float)
    h = _FD_STEP[order] * np.maximum(1.0, np.abs(x))

    def at(k):
        args = list(others)
        args.insert(pos, x + k * h)
        return np.asarray(fn(*args), dtype=float)

    if order == 1:
        return (at(1) - at(-1)) / (2.0 * h)
    if order == 2:
        return (at(1) - 2.0 * at(0) + at(-1)) / h**2
    return (at(2) - 2.0 * at(1) + 2.0 * at(-1) - at(-2)) / (2.0 * h**3)


def _derivs1(fn, var, x, orders):
    """Values of ``d^k fn / dvar^k`` at ``x`` for each ``k`` in ``orders``."""
    x = np.asarray(x, dtype=float)
    if isinstance(fn, (list, tuple)):
        return [np.broadcast_to(np.asarray(fn[k](x), dtype=float), x.shape) for k in orders]
    if isinstance(fn, (sp.Expr, int, float)):
        expr = sp.sympify(fn)
        return [_lambdify(sp.diff(expr, var, k) if k else expr, (var,))(x) for k in orders]
    out = []
    for k in orders:
        out.append(np.asarray(fn(x), dtype=float) if k == 0 else _fd(fn, x, k))
    return out


def _derivs2(fn, Xv, Tv, spec):
    """Partial derivatives of ``fn(X, T)``; ``spec`` lists ``(nX, nT)`` pairs."""
    Xv = np.asarray(Xv, dtype=float)
    Tv = np.asarray(Tv, dtype=float)
    if isinstance(fn, (sp.Expr, int, float)):
        expr = sp.sympify(fn)
        out = []
        for nx, nt in spec:
            d = expr
            if nx:
                d = sp.diff(d, X, nx)
            if nt:
                d = sp.diff(d, T, nt)
            out.append(_lambdify(d, (X, T))(Xv, Tv))
        return out
    out = []
    for nx, nt in spec:
        if nx and nt:
            raise ValueError("mixed partials need a sympy expression")
        if nx:
            out.append(_fd(fn, Xv, nx, others=(Tv,), pos=0))
        elif nt:
            out.append(_fd(fn, Tv, nt, others=(Xv,), pos=1))
        else:
            out.append(np.asarray(fn(Xv, Tv), dtype=float) + np.zeros(np.broadcast(Xv, Tv).shape))
    return out


@dataclass(frozen=True)
class Infinitesimals:
    """Components of ``V = xi d_X + zeta d_T + chi d_H``.

    ``parts`` keeps the named building blocks (``f``, ``alpha``, ``beta``,
    ``f1``, ``f2``) and ``constraints`` the parameter constraints under which
    the generator solves its determining system.
    """

    xi: sp.Expr
    zeta: sp.Expr
    chi: sp.Expr
    normalization: str
    parts: dict = field(default_factory=dict, compare=False)
    constraints: tuple = ()

    def __call__(self, Xv, Tv, Hv):
        args = (X, T, H)
        return tuple(_lambdify(sp.sympify(e), args)(Xv, Tv, Hv) for e in (self.xi, self.zeta, self.chi))

    def partials(self):
        """First partial derivatives of each component."""
        return {
            name: {v.name: sp.diff(sp.sympify(e), v) for v in (X, T, H)}
            for name, e in (("xi", self.xi), ("zeta", self.zeta), ("chi", self.chi))
        }

    def scaled(self, lam):
        """``lam * V`` for a function ``lam(X, T, H)``."""
        lam = sp.sympify(lam)
        return Infinitesimals(
            lam * self.xi, lam * self.zeta, lam * self.chi, "scaled", dict(self.parts), self.constraints
        )

    def constraint_report(self, coeffs, q=None):
        return check_constraints(self.constraints, coeffs, q)


def invariant_surface_residual(inf, H_fn, pts):
    """``xi H_X + zeta H_T - chi`` at ``pts = (X, T)``; partials by central FD."""
    Xv, Tv = (np.asarray(p, dtype=float) for p in pts)
    hx = 1e-6 * np.maximum(1.0, np.abs(Xv))
    ht = 1e-6 * np.maximum(1.0, np.abs(Tv))
    Hv = np.asarray(H_fn(Xv, Tv), dtype=float)
    HX = (np.asarray(H_fn(Xv + hx, Tv)) - np.asarray(H_fn(Xv - hx, Tv))) / (2.0 * hx)
    HT = (np.asarray(H_fn(Xv, Tv + ht)) - np.asarray(H_fn(Xv, Tv - ht))) / (2.0 * ht)
    xi, zeta, chi = inf(Xv, Tv, Hv)
    res = xi * HX + zeta * HT - chi
    if not np.all(np.isfinite(res)):
        raise DomainError("non-finite evaluation in invariant surface condition")
    return res


def case1_ode_residuals(f1, f2, coeffs, pts, q=None):
    """The four ODE residuals constraining ``f1(T)`` and ``f2(T)`` (case zeta = 1).

    Returns an array of shape ``(4, n)``.
    """
    q = coeffs.q if q is None else q
    c0, G0, lam = coeffs.c0, coeffs.gamma_hat0, coeffs.lambda0
    Tv = np.asarray(pts, dtype=float)
    a, a1, a2 = _derivs1(f1, T, Tv, (0, 1, 2))
    b, b1, b2 = _derivs1(f2, T, Tv, (0, 1, 2))
    return np.array(
        [
            a2 - 4.0 * a * a1 - 6.0 * a**3,
            a2 + 2.0 * a * a1 - 24.0 * a**3,
            b2 + 2.0 * a1 * b - 24.0 * a**2 * b,
            b * b1 - 3.0 * a * b**2 + (2.0 * q / c0 - G0**2 / (2.0 * c0 * lam)) * a,
        ]
    )


def case1_determining_residuals(f, alpha, beta, coeffs, pts, q=None):
    """Residuals of the four relations between ``f``, ``alpha``, ``beta``
    (``xi = f``, ``chi = alpha H + beta``).  Shape ``(4, n)``."""
    q = coeffs.q if q is None else q
    c0, G0, lam, bh = coeffs.c0, coeffs.gamma_hat0, coeffs.lambda0, coeffs.beta_hat
    Xv, Tv = (np.asarray(p, dtype=float) for p in pts)
    fv, fX, fXX, fT = _derivs2(f, Xv, Tv, [(0, 0), (1, 0), (2, 0), (0, 1)])
    al, alX = _derivs2(alpha, Xv, Tv, [(0, 0), (1, 0)])
    be, beX = _derivs2(beta, Xv, Tv, [(0, 0), (1, 0)])
    r1 = (
        3.0 * bh * fXX
        - 3.0 * bh * alX
        - q * al
        + 2.0 * q * fX
        + (-al + 3.0 * fX) * (0.5 * c0 * fv**2 - q)
        + 0.5 * c0 * al * fv**2
        + c0 * fv * fT
        - G0 * be
    )
    r2 = 2.0 * lam * be + G0 * al + G0 * fX
    r3 = fX + 2.0 * al
    r4 = G0 * fXX - 4.0 * lam * beX - 4.0 * G0 * alX
    return np.array([r1, r2, r3, r4])


def case1_generator(k1, k2, coeffs):
    """Both case-1 generators (``zeta = 1``).

    Returns
    -------
    (branch_a, branch_b) : tuple of Infinitesimals
        ``branch_a`` has ``xi = (2X/3 + k2)/(T + k1)`` and
        ``chi = -(H + gamma_hat0/(2 lambda0)) / (3 (T + k1))`` and needs the
        q-constraint; ``branch_b`` is the translation ``xi = k2, chi = 0``.
    """
    k1, k2 = sp.nsimplify(k1) if float(k1).is_integer() else sp.Float(k1), sp.sympify(k2)
    shift = sp.Float(coeffs.gamma_hat0 / (2.0 * coeffs.lambda0))
    f1 = -1 / (3 * (T + k1))
    f2 = k2 / (T + k1)
    f = -2 * f1 * X + f2
    alpha = f1
    beta = f1 * shift
    a = Infinitesimals(
        xi=f,
        zeta=sp.Integer(1),
        chi=sp.simplify(alpha * H + beta),
        normalization="zeta=1",
        parts={"f1": f1, "f2": f2, "f": f, "alpha": alpha, "beta": beta},
        constraints=(Q_CONSTRAINT,),
    )
    zero = sp.Integer(0)
    b = Infinitesimals(
        xi=sp.sympify(k2),
        zeta=sp.Integer(1),
        chi=zero,
        normalization="zeta=1",
        parts={"f1": zero, "f2": sp.sympify(k2), "f": sp.sympify(k2), "alpha": zero, "beta": zero},
    )
    return a, b


_F_CHOICES = {"1/(3X)": "third", "third": "third", "1/X": "inverse", "inverse": "inverse", "0": "zero", "zero": "zero"}


def case2_generator(coeffs, f_choice, beta_branch="zero"):
    """Case-2 generator (``xi = 1, zeta = 0``) for ``alpha = f(X)``.

    Parameters
    ----------
    f_choice : {"1/(3X)", "1/X", "0"}
    beta_branch : {"zero", "plus", "minus"}
        Only for ``f = 0``: ``beta = 0`` or ``beta = +/- sqrt(c0/(2 lambda0)) / T``.

    Returns
    -------
    inf : Infinitesimals
    report : ConstraintReport
        For ``1/(3X)`` both ``beta_hat = 0`` and the q-constraint are needed;
        the other two branches solve their system unconditionally.
    """
    try:
        kind = _F_CHOICES[str(f_choice).replace(" ", "")]
    except KeyError:
        raise ValueError(f"f_choice must be one of '1/(3X)', '1/X', '0'; got {f_choice!r}") from None
    G0, lam = sp.Float(coeffs.gamma_hat0), sp.Float(coeffs.lambda0)
    notes = ""
    if kind == "third":
        alpha = 1 / (3 * X)
        beta = G0 / (6 * lam * X)
        required = (INVISCID, Q_CONSTRAINT)
    elif kind == "inverse":
        alpha = 1 / X
        beta = G0 / (2 * lam * X)
        required = ()
        notes = "beta = gamma_hat0/(2 lambda0 X) found by substitution; no constraint on beta_hat or q"
    else:
        alpha = sp.Integer(0)
        s = sp.Float(coeffs.fan_slope)
        beta = {"zero": sp.Integer(0), "plus": s / T, "minus": -s / T}[beta_branch]
        required = ()
        notes = "beta = beta(T) with (c0/2) beta_TT = 2 lambda0 beta**3; no constraint on beta_hat or q"
    inf = Infinitesimals(
        xi=sp.Integer(1),
        zeta=sp.Integer(0),
        chi=alpha * H + beta,
        normalization="xi=1,zeta=0",
        parts={"alpha": alpha, "beta": beta},
        constraints=required,
    )
    return inf, check_constraints(required, coeffs, notes=notes)


def case2_determining_residuals(alpha_fn, beta_fn, coeffs, q, pts):
    """The five relations ``alpha(X, T)``, ``beta(X, T)`` must satisfy.

    Returns an array of shape ``(5, n)``.
    """
    q = coeffs.q if q is None else q
    c0, G0, lam, bh = coeffs.c0, coeffs.gamma_hat0, coeffs.lambda0, coeffs.beta_hat
    Xv, Tv = (np.asarray(p, dtype=float) for p in pts)
    want = [(0, 0), (1, 0), (2, 0), (3, 0), (0, 1), (0, 2)]
    a, aX, aXX, aXXX, aT, aTT = _derivs2(alpha_fn, Xv, Tv, want)
    b, bX, bXX, bXXX, _, bTT = _derivs2(beta_fn, Xv, Tv, want)
    r1 = aT
    r2 = aXX + 8.0 * a * aX + 6.0 * a**3
    r3 = aXX + 5.0 * a * aX + 2.0 * a**3 + (lam / G0) * (bXX + 8.0 * aX * b + 6.0 * a * bX + 14.0 * a**2 * b)
    r4 = (
        bh * (aXXX + 3.0 * a * aXX + 3.0 * aX**2 + 3.0 * a**2 * aX)
        + 2.0 * lam * (3.0 * b * bX + 5.0 * a * b**2)
        + G0 * (bXX + 3.0 * a * bX + 5.0 * b * aX + 4.0 * a**2 * b)
        + (q * aXX + 2.0 * q * a * aX - 0.5 * c0 * aTT)
    )
    r5 = (
        bh * (bXXX + 3.0 * b * aXX + 3.0 * b * a * aX + 3.0 * aX * bX)
        + (q * bXX - 0.5 * c0 * bTT + 2.0 * q * b * aX)
        + G0 * (3.0 * b * bX + 2.0 * a * b**2)
        + 2.0 * b**3 * lam
    )
    return np.array([r1, r2, r3, r4, r5])


def _check_time(Tc):
    if np.any(Tc == 0.0):
        raise DomainError("similarity variables are singular at T = -k1")


def similarity_reduce(H_values, Xv, Tv, k1, k2, coeffs):
    """Map samples (or a callable) ``H(X, T)`` to ``(omega, F)``.

    ``omega = (X + 3 k2 / 2) / (T + k1)**(2/3)`` and
    ``F = (H + gamma_hat0/(2 lambda0)) (T + k1)**(1/3)``; these are the
    invariants of the case-1 generator ``branch_a``.
    """
    Xv = np.asarray(Xv, dtype=float)
    Tc = np.asarray(Tv, dtype=float) + k1
    _check_time(Tc)
    Hv = H_values(Xv, Tc - k1) if callable(H_values) else np.asarray(H_values, dtype=float)
    cr = np.cbrt(Tc)
    omega = (Xv + 1.5 * k2) / cr**2
    F = (Hv - coeffs.constant_state) * cr
    return omega, F


def similarity_solution(F, k1, k2, coeffs):
    """Inverse of :func:`similarity_reduce`: a callable ``H(X, T)`` built from ``F(omega)``."""
    A = coeffs.constant_state
    Ffn = _lambdify(sp.sympify(F), (OMEGA,)) if isinstance(F, sp.Expr) else F

    def H_fn(Xv, Tv):
        Tc = np.asarray(Tv, dtype=float) + k1
        _check_time(Tc)
        cr = np.cbrt(Tc)
        return A + np.asarray(Ffn((np.asarray(Xv, dtype=float) + 1.5 * k2) / cr**2)) / cr

    return H_fn


def F_ode_residual(F, omega_pts, coeffs, beta_hat=None):
    """``-beta F''' - lambda0 (F**2 F'' + 2 F F'**2) + c0 (2F/9 + 7 omega F'/9 + 2 omega**2 F''/9)``."""
    bh = coeffs.beta_hat if beta_hat is None else beta_hat
    w = np.asarray(omega_pts, dtype=float)
    orders = (0, 1, 2, 3) if bh != 0.0 else (0, 1, 2)
    d = _derivs1(F, OMEGA, w, orders)
    F0, F1, F2 = d[0], d[1], d[2]
    res = -coeffs.lambda0 * (F0**2 * F2 + 2.0 * F0 * F1**2) + coeffs.c0 * (
        2.0 / 9.0 * F0 + 7.0 / 9.0 * F1 * w + 2.0 / 9.0 * F2 * w**2
    )
    if bh != 0.0:
        res = res - bh * d[3]
    return res


@dataclass
class FTrajectory:
    omega: np.ndarray
    F: np.ndarray
    dF: np.ndarray
    d2F: np.ndarray
    sol: object = field(repr=False, default=None)


def integrate_F_ode(F0, F0p, F0pp, omega_span, coeffs, beta_hat=None, rtol=1e-11, atol=1e-12, n_out=201):
    """Integrate the reduced profile equation as an initial value problem.

    With ``beta_hat > 0`` the equation is third order and needs ``F0pp``;
    with ``beta_hat = 0`` it is second order in ``F`` with leading
    coefficient ``lambda0 F**2 - 2 c0 omega**2 / 9`` and ``F0pp`` is ignored.

    Raises
    ------
    SingularityError
        If the leading coefficient vanishes at the start or along the path
        (inviscid case only).
    StabilityError
        If the adaptive integrator fails or leaves the finite range.
    """
    bh = coeffs.beta_hat if beta_hat is None else beta_hat
    lam, c0 = coeffs.lambda0, coeffs.c0
    w0, w1 = (float(v) for v in omega_span)

    def lead(w, F):
        return lam * F**2 - 2.0 / 9.0 * c0 * w**2

    if bh > 0.0:
        y0 = [F0, F0p, F0pp]

        def fun(w, y):
            F, Fp, Fpp = y
            rest = -lam * (F**2 * Fpp + 2.0 * F * Fp**2) + c0 * (2.0 / 9.0 * F + 7.0 / 9.0 * w * Fp + 2.0 / 9.0 * w**2 * Fpp)
            return [Fp, Fpp, rest / bh]

        events = None
    elif bh == 0.0:
        scale = lam * F0**2 + 2.0 / 9.0 * c0 * w0**2
        if scale == 0.0 or abs(lead(w0, F0)) <= 1e-12 * scale:
            raise SingularityError(f"leading coefficient vanishes at omega={w0}, F={F0}")
        y0 = [F0, F0p]

        def fun(w, y):
            F, Fp = y
            return [Fp, (c0 * (2.0 / 9.0 * F + 7.0 / 9.0 * w * Fp) - 2.0 * lam * F * Fp**2) / lead(w, F)]

        def singular(w, y):
            return lead(w, y[0])

        singular.terminal = True
        events = [singular]
    else:
        raise ValueError("beta_hat must be nonnegative")

    sol = solve_ivp(fun, (w0, w1), y0, method="DOP853", rtol=rtol, atol=atol, dense_output=True, events=events)
    if sol.status == 1:
        where = float(sol.t_events[0][0])
        raise SingularityError(f"leading coefficient vanished at omega={where:.12g}")
    if sol.status != 0 or not np.all(np.isfinite(sol.y)):
        if bh == 0.0 and sol.t.size:
            # step-size collapse just before the event fires
            w_end, F_end = sol.t[-1], sol.y[0, -1]
            if abs(lead(w_end, F_end)) < 1e-3 * (lam * F_end**2 + 2.0 / 9.0 * c0 * w_end**2):
                raise SingularityError(f"leading coefficient vanished near omega={w_end:.12g}")
        raise StabilityError(f"profile integration failed: {sol.message}")
    w = np.linspace(w0, w1, n_out)
    y = sol.sol(w)
    if bh > 0.0:
        d2 = y[2]
    else:
        d2 = np.array([fun(wi, yi)[1] for wi, yi in zip(w, y.T)])
    return FTrajectory(w, y[0], y[1], d2, sol)
