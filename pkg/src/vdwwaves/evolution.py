r"""Method-of-lines solver for the transport system

.. math::

    h_\tau = \hat\Gamma_0 h h_\theta + \Lambda_0 h^2 h_\theta + \hat\beta h_{\theta\theta}
             - \tfrac{c_0}{2} g_\eta, \qquad g_\theta = h_\eta .

``h`` is advanced with classical RK4; the flux derivative
``d/dtheta (gamma_hat0 h**2 / 2 + lambda0 h**3 / 3)`` and ``h_thetatheta`` use
second-order central differences, so the discrete mass telescopes on
periodic grids.  ``g`` is not evolved: every stage rebuilds it from ``h`` by
cumulative trapezoid quadrature along theta.

Gauges for ``g``:

* ``periodic``: ``g(theta_min, eta) = 0``; the theta-mean of ``h_eta`` is
  removed before integrating so ``g`` stays periodic.
* ``dirichlet-from-exact``: ``g`` is anchored to the supplied exact ``g`` at
  ``theta_max``.  Anchoring at ``theta_min`` turns the quadrature into an
  anti-damped Volterra operator and the scheme blows up under refinement.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from .errors import NonFiniteInput, ShapeError, StabilityError

__all__ = [
    "Grid2D",
    "WaveField",
    "SchemeConfig",
    "init_field",
    "auxiliary_field",
    "rhs",
    "stable_dt",
    "step",
    "integrate",
    "residual_zk",
    "mass",
    "to_traveling_frame",
    "write_snapshots_csv",
]

BC_TAGS = ("periodic", "dirichlet-from-exact")


@dataclass(frozen=True)
class Grid2D:
    theta_min: float
    theta_max: float
    n_theta: int
    eta_min: float
    eta_max: float
    n_eta: int
    bc: str = "periodic"

    def __post_init__(self):
        if self.bc not in BC_TAGS:
            raise ValueError(f"bc must be one of {BC_TAGS}, got {self.bc!r}")
        if not self.theta_max > self.theta_min or not self.eta_max > self.eta_min:
            raise ValueError("grid bounds must satisfy max > min")
        if int(self.n_theta) != self.n_theta or int(self.n_eta) != self.n_eta:
            raise ValueError("sample counts must be integers")
        if self.n_theta < 8 or self.n_eta < 8:
            raise ValueError("need at least 8 samples per direction")

    @property
    def periodic(self):
        return self.bc == "periodic"

    @property
    def shape(self):
        return (int(self.n_theta), int(self.n_eta))

    @property
    def theta_length(self):
        return self.theta_max - self.theta_min

    @property
    def dtheta(self):
        n = self.n_theta if self.periodic else self.n_theta - 1
        return (self.theta_max - self.theta_min) / n

    @property
    def deta(self):
        n = self.n_eta if self.periodic else self.n_eta - 1
        return (self.eta_max - self.eta_min) / n

    @property
    def theta(self):
        return self.theta_min + self.dtheta * np.arange(self.n_theta)

    @property
    def eta(self):
        return self.eta_min + self.deta * np.arange(self.n_eta)

    def mesh(self):
        return np.meshgrid(self.theta, self.eta, indexing="ij")

    def refined(self, factor=2):
        """Nested grid with every interval split ``factor`` times."""
        if self.periodic:
            return replace(self, n_theta=self.n_theta * factor, n_eta=self.n_eta * factor)
        return replace(
            self,
            n_theta=(self.n_theta - 1) * factor + 1,
            n_eta=(self.n_eta - 1) * factor + 1,
        )


@dataclass
class WaveField:
    """Samples of ``h`` and ``g`` on ``grid`` at time ``tau``.

    ``boundary`` is required for Dirichlet grids: any object with methods
    ``h(tau, theta, eta)`` and ``g(tau, theta, eta)``.
    """

    grid: Grid2D
    tau: float
    h: np.ndarray
    g: np.ndarray
    boundary: object = field(default=None, repr=False)

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=float)
        self.g = np.asarray(self.g, dtype=float)
        if self.h.shape != self.grid.shape or self.g.shape != self.grid.shape:
            raise ShapeError(f"field shape {self.h.shape}/{self.g.shape} does not match grid {self.grid.shape}")
        if not (np.all(np.isfinite(self.h)) and np.all(np.isfinite(self.g))):
            raise NonFiniteInput("field samples must be finite")
        if not self.grid.periodic and self.boundary is None:
            raise ValueError("dirichlet-from-exact grids need a boundary source")


@dataclass(frozen=True)
class SchemeConfig:
    """Time-step safety factor and floor for the diffusive bound."""

    cfl: float = 0.4
    tiny: float = 1e-300

    def as_dict(self):
        return {
            "cfl": self.cfl,
            "tiny": self.tiny,
            "space": "central-2nd-order-flux-form",
            "time": "rk4",
            "g_quadrature": "cumulative-trapezoid",
        }


def to_traveling_frame(theta, tau, eta, q):
    """``(X, T) = (theta - q tau, eta)``."""
    return np.subtract(theta, np.multiply(q, tau)), eta


def _h_eta(h, grid):
    if grid.periodic:
        return (np.roll(h, -1, axis=1) - np.roll(h, 1, axis=1)) / (2.0 * grid.deta)
    return np.gradient(h, grid.deta, axis=1, edge_order=2)


def auxiliary_field(h, grid, tau=0.0, boundary=None):
    """Rebuild ``g`` from ``h`` by trapezoid quadrature of ``g_theta = h_eta``."""
    he = _h_eta(h, grid)
    dth = grid.dtheta
    if grid.periodic:
        he = he - he.mean(axis=0, keepdims=True)
        return cumulative_trapezoid(he, dx=dth, axis=0, initial=0.0)
    cum = cumulative_trapezoid(he, dx=dth, axis=0, initial=0.0)
    g_top = boundary.g(tau, grid.theta_max, grid.eta)
    return g_top[np.newaxis, :] + cum - cum[-1:, :]


def _enforce(h, grid, tau, boundary):
    if grid.periodic:
        return h
    TH, ET = grid.mesh()
    hb = boundary.h(tau, TH, ET)
    h[0, :] = hb[0, :]
    h[-1, :] = hb[-1, :]
    h[:, 0] = hb[:, 0]
    h[:, -1] = hb[:, -1]
    return h


def _rhs(h, tau, grid, coeffs, boundary):
    G0, lam, beta, c0 = coeffs.gamma_hat0, coeffs.lambda0, coeffs.beta_hat, coeffs.c0
    dth, de = grid.dtheta, grid.deta
    g = auxiliary_field(h, grid, tau, boundary)
    F = 0.5 * G0 * h**2 + lam * h**3 / 3.0
    if grid.periodic:
        out = (np.roll(F, -1, 0) - np.roll(F, 1, 0)) / (2.0 * dth)
        if beta != 0.0:
            out += beta * (np.roll(h, -1, 0) - 2.0 * h + np.roll(h, 1, 0)) / dth**2
        out -= 0.5 * c0 * (np.roll(g, -1, 1) - np.roll(g, 1, 1)) / (2.0 * de)
        return out
    out = np.zeros_like(h)
    inner = (slice(1, -1), slice(1, -1))
    out[inner] = (F[2:, 1:-1] - F[:-2, 1:-1]) / (2.0 * dth)
    if beta != 0.0:
        out[inner] += beta * (h[2:, 1:-1] - 2.0 * h[1:-1, 1:-1] + h[:-2, 1:-1]) / dth**2
    out[inner] -= 0.5 * c0 * (g[1:-1, 2:] - g[1:-1, :-2]) / (2.0 * de)
    return out


def init_field(grid, ic=None, boundary=None, tau=0.0):
    """Sample ``ic(theta, eta)`` on ``grid`` and build the matching ``g``.

    With ``ic`` omitted the boundary source supplies the initial data.
    """
    TH, ET = grid.mesh()
    if ic is None:
        if boundary is None:
            raise ValueError("need an initial condition or a boundary source")
        h = boundary.h(tau, TH, ET)
    else:
        h = ic(TH, ET)
    h = np.broadcast_to(np.asarray(h, dtype=float), grid.shape).copy()
    if not np.all(np.isfinite(h)):
        raise NonFiniteInput("initial condition is not finite on the grid")
    if not grid.periodic:
        if boundary is None:
            raise ValueError("dirichlet-from-exact grids need a boundary source")
        h = _enforce(h, grid, tau, boundary)
    g = auxiliary_field(h, grid, tau, boundary)
    return WaveField(grid, float(tau), h, g, boundary)


def rhs(field, coeffs):
    """Time derivative of ``h``; zero on Dirichlet boundary nodes."""
    return _rhs(field.h, field.tau, field.grid, coeffs, field.boundary)


def stable_dt(field, coeffs, scheme=SchemeConfig()):
    grid = field.grid
    h = field.h
    speed = np.max(np.abs(coeffs.gamma_hat0 * h + coeffs.lambda0 * h**2))
    bounds = [grid.dtheta**2 / (2.0 * coeffs.beta_hat + scheme.tiny)]
    if speed > 0.0:
        bounds.append(grid.dtheta / speed)
    if coeffs.c0 > 0.0:
        # quadrature in theta times a second difference in eta
        bounds.append(2.0 * grid.deta**2 / (coeffs.c0 * grid.theta_length))
    return scheme.cfl * min(bounds)


def step(field, coeffs, dtau):
    """One classical RK4 step of length ``dtau``."""
    grid, bnd, t = field.grid, field.boundary, field.tau
    h = field.h

    def f(y, s):
        return _rhs(y, s, grid, coeffs, bnd)

    # overflow is reported below as StabilityError
    with np.errstate(over="ignore", invalid="ignore"):
        k1 = f(h, t)
        y = _enforce(h + 0.5 * dtau * k1, grid, t + 0.5 * dtau, bnd)
        k2 = f(y, t + 0.5 * dtau)
        y = _enforce(h + 0.5 * dtau * k2, grid, t + 0.5 * dtau, bnd)
        k3 = f(y, t + 0.5 * dtau)
        y = _enforce(h + dtau * k3, grid, t + dtau, bnd)
        k4 = f(y, t + dtau)
        h_new = _enforce(h + dtau / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), grid, t + dtau, bnd)
    if not np.all(np.isfinite(h_new)):
        raise StabilityError(f"non-finite samples after step to tau={t + dtau:.6g}", tau=t + dtau)
    g_new = auxiliary_field(h_new, grid, t + dtau, bnd)
    return WaveField(grid, t + dtau, h_new, g_new, bnd)


def integrate(field, coeffs, tau_end, snapshot_every=None, scheme=SchemeConfig(), max_steps=10_000_000):
    """Advance to ``tau_end``, returning snapshots including the initial field.

    Snapshots are taken every ``snapshot_every`` in tau (default: only the
    end point); steps are shortened to land on each snapshot time exactly.
    """
    if tau_end < field.tau:
        raise ValueError("tau_end precedes the field time")
    snaps = [field]
    if tau_end == field.tau:
        return snaps
    targets = []
    if snapshot_every:
        k = 1
        while field.tau + k * snapshot_every < tau_end * (1 - 1e-12) - 1e-15:
            targets.append(field.tau + k * snapshot_every)
            k += 1
    targets.append(tau_end)

    cur = field
    n = 0
    for target in targets:
        while cur.tau < target:
            dt = stable_dt(cur, coeffs, scheme)
            remaining = target - cur.tau
            if dt >= remaining * (1.0 - 1e-10):
                dt = remaining
            cur = step(cur, coeffs, dt)
            n += 1
            if dt == remaining:
                cur.tau = target
            if n > max_steps:
                raise StabilityError(f"exceeded {max_steps} steps before tau={target}", tau=cur.tau)
        snaps.append(cur)
    return snaps


def residual_zk(h_samples, grid, dtau, coeffs):
    """Discrete residual of the combined second-order equation.

    Parameters
    ----------
    h_samples : array_like, shape (n_tau, n_theta, n_eta)
        ``h`` at ``n_tau >= 3`` equally spaced time levels.
    dtau : float
        Spacing of the time levels.

    Returns
    -------
    ndarray, shape (n_tau - 2, n_theta - 4, n_eta - 2)
        ``(h_tau - gamma h h_theta - lambda h**2 h_theta - beta h_thetatheta)_theta
        + (c0/2) h_etaeta`` at interior points, all central differences.
    """
    hs = np.asarray(h_samples, dtype=float)
    if hs.ndim != 3 or hs.shape[1:] != grid.shape:
        raise ShapeError(f"expected (n_tau, {grid.shape[0]}, {grid.shape[1]}), got {hs.shape}")
    if hs.shape[0] < 3:
        raise ShapeError("need at least three time levels")
    G0, lam, beta, c0 = coeffs.gamma_hat0, coeffs.lambda0, coeffs.beta_hat, coeffs.c0
    dth, de = grid.dtheta, grid.deta
    ht = (hs[2:] - hs[:-2]) / (2.0 * dtau)
    h = hs[1:-1]
    F = 0.5 * G0 * h**2 + lam * h**3 / 3.0
    i = slice(2, -2)
    j = slice(1, -1)
    ht_th = (ht[:, 3:-1, j] - ht[:, 1:-3, j]) / (2.0 * dth)
    F_thth = (F[:, 3:-1, j] - 2.0 * F[:, i, j] + F[:, 1:-3, j]) / dth**2
    h_ththth = (h[:, 4:, j] - 2.0 * h[:, 3:-1, j] + 2.0 * h[:, 1:-3, j] - h[:, :-4, j]) / (2.0 * dth**3)
    h_ee = (h[:, i, 2:] - 2.0 * h[:, i, j] + h[:, i, :-2]) / de**2
    return ht_th - F_thth - beta * h_ththth + 0.5 * c0 * h_ee


def mass(field):
    """Trapezoid-rule integral of ``h`` over the grid."""
    grid = field.grid
    if grid.periodic:
        return float(field.h.sum() * grid.dtheta * grid.deta)
    return float(trapezoid(trapezoid(field.h, dx=grid.dtheta, axis=0), dx=grid.deta))


def write_snapshots_csv(path, snapshots):
    """Write ``tau,theta,eta,h,g`` rows with 17 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tau", "theta", "eta", "h", "g"])
        for snap in snapshots:
            TH, ET = snap.grid.mesh()
            for row in zip(TH.ravel(), ET.ravel(), snap.h.ravel(), snap.g.ravel()):
                w.writerow([f"{snap.tau:.17g}"] + [f"{v:.17g}" for v in row])
