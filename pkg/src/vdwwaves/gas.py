"""van der Waals gas model and the coefficients of the amplitude equation.

All state is carried in :class:`GasParameters`, which stores the
dimensionless van der Waals constants ``a_tilde = a rho0**2 / p0`` and
``b_tilde = b rho0`` next to the background state.  The dimensional ``a``
and ``b`` are derived on demand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError

__all__ = [
    "GasParameters",
    "WaveCoefficients",
    "validate",
    "sound_speed",
    "sound_speed_at",
    "eos_eval",
    "isentrope",
    "fundamental_derivative",
    "coefficients",
]


@dataclass(frozen=True)
class GasParameters:
    gamma: float = 1.4
    a_tilde: float = 0.0
    b_tilde: float = 0.0
    rho0: float = 1.0
    p0: float = 1.0
    cv: float = 2.5
    epsilon: float = 0.1
    mu_hat: float = 0.0
    kappa_hat: float = 0.0

    @property
    def a(self):
        """Dimensional attraction constant."""
        return self.a_tilde * self.p0 / self.rho0**2

    @property
    def b(self):
        """Dimensional covolume."""
        return self.b_tilde / self.rho0

    @property
    def R(self):
        # tied to cv so the EOS and the dissipation coefficient agree
        return self.cv * (self.gamma - 1.0)

    def replace(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class WaveCoefficients:
    """Constants of the evolution equation.

    ``q`` is the traveling-frame speed; left as ``None`` it becomes
    ``gamma_hat0**2 / (4 lambda0)``, the value for which the similarity
    solutions exist.
    """

    c0: float
    gamma_hat0: float
    lambda0: float
    beta_hat: float
    q: float | None = field(default=None)

    def __post_init__(self):
        if self.q is None:
            q = self.gamma_hat0**2 / (4.0 * self.lambda0) if self.lambda0 != 0 else 0.0
            object.__setattr__(self, "q", q)

    @property
    def q_critical(self):
        """Frame speed ``gamma_hat0**2 / (4 lambda0)``."""
        return self.gamma_hat0**2 / (4.0 * self.lambda0)

    @property
    def constant_state(self):
        """The uniform solution ``-gamma_hat0 / (2 lambda0)``."""
        return -self.gamma_hat0 / (2.0 * self.lambda0)

    @property
    def fan_slope(self):
        """``sqrt(c0 / (2 lambda0))``, the wavefan slope and shock-strength prefactor."""
        return math.sqrt(self.c0 / (2.0 * self.lambda0))

    def replace(self, **changes):
        return replace(self, **changes)


def validate(params: GasParameters) -> GasParameters:
    """Check every constraint on ``params`` and return it unchanged.

    Raises
    ------
    DomainError
        Naming the first violated constraint.
    """
    p = params
    values = (p.gamma, p.a_tilde, p.b_tilde, p.rho0, p.p0, p.cv, p.epsilon, p.mu_hat, p.kappa_hat)
    if not all(math.isfinite(v) for v in values):
        raise DomainError("gas parameters must be finite")
    if not 1.0 < p.gamma <= 5.0 / 3.0:
        raise DomainError(f"gamma out of range: need 1 < gamma <= 5/3, got {p.gamma}")
    if not 0.0 <= p.a_tilde < 1.0:
        raise DomainError(f"a_tilde out of range: need 0 <= a_tilde < 1, got {p.a_tilde}")
    if not 0.0 <= p.b_tilde < 1.0 / 3.0:
        raise DomainError(f"b_tilde out of range: need 0 <= b_tilde < 1/3, got {p.b_tilde}")
    if p.rho0 <= 0.0 or p.p0 <= 0.0:
        raise DomainError(f"nonpositive background state: rho0={p.rho0}, p0={p.p0}")
    if p.cv <= 0.0:
        raise DomainError(f"cv must be positive, got {p.cv}")
    if not 0.0 < p.epsilon < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {p.epsilon}")
    if p.mu_hat < 0.0 or p.kappa_hat < 0.0:
        raise DomainError("mu_hat and kappa_hat must be nonnegative")
    if p.gamma * (1.0 + p.a_tilde) / (1.0 - p.b_tilde) - 2.0 * p.a_tilde <= 0.0:
        raise DomainError("imaginary sound speed: gamma(1+a_tilde)/(1-b_tilde) - 2 a_tilde <= 0")
    return params


def sound_speed_at(rho, p, params: GasParameters):
    """Isentropic sound speed at density ``rho`` and pressure ``p``."""
    a, b, g = params.a, params.b, params.gamma
    c2 = g * (p + a * rho**2) / (rho * (1.0 - b * rho)) - 2.0 * a * rho
    if np.any(np.asarray(c2) <= 0.0):
        raise DomainError("imaginary sound speed at probe state")
    return np.sqrt(c2)


def sound_speed(params: GasParameters) -> float:
    """Background sound speed ``c0``."""
    validate(params)
    return float(sound_speed_at(params.rho0, params.p0, params))


def eos_eval(rho, T, params: GasParameters, K=1.0):
    """Pressure and entropy from density and temperature.

    Parameters
    ----------
    rho, T : float or array_like
        Density and temperature, with ``b rho < 1`` and ``T > 0``.
    K : float
        Entropy constant; it only shifts ``S``.

    Returns
    -------
    p, S : float or ndarray
    """
    rho = np.asarray(rho, dtype=float)
    T = np.asarray(T, dtype=float)
    a, b, R, g = params.a, params.b, params.R, params.gamma
    if np.any(b * rho >= 1.0) or np.any(rho <= 0.0):
        raise DomainError("density outside 0 < rho < 1/b")
    if np.any(T <= 0.0):
        raise DomainError("temperature must be positive")
    if K <= 0.0:
        raise DomainError("entropy constant K must be positive")
    p = R * T * rho / (1.0 - b * rho) - a * rho**2
    S = R * np.log(K * T ** (1.0 / (g - 1.0)) * (1.0 - b * rho) / rho)
    if p.ndim == 0:
        return float(p), float(S)
    return p, S


def isentrope(rho, params: GasParameters):
    """Temperature and pressure along the isentrope through ``(rho0, p0)``."""
    rho = np.asarray(rho, dtype=float)
    a, b, R, g = params.a, params.b, params.R, params.gamma
    rho0, p0 = params.rho0, params.p0
    if np.any(b * rho >= 1.0) or np.any(rho <= 0.0):
        raise DomainError("isentrope probe left 0 < rho < 1/b")
    T0 = (p0 + a * rho0**2) * (1.0 - b * rho0) / (R * rho0)
    T = T0 * ((rho * (1.0 - b * rho0)) / (rho0 * (1.0 - b * rho))) ** (g - 1.0)
    p = R * T * rho / (1.0 - b * rho) - a * rho**2
    return T, p


def fundamental_derivative(params: GasParameters, drho=None) -> float:
    """``c / rho + dc/drho`` at constant entropy, at the background state.

    The derivative is a central difference of the sound speed evaluated
    along the analytic isentrope, with step ``drho`` (default ``rho0 * 1e-5``).
    """
    validate(params)
    rho0 = params.rho0
    if drho is None:
        drho = rho0 * 1e-5
    probes = np.array([rho0 - drho, rho0 + drho])
    _, p = isentrope(probes, params)
    c_minus, c_plus = sound_speed_at(probes, p, params)
    c0 = float(sound_speed_at(rho0, params.p0, params))
    return c0 / rho0 + (c_plus - c_minus) / (2.0 * drho)


def coefficients(params: GasParameters) -> WaveCoefficients:
    """Sound speed, nonlinearity, cubic and dissipation coefficients."""
    validate(params)
    g, eps = params.gamma, params.epsilon
    rho0, p0 = params.rho0, params.p0
    a, b = params.a, params.b
    arho2 = a * rho0**2
    om = 1.0 - b * rho0
    P = p0 + arho2

    c0 = sound_speed(params)
    gamma_hat0 = (-g * (g + 1.0) * P + 6.0 * arho2 * om**2) / (
        2.0 * eps * om * (g * P - 2.0 * arho2 * om)
    )
    base = g * P * om - 2.0 * arho2 * om**2
    lambda0 = math.sqrt(rho0) * (g * (g + 1.0) * (4.0 - g - 6.0 * b * rho0) * P - 12.0 * arho2 * om**3) / (
        2.0 * base**1.5
    )
    if not lambda0 > 0.0:
        raise DomainError(
            f"lambda0 = {lambda0:.6g} <= 0 at gamma={g}, a_tilde={params.a_tilde}, b_tilde={params.b_tilde}"
        )
    beta_hat = 2.0 * params.mu_hat / (3.0 * rho0) + params.kappa_hat * (g - 1.0) * (p0 / rho0 + a * rho0) / (
        2.0 * params.cv * c0**2 * rho0 * om
    )
    return WaveCoefficients(c0=c0, gamma_hat0=gamma_hat0, lambda0=lambda0, beta_hat=beta_hat)
