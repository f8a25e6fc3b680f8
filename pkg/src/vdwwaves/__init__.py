"""Weakly nonlinear dissipative waves in a van der Waals gas.

Submodules
----------
gas        equation of state and amplitude-equation coefficients
evolution  method-of-lines solver for the two-dimensional amplitude equation
exact      closed-form solutions and finite-difference residual checks
symmetry   nonclassical symmetry generators and the reduced profile equation
shock      jump conditions, shock trajectories, strength and decay
checks     the numerical verification suite
cli        command-line driver
"""

__version__ = "0.1.0"

from .gas import GasParameters, WaveCoefficients, coefficients  # noqa: E402

__all__ = ["GasParameters", "WaveCoefficients", "coefficients", "__version__"]
