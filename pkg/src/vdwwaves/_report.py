from __future__ import annotations

import math
from dataclasses import dataclass

Q_CONSTRAINT = "q = gamma_hat0**2/(4*lambda0)"
INVISCID = "beta_hat = 0"


@dataclass(frozen=True)
class ConstraintReport:
    """Which parameter constraints a formula needs, and which fail here."""

    required: tuple[str, ...]
    violated: tuple[str, ...]
    notes: str = ""

    @property
    def admissible(self) -> bool:
        return not self.violated

    def as_dict(self):
        return {
            "required": list(self.required),
            "violated": list(self.violated),
            "admissible": self.admissible,
            "notes": self.notes,
        }


def check_constraints(required, coeffs, q=None, notes="", rtol=1e-12):
    q = coeffs.q if q is None else q
    violated = []
    for name in required:
        if name == Q_CONSTRAINT:
            target = coeffs.q_critical
            if not math.isclose(q, target, rel_tol=rtol, abs_tol=rtol):
                violated.append(name)
        elif name == INVISCID:
            if coeffs.beta_hat != 0.0:
                violated.append(name)
        else:
            raise KeyError(name)
    return ConstraintReport(tuple(required), tuple(violated), notes)
