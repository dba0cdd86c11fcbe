"""Family parameter for the genus-2 curves w^2 = z(z^4 + 2 cos(2*theta) z^2 + 1)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class ThetaParam:
    """The parameter theta of the curve family, with derived constants.

    theta must lie in the open interval (0, pi/2).
    """

    theta: float
    cos2t: float = field(init=False)
    sin2sq: float = field(init=False)

    def __post_init__(self) -> None:
        if not (0.0 < self.theta < math.pi / 2):
            raise ValueError(f"theta must lie in (0, pi/2), got {self.theta}")
        object.__setattr__(self, "cos2t", math.cos(2.0 * self.theta))
        object.__setattr__(self, "sin2sq", math.sin(2.0 * self.theta) ** 2)

    @property
    def mirror(self) -> "ThetaParam":
        """The parameter pi/2 - theta (swaps the +/- sign of cos(2*theta))."""
        return ThetaParam(math.pi / 2 - self.theta)

    def curve_rhs(self, z: complex) -> complex:
        """z (z^4 + 2 cos(2*theta) z^2 + 1), the square of the fiber coordinate."""
        z = complex(z)
        return z * (z * z * (z * z + 2.0 * self.cos2t) + 1.0)
