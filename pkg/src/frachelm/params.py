"""Scattering parameters for the fractional Helmholtz operator (-Delta)^s - k^{2s}.

The fractional order is restricted to s in (3/4, 3/2), the range where the
outgoing kernel is square integrable near the origin in three dimensions and
the L^4 solution theory applies.  Inversion routines are stricter and require
s in (4/5, 3/2) together with wavenumbers above a floor k0.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

S_MIN = 0.75
S_MAX = 1.5
S_MIN_INVERSION = 0.8


@dataclass(frozen=True)
class ScatteringParams:
    """Order s, wavenumber k, outgoing/incoming branch and inversion floor k0.

    branch = +1 selects the outgoing (limiting absorption from above) kernel,
    branch = -1 the incoming one.  Every kernel and solver in the package is
    parametrized by an instance of this class.
    """

    s: float
    k: float
    branch: int = +1
    k0: float = 1.0

    def __post_init__(self):
        if not (S_MIN < self.s < S_MAX):
            raise ValueError(f"fractional order s={self.s} outside ({S_MIN}, {S_MAX})")
        if not self.k > 0:
            raise ValueError(f"wavenumber k={self.k} must be positive")
        if self.branch not in (+1, -1):
            raise ValueError(f"branch must be +1 or -1, got {self.branch}")
        if not self.k0 > 0:
            raise ValueError(f"k0={self.k0} must be positive")

    def with_k(self, k: float) -> "ScatteringParams":
        return replace(self, k=k)

    def require_inversion(self) -> None:
        """Check the stricter admissibility needed by the inversion routines."""
        if not (S_MIN_INVERSION < self.s < S_MAX):
            raise ValueError(
                f"inversion requires s in ({S_MIN_INVERSION}, {S_MAX}), got s={self.s}"
            )
        if not self.k > self.k0:
            raise ValueError(f"inversion requires k > k0 ({self.k} <= {self.k0})")
