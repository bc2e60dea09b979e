"""Physical constants (SI) used throughout the package.

Values are pinned rather than pulled from ``scipy.constants`` so that results
do not drift between CODATA releases.
"""

import math
from dataclasses import dataclass

__all__ = ["Constants", "CONSTANTS", "PHI0", "PHI0_RED", "HBAR", "KB"]


@dataclass(frozen=True)
class Constants:
    """Pinned constants.

    Attributes
    ----------
    Phi0 : float
        Magnetic flux quantum h/2e, Wb.
    hbar : float
        Reduced Planck constant, J s.
    kB : float
        Boltzmann constant, J/K.
    """

    Phi0: float = 2.067833848e-15
    hbar: float = 1.054571817e-34
    kB: float = 1.380649e-23

    @property
    def phi0(self) -> float:
        """Reduced flux quantum Phi0 / 2pi, Wb."""
        return self.Phi0 / (2 * math.pi)


CONSTANTS = Constants()

PHI0 = CONSTANTS.Phi0
PHI0_RED = CONSTANTS.phi0
HBAR = CONSTANTS.hbar
KB = CONSTANTS.kB
