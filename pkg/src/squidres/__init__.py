"""Flux-tunable lambda/2 resonators with a series DC-SQUID array.

Forward model (frequency, Q budget, Duffing shift, thermal broadening, S21)
and parameter extraction (trace fits, flux-curve fits).
"""

__version__ = "0.1.0"

from .constants import CONSTANTS, HBAR, KB, PHI0, PHI0_RED, Constants
from .errors import *  # noqa: F401,F403
from .squid import *  # noqa: F401,F403
from .resonator import *  # noqa: F401,F403
from .lineshape import *  # noqa: F401,F403
from .fitting import *  # noqa: F401,F403
