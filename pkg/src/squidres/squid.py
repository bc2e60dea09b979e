"""Lumped-inductance model of a symmetric DC SQUID.

A SQUID with two identical junctions (critical current ``Ic0`` each) and loop
inductance ``Ll`` behaves, for currents small compared to its critical current,
as a flux-dependent nonlinear inductance

    L_J(flux, i) = L_J0(flux) + A(flux) * i**2

with, to first order in the screening parameter ``beta = Ll * Ic0 / phi0``,

    L_J0 = phi0 / Ic(flux) * (1 + beta * cos(2f) / (2 cos f))
    A    = phi0 / (2 Ic(flux)**3)
    Ic   = 2 Ic0 |cos f|,  f = pi * flux / Phi0.

Every function here accepts a :class:`Flux`, a float or an array of flux
values in units of Phi0. Fluxes are folded onto [-0.5, 0.5] before use, so all
outputs are exactly periodic and even in flux.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constants import PHI0_RED
from .errors import CurrentExceedsCritical, FluxTooCloseToHalfQuantum

__all__ = [
    "EPS_IC",
    "BETA_WARN",
    "Flux",
    "SquidParams",
    "reduce_flux",
    "frustration",
    "effective_critical_current",
    "squid_linear_inductance",
    "squid_nonlinear_coeff",
    "squid_total_inductance",
    "near_half_quantum",
]

# |cos f| at or below this is treated as a half flux quantum (model diverges)
EPS_IC = 1e-3
# first-order-in-beta model; only a warning above this
BETA_WARN = 0.2


@dataclass(frozen=True)
class Flux:
    """Applied flux in units of the flux quantum."""

    value: float

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class SquidParams:
    """One SQUID of the array.

    Parameters
    ----------
    Ic0 : float
        Single-junction critical current, A.
    Ll : float
        Loop self-inductance, H.
    """

    Ic0: float
    Ll: float = 0.0

    def __post_init__(self):
        if not self.Ic0 > 0:
            raise ValueError(f"Ic0 must be positive, got {self.Ic0!r}")
        if not self.Ll >= 0:
            raise ValueError(f"Ll must be non-negative, got {self.Ll!r}")
        if self.beta() >= BETA_WARN:
            warnings.warn(
                f"beta = {self.beta():.3g} >= {BETA_WARN}; the first-order "
                "screening correction is unreliable",
                stacklevel=3,
            )

    def beta(self) -> float:
        return self.Ll * self.Ic0 / PHI0_RED

    @classmethod
    def from_beta(cls, Ic0, beta):
        return cls(Ic0=Ic0, Ll=beta * PHI0_RED / Ic0)


def _value(flux):
    v = getattr(flux, "value", flux)
    return np.asarray(v, dtype=float)


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def reduce_flux(flux):
    """Fold flux (Phi0 units) onto [-0.5, 0.5]."""
    v = _value(flux)
    return _out(v - np.round(v))


def frustration(flux):
    """``f = pi * flux``, radians, no range reduction."""
    return _out(math.pi * _value(flux))


def _cos_f(flux):
    return np.cos(math.pi * np.asarray(reduce_flux(flux)))


def near_half_quantum(flux):
    """True where |cos f| <= EPS_IC."""
    return _out(np.abs(_cos_f(flux)) <= EPS_IC)


def _checked_cos(flux):
    c = _cos_f(flux)
    if np.any(np.abs(c) <= EPS_IC):
        bad = _value(flux)[np.abs(c) <= EPS_IC] if np.ndim(c) else _value(flux)
        raise FluxTooCloseToHalfQuantum(
            f"flux {np.ravel(bad)[0]:.6g} Phi0 is within the half-flux-quantum "
            f"cutoff (|cos f| <= {EPS_IC:g}); the SQUID expansion diverges there"
        )
    return c


def effective_critical_current(sq: SquidParams, flux):
    """``2 Ic0 |cos f|`` in amperes; zero at half-integer flux."""
    return _out(2.0 * sq.Ic0 * np.abs(_cos_f(flux)))


def _linear_inductance(Ic0, beta, c):
    # c = cos f on the reduced branch, so c > 0
    return PHI0_RED / (2.0 * Ic0 * c) * (1.0 + beta * (2.0 * c * c - 1.0) / (2.0 * c))


def squid_linear_inductance(sq: SquidParams, flux):
    """Zero-current inductance L_J0, H.

    Raises
    ------
    FluxTooCloseToHalfQuantum
        If any flux is within the half-quantum cutoff.
    """
    c = _checked_cos(flux)
    return _out(_linear_inductance(sq.Ic0, sq.beta(), c))


def squid_nonlinear_coeff(sq: SquidParams, flux):
    """Coefficient A of the ``A i**2`` term, H/A**2."""
    c = _checked_cos(flux)
    ic = 2.0 * sq.Ic0 * c
    return _out(PHI0_RED / (2.0 * ic**3))


def squid_total_inductance(sq: SquidParams, flux, i):
    """``L_J0 + A i**2`` for bias current ``i`` (A)."""
    c = _checked_cos(flux)
    i = np.asarray(i, dtype=float)
    ic = 2.0 * sq.Ic0 * c
    if np.any(np.abs(i) >= ic):
        raise CurrentExceedsCritical(
            f"|i| = {np.max(np.abs(i)):.4g} A reaches the effective critical "
            f"current {np.min(ic):.4g} A"
        )
    return _out(squid_linear_inductance(sq, flux) + squid_nonlinear_coeff(sq, flux) * i**2)
