"""Device-level forward model of a lambda/2 resonator with a SQUID array.

The bare resonator is a transmission line of total inductance ``L`` and
capacitance ``C`` whose first mode sits at ``omega_r = pi / sqrt(L C)``. A
series array of ``N`` identical SQUIDs in the middle of the centre strip adds
``N * L_J0(flux)`` and pulls the mode down:

    omega_0 = omega_r / (1 + N eps),        eps = L_J0 / L
    Q_ext   = Q_c (1 + 4 N eps)
    Q_c     = pi / (4 Z0 R0 Cc**2 omega_r**2)

The cubic term of the SQUID inductance gives an energy-proportional (Duffing)
softening of the mode. Thermal photon-number fluctuations then broaden the
line through that shift, which is what limits Q near half a flux quantum.
"""

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .constants import HBAR, KB, PHI0_RED
from .errors import EpsilonOutOfRange, ModelValidityError
from .squid import (
    SquidParams,
    effective_critical_current,
    near_half_quantum,
    squid_linear_inductance,
)

__all__ = [
    "BareResonator",
    "CouplingSpec",
    "DeviceModel",
    "ThermalEnv",
    "Validity",
    "bare_from_impedance",
    "coupling_q",
    "participation",
    "resonance_frequency",
    "external_q",
    "duffing_shift",
    "duffing_slope",
    "thermal_occupation",
    "energy_fluctuation",
    "inhomogeneous_q",
    "total_q",
    "photons_from_input_power",
    "validity",
    "dbm_to_watts",
]

_REL = 1e-12


@dataclass(frozen=True)
class BareResonator:
    """Bare lambda/2 line, first mode only.

    ``omega_r`` and ``Z0`` must agree with ``L`` and ``C`` to 1e-12 relative;
    use :func:`bare_from_impedance` or :meth:`from_lc` rather than filling all
    four by hand.
    """

    omega_r: float
    Z0: float
    L: float
    C: float
    length_l: Optional[float] = None
    ind_per_len: Optional[float] = None
    cap_per_len: Optional[float] = None

    def __post_init__(self):
        if not (self.L > 0 and self.C > 0):
            raise ValueError("L and C must be positive")
        w = math.pi / math.sqrt(self.L * self.C)
        z = math.sqrt(self.L / self.C)
        if not math.isclose(w, self.omega_r, rel_tol=_REL):
            raise ValueError(f"omega_r={self.omega_r!r} inconsistent with pi/sqrt(LC)={w!r}")
        if not math.isclose(z, self.Z0, rel_tol=_REL):
            raise ValueError(f"Z0={self.Z0!r} inconsistent with sqrt(L/C)={z!r}")
        if self.length_l is not None and self.ind_per_len is not None:
            if not math.isclose(self.ind_per_len * self.length_l, self.L, rel_tol=_REL):
                raise ValueError("L != inductance per length * length")
            if not math.isclose(self.cap_per_len * self.length_l, self.C, rel_tol=_REL):
                raise ValueError("C != capacitance per length * length")

    @property
    def f_r(self) -> float:
        return self.omega_r / (2 * math.pi)

    @classmethod
    def from_lc(cls, L, C, **meta):
        return cls(math.pi / math.sqrt(L * C), math.sqrt(L / C), L, C, **meta)

    @classmethod
    def from_per_length(cls, ind_per_len, cap_per_len, length):
        return cls.from_lc(
            ind_per_len * length,
            cap_per_len * length,
            length_l=length,
            ind_per_len=ind_per_len,
            cap_per_len=cap_per_len,
        )


def bare_from_impedance(f_r, Z0) -> BareResonator:
    """Bare resonator from its frequency (Hz) and characteristic impedance."""
    if not (f_r > 0 and Z0 > 0):
        raise ValueError(f"f_r and Z0 must be positive, got {f_r!r}, {Z0!r}")
    w = 2 * math.pi * f_r
    return BareResonator(omega_r=w, Z0=Z0, L=math.pi * Z0 / w, C=math.pi / (Z0 * w))


@dataclass(frozen=True)
class CouplingSpec:
    Cc: float
    R0: float = 50.0

    def __post_init__(self):
        if not (self.Cc > 0 and self.R0 > 0):
            raise ValueError("Cc and R0 must be positive")


@dataclass(frozen=True)
class DeviceModel:
    """Resonator + coupling + SQUID array (+ optional fixed internal Q)."""

    bare: BareResonator
    coupling: CouplingSpec
    n_squids: int = 0
    squid: Optional[SquidParams] = None
    Q_int: Optional[float] = None

    def __post_init__(self):
        if int(self.n_squids) != self.n_squids or self.n_squids < 0:
            raise ValueError(f"n_squids must be a non-negative integer, got {self.n_squids!r}")
        if self.n_squids > 0 and self.squid is None:
            raise ValueError("squid parameters are required when n_squids > 0")
        if self.Q_int is not None and not self.Q_int > 0:
            raise ValueError("Q_int must be positive when given")


@dataclass(frozen=True)
class ThermalEnv:
    T: float = 0.0

    def __post_init__(self):
        if not self.T >= 0:
            raise ValueError(f"temperature must be >= 0, got {self.T!r}")


class Validity(str, enum.Enum):
    OK = "ok"
    NEAR_HALF_QUANTUM = "near-half-quantum"
    EPSILON_LARGE = "epsilon-large"


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def _flux_shape(flux):
    return np.shape(np.asarray(getattr(flux, "value", flux), dtype=float))


def dbm_to_watts(p_dbm):
    return 1e-3 * 10.0 ** (np.asarray(p_dbm, dtype=float) / 10.0)


def coupling_q(dev: DeviceModel) -> float:
    b, c = dev.bare, dev.coupling
    return math.pi / (4 * b.Z0 * c.R0 * c.Cc**2 * b.omega_r**2)


def participation(dev: DeviceModel, flux):
    """eps = L_J0 / L for one SQUID; zero when the device has no SQUIDs."""
    if dev.n_squids == 0:
        return _out(np.zeros(_flux_shape(flux)))
    eps = np.asarray(squid_linear_inductance(dev.squid, flux)) / dev.bare.L
    bad = np.ravel((eps <= 0) | (eps >= 1))
    if bad.any():
        raise EpsilonOutOfRange(
            f"participation ratio {np.ravel(eps)[bad][0]:.4g} outside (0, 1)"
        )
    return _out(eps)


def resonance_frequency(dev: DeviceModel, flux):
    """Flux-tuned angular frequency omega_0, rad/s."""
    eps = np.asarray(participation(dev, flux))
    return _out(dev.bare.omega_r / (1.0 + dev.n_squids * eps))


def external_q(dev: DeviceModel, flux):
    eps = np.asarray(participation(dev, flux))
    return _out(coupling_q(dev) * (1.0 + 4.0 * dev.n_squids * eps))


def duffing_slope(dev: DeviceModel, flux):
    """d(delta omega_0 / omega_0)/dE in 1/J (non-positive).

    Analytic, since the shift is linear in the stored energy.
    """
    if dev.n_squids == 0:
        return _out(np.zeros(_flux_shape(flux)))
    n = dev.n_squids
    eps = np.asarray(participation(dev, flux))
    w0 = dev.bare.omega_r / (1.0 + n * eps)
    ic = np.asarray(effective_critical_current(dev.squid, flux))
    lead = 2.0 * w0 / (math.pi * dev.coupling.R0 * (1.0 + 2.0 * n * eps))
    return _out(-n * lead**2 * PHI0_RED / (8.0 * ic**3))


def duffing_shift(dev: DeviceModel, flux, E):
    """Relative frequency shift delta omega_0 / omega_0 at stored energy E (J)."""
    E = np.asarray(E, dtype=float)
    if np.any(E < 0):
        raise ValueError("stored energy must be non-negative")
    return _out(np.asarray(duffing_slope(dev, flux)) * E)


def thermal_occupation(omega0, env: ThermalEnv):
    """Bose-Einstein mean photon number; 0 at T = 0."""
    omega0 = np.asarray(omega0, dtype=float)
    if env.T == 0:
        return _out(np.zeros_like(omega0))
    with np.errstate(over="ignore", divide="ignore"):
        return _out(1.0 / np.expm1(HBAR * omega0 / (KB * env.T)))


def energy_fluctuation(omega0, env: ThermalEnv):
    """RMS thermal energy fluctuation sqrt(<E>^2 + hbar w0 <E>), J."""
    omega0 = np.asarray(omega0, dtype=float)
    n = np.asarray(thermal_occupation(omega0, env))
    # with <E> = hbar w0 n substituted; avoids subnormal <E> when n << 1
    return _out(HBAR * omega0 * np.sqrt(n) * np.sqrt(n + 1.0))


def inhomogeneous_q(dev: DeviceModel, flux, env: ThermalEnv):
    """Q limit from thermal broadening; ``inf`` when there is none."""
    w0 = np.asarray(resonance_frequency(dev, flux))
    inv = np.abs(np.asarray(duffing_slope(dev, flux))) * np.asarray(energy_fluctuation(w0, env))
    with np.errstate(divide="ignore"):
        return _out(1.0 / inv)


def total_q(dev: DeviceModel, flux, env: ThermalEnv):
    """Loaded Q from 1/Q = 1/Q_ext + 1/Q_inh (+ 1/Q_int when configured)."""
    q_ext = np.asarray(external_q(dev, flux))
    q_inh = np.asarray(inhomogeneous_q(dev, flux, env))
    inv = 1.0 / q_ext + 1.0 / q_inh
    if dev.Q_int is not None:
        inv = inv + 1.0 / dev.Q_int
    elif np.all(np.isinf(q_inh)):
        return _out(q_ext)
    return _out(1.0 / inv)


def photons_from_input_power(P_in, dev: DeviceModel, flux, env: ThermalEnv, q=None):
    """Mean drive photon number for incident power ``P_in`` (W) on resonance.

    Uses E = P_in * Q / omega_0. ``q`` overrides the model loaded Q, e.g. with
    a value extracted from a fit.
    """
    P_in = np.asarray(P_in, dtype=float)
    if np.any(P_in < 0):
        raise ValueError("input power must be non-negative")
    w0 = np.asarray(resonance_frequency(dev, flux))
    if q is None:
        q = np.asarray(total_q(dev, flux, env))
    return _out(P_in * q / w0 / (HBAR * w0))


def validity(dev: DeviceModel, flux) -> Validity:
    """Classify a single flux point without raising."""
    if dev.n_squids == 0:
        return Validity.OK
    if near_half_quantum(flux):
        return Validity.NEAR_HALF_QUANTUM
    try:
        participation(dev, flux)
    except ModelValidityError:
        return Validity.EPSILON_LARGE
    return Validity.OK
