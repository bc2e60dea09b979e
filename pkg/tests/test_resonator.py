import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from squidres import (
    BareResonator,
    CouplingSpec,
    DeviceModel,
    EpsilonOutOfRange,
    Flux,
    FluxTooCloseToHalfQuantum,
    ThermalEnv,
    Validity,
    bare_from_impedance,
    coupling_q,
    dbm_to_watts,
    duffing_shift,
    duffing_slope,
    energy_fluctuation,
    external_q,
    inhomogeneous_q,
    participation,
    photons_from_input_power,
    resonance_frequency,
    thermal_occupation,
    total_q,
    validity,
)

from conftest import SAMPLE_A, make_device

HBAR = 1.054571817e-34
KB = 1.380649e-23
PHI0_ORACLE = 2.067833848e-15 / (2 * math.pi)


def chain_oracle(x, T, f_r=1.805e9, Ic0=330e-9, Ll=40e-12, N=1, Cc=27e-15, Z0=50.0, R0=50.0):
    """Independent straight-line evaluation of the whole sample-A model."""
    wr = 2 * math.pi * f_r
    L = math.pi * Z0 / wr
    f = math.pi * x
    ic = 2 * Ic0 * abs(math.cos(f))
    beta = Ll * Ic0 / PHI0_ORACLE
    lj0 = PHI0_ORACLE / ic * (1 + beta * math.cos(2 * f) / (2 * math.cos(f)))
    eps = lj0 / L
    w0 = wr / (1 + N * eps)
    qc = math.pi / (4 * Z0 * R0 * Cc**2 * wr**2)
    qext = qc * (1 + 4 * N * eps)
    slope = N * (2 * w0 / (math.pi * R0 * (1 + 2 * N * eps))) ** 2 * PHI0_ORACLE / (8 * ic**3)
    nbar = 1 / (math.exp(HBAR * w0 / (KB * T)) - 1) if T > 0 else 0.0
    e = HBAR * w0 * nbar
    de = math.sqrt(e * e + HBAR * w0 * e)
    qinh = 1 / (slope * de) if de > 0 else math.inf
    q = 1 / (1 / qext + 1 / qinh)
    return dict(eps=eps, w0=w0, qc=qc, qext=qext, slope=slope, nbar=nbar, de=de, qinh=qinh, q=q)


# --- bare resonator ---------------------------------------------------------

def test_bare_from_impedance():
    b = bare_from_impedance(1.805e9, 50)
    assert b.L == pytest.approx(math.pi * 50 / (2 * math.pi * 1.805e9), rel=1e-14)
    assert b.L == pytest.approx(1.3852e-8, rel=2e-4)
    b = bare_from_impedance(1.906e9, 50)
    assert math.pi / math.sqrt(b.L * b.C) == pytest.approx(2 * math.pi * 1.906e9, rel=1e-14)
    b = bare_from_impedance(1.85e9, 50)
    assert b.C == pytest.approx(5.405e-12, rel=1e-3)
    assert b.Z0 == pytest.approx(50, rel=1e-14)
    with pytest.raises(ValueError):
        bare_from_impedance(0, 50)
    with pytest.raises(ValueError):
        bare_from_impedance(1e9, -50)


def test_bare_invariants():
    b = bare_from_impedance(2e9, 50)
    with pytest.raises(ValueError):
        BareResonator(b.omega_r * 1.01, b.Z0, b.L, b.C)
    with pytest.raises(ValueError):
        BareResonator(b.omega_r, 75.0, b.L, b.C)
    line = BareResonator.from_per_length(4.2e-7, 1.6e-10, 0.032)
    assert line.L == pytest.approx(4.2e-7 * 0.032)
    assert line.Z0 == pytest.approx(math.sqrt(4.2e-7 / 1.6e-10), rel=1e-14)


def test_device_validation():
    b = bare_from_impedance(2e9, 50)
    with pytest.raises(ValueError):
        DeviceModel(b, CouplingSpec(1e-15), 2, None)
    with pytest.raises(ValueError):
        DeviceModel(b, CouplingSpec(1e-15), -1)
    with pytest.raises(ValueError):
        CouplingSpec(0.0)
    with pytest.raises(ValueError):
        ThermalEnv(-1.0)


# --- Q budget ---------------------------------------------------------------

def test_coupling_q(sample_a, sample_b):
    assert coupling_q(sample_a) == pytest.approx(chain_oracle(0, 0)["qc"], rel=1e-13)
    assert coupling_q(sample_a) == pytest.approx(3.35e3, rel=2e-3)
    assert coupling_q(sample_a) == pytest.approx(3.4e3, rel=0.02)
    assert coupling_q(sample_b) == pytest.approx(5.8e5, rel=3e-3)
    assert coupling_q(sample_b) == pytest.approx(6e5, rel=0.05)
    half = make_device(**{**SAMPLE_A, "Cc": 13.5e-15})
    assert coupling_q(half) == pytest.approx(4 * coupling_q(sample_a), rel=1e-14)


def test_coupling_scaling_law():
    a = make_device(**SAMPLE_A)
    b = make_device(**{**SAMPLE_A, "Cc": 2e-15})
    assert coupling_q(a) / coupling_q(b) == pytest.approx((2 / 27) ** 2, rel=1e-14)


def test_participation(sample_a, bare_line):
    assert participation(sample_a, Flux(0)) == pytest.approx(chain_oracle(0, 0)["eps"], rel=1e-13)
    assert participation(sample_a, Flux(0)) == pytest.approx(0.0367, rel=2e-3)
    assert participation(sample_a, Flux(0.45)) == pytest.approx(0.202, rel=2e-3)
    assert participation(bare_line, Flux(0.3)) == 0.0
    with pytest.raises(FluxTooCloseToHalfQuantum):
        participation(sample_a, Flux(0.5))


def test_participation_out_of_range():
    weak = make_device(1.8e9, 27e-15, 1, Ic0=20e-9, Ll=0.0)
    with pytest.raises(EpsilonOutOfRange):
        participation(weak, Flux(0.3))
    assert validity(weak, 0.3) is Validity.EPSILON_LARGE


def test_resonance_frequency(sample_a, bare_line):
    w0 = resonance_frequency(sample_a, Flux(0))
    assert w0 == pytest.approx(chain_oracle(0, 0)["w0"], rel=1e-13)
    assert w0 / (2 * math.pi) == pytest.approx(1.741e9, rel=5e-4)
    assert abs(w0 / (2 * math.pi) - 1.75e9) / 1.75e9 < 0.01
    assert resonance_frequency(sample_a, Flux(0.45)) / (2 * math.pi) == pytest.approx(1.502e9, rel=5e-4)
    assert resonance_frequency(bare_line, Flux(0.37)) == bare_line.bare.omega_r


def test_external_q(sample_a, bare_line):
    assert external_q(sample_a, Flux(0)) == pytest.approx(3.84e3, rel=2e-3)
    assert external_q(sample_a, Flux(0.45)) == pytest.approx(6.06e3, rel=2e-3)
    assert external_q(sample_a, 0.45) == pytest.approx(chain_oracle(0.45, 0)["qext"], rel=1e-13)
    assert external_q(bare_line, Flux(0.2)) == coupling_q(bare_line)


def test_duffing_shift(sample_a):
    assert duffing_shift(sample_a, Flux(0), 0.0) == 0.0
    w0 = resonance_frequency(sample_a, 0)
    one_photon = HBAR * w0
    assert one_photon == pytest.approx(1.1536e-24, rel=1e-4)
    assert -duffing_slope(sample_a, 0) == pytest.approx(2.409e18, rel=1e-3)
    assert duffing_shift(sample_a, Flux(0), one_photon) == pytest.approx(-2.78e-6, rel=2e-3)
    assert duffing_shift(sample_a, 0, one_photon) == pytest.approx(-chain_oracle(0, 0)["slope"] * one_photon, rel=1e-13)
    assert duffing_shift(sample_a, 0, 2 * one_photon) == pytest.approx(2 * duffing_shift(sample_a, 0, one_photon), rel=1e-15)
    with pytest.raises(ValueError):
        duffing_shift(sample_a, 0, -1.0)


def test_duffing_slope_matches_finite_difference(sample_a):
    """d omega_0 / dE against a two-energy finite difference.

    A fully independent oracle would need the nonlinear mode analysis itself;
    differencing the shift at two energies checks linearity and sign.
    """
    w0 = resonance_frequency(sample_a, 0.3)
    e1, e2 = 1e-24, 3e-24
    d = (w0 * duffing_shift(sample_a, 0.3, e2) - w0 * duffing_shift(sample_a, 0.3, e1)) / (e2 - e1)
    assert d / w0 == pytest.approx(duffing_slope(sample_a, 0.3), rel=1e-12)
    assert d < 0


# --- thermal ----------------------------------------------------------------

def test_thermal_occupation():
    w = 2 * math.pi * 1.741e9
    n = thermal_occupation(w, ThermalEnv(0.06))
    assert n == pytest.approx(1 / (math.exp(HBAR * w / (KB * 0.06)) - 1), rel=1e-13)
    assert n == pytest.approx(0.3305, rel=1e-3)
    assert thermal_occupation(w, ThermalEnv(0.0)) == 0.0
    w1 = 2 * math.pi * 1e9
    rj = KB * 4.0 / (HBAR * w1) - 0.5
    assert thermal_occupation(w1, ThermalEnv(4.0)) == pytest.approx(rj, rel=0.01)
    assert thermal_occupation(2 * math.pi * 1e12, ThermalEnv(1e-3)) == 0.0


def _energy_variance_by_summation(w, T, nmax=2000):
    # Bose-Einstein distribution p(n) = (1 - x) x^n summed term by term
    x = math.exp(-HBAR * w / (KB * T))
    n = np.arange(nmax)
    p = (1 - x) * x**n
    e = HBAR * w * n
    mean = np.sum(p * e)
    return math.sqrt(np.sum(p * e * e) - mean**2)


def test_energy_fluctuation():
    w = 2 * math.pi * 1.741e9
    de = energy_fluctuation(w, ThermalEnv(0.06))
    assert de == pytest.approx(7.65e-25, rel=1e-3)
    assert de == pytest.approx(_energy_variance_by_summation(w, 0.06), rel=1e-9)
    assert energy_fluctuation(w, ThermalEnv(0.0)) == 0.0


@settings(max_examples=200)
@given(f=st.floats(1e8, 2e10), T=st.floats(1e-3, 10.0))
def test_energy_fluctuation_identity(f, T):
    w = 2 * math.pi * f
    env = ThermalEnv(T)
    n = thermal_occupation(w, env)
    assert energy_fluctuation(w, env) == pytest.approx(HBAR * w * math.sqrt(n * (n + 1)), rel=1e-12, abs=1e-300)


def test_inhomogeneous_q(sample_a, env60):
    assert inhomogeneous_q(sample_a, 0, env60) == pytest.approx(chain_oracle(0, 0.06)["qinh"], rel=1e-12)
    assert inhomogeneous_q(sample_a, Flux(0), env60) == pytest.approx(5.4e5, rel=0.01)
    assert inhomogeneous_q(sample_a, Flux(0.45), env60) == pytest.approx(4.7e3, rel=0.01)
    assert inhomogeneous_q(sample_a, 0.45, ThermalEnv(0)) == math.inf


def test_inhomogeneous_q_slope_consistency(sample_a, env60):
    for x in (0.0, 0.2, 0.45):
        w0 = resonance_frequency(sample_a, x)
        inv = abs(duffing_shift(sample_a, x, 1.0)) * energy_fluctuation(w0, env60)
        assert 1 / inhomogeneous_q(sample_a, x, env60) == pytest.approx(inv, rel=1e-12)


def test_total_q(sample_a, env60):
    q0 = total_q(sample_a, Flux(0), env60)
    assert q0 == pytest.approx(3.8e3, rel=0.01)
    assert q0 == pytest.approx(3.5e3, rel=0.15)
    assert total_q(sample_a, Flux(0.45), env60) == pytest.approx(1 / (1 / 6058 + 1 / 4682), rel=1e-3)
    assert total_q(sample_a, Flux(0.45), env60) == pytest.approx(2.6e3, rel=0.02)
    assert total_q(sample_a, 0.3, ThermalEnv(0)) == external_q(sample_a, 0.3)


def test_total_q_with_internal_loss():
    dev = make_device(**{**SAMPLE_A, "Q_int": 1e4})
    env = ThermalEnv(0.06)
    expected = 1 / (1 / external_q(dev, 0.2) + 1 / inhomogeneous_q(dev, 0.2, env) + 1e-4)
    assert total_q(dev, 0.2, env) == pytest.approx(expected, rel=1e-14)
    assert total_q(dev, 0.2, env) < 1e4


def test_photons_from_input_power(sample_a, env60):
    p = float(dbm_to_watts(-143))
    assert p == pytest.approx(5.01e-18, rel=1e-3)
    n = photons_from_input_power(p, sample_a, Flux(0), env60, q=3300)
    assert n == pytest.approx(1.3, rel=0.01)
    assert n == pytest.approx(1.2, rel=0.15)
    assert photons_from_input_power(0.0, sample_a, 0, env60) == 0.0
    assert photons_from_input_power(2 * p, sample_a, 0, env60) == pytest.approx(
        2 * photons_from_input_power(p, sample_a, 0, env60), rel=1e-15)
    w0 = resonance_frequency(sample_a, 0)
    assert photons_from_input_power(p, sample_a, 0, env60) == pytest.approx(
        p * total_q(sample_a, 0, env60) / w0 / (HBAR * w0), rel=1e-14)


def test_validity_flags(sample_a):
    assert validity(sample_a, 0.2) is Validity.OK
    assert validity(sample_a, Flux(0.5)) is Validity.NEAR_HALF_QUANTUM
    assert validity(sample_a, 1.4999) is Validity.NEAR_HALF_QUANTUM


# --- invariants -------------------------------------------------------------

flux_ok = st.floats(-0.47, 0.47)
temps = st.floats(0.0, 0.3)


@settings(max_examples=200)
@given(x=flux_ok, T=temps)
def test_q_ordering(x, T):
    dev, env = make_device(**SAMPLE_A), ThermalEnv(T)
    q = total_q(dev, x, env)
    # one ulp of slack for the harmonic sum
    assert q <= np.nextafter(external_q(dev, x), np.inf)
    assert q <= np.nextafter(inhomogeneous_q(dev, x, env), np.inf)


@settings(max_examples=200)
@given(x=flux_ok, k=st.integers(-4, 4))
def test_frequency_bound_and_symmetry(x, k):
    dev, env = make_device(**SAMPLE_A), ThermalEnv(0.06)
    w = resonance_frequency(dev, x)
    assert w < dev.bare.omega_r
    for fn in (resonance_frequency, external_q):
        assert fn(dev, -x) == fn(dev, x)
        assert fn(dev, x + k) == pytest.approx(fn(dev, x), rel=1e-9)
    assert total_q(dev, x + k, env) == pytest.approx(total_q(dev, x, env), rel=1e-9)


@settings(max_examples=100)
@given(x=flux_ok, E=st.floats(1e-30, 1e-18))
def test_softening(x, E):
    assert duffing_shift(make_device(**SAMPLE_A), x, E) < 0


@settings(max_examples=100)
@given(x=flux_ok, t1=st.floats(0.005, 0.5), t2=st.floats(0.005, 0.5))
def test_inhomogeneous_q_nonincreasing_in_T(x, t1, t2):
    dev = make_device(**SAMPLE_A)
    lo, hi = sorted((t1, t2))
    assert inhomogeneous_q(dev, x, ThermalEnv(hi)) <= inhomogeneous_q(dev, x, ThermalEnv(lo))


def test_bare_line_flux_independent(bare_line, env60):
    xs = np.linspace(-0.5, 0.5, 11)
    assert np.all(resonance_frequency(bare_line, xs) == bare_line.bare.omega_r)
    assert np.all(total_q(bare_line, xs, env60) == coupling_q(bare_line))
