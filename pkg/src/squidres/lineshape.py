"""Complex S21 traces: synthesis from a device model, noise, and CSV I/O.

The transmission through the symmetric two-port resonator is taken as

    S21(omega) = (Q / Q_ext) / (1 + 2j Q (omega - omega_0) / omega_0)

so the peak is real and equals 1 only when the coupling is the sole loss.
"""

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .constants import HBAR
from .errors import TraceFormatError
from .resonator import (
    DeviceModel,
    ThermalEnv,
    duffing_shift,
    external_q,
    photons_from_input_power,
    resonance_frequency,
    total_q,
)
from .squid import Flux

__all__ = [
    "SweepSpec",
    "NoiseModel",
    "TraceMeta",
    "S21Trace",
    "lorentzian",
    "s21_at",
    "synth_sweep",
    "point_noise",
    "trace_noise",
    "normalize",
    "write_trace_csv",
    "read_trace_csv",
    "TRACE_HEADER",
]

TRACE_HEADER = ("freq_hz", "re_s21", "im_s21")


@dataclass(frozen=True)
class SweepSpec:
    f_start: float
    f_stop: float
    n_points: int
    flux: Flux = Flux(0.0)
    env: ThermalEnv = ThermalEnv(0.0)
    P_in: float = 0.0

    def __post_init__(self):
        if not self.f_start < self.f_stop:
            raise ValueError("f_start must be below f_stop")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ValueError("n_points must be an integer >= 2")
        if not self.P_in >= 0:
            raise ValueError("P_in must be non-negative")

    def freqs(self):
        return np.linspace(self.f_start, self.f_stop, int(self.n_points))

    def to_dict(self):
        return {
            "f_start_hz": self.f_start,
            "f_stop_hz": self.f_stop,
            "n_points": int(self.n_points),
            "phi_over_phi0": float(self.flux.value),
            "temperature_k": self.env.T,
            "p_in_w": self.P_in,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            d["f_start_hz"],
            d["f_stop_hz"],
            d["n_points"],
            Flux(d["phi_over_phi0"]),
            ThermalEnv(d["temperature_k"]),
            d["p_in_w"],
        )


@dataclass(frozen=True)
class NoiseModel:
    """Additive circular complex Gaussian noise, E|n|^2 = sigma**2 per point."""

    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError("sigma must be non-negative")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValueError("seed must be a non-negative integer")


@dataclass(frozen=True)
class TraceMeta:
    spec: Optional[SweepSpec] = None
    noise: Optional[NoiseModel] = None
    normalized: bool = False

    def to_dict(self):
        return {
            "sweep": None if self.spec is None else self.spec.to_dict(),
            "noise": None if self.noise is None else asdict(self.noise),
            "normalized": self.normalized,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            None if d.get("sweep") is None else SweepSpec.from_dict(d["sweep"]),
            None if d.get("noise") is None else NoiseModel(**d["noise"]),
            bool(d.get("normalized", False)),
        )


@dataclass(frozen=True, eq=False)
class S21Trace:
    """Frequency-indexed complex transmission (linear units)."""

    freqs: np.ndarray
    values: np.ndarray
    meta: TraceMeta = field(default_factory=TraceMeta)

    def __post_init__(self):
        f = np.asarray(self.freqs, dtype=float)
        z = np.asarray(self.values, dtype=complex)
        if f.ndim != 1 or f.shape != z.shape:
            raise ValueError("freqs and values must be 1-D and the same length")
        if f.size > 1 and not np.all(np.diff(f) > 0):
            raise ValueError("freqs must be strictly increasing")
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "values", z)

    def __len__(self):
        return self.freqs.size


def lorentzian(f, f0, Q, scale=1.0):
    """``scale / (1 + 2j Q (f - f0) / f0)``; works for f in Hz or rad/s."""
    x = 2.0 * Q * (np.asarray(f, dtype=float) - f0) / f0
    return scale / (1.0 + 1j * x)


def s21_at(dev: DeviceModel, flux, env: ThermalEnv, omega, energy=0.0):
    """Model transmission at angular frequency ``omega``.

    ``energy`` (J) is the drive energy stored in the mode; it softens the
    resonance through the Duffing term. Thermal energy only broadens it.
    """
    w0 = resonance_frequency(dev, flux)
    if energy:
        w0 = w0 * (1.0 + duffing_shift(dev, flux, energy))
    q = total_q(dev, flux, env)
    return lorentzian(omega, w0, q, q / external_q(dev, flux))


def point_noise(seed, k):
    """Noise sample of point ``k`` alone, drawn straight from the counter."""
    bg = np.random.Philox(key=seed)
    # Philox emits 4 doubles per counter step; point k uses doubles 2k, 2k+1
    bg.advance(k // 2)
    u = np.random.Generator(bg).random(4)
    off = 2 * (k % 2)
    return _box_muller(u[off], u[off + 1])


def _box_muller(u1, u2):
    r = np.sqrt(-np.log1p(-u1))  # E|z|^2 = 1
    return r * np.exp(2j * np.pi * u2)


def trace_noise(noise: NoiseModel, n):
    """Unit-free noise vector of length ``n`` scaled by ``noise.sigma``.

    Element k depends only on (seed, k), so it equals ``sigma * point_noise(seed, k)``.
    """
    if noise.sigma == 0:
        return np.zeros(n, dtype=complex)
    u = np.random.Generator(np.random.Philox(key=noise.seed)).random(2 * n).reshape(n, 2)
    return noise.sigma * _box_muller(u[:, 0], u[:, 1])


def synth_sweep(dev: DeviceModel, spec: SweepSpec, noise: NoiseModel = NoiseModel()) -> S21Trace:
    f = spec.freqs()
    energy = 0.0
    if spec.P_in > 0:
        w0 = resonance_frequency(dev, spec.flux)
        energy = photons_from_input_power(spec.P_in, dev, spec.flux, spec.env) * HBAR * w0
    z = s21_at(dev, spec.flux, spec.env, 2 * math.pi * f, energy=energy)
    z = z + trace_noise(noise, f.size)
    return S21Trace(f, z, TraceMeta(spec, noise, False))


def normalize(trace: S21Trace) -> S21Trace:
    """Divide by the largest modulus so that max |S21| = 1."""
    if len(trace) == 0:
        raise ValueError("cannot normalize an empty trace")
    peak = np.max(np.abs(trace.values))
    if peak == 0:
        raise ValueError("cannot normalize an all-zero trace")
    z = trace.values / peak
    meta = TraceMeta(trace.meta.spec, trace.meta.noise, True)
    return S21Trace(trace.freqs, z, meta)


def _fmt(x):
    return repr(float(x))


def _meta_path(path):
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def write_trace_csv(trace: S21Trace, path, sidecar=True):
    """Write ``freq_hz,re_s21,im_s21`` CSV plus a ``<stem>.meta.json`` sidecar.

    Returns the list of written paths.
    """
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for f, z in zip(trace.freqs, trace.values):
            w.writerow((_fmt(f), _fmt(z.real), _fmt(z.imag)))
    out = [path]
    if sidecar:
        mp = _meta_path(path)
        mp.write_text(json.dumps(trace.meta.to_dict(), indent=2, sort_keys=True) + "\n")
        out.append(mp)
    return out


def read_trace_csv(path) -> S21Trace:
    """Parse a trace CSV; the sidecar is picked up when it exists.

    Raises
    ------
    TraceFormatError
        On a bad header, a short or unparsable row, or non-increasing
        frequencies. The offending 1-based line number is reported.
    """
    path = Path(path)
    freqs, vals = [], []
    with open(path, newline="") as fh:
        rows = csv.reader(fh)
        header = next(rows, None)
        if header is None or tuple(h.strip() for h in header) != TRACE_HEADER:
            raise TraceFormatError(f"expected header {','.join(TRACE_HEADER)}", line=1)
        for row in rows:
            line = rows.line_num
            if not row:
                continue
            if len(row) != 3:
                raise TraceFormatError(f"expected 3 fields, got {len(row)}", line=line)
            try:
                f, re, im = (float(x) for x in row)
            except ValueError as exc:
                raise TraceFormatError(str(exc), line=line) from None
            if freqs and not f > freqs[-1]:
                raise TraceFormatError("frequencies must be strictly increasing", line=line)
            freqs.append(f)
            vals.append(complex(re, im))
    if not freqs:
        raise TraceFormatError("no data rows", line=2)
    meta = TraceMeta()
    mp = _meta_path(path)
    if mp.exists():
        meta = TraceMeta.from_dict(json.loads(mp.read_text()))
    return S21Trace(np.array(freqs), np.array(vals), meta)
