"""Inverse problems: resonance traces, flux-tuning curves, and model Q(flux).

Resonance traces are fitted to ``scale / (1 + 2j Q (f - f0) / f0)``. The
complex scale enters linearly and is projected out for every trial (f0, Q),
so the nonlinear search is two-dimensional and the result for (f0, Q) does not
depend on an overall complex gain of the data.

Flux curves are fitted to ``f0(flux) = f_r / (1 + N L_J0(flux) / L)`` with L
and N taken from a prior device description.
"""

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import least_squares

from .constants import PHI0_RED
from .errors import (
    AmbiguousPeaks,
    ConvergenceFailure,
    FitError,
    InsufficientFluxSpan,
    ModelValidityError,
    NoPeakInWindow,
)
from .lineshape import S21Trace, lorentzian
from .resonator import (
    DeviceModel,
    ThermalEnv,
    Validity,
    external_q,
    inhomogeneous_q,
    resonance_frequency,
    total_q,
    validity,
)
from .squid import EPS_IC, Flux, reduce_flux

__all__ = [
    "MIN_TRACE_POINTS",
    "MIN_FLUX_POINTS",
    "MIN_FLUX_SPAN",
    "ResonanceFit",
    "FluxPoint",
    "FluxDataset",
    "FluxCurveFit",
    "QCurvePoint",
    "FluxMapRow",
    "initial_guess",
    "fit_resonance",
    "flux_curve_model",
    "fit_flux_curve",
    "model_q_curve",
    "flux_map",
]

MIN_TRACE_POINTS = 8
MIN_FLUX_POINTS = 4
MIN_FLUX_SPAN = 0.3

# optimizer settings shared by both fits
_LSQ = dict(method="trf", jac="3-point", diff_step=1e-6, xtol=1e-10, gtol=1e-10, ftol=None, max_nfev=200)
GRAD_TOL = 1e-10
STEP_TOL = 1e-10


def _relative_gradient(J, r):
    """Largest |cos| between the residual and a Jacobian column."""
    rn = np.linalg.norm(r)
    if rn == 0:
        return 0.0
    cn = np.linalg.norm(J, axis=0)
    cn[cn == 0] = 1.0
    return float(np.max(np.abs(J.T @ r) / cn / rn))


def _polish(residual, jacobian, x, scale=None, max_steps=6):
    """Undamped Gauss-Newton steps from a trust-region solution.

    The trust-region search judges steps by the change in cost, which stops
    resolving once that change reaches rounding level. Gauss-Newton steps
    instead drive J^T r to zero directly.

    Steps are measured in units of ``scale`` (default ``|x|``).
    Returns ``(x, relative_gradient, relative_step)``.
    """
    scale = np.abs(x) if scale is None else np.asarray(scale, dtype=float)
    step = math.inf
    r = residual(x)
    for _ in range(max_steps):
        J = jacobian(x)
        grad = _relative_gradient(J, r)
        if grad < GRAD_TOL or step < STEP_TOL:
            return x, grad, step
        cn = np.linalg.norm(J, axis=0)
        cn[cn == 0] = 1.0
        dx = np.linalg.lstsq(J / cn, -r, rcond=None)[0] / cn
        x_new = x + dx
        step = float(np.max(np.abs(dx) / scale))
        r_new = residual(x_new)
        if not np.all(np.isfinite(r_new)):
            step = math.inf
            break
        # below STEP_TOL a cost increase is rounding noise, not divergence
        if step >= STEP_TOL and r_new @ r_new > 1.01 * (r @ r):
            step = math.inf
            break
        x, r = x_new, r_new
    return x, _relative_gradient(jacobian(x), r), step


@dataclass
class ResonanceFit:
    f0: float
    Q: float
    scale: complex
    residual_norm: float = math.nan
    stderr: dict = field(default_factory=dict)
    n_iter: int = 0
    converged: bool = False

    def to_dict(self):
        return {
            "f0_hz": self.f0,
            "q": self.Q,
            "scale_re": self.scale.real,
            "scale_im": self.scale.imag,
            "residual_norm": self.residual_norm,
            "stderr": dict(sorted(self.stderr.items())),
            "n_iter": self.n_iter,
            "converged": self.converged,
        }


def _require_points(trace):
    if len(trace) < MIN_TRACE_POINTS:
        raise FitError(f"need at least {MIN_TRACE_POINTS} points, trace has {len(trace)}")


def _crossing(f, a, i_in, i_out, level):
    # linear interpolation between an inside point and the first outside point
    a_in, a_out = a[i_in], a[i_out]
    t = (a_in - level) / (a_in - a_out)
    return f[i_in] + t * (f[i_out] - f[i_in])


def _check_single_peak(a, k, i_lo, i_hi):
    """Refuse a second local peak within 6 dB of the main one."""
    above = np.flatnonzero(a >= a[k] / 2)
    # bridge short sub-threshold dips (noise on the shoulders of the main peak)
    bridge = max(3, (i_hi - i_lo) // 2)
    breaks = np.flatnonzero(np.diff(above) > bridge + 1)
    starts = np.r_[above[0], above[breaks + 1]]
    stops = np.r_[above[breaks], above[-1]]
    if starts.size > 1:
        main = np.flatnonzero((starts <= k) & (stops >= k))[0]
        other = np.delete(np.arange(starts.size), main)
        # a competing resonance is a few points wide; lone noise spikes are not
        wide = other[stops[other] - starts[other] + 1 >= max(3, (i_hi - i_lo) // 4)]
        if wide.size == 0:
            return
        j = wide[0]
        raise AmbiguousPeaks(
            f"secondary peak near index {starts[j]} is within 6 dB of the main peak at index {k}"
        )


def initial_guess(trace: S21Trace) -> ResonanceFit:
    """Peak bin, half-power bandwidth and peak value as a starting point.

    Raises
    ------
    NoPeakInWindow
        When the half-power level is not crossed on both sides of the peak.
    AmbiguousPeaks
        When another peak reaches within 6 dB of the highest one.
    """
    _require_points(trace)
    f, z = trace.freqs, trace.values
    a = np.abs(z)
    k = int(np.argmax(a))
    half = a[k] / math.sqrt(2.0)
    lo = np.flatnonzero(a[:k] <= half)
    hi = np.flatnonzero(a[k + 1:] <= half)
    if lo.size == 0 or hi.size == 0:
        raise NoPeakInWindow("half-power crossing missing on one side of the peak")
    i_lo, i_hi = lo[-1], k + 1 + hi[0]
    _check_single_peak(a, k, i_lo, i_hi)
    f_lo = _crossing(f, a, i_lo + 1, i_lo, half)
    f_hi = _crossing(f, a, i_hi - 1, i_hi, half)
    return ResonanceFit(f0=float(f[k]), Q=float(f[k] / (f_hi - f_lo)), scale=complex(z[k]))


def _project_scale(g, z):
    return np.vdot(g, z) / np.vdot(g, g).real


def _analytic_jacobian(f, f0, Q, scale):
    x = 2.0 * Q * (f - f0) / f0
    g = 1.0 / (1.0 + 1j * x)
    dm_dx = -1j * scale * g**2
    cols = [
        dm_dx * (-2.0 * Q * f / f0**2),
        dm_dx * (2.0 * (f - f0) / f0),
        g,
        1j * g,
    ]
    return np.stack([np.r_[c.real, c.imag] for c in cols], axis=1)


def fit_resonance(trace: S21Trace, init: Optional[ResonanceFit] = None) -> ResonanceFit:
    """Least-squares fit of complex S21 to scale x Lorentzian.

    Non-convergence is reported through ``converged=False`` on the returned
    best iterate, not raised.

    Raises
    ------
    NoPeakInWindow
        No usable peak for the starting point, or the fit wanders out of the
        window or to a peak indistinguishable from the residual.
    """
    _require_points(trace)
    if init is None:
        init = initial_guess(trace)
    f = trace.freqs
    peak = np.max(np.abs(trace.values))
    if peak == 0:
        raise NoPeakInWindow("trace is identically zero")
    z = trace.values / peak
    f0g, qg = init.f0, init.Q
    if not (qg > 0 and f0g > 0):
        raise FitError("initial f0 and Q must be positive")
    lw = f0g / qg

    def unpack(p):
        return f0g + p[0] * lw, qg * math.exp(p[1])

    def residual(p):
        f0, q = unpack(p)
        g = lorentzian(f, f0, q)
        r = z - _project_scale(g, z) * g
        return np.r_[r.real, r.imag]

    sol = least_squares(residual, np.zeros(2), **_LSQ)
    f0, q = unpack(sol.x)
    g = lorentzian(f, f0, q)
    s = _project_scale(g, z)

    def full_residual(th):
        r = z - lorentzian(f, th[0], th[1], complex(th[2], th[3]))
        return np.r_[r.real, r.imag]

    def full_jacobian(th):
        return -_analytic_jacobian(f, th[0], th[1], complex(th[2], th[3]))

    th0 = np.array([f0, q, s.real, s.imag])
    # f0 steps count in linewidths, scale steps relative to |scale|
    th, grad, step = _polish(full_residual, full_jacobian, th0, scale=[f0 / q, q, abs(s), abs(s)])
    f0, q, s = th[0], th[1], complex(th[2], th[3])
    r = z - lorentzian(f, f0, q, s)
    ssr = float(np.sum(np.abs(r) ** 2))
    rms = math.sqrt(ssr / f.size)

    if not f[0] <= f0 <= f[-1]:
        raise NoPeakInWindow(f"fitted f0 = {f0:.9g} Hz left the window [{f[0]:.9g}, {f[-1]:.9g}]")
    if abs(s) < 5.0 * rms:
        raise NoPeakInWindow("fitted peak is not distinguishable from the residual")

    scale = complex(s * peak)
    stderr = {}
    dof = 2 * f.size - 4
    if dof > 0:
        J = _analytic_jacobian(f, f0, q, s)
        try:
            cov = np.linalg.inv(J.T @ J) * ssr / dof
            err = np.sqrt(np.clip(np.diag(cov), 0, None))
            stderr = {"f0": err[0], "q": err[1], "scale_re": err[2] * peak, "scale_im": err[3] * peak}
        except np.linalg.LinAlgError:
            pass
    return ResonanceFit(
        f0=float(f0),
        Q=float(q),
        scale=scale,
        residual_norm=rms,
        stderr={k: float(v) for k, v in stderr.items()},
        n_iter=int(sol.nfev),
        converged=bool(q > 0 and (grad < GRAD_TOL or step < STEP_TOL)),
    )


@dataclass(frozen=True)
class FluxPoint:
    flux: Flux
    f0: float
    Q: Optional[float] = None


@dataclass(frozen=True)
class FluxDataset:
    """Measured (or synthetic) resonance frequencies versus flux."""

    points: tuple

    def __post_init__(self):
        pts = tuple(self.points)
        vals = [p.flux.value for p in pts]
        if len(set(vals)) != len(vals):
            raise ValueError("flux values must be distinct")
        if any(not p.f0 > 0 for p in pts):
            raise ValueError("f0 values must be positive")
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_arrays(cls, flux, f0, q=None):
        q = [None] * len(flux) if q is None else q
        return cls(tuple(FluxPoint(Flux(float(a)), float(b), None if c is None else float(c))
                         for a, b, c in zip(flux, f0, q)))

    @property
    def flux(self):
        return np.array([p.flux.value for p in self.points])

    @property
    def f0(self):
        return np.array([p.f0 for p in self.points])

    def __len__(self):
        return len(self.points)


@dataclass
class FluxCurveFit:
    omega_r: float
    Ic0: float
    beta: float
    residual_norm: float
    converged: bool
    n_squids: int = 1
    free_beta: bool = False
    stderr: dict = field(default_factory=dict)
    n_iter: int = 0

    @property
    def f_r(self):
        return self.omega_r / (2 * math.pi)

    def to_dict(self):
        return {
            "f_r_hz": self.f_r,
            "ic0_a": self.Ic0,
            "beta": self.beta,
            "n_squids": self.n_squids,
            "free_beta": self.free_beta,
            "residual_norm": self.residual_norm,
            "stderr": dict(sorted(self.stderr.items())),
            "n_iter": self.n_iter,
            "converged": self.converged,
        }


def flux_curve_model(flux, f_r, Ic0, beta, L, n_squids):
    """Resonance frequency (same unit as ``f_r``) versus flux, no validity checks."""
    c = np.cos(math.pi * np.asarray(reduce_flux(flux)))
    ljo = PHI0_RED / (2.0 * Ic0 * c) * (1.0 + beta * (2.0 * c * c - 1.0) / (2.0 * c))
    return f_r / (1.0 + n_squids * ljo / L)


def _flux_jacobian(flux, f_r, Ic0, beta, L, n_squids, Ll, free_beta):
    # d f0 / d(f_r, Ic0[, beta]); with beta tied to Ic0 the Ll term drops out of dL_J0/dIc0
    c = np.cos(math.pi * np.asarray(reduce_flux(flux)))
    base = PHI0_RED / (2.0 * Ic0 * c)
    shape_b = (2.0 * c * c - 1.0) / (2.0 * c)
    ljo = base * (1.0 + beta * shape_b)
    denom = 1.0 + n_squids * ljo / L
    df_dl = -f_r * n_squids / L / denom**2
    cols = [1.0 / denom]
    if free_beta:
        cols += [df_dl * (-ljo / Ic0), df_dl * base * shape_b]
    else:
        cols.append(df_dl * (-base / Ic0))
    return np.stack(cols, axis=1)


def _usable_points(data: FluxDataset):
    flux, f0 = data.flux, data.f0
    keep = np.abs(np.cos(math.pi * np.asarray(reduce_flux(flux)))) > EPS_IC
    if not keep.all():
        warnings.warn(f"dropping {np.count_nonzero(~keep)} point(s) inside the half-quantum cutoff",
                      stacklevel=3)
    return flux[keep], f0[keep]


def fit_flux_curve(data: FluxDataset, dev_prior: DeviceModel, free_beta: bool = False) -> FluxCurveFit:
    """Fit f0(flux) for the bare frequency and junction critical current.

    By default the loop inductance is held at the prior's value, so beta
    follows the fitted Ic0 (beta = Ll Ic0 / phi0). With ``free_beta`` beta is
    a third independent parameter.

    Raises
    ------
    InsufficientFluxSpan
        Fewer than 4 usable points or a reduced-flux span under 0.3 Phi0.
    ConvergenceFailure
        Neither the relative gradient nor the relative step reached 1e-10;
        the best iterate is on ``exc.result``.
    """
    if dev_prior.n_squids == 0:
        raise ValueError("prior device has no SQUIDs; nothing to fit")
    flux, f0 = _usable_points(data)
    if flux.size < MIN_FLUX_POINTS:
        raise InsufficientFluxSpan(f"need at least {MIN_FLUX_POINTS} points, got {flux.size}")
    red = np.asarray(reduce_flux(flux))
    if red.max() - red.min() < MIN_FLUX_SPAN:
        raise InsufficientFluxSpan(
            f"flux span {red.max() - red.min():.3g} Phi0 is below {MIN_FLUX_SPAN} Phi0"
        )

    L, n = dev_prior.bare.L, dev_prior.n_squids
    Ll = dev_prior.squid.Ll
    beta_prior = dev_prior.squid.beta()

    def beta_of(ic0, p_beta=None):
        return p_beta if free_beta else Ll * ic0 / PHI0_RED

    # coarse scan over Ic0 with f_r solved in closed form
    best = None
    for ic in dev_prior.squid.Ic0 * np.logspace(-1, 1, 401):
        shape = flux_curve_model(flux, 1.0, ic, beta_of(ic, beta_prior), L, n)
        if not np.all(np.isfinite(shape) & (shape > 0) & (shape <= 1)):
            continue
        fr = np.dot(f0, shape) / np.dot(shape, shape)
        cost = np.sum((fr * shape / f0 - 1.0) ** 2)
        if best is None or cost < best[0]:
            best = (cost, fr, ic)
    if best is None:
        raise ConvergenceFailure("no admissible starting point for the flux fit")
    _, fr0, ic0 = best

    def unpack(p):
        fr = fr0 * (1.0 + p[0])
        ic = ic0 * math.exp(p[1])
        return fr, ic, beta_of(ic, p[2] if free_beta else None)

    def residual(p):
        return flux_curve_model(flux, *unpack(p), L, n) / f0 - 1.0

    x0 = np.array([0.0, 0.0, beta_prior] if free_beta else [0.0, 0.0])
    sol = least_squares(residual, x0, **_LSQ)
    fr, ic, beta = unpack(sol.x)

    def full_residual(th):
        b = th[2] if free_beta else beta_of(th[1])
        return flux_curve_model(flux, th[0], th[1], b, L, n) / f0 - 1.0

    def full_jacobian(th):
        b = th[2] if free_beta else beta_of(th[1])
        return _flux_jacobian(flux, th[0], th[1], b, L, n, Ll, free_beta) / f0[:, None]

    th = np.array([fr, ic, beta] if free_beta else [fr, ic])
    th, grad, step = _polish(full_residual, full_jacobian, th, scale=[fr, ic, 1.0][: th.size])
    fr, ic = th[0], th[1]
    beta = th[2] if free_beta else beta_of(ic)
    r = full_residual(th)
    dof = r.size - th.size
    stderr = {}
    if dof > 0:
        J = full_jacobian(th)
        try:
            cov = np.linalg.inv(J.T @ J) * float(r @ r) / dof
            err = np.sqrt(np.clip(np.diag(cov), 0, None))
            stderr = {"f_r_hz": float(err[0]), "ic0_a": float(err[1])}
            if free_beta:
                stderr["beta"] = float(err[2])
        except np.linalg.LinAlgError:
            pass
    result = FluxCurveFit(
        omega_r=float(2 * math.pi * fr),
        Ic0=float(ic),
        beta=float(beta),
        residual_norm=float(math.sqrt(np.mean(r**2))),
        converged=bool(grad < GRAD_TOL or step < STEP_TOL),
        n_squids=n,
        free_beta=free_beta,
        stderr=stderr,
        n_iter=int(sol.nfev),
    )
    if not result.converged:
        exc = ConvergenceFailure(f"flux fit did not converge after {sol.nfev} evaluations")
        exc.result = result
        raise exc
    return result


@dataclass(frozen=True)
class QCurvePoint:
    flux: Flux
    Q: Optional[float]
    validity: Validity


def _as_flux(x):
    return x if isinstance(x, Flux) else Flux(float(x))


def model_q_curve(dev: DeviceModel, env: ThermalEnv, fluxes: Sequence) -> list:
    """Model loaded Q at each flux; invalid points carry ``Q=None`` and a flag."""
    out = []
    for phi in map(_as_flux, fluxes):
        v = validity(dev, phi)
        q = total_q(dev, phi, env) if v is Validity.OK else None
        out.append(QCurvePoint(phi, q, v))
    return out


@dataclass(frozen=True)
class FluxMapRow:
    flux: Flux
    f0_hz: Optional[float]
    q_ext: Optional[float]
    q_inh: Optional[float]
    q_total: Optional[float]
    validity: Validity

    @property
    def valid(self):
        return self.validity is Validity.OK


def flux_map(dev: DeviceModel, env: ThermalEnv, fluxes: Sequence) -> list:
    """Frequency and Q budget per flux, for plotting against measured maps."""
    rows = []
    for phi in map(_as_flux, fluxes):
        v = validity(dev, phi)
        if v is not Validity.OK:
            rows.append(FluxMapRow(phi, None, None, None, None, v))
            continue
        try:
            rows.append(FluxMapRow(
                phi,
                resonance_frequency(dev, phi) / (2 * math.pi),
                external_q(dev, phi),
                inhomogeneous_q(dev, phi, env),
                total_q(dev, phi, env),
                v,
            ))
        except ModelValidityError:
            rows.append(FluxMapRow(phi, None, None, None, None, Validity.EPSILON_LARGE))
    return rows
