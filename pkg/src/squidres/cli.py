"""Command-line front end.

Exit codes: 0 success, 2 input error (flags, config, file format),
3 model validity (e.g. flux at a half quantum), 4 fit failure.
"""

import argparse
import hashlib
import math
import sys
from pathlib import Path

import numpy as np

from .errors import FitError, ModelValidityError, TraceFormatError
from .fitting import fit_flux_curve, fit_resonance, flux_map
from .io import (
    ConfigError,
    config_to_model,
    load_config,
    read_flux_dataset,
    write_flux_map,
    write_json,
    write_manifest,
)
from .lineshape import NoiseModel, SweepSpec, normalize, read_trace_csv, synth_sweep, write_trace_csv
from .resonator import dbm_to_watts, resonance_frequency, total_q
from .squid import Flux

EXIT_OK, EXIT_INPUT, EXIT_MODEL, EXIT_FIT = 0, 2, 3, 4

# default sweep half-width, in linewidths
_HALF_WINDOW = 7.0


class _Failure(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _manifest_path(out):
    out = Path(out)
    return out.with_name(out.stem + ".manifest.json")


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def cmd_simulate(args):
    cfg = load_config(args.config)
    dev, env = config_to_model(cfg)
    flux = Flux(args.flux)
    try:
        w0 = resonance_frequency(dev, flux)
        q = total_q(dev, flux, env)
    except ModelValidityError as exc:
        raise _Failure(EXIT_MODEL, f"--flux {args.flux:g}: {exc}") from None
    f0 = w0 / (2 * math.pi)
    f_start = args.fstart if args.fstart is not None else f0 * (1 - _HALF_WINDOW / q)
    f_stop = args.fstop if args.fstop is not None else f0 * (1 + _HALF_WINDOW / q)
    p_in = 0.0 if args.power_dbm is None else float(dbm_to_watts(args.power_dbm))
    try:
        spec = SweepSpec(f_start, f_stop, args.points, flux, env, p_in)
        noise = NoiseModel(args.noise_sigma, args.seed)
    except ValueError as exc:
        raise _Failure(EXIT_INPUT, str(exc)) from None
    trace = synth_sweep(dev, spec, noise)
    if args.normalize:
        trace = normalize(trace)
    outputs = write_trace_csv(trace, args.out)
    write_manifest(_manifest_path(args.out), "simulate", cfg, args.seed, _argdict(args), outputs)
    print(f"wrote {len(trace)} points to {args.out}; model f0 = {f0 / 1e9:.6f} GHz, Q = {q:.1f}")


def cmd_fluxmap(args):
    cfg = load_config(args.config)
    dev, env = config_to_model(cfg)
    fluxes = np.linspace(args.flux_start, args.flux_stop, args.flux_points)
    rows = flux_map(dev, env, fluxes)
    out = write_flux_map(rows, args.out)
    write_manifest(_manifest_path(args.out), "fluxmap", cfg, None, _argdict(args), [out])
    n_bad = sum(not r.valid for r in rows)
    print(f"wrote {len(rows)} rows to {args.out} ({n_bad} flagged invalid)")


def cmd_fit_trace(args):
    trace = read_trace_csv(args.trace)
    fit = fit_resonance(trace)
    out = write_json(fit.to_dict(), args.out)
    a = _argdict(args)
    a["trace_sha256"] = _sha256(args.trace)
    write_manifest(_manifest_path(args.out), "fit-trace", None, None, a, [out])
    print(f"f0 = {fit.f0 / 1e9:.9f} GHz  Q = {fit.Q:.2f}  converged = {fit.converged}")
    if not fit.converged:
        raise _Failure(EXIT_FIT, f"fit did not converge after {fit.n_iter} evaluations")


def cmd_fit_flux(args):
    data = read_flux_dataset(args.dataset)
    cfg = load_config(args.config)
    dev, _ = config_to_model(cfg)
    if dev.n_squids == 0:
        raise _Failure(EXIT_INPUT, "config has n_squids = 0; nothing to fit")
    fit = fit_flux_curve(data, dev, free_beta=args.free_beta)
    out = write_json(fit.to_dict(), args.out)
    a = _argdict(args)
    a["dataset_sha256"] = _sha256(args.dataset)
    write_manifest(_manifest_path(args.out), "fit-flux", cfg, None, a, [out])
    print(f"Ic0 = {fit.Ic0 * 1e9:.3f} nA  f_r = {fit.f_r / 1e9:.6f} GHz  beta = {fit.beta:.4g}")


def _argdict(args):
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def build_parser():
    p = argparse.ArgumentParser(prog="squidres", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="synthesize an S21 trace")
    s.add_argument("config", help="device config JSON (path or bundled sample name)")
    s.add_argument("--flux", type=float, default=0.0, help="applied flux, Phi0 units")
    s.add_argument("--fstart", type=float, help="start frequency, Hz (default: f0 - 7 linewidths)")
    s.add_argument("--fstop", type=float, help="stop frequency, Hz (default: f0 + 7 linewidths)")
    s.add_argument("--points", type=int, default=1601)
    s.add_argument("--power-dbm", type=float, help="input power at the sample, dBm")
    s.add_argument("--noise-sigma", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--normalize", action="store_true", help="divide by the maximum modulus")
    s.add_argument("--out", default="trace.csv")
    s.set_defaults(func=cmd_simulate)

    m = sub.add_parser("fluxmap", help="model f0 and Q budget versus flux")
    m.add_argument("config")
    m.add_argument("--flux-start", type=float, default=-0.5)
    m.add_argument("--flux-stop", type=float, default=0.5)
    m.add_argument("--flux-points", type=int, default=101)
    m.add_argument("--out", default="fluxmap.csv")
    m.set_defaults(func=cmd_fluxmap)

    t = sub.add_parser("fit-trace", help="fit f0 and Q of a trace CSV")
    t.add_argument("trace")
    t.add_argument("--out", default="fit.json")
    t.set_defaults(func=cmd_fit_trace)

    f = sub.add_parser("fit-flux", help="fit a flux-tuning dataset")
    f.add_argument("dataset")
    f.add_argument("config")
    f.add_argument("--free-beta", action="store_true")
    f.add_argument("--out", default="fluxfit.json")
    f.set_defaults(func=cmd_fit_flux)
    return p


def _check_flags(parser, args):
    if getattr(args, "points", 2) < 2:
        parser.error("--points must be >= 2")
    if getattr(args, "flux_points", 1) < 1:
        parser.error("--flux-points must be >= 1")
    if getattr(args, "noise_sigma", 0.0) < 0:
        parser.error("--noise-sigma must be >= 0")
    if getattr(args, "seed", 0) is not None and getattr(args, "seed", 0) < 0:
        parser.error("--seed must be >= 0")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    _check_flags(parser, args)
    try:
        args.func(args)
    except _Failure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ConfigError, TraceFormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ModelValidityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except FitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FIT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
