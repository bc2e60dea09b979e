"""Device configs, flux datasets, fit reports, flux maps and run manifests.

Everything on disk is SI with the unit in the key/column name, except flux,
which is always in units of Phi0.
"""

import csv
import hashlib
import json
import math
import os
from importlib import resources
from pathlib import Path

from .errors import TraceFormatError
from .fitting import FluxDataset, FluxPoint
from .resonator import CouplingSpec, DeviceModel, ThermalEnv, bare_from_impedance
from .squid import Flux, SquidParams

__all__ = [
    "ConfigError",
    "CONFIG_DIR_ENV",
    "FLUXMAP_HEADER",
    "DATASET_HEADER",
    "resolve_config",
    "load_config",
    "config_to_model",
    "model_to_config",
    "config_hash",
    "read_flux_dataset",
    "write_flux_dataset",
    "write_flux_map",
    "write_json",
    "write_manifest",
]

CONFIG_DIR_ENV = "SQUIDRES_CONFIG_DIR"
FLUXMAP_HEADER = ("phi_over_phi0", "f0_hz", "q_ext", "q_inh", "q_total", "valid")
DATASET_HEADER = ("phi_over_phi0", "f0_hz")

_REQUIRED = {"f_r_hz", "z0_ohm", "cc_f", "n_squids"}
_OPTIONAL = {"r0_ohm", "ic0_a", "ll_h", "q_int", "temperature_k"}


class ConfigError(ValueError):
    pass


def _fmt(x):
    return repr(float(x))


def resolve_config(name):
    """Find a config file by path, then in $SQUIDRES_CONFIG_DIR, then bundled samples."""
    p = Path(name)
    if p.is_file():
        return p
    stem = p.name if p.suffix == ".json" else p.name + ".json"
    env_dir = os.environ.get(CONFIG_DIR_ENV)
    if env_dir and (Path(env_dir) / stem).is_file():
        return Path(env_dir) / stem
    bundled = resources.files("squidres") / "samples" / stem
    if bundled.is_file():
        return Path(str(bundled))
    raise ConfigError(f"config {name!r} not found")


def load_config(name) -> dict:
    path = resolve_config(name)
    try:
        cfg = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be an object")
    unknown = set(cfg) - _REQUIRED - _OPTIONAL
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {sorted(unknown)}")
    missing = _REQUIRED - set(cfg)
    if missing:
        raise ConfigError(f"{path}: missing key(s) {sorted(missing)}")
    # surface value problems now rather than deep inside a command
    config_to_model(cfg)
    return cfg


def config_to_model(cfg: dict):
    """Build ``(DeviceModel, ThermalEnv)`` from a config mapping."""
    try:
        n = cfg["n_squids"]
        if not isinstance(n, int) or isinstance(n, bool):
            raise ConfigError(f"n_squids must be an integer, got {n!r}")
        squid = None
        if n > 0:
            if cfg.get("ic0_a") is None:
                raise ConfigError("ic0_a is required when n_squids > 0")
            squid = SquidParams(float(cfg["ic0_a"]), float(cfg.get("ll_h") or 0.0))
        q_int = cfg.get("q_int")
        dev = DeviceModel(
            bare_from_impedance(float(cfg["f_r_hz"]), float(cfg["z0_ohm"])),
            CouplingSpec(float(cfg["cc_f"]), float(cfg.get("r0_ohm", 50.0))),
            n,
            squid,
            None if q_int is None else float(q_int),
        )
        env = ThermalEnv(float(cfg.get("temperature_k", 0.0)))
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from None
    return dev, env


def model_to_config(dev: DeviceModel, env: ThermalEnv) -> dict:
    cfg = {
        "f_r_hz": dev.bare.f_r,
        "z0_ohm": dev.bare.Z0,
        "cc_f": dev.coupling.Cc,
        "r0_ohm": dev.coupling.R0,
        "n_squids": dev.n_squids,
        "temperature_k": env.T,
    }
    if dev.squid is not None:
        cfg["ic0_a"] = dev.squid.Ic0
        cfg["ll_h"] = dev.squid.Ll
    if dev.Q_int is not None:
        cfg["q_int"] = dev.Q_int
    return cfg


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def read_flux_dataset(path) -> FluxDataset:
    """Read ``phi_over_phi0,f0_hz[,q]`` CSV."""
    points = []
    with open(path, newline="") as fh:
        rows = csv.reader(fh)
        header = next(rows, None)
        header = tuple(h.strip() for h in header) if header else ()
        if header not in (DATASET_HEADER, DATASET_HEADER + ("q",)):
            raise TraceFormatError("expected header phi_over_phi0,f0_hz[,q]", line=1)
        for row in rows:
            if not row:
                continue
            if len(row) != len(header):
                raise TraceFormatError(f"expected {len(header)} fields, got {len(row)}", line=rows.line_num)
            try:
                vals = [float(x) if x.strip() else None for x in row]
                points.append(FluxPoint(Flux(vals[0]), vals[1], vals[2] if len(vals) > 2 else None))
            except (TypeError, ValueError) as exc:
                raise TraceFormatError(str(exc), line=rows.line_num) from None
    try:
        return FluxDataset(tuple(points))
    except ValueError as exc:
        raise TraceFormatError(str(exc)) from None


def write_flux_dataset(data: FluxDataset, path):
    with_q = any(p.Q is not None for p in data.points)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DATASET_HEADER + (("q",) if with_q else ()))
        for p in data.points:
            row = [_fmt(p.flux.value), _fmt(p.f0)]
            if with_q:
                row.append("" if p.Q is None else _fmt(p.Q))
            w.writerow(row)
    return Path(path)


def write_flux_map(rows, path):
    """One CSV row per flux; invalid rows keep the flux and leave numbers empty."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FLUXMAP_HEADER)
        for r in rows:
            if r.valid:
                nums = [_fmt(r.f0_hz), _fmt(r.q_ext), _fmt(r.q_inh), _fmt(r.q_total)]
            else:
                nums = ["", "", "", ""]
            w.writerow([_fmt(r.flux.value), *nums, "true" if r.valid else "false"])
    return Path(path)


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def write_json(obj, path):
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return Path(path)


def write_manifest(path, command, cfg, seed, args, outputs):
    """Record what produced ``outputs``; no timestamps, so reruns are byte-identical."""
    from . import __version__

    return write_json(
        {
            "command": command,
            "config_sha256": None if cfg is None else config_hash(cfg),
            "config": cfg,
            "seed": seed,
            "args": args,
            "tool_version": __version__,
            "outputs": [Path(p).name for p in outputs],
        },
        path,
    )
