"""Flat ``key = value`` configuration files for the solvers.

One setting per line, ``#`` starts a comment, blank lines are ignored.
Unknown, duplicated or missing keys are errors that name the key (and the
line).  Times and other reals accept an optional ``/sqrt2`` suffix, so
``t_end = 1000/sqrt2`` means 1000/√2.  Lists are comma-separated.

A steady Navier-Stokes force is given mode by mode:

    force_mode_1 = kx ky kz re1 im1 re2 im2 re3 im3

The conjugate partner at -k is added automatically unless it is listed too.
"""
from __future__ import annotations

import math
import re
from dataclasses import fields
from pathlib import Path

import numpy as np

from .bgk_solver import BgkConfig
from .dsmc_solver import DsmcConfig
from .kinetic_core import SpatialGrid1D, VelocityGrid2D
from .reduced_cns import CnsConfig
from .steady_ns import FourierVectorField, SteadyNsConfig

__all__ = ["ConfigError", "parse_config", "parse_config_text", "render_config", "KINDS"]


class ConfigError(ValueError):
    pass


REQUIRED = object()
_SQRT2 = re.compile(r"^\s*([^/]+?)\s*/\s*sqrt\(?2\)?\s*$", re.IGNORECASE)


def _real(text: str) -> float:
    m = _SQRT2.match(text)
    if m:
        return float(m.group(1)) / math.sqrt(2.0)
    return float(text)


def _integer(text: str) -> int:
    val = float(text)
    if not val.is_integer():
        raise ValueError(f"{text!r} is not an integer")
    return int(val)


def _boolean(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"{text!r} is not a boolean")


def _reals(text: str) -> tuple:
    text = text.strip()
    if not text:
        return ()
    return tuple(_real(p) for p in text.split(","))


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, tuple):
        return ", ".join(_fmt(v) for v in value)
    return str(value)


# key -> (converter, default); flattened views of the config dataclasses
_BGK_KEYS = {
    "kn": (_real, REQUIRED),
    "f0": (_real, REQUIRED),
    "n_cells": (_integer, 100),
    "n_v1": (_integer, 64),
    "n_v2": (_integer, 64),
    "v_max": (_real, 6.0),
    "dt_cfl": (_real, 0.5),
    "t_end": (_real, REQUIRED),
    "sample_interval": (_real, 1 / math.sqrt(2.0)),
    "remap_trigger": (_real, 1.2),
    "collision_number": (_real, 0.4),
    "large_step_transport": (_boolean, True),
    "snapshot_times": (_reals, ()),
    "check_entropy": (_boolean, False),
    "max_steps": (_integer, 0),
}

_DSMC_KEYS = {
    "kn": (_real, REQUIRED),
    "f0": (_real, REQUIRED),
    "n_cells": (_integer, 50),
    "particles_per_cell": (_integer, 100),
    "dt": (_real, None),
    "t_end": (_real, REQUIRED),
    "n_ensemble": (_integer, 8),
    "time_avg_window": (_real, 0.0),
    "rng_seed": (_integer, 12345),
    "sample_interval": (_real, 1.0),
    "adapt_dt": (_boolean, True),
}

_CNS_KEYS = {
    "g0": (_real, REQUIRED),
    "delta": (_real, 1.0),
    "c_mu": (_real, CnsConfig.c_mu),
    "c_kappa": (_real, CnsConfig.c_kappa),
    "rho0": (_real, 1.0),
    "n_cells": (_integer, 64),
    "dt": (_real, 0.01),
    "t_end": (_real, REQUIRED),
    "dt_rel": (_real, 1e-3),
    "samples_per_decade": (_integer, 40),
    "t_first_sample": (_real, 0.1),
}

_NS_KEYS = {
    "nu_visc": (_real, REQUIRED),
    "N": (_integer, 16),
    "damping": (_real, 1.0),
    "max_iter": (_integer, 200),
    "residual_tol": (_real, 1e-10),
    "sobolev_c": (_real, 1.0),
    "kappa": (_real, 1.0),
}

KINDS = {"bgk": _BGK_KEYS, "dsmc": _DSMC_KEYS, "cns": _CNS_KEYS, "steady-ns": _NS_KEYS}
_FORCE_KEY = re.compile(r"^force_mode_(\d+)$")


def _read_pairs(text: str, source: str):
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in pairs:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} "
                              f"(first set on line {pairs[key][1]})")
        pairs[key] = (value, lineno)
    return pairs


def _convert(kind: str, pairs: dict, source: str) -> dict:
    schema = KINDS[kind]
    values = {}
    for key, (text, lineno) in pairs.items():
        if kind == "steady-ns" and _FORCE_KEY.match(key):
            continue
        if key not in schema:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r} for {kind} "
                              f"(allowed: {', '.join(sorted(schema))})")
        conv = schema[key][0]
        try:
            values[key] = conv(text)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
    for key, (conv, default) in schema.items():
        if key not in values:
            if default is REQUIRED:
                raise ConfigError(f"{source}: missing required key {key!r}")
            values[key] = default
    return values


def _force_modes(pairs: dict, N: int, source: str) -> FourierVectorField:
    modes = {}
    for key, (text, lineno) in pairs.items():
        if not _FORCE_KEY.match(key):
            continue
        parts = text.replace(",", " ").split()
        if len(parts) != 9:
            raise ConfigError(f"{source}:{lineno}: {key!r} needs 9 numbers "
                              "(kx ky kz re1 im1 re2 im2 re3 im3)")
        try:
            k = tuple(_integer(p) for p in parts[:3])
            nums = [_real(p) for p in parts[3:]]
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
        if k in modes:
            raise ConfigError(f"{source}:{lineno}: mode {k} given twice")
        if k == (0, 0, 0):
            raise ConfigError(f"{source}:{lineno}: {key!r}: the k = 0 mode must be absent")
        if max(abs(v) for v in k) > N:
            raise ConfigError(f"{source}:{lineno}: {key!r}: mode {k} exceeds N = {N}")
        modes[k] = np.array(nums[0::2]) + 1j * np.array(nums[1::2])
    field = FourierVectorField.zeros(N)
    for k, c in modes.items():
        mk = tuple(-v for v in k)
        field.coeffs[(slice(None),) + tuple(v + N for v in k)] = c
        if mk not in modes:
            field.coeffs[(slice(None),) + tuple(v + N for v in mk)] = np.conj(c)
        elif not np.allclose(modes[mk], np.conj(c), rtol=0, atol=1e-14 * (1 + np.abs(c).max())):
            raise ConfigError(f"{source}: modes {k} and {mk} are not complex conjugates")
    return field


def _build(kind: str, values: dict, pairs: dict, source: str):
    try:
        if kind == "bgk":
            return BgkConfig(
                kn=values["kn"], f0=values["f0"],
                grid=SpatialGrid1D(values["n_cells"]),
                vgrid=VelocityGrid2D(values["n_v1"], values["n_v2"], values["v_max"]),
                dt_cfl=values["dt_cfl"], t_end=values["t_end"],
                sample_interval=values["sample_interval"], remap_trigger=values["remap_trigger"],
                collision_number=values["collision_number"],
                large_step_transport=values["large_step_transport"],
                snapshot_times=values["snapshot_times"], check_entropy=values["check_entropy"],
                max_steps=values["max_steps"])
        if kind == "dsmc":
            return DsmcConfig(**values)
        if kind == "cns":
            return CnsConfig(**values)
        force = _force_modes(pairs, values["N"], source)
        return SteadyNsConfig(values["nu_visc"], force, **{k: v for k, v in values.items()
                                                           if k != "nu_visc"})
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def parse_config_text(text: str, kind: str, source: str = "<config>"):
    """Parse configuration text for ``kind`` (bgk, dsmc, cns or steady-ns)."""
    if kind not in KINDS:
        raise ConfigError(f"unknown configuration kind {kind!r}")
    pairs = _read_pairs(text, source)
    values = _convert(kind, pairs, source)
    return _build(kind, values, pairs, source)


def parse_config(path, kind: str):
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist")
    return parse_config_text(path.read_text(), kind, str(path))


def _flatten(cfg) -> tuple[str, dict]:
    if isinstance(cfg, BgkConfig):
        d = {"kn": cfg.kn, "f0": cfg.f0, "n_cells": cfg.grid.n_cells, "n_v1": cfg.vgrid.n_v1,
             "n_v2": cfg.vgrid.n_v2, "v_max": cfg.vgrid.v_max}
        for key in _BGK_KEYS:
            if key not in d:
                d[key] = getattr(cfg, key)
        return "bgk", d
    if isinstance(cfg, DsmcConfig):
        return "dsmc", {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    if isinstance(cfg, CnsConfig):
        return "cns", {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    if isinstance(cfg, SteadyNsConfig):
        return "steady-ns", {k: getattr(cfg, k) for k in _NS_KEYS}
    raise TypeError(f"cannot render {type(cfg).__name__}")


def render_config(cfg) -> str:
    """Canonical text form; ``parse_config_text(render_config(c), kind) == c``."""
    kind, d = _flatten(cfg)
    lines = [f"# {kind} configuration"]
    lines += [f"{key} = {_fmt(d[key])}" for key in KINDS[kind] if d.get(key) is not None]
    if kind == "steady-ns":
        N = cfg.N
        i = 0
        for k1, k2, k3 in np.argwhere(np.abs(cfg.force.coeffs).max(axis=0) > 0):
            k = (int(k1) - N, int(k2) - N, int(k3) - N)
            if k <= (0, 0, 0):  # the conjugate half is implied
                continue
            c = cfg.force.coeffs[:, k1, k2, k3]
            mk = tuple(-v + N for v in k)
            if not np.array_equal(cfg.force.coeffs[(slice(None),) + mk], np.conj(c)):
                raise ValueError(f"force is not real-valued at mode {k}")
            i += 1
            nums = " ".join(f"{_fmt(float(z.real))} {_fmt(float(z.imag))}" for z in c)
            lines.append(f"force_mode_{i} = {k[0]} {k[1]} {k[2]} {nums}")
    return "\n".join(lines) + "\n"
