"""TOML material and field files.

Material file::

    dim = 2
    q = 1.5
    h.family = "quad_log"
    h.params = { a = 1.0, b = 2.0 }
    # 3D only
    gamma = 1.0
    Z.family = "power_of_norm"
    Z.params = { c = 0.1, s = 2.0 }

Field file::

    perturbation.family = "bump"
    amp = 0.05
    freq = [1, 2]
    resolution = 32
    lambda = 1.0

Unknown keys are errors.
"""

from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import volumetric
from .fields import FAMILIES, PerturbationSpec


class ConfigError(ValueError):
    pass


H_FAMILIES = {
    "power_log": (volumetric.power_log, ("a", "p", "b", "r")),
    "quad_log": (volumetric.quad_log, ("a", "b")),
}
Z_FAMILIES = {"zero": (), "power_of_norm": ("c", "s")}

MATERIAL_KEYS = {"dim", "q", "gamma", "h", "Z"}
FIELD_KEYS = {"perturbation", "amp", "freq", "resolution", "lambda", "dim"}
PERTURBATION_KEYS = {"family", "vector", "truncated"}


def load_toml(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"no such file: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _reject_unknown(section: dict, allowed: set, where: str):
    extra = sorted(set(section) - allowed)
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(extra)}")


def _number(d: dict, key: str, where: str) -> float:
    if key not in d:
        raise ConfigError(f"missing key {where}{key}")
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}{key} must be a number")
    return float(v)


def _params(table: dict, names: tuple, where: str) -> dict:
    params = table.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError(f"{where}.params must be a table")
    _reject_unknown(params, set(names), f"{where}.params")
    return {k: _number(params, k, f"{where}.params.") for k in names}


def parse_material(data: dict):
    _reject_unknown(data, MATERIAL_KEYS, "material")
    dim = data.get("dim")
    if dim not in (2, 3):
        raise ConfigError("dim must be 2 or 3")
    q = _number(data, "q", "")
    h = data.get("h")
    if not isinstance(h, dict):
        raise ConfigError("missing table h")
    _reject_unknown(h, {"family", "params"}, "h")
    fam = h.get("family")
    if fam not in H_FAMILIES:
        raise ConfigError(f"h.family must be one of {sorted(H_FAMILIES)}")
    ctor, names = H_FAMILIES[fam]
    try:
        law = ctor(**_params(h, names, "h"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    try:
        if dim == 2:
            if "gamma" in data or "Z" in data:
                raise ConfigError("gamma and Z are 3D-only keys")
            return volumetric.Material2D(q, law)
        gamma = _number(data, "gamma", "")
        z = data.get("Z", {"family": "zero"})
        if not isinstance(z, dict):
            raise ConfigError("Z must be a table")
        _reject_unknown(z, {"family", "params"}, "Z")
        zf = z.get("family", "zero")
        if zf not in Z_FAMILIES:
            raise ConfigError(f"Z.family must be one of {sorted(Z_FAMILIES)}")
        zp = _params(z, Z_FAMILIES[zf], "Z")
        Z = None if zf == "zero" else volumetric.z_power_of_norm(zp["c"], zp["s"])
        return volumetric.Material3D(q, gamma, law, Z, (zf, tuple(sorted(zp.items()))))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_material(path):
    return parse_material(load_toml(path))


def parse_field(data: dict):
    """Returns ``(spec, lam, resolution, dim)``."""
    _reject_unknown(data, FIELD_KEYS, "field")
    pert = data.get("perturbation")
    if not isinstance(pert, dict):
        raise ConfigError("missing table perturbation")
    _reject_unknown(pert, PERTURBATION_KEYS, "perturbation")
    fam = pert.get("family")
    if fam not in FAMILIES:
        raise ConfigError(f"perturbation.family must be one of {list(FAMILIES)}")
    amp = _number(data, "amp", "")
    lam = _number(data, "lambda", "")
    if lam <= 0:
        raise ConfigError("lambda must be positive")
    res = data.get("resolution")
    if not isinstance(res, int) or isinstance(res, bool) or res < 8:
        raise ConfigError("resolution must be an integer >= 8")
    dim = data.get("dim", 2)
    if dim not in (2, 3):
        raise ConfigError("dim must be 2 or 3")
    freq = data.get("freq", 1)
    freq = tuple(freq) if isinstance(freq, list) else (freq,)
    if not all(isinstance(f, int) and not isinstance(f, bool) and f >= 1 for f in freq):
        raise ConfigError("freq must be a positive integer or a list of them")
    if len(freq) not in (1, dim):
        raise ConfigError("freq needs one entry per axis")
    vec = tuple(float(v) for v in pert.get("vector", ()))
    spec = PerturbationSpec(fam, amp, freq, vec, bool(pert.get("truncated", False)))
    return spec, lam, res, dim


def load_field(path):
    return parse_field(load_toml(path))


def config_hash(*parts) -> str:
    """Short stable hash of JSON-serializable run inputs."""
    blob = json.dumps(parts, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]
