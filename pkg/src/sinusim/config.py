"""Single configuration document for the whole engine.

One YAML file carries the tissue, scene, loop, control and session
sections. The canonical JSON form of the merged document is hashed into
every session log header so replays can refuse mismatched builds.
"""

from __future__ import annotations

import copy
import hashlib
import json
import os

import yaml

from .scene import SceneConfig, SceneError, load_scene, scene_to_dict
from .tissue import TissueParams

CONFIG_ENV_VAR = "SINUSIM_CONFIG"


class ConfigError(ValueError):
    """Raised for unreadable or invalid configuration documents."""


DEFAULTS: dict = {
    "tissue": {
        "fs_coeffs": [0.008, 2.087, 8.766],
        "ff_coeffs": [0.001, -1.176, 697.1],
        "xf_coeffs": [0.0001, -0.0575, 19.21],
        "a_coeffs": [1e-7, -7e-5, 0.0101, 0.0485, -79.313],
        "tau_s": 1.0,
        # sigma comes from the session level at run time
    },
    "scene": {
        "floor": {"center": [0.0, 0.0, 0.0], "normal": [0.0, 0.0, 1.0],
                  "half_extents": [20.0, 20.0]},
        "goal": {"center": [0.0, 0.0, -25.0], "radius": 2.0},
        "forbidden": {"center": [0.0, 0.0, -30.0], "normal": [0.0, 0.0, 1.0],
                      "half_extents": [20.0, 20.0]},
        "workspace_bounds": {"min": [-20.0, -20.0, -35.0],
                             "max": [20.0, 20.0, 15.0]},
    },
    "loop": {
        "tick_rate": 1000.0,
        "force_scale": 0.003,   # N per model-force unit
        "force_max": 3.3,       # N, device limit
        "velocity_filter_cutoff": 20.0,  # Hz
    },
    "control": {
        "mode": "passthrough",  # "passthrough" | "mpc"
        "horizon": 10,
        "q": 1.0,
        "r": 1e-4,
        "u_max": 3.3,
        "theta_bounds": [0.0, 1000.0],
    },
    "session": {
        "timeout": 120.0,
        "level_sigma": {1: 0.5, 2: 0.75, 3: 1.0, 4: 1.25, 5: 1.5},
    },
}


def _deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def load_config(path: str | None = None) -> dict:
    """Load the config document, merged over the built-in defaults.

    Resolution order: explicit path, then the SINUSIM_CONFIG env var,
    then pure defaults.
    """
    path = path or os.environ.get(CONFIG_ENV_VAR)
    if path is None:
        return copy.deepcopy(DEFAULTS)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError(f"config root must be a mapping, got {type(doc)}")
    merged = _deep_merge(DEFAULTS, doc)
    validate_config(merged)
    return merged


def validate_config(cfg: dict) -> None:
    try:
        build_tissue_params(cfg)
        build_scene(cfg)
    except (SceneError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    loop = cfg["loop"]
    if loop["tick_rate"] <= 0:
        raise ConfigError("loop.tick_rate must be > 0")
    if loop["force_scale"] <= 0 or loop["force_max"] <= 0:
        raise ConfigError("loop.force_scale and loop.force_max must be > 0")
    ctl = cfg["control"]
    if ctl["horizon"] < 1 or ctl["q"] <= 0 or ctl["r"] <= 0 or ctl["u_max"] <= 0:
        raise ConfigError("control weights/horizon/u_max out of range")
    sigmas = cfg["session"]["level_sigma"]
    levels = sorted(int(k) for k in sigmas)
    if levels != [1, 2, 3, 4, 5]:
        raise ConfigError("session.level_sigma must map levels 1..5")
    vals = [float(sigmas[k]) for k in sorted(sigmas, key=int)]
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ConfigError("session.level_sigma must be strictly increasing")


def build_tissue_params(cfg: dict, sigma: float = 1.0) -> TissueParams:
    t = cfg["tissue"]
    return TissueParams(
        fs_coeffs=tuple(float(c) for c in t["fs_coeffs"]),
        ff_coeffs=tuple(float(c) for c in t["ff_coeffs"]),
        xf_coeffs=tuple(float(c) for c in t["xf_coeffs"]),
        a_coeffs=tuple(float(c) for c in t["a_coeffs"]),
        tau_s=float(t["tau_s"]),
        sigma=float(sigma),
    )


def build_scene(cfg: dict) -> SceneConfig:
    return load_scene(cfg["scene"])


def sigma_for_level(cfg: dict, level: int) -> float:
    sigmas = cfg["session"]["level_sigma"]
    if level in sigmas:
        return float(sigmas[level])
    return float(sigmas[str(level)])


def canonical_json(cfg: dict) -> str:
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"))


def config_hash(cfg: dict) -> str:
    """Stable digest of the merged config, stored in log headers."""
    return hashlib.sha256(canonical_json(cfg).encode("utf-8")).hexdigest()
