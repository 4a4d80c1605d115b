"""Strict TOML run configuration.

Layout::

    model = "clm"            # clm | degregorio | hl | cky | euler2d | boussinesq | sqg_patch
    t_end = 1.0
    seed = 0
    [grid]    n | nr, ntheta | nx, ny | h_max, h_floor
    [time]    dt, dt_max, cfl
    [params]  L, amplitude, tracker_levels, eps_s, delta, height, alpha, eps, delta_alpha
    [output]  dir, csv, snapshot_every
    [verify]  hl_samples, positivity_profiles, positivity_levels, bound_points, alpha_grid

Only the keys used by the chosen model are accepted; every missing key takes
the documented default (``defaults_for``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import tomli
import tomli_w

MODELS = ("clm", "degregorio", "hl", "cky", "euler2d", "boussinesq", "sqg_patch")
PERIODIC = ("clm", "degregorio", "hl")


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending key path."""


def _pow2(n):
    return n > 0 and n & (n - 1) == 0


# key -> (kind, check, message); kind "int" | "float" | "str"
_CHECKS = {
    "t_end": ("float", lambda v: v > 0, "must be positive"),
    "seed": ("int", lambda v: v >= 0, "must be a nonnegative integer"),
    "grid.n": ("int", lambda v: v >= 64, "must be >= 64"),
    "grid.nr": ("int", lambda v: v >= 32, "must be >= 32"),
    "grid.ntheta": ("int", lambda v: v >= 8 and _pow2(v), "must be a power of two >= 8"),
    "grid.nx": ("int", lambda v: v >= 8 and _pow2(v), "must be a power of two >= 8"),
    "grid.ny": ("int", lambda v: v >= 32, "must be >= 32"),
    "grid.h_max": ("float", lambda v: v > 0, "must be positive"),
    "grid.h_floor": ("float", lambda v: v > 0, "must be positive"),
    "time.dt": ("float", lambda v: v > 0, "must be positive"),
    "time.dt_max": ("float", lambda v: v > 0, "must be positive"),
    "time.cfl": ("float", lambda v: 0 < v <= 2, "must lie in (0, 2]"),
    "params.L": ("float", lambda v: v > 0, "must be positive"),
    "params.amplitude": ("float", lambda v: v > 0, "must be positive"),
    "params.tracker_levels": ("int", lambda v: v >= 1, "must be >= 1"),
    "params.eps_s": ("float", lambda v: 0 < v < 1, "must lie in (0, 1)"),
    "params.delta": ("float", lambda v: 0 < v <= 1, "must lie in (0, 1]"),
    "params.height": ("float", lambda v: v > 0, "must be positive"),
    "params.alpha": ("float", lambda v: 0 <= v < 0.5, "alpha out of range [0, 0.5)"),
    "params.eps": ("float", lambda v: 0 < v < 0.1, "must lie in (0, 0.1)"),
    "params.delta_alpha": ("float", lambda v: 0 < v < 1, "must lie in (0, 1)"),
    "output.dir": ("str", lambda v: bool(v), "must be a non-empty path"),
    "output.csv": ("str", lambda v: bool(v) and "/" not in v, "must be a plain file name"),
    "output.snapshot_every": ("int", lambda v: v >= 0, "must be a nonnegative integer"),
    "verify.hl_samples": ("int", lambda v: v >= 100, "must be >= 100"),
    "verify.positivity_profiles": ("int", lambda v: v >= 1, "must be >= 1"),
    "verify.positivity_levels": ("int", lambda v: v >= 1, "must be >= 1"),
    "verify.bound_points": ("int", lambda v: v >= 1, "must be >= 1"),
    "verify.alpha_grid": ("int", lambda v: v >= 2, "must be >= 2"),
}

_GRID = {
    "clm": ("n",), "degregorio": ("n",), "hl": ("n",), "cky": ("n",),
    "euler2d": ("nr", "ntheta"), "boussinesq": ("nx", "ny"), "sqg_patch": ("h_max", "h_floor"),
}
_PARAMS = {
    "clm": ("L",), "degregorio": ("L",), "hl": ("L", "amplitude", "tracker_levels"), "cky": ("amplitude",),
    "euler2d": ("eps_s", "delta"), "boussinesq": ("amplitude", "height"),
    "sqg_patch": ("alpha", "eps", "delta_alpha"),
}
_T_END = {"clm": 1.0, "degregorio": 10.0, "hl": 0.05, "cky": 1.0, "euler2d": 5.0, "boussinesq": 1.0,
          "sqg_patch": 60.0}


def defaults_for(model: str) -> dict:
    """The fully populated default configuration of ``model`` (as a TOML-shaped dict)."""
    if model not in MODELS:
        raise ConfigError(f"model: unknown model {model!r}; expected one of {', '.join(MODELS)}")
    grid_all = {"n": 4096 if model == "hl" else 256, "nr": 128, "ntheta": 256, "nx": 256, "ny": 128,
                "h_max": 0.05, "h_floor": 1e-3}
    one_d = model in PERIODIC or model == "cky"
    time = {"dt": 1e-3, "dt_max": 1e-2 if model != "euler2d" and model != "boussinesq" else 0.05,
            "cfl": 1.0 if model in ("euler2d", "boussinesq") else 0.5}
    if not one_d:
        del time["dt"]
    params_all = {"L": 2 * math.pi, "amplitude": 1e4 if model == "hl" else 1.0, "tracker_levels": 9,
                  "eps_s": 0.05, "delta": 0.2, "height": 1.0, "alpha": 0.04, "eps": 0.05, "delta_alpha": 0.05}
    return {
        "model": model,
        "t_end": _T_END[model],
        "seed": 0,
        "grid": {k: grid_all[k] for k in _GRID[model]},
        "time": time,
        "params": {k: params_all[k] for k in _PARAMS[model]},
        "output": {"dir": ".", "csv": f"{model}.csv", "snapshot_every": 0},
        "verify": {"hl_samples": 10_000, "positivity_profiles": 20, "positivity_levels": 10,
                   "bound_points": 50, "alpha_grid": 50},
    }


@dataclass
class RunSpec:
    model: str
    t_end: float
    seed: int = 0
    grid: dict = field(default_factory=dict)
    time: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    verify: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"model": self.model, "t_end": self.t_end, "seed": self.seed, "grid": dict(self.grid),
                "time": dict(self.time), "params": dict(self.params), "output": dict(self.output),
                "verify": dict(self.verify)}


def _coerce(path, value):
    kind, ok, msg = _CHECKS[path]
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
    elif kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        value = float(value)
        if not math.isfinite(value):
            raise ConfigError(f"{path}: must be finite")
    elif not isinstance(value, str):
        raise ConfigError(f"{path}: expected a string, got {value!r}")
    if not ok(value):
        raise ConfigError(f"{path}: {msg} (got {value!r})")
    return value


def spec_from_dict(data: dict, default_model: str | None = None) -> RunSpec:
    """Validate a TOML-shaped dict; ``default_model`` stands in for a missing ``model`` key."""
    if "model" not in data and default_model is None:
        raise ConfigError("model: missing required key")
    model = data.get("model", default_model)
    if not isinstance(model, str):
        raise ConfigError(f"model: expected a string, got {model!r}")
    out = defaults_for(model)
    for key, value in data.items():
        if key == "model":
            continue
        if key not in out:
            raise ConfigError(f"{key}: unknown key")
        if isinstance(out[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{key}: expected a table")
            for sub, v in value.items():
                path = f"{key}.{sub}"
                if sub not in out[key]:
                    hint = f" (not used by model {model!r})" if path in _CHECKS else ""
                    raise ConfigError(f"{path}: unknown key{hint}")
                out[key][sub] = _coerce(path, v)
        else:
            out[key] = _coerce(key, value)
    g = out["grid"]
    if model in PERIODIC and not _pow2(g["n"]):
        raise ConfigError(f"grid.n: must be a power of two for model {model!r} (got {g['n']})")
    if model == "sqg_patch" and g["h_floor"] > g["h_max"]:
        raise ConfigError("grid.h_floor: must not exceed grid.h_max")
    if out["time"]["dt_max"] < out["time"].get("dt", 0.0):
        raise ConfigError("time.dt: must not exceed time.dt_max")
    return RunSpec(**out)


def parse_config(text: str, default_model: str | None = None) -> RunSpec:
    """Parse and validate TOML text; unknown keys, bad values and missing keys name their key path."""
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as e:
        raise ConfigError(f"<toml>: {e}") from None
    return spec_from_dict(data, default_model)


def serialize(spec: RunSpec) -> str:
    return tomli_w.dumps(spec.to_dict())
