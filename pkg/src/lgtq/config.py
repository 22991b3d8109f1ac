"""Run configuration: JSON files, named presets and dotted-key overrides."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .circuit_engine import FAULTY_SCOPES, TrotterConfig
from .group_core import FiniteGroup, load_group, make_q8
from .lgt_model import LatticeGeometry, ModelParams, single_plaquette
from .pulse_hardware.params import HardwareParams


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


DEFAULTS: dict = {
    "experiment": "custom",
    "group": "q8",
    "geometry": "single_plaquette",
    "model": {"lambda_E": 2.88, "lambda_B": 1.0, "a_t": 1.0, "a": 1.0},
    "trotter": {"dt": 1 / 3, "order": 2, "n_steps": 15, "t_final": 1.0,
                "dt_lambda_B_grid": [1 / 2, 1 / 4, 1 / 8, 1 / 16, 1 / 32],
                "faulty_scope": "theta"},
    "hardware": {"omega_T": 300.0, "gamma_e_ratio": 1e-6, "gamma_r_ratio": 1e-6, "V_ratio": 5.0,
                 "Omega_p_ratio": 1.0, "Omega": 2 * math.pi * 100e6, "move_dead_time": 25e-6},
    "gate_source": "ideal",
    "bank_cache": None,
    "initial_state": [0, 0, 0, 0],
    "error_scan": {"gate": "magnetic", "dt": 0.1,
                   "omega_T_grid": [50.0, 100.0, 200.0, 300.0, 500.0, 1000.0, 2000.0],
                   "gamma_ratio_grid": [0.0, 1e-7, 1e-6, 1e-5]},
    "assert_checks": True,
}

PRESETS: dict[str, dict] = {
    "fig2": {
        "experiment": "fig2",
        "gate_source": "pulse_simulated",
        "hardware": {"omega_T": 300.0, "gamma_e_ratio": 1e-6, "gamma_r_ratio": 1e-6, "V_ratio": 5.0},
    },
    "fig3": {
        "experiment": "fig3",
        "gate_source": "pulse_simulated",
        "model": {"lambda_E": 2.88, "lambda_B": 1.0},
        "trotter": {"dt": 1 / 3, "order": 2, "n_steps": 15, "t_final": 1.0,
                    "dt_lambda_B_grid": [1.0, 1 / 2, 1 / 3, 1 / 4, 1 / 5, 1 / 6, 1 / 8, 1 / 10]},
        "initial_state": [0, 0, 0, 0],
    },
    "sm_fig2": {
        "experiment": "sm_fig2",
        "model": {"lambda_E": 2.88, "lambda_B": 1.0},
        "error_scan": {"gate": "magnetic", "dt": 0.1,
                       "omega_T_grid": [50.0, 100.0, 200.0, 300.0, 500.0, 1000.0, 2000.0],
                       "gamma_ratio_grid": [0.0, 1e-7, 1e-6, 1e-5]},
    },
}


def _merge(base: dict, over: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"config key {where!r} must be an object")
            out[key] = _merge(base[key], val, where + ".")
        else:
            out[key] = copy.deepcopy(val)
    return out


def leaf_keys(tree: dict | None = None, prefix: str = "") -> list[str]:
    """Dotted names of every settable config key."""
    tree = DEFAULTS if tree is None else tree
    keys = []
    for k, v in tree.items():
        if isinstance(v, dict):
            keys.extend(leaf_keys(v, f"{prefix}{k}."))
        else:
            keys.append(f"{prefix}{k}")
    return keys


def parse_value(text: str):
    """JSON literal if it parses, else the raw string."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(raw: dict, dotted: str, value) -> dict:
    if dotted not in leaf_keys():
        raise ConfigError(f"unknown override {dotted!r}")
    parts = dotted.split(".")
    patch: dict = {}
    node = patch
    for p in parts[:-1]:
        node = node.setdefault(p, {})
    node[parts[-1]] = value
    return _merge(raw, patch)


@dataclass
class RunConfig:
    """Validated, fully resolved run configuration."""

    raw: dict
    base_dir: Path
    group: FiniteGroup
    geometry: LatticeGeometry
    model: ModelParams
    hardware: HardwareParams

    @property
    def experiment(self) -> str:
        return self.raw["experiment"]

    @property
    def trotter(self) -> dict:
        return self.raw["trotter"]

    @property
    def gate_source(self) -> str:
        return self.raw["gate_source"]

    @property
    def bank_path(self) -> Path | None:
        src = self.gate_source
        return None if src in ("ideal", "pulse_simulated") else self._resolve(src)

    def trotter_config(self, dt: float | None = None, n_steps: int | None = None) -> TrotterConfig:
        tr = self.trotter
        source = "ideal" if self.gate_source == "ideal" else "pulse_simulated"
        return TrotterConfig(dt=float(tr["dt"] if dt is None else dt), order=int(tr["order"]),
                             n_steps=int(tr["n_steps"] if n_steps is None else n_steps), gate_source=source)

    def _resolve(self, p: str) -> Path:
        path = Path(p)
        return path if path.is_absolute() else self.base_dir / path

    def to_dict(self) -> dict:
        return copy.deepcopy(self.raw)


def _check_positive(name: str, value, allow_zero: bool = False) -> None:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number, got {value!r}") from None
    if not math.isfinite(v) or v < 0 or (v == 0 and not allow_zero):
        raise ConfigError(f"{name} must be {'non-negative' if allow_zero else 'positive'}, got {value!r}")


def build_config(raw: dict, base_dir: Path | None = None) -> RunConfig:
    """Validate ``raw`` (already merged over defaults) before any computation."""
    base_dir = Path(base_dir or ".")

    def resolve(p):
        path = Path(p)
        return path if path.is_absolute() else base_dir / path

    if raw["group"] == "q8":
        group = make_q8()
    else:
        gp = resolve(raw["group"])
        if not gp.is_file():
            raise ConfigError(f"group file {gp} does not exist")
        try:
            group = load_group(gp)
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load group file {gp}: {exc}") from exc
    if raw["geometry"] == "single_plaquette":
        geom = single_plaquette()
    else:
        gp = resolve(raw["geometry"])
        if not gp.is_file():
            raise ConfigError(f"geometry file {gp} does not exist")
        try:
            geom = LatticeGeometry.from_dict(json.loads(gp.read_text()))
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"invalid geometry file {gp}: {exc}") from exc
    m = raw["model"]
    for key in ("lambda_E", "a_t", "a"):
        _check_positive(f"model.{key}", m[key])
    _check_positive("model.lambda_B", m["lambda_B"], allow_zero=True)
    try:
        model = ModelParams(lambda_E=float(m["lambda_E"]), lambda_B=float(m["lambda_B"]), a_t=float(m["a_t"]),
                            a=float(m["a"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    tr = raw["trotter"]
    _check_positive("trotter.dt", tr["dt"])
    _check_positive("trotter.t_final", tr["t_final"])
    if tr["order"] not in (1, 2):
        raise ConfigError("trotter.order must be 1 or 2")
    if not isinstance(tr["n_steps"], int) or tr["n_steps"] < 1:
        raise ConfigError("trotter.n_steps must be a positive integer")
    if not tr["dt_lambda_B_grid"]:
        raise ConfigError("trotter.dt_lambda_B_grid must not be empty")
    for x in tr["dt_lambda_B_grid"]:
        _check_positive("trotter.dt_lambda_B_grid entry", x)
    if tr["faulty_scope"] not in FAULTY_SCOPES:
        raise ConfigError(f"trotter.faulty_scope must be one of {FAULTY_SCOPES}")
    h = raw["hardware"]
    for key in ("omega_T", "V_ratio", "Omega_p_ratio", "Omega"):
        _check_positive(f"hardware.{key}", h[key])
    for key in ("gamma_e_ratio", "gamma_r_ratio", "move_dead_time"):
        _check_positive(f"hardware.{key}", h[key], allow_zero=True)
    try:
        hw = HardwareParams.from_ratios(**{k: float(v) for k, v in h.items()})
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    src = raw["gate_source"]
    if not isinstance(src, str):
        raise ConfigError("gate_source must be 'ideal', 'pulse_simulated' or a bank file path")
    if src not in ("ideal", "pulse_simulated") and not resolve(src).is_file():
        raise ConfigError(f"gate bank file {resolve(src)} does not exist")
    init = raw["initial_state"]
    if (not isinstance(init, list) or len(init) != geom.n_links
            or any(not isinstance(x, int) or not 0 <= x < group.order for x in init)):
        raise ConfigError(f"initial_state must list {geom.n_links} element indices in [0, {group.order})")
    es = raw["error_scan"]
    if es["gate"] not in ("magnetic", "electric"):
        raise ConfigError("error_scan.gate must be 'magnetic' or 'electric'")
    _check_positive("error_scan.dt", es["dt"])
    if not es["omega_T_grid"] or not es["gamma_ratio_grid"]:
        raise ConfigError("error_scan grids must not be empty")
    for x in es["omega_T_grid"]:
        _check_positive("error_scan.omega_T_grid entry", x)
    for x in es["gamma_ratio_grid"]:
        _check_positive("error_scan.gamma_ratio_grid entry", x, allow_zero=True)
    if not isinstance(raw["assert_checks"], bool):
        raise ConfigError("assert_checks must be true or false")
    return RunConfig(raw=raw, base_dir=base_dir, group=group, geometry=geom, model=model, hardware=hw)


def resolve_raw(source: str | Path | None = None, overrides: dict | None = None) -> tuple[dict, Path]:
    """Merge defaults, a preset or JSON file, and ``overrides``; no value validation yet."""
    raw = copy.deepcopy(DEFAULTS)
    base_dir = Path(".")
    if source is not None:
        src = str(source)
        if src in PRESETS and not Path(src).is_file():
            raw = _merge(raw, PRESETS[src])
        else:
            path = Path(src)
            if not path.is_file():
                raise ConfigError(f"config {src!r} is neither a file nor a preset ({sorted(PRESETS)})")
            try:
                data = json.loads(path.read_text())
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
            if not isinstance(data, dict):
                raise ConfigError("config file must hold a JSON object")
            preset = data.pop("preset", None)
            if preset is not None:
                if preset not in PRESETS:
                    raise ConfigError(f"unknown preset {preset!r}")
                raw = _merge(raw, PRESETS[preset])
            raw = _merge(raw, data)
            base_dir = path.parent
    for key, val in (overrides or {}).items():
        raw = apply_override(raw, key, val)
    return raw, base_dir


def load_config(source: str | Path | None = None, overrides: dict | None = None) -> RunConfig:
    """Resolve a preset name or JSON file, apply ``overrides`` and validate.

    Raises
    ------
    ConfigError
        On unreadable files, unknown keys or invalid values.
    """
    raw, base_dir = resolve_raw(source, overrides)
    return build_config(raw, base_dir)
