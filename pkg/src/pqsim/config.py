"""Experiment configuration: strict TOML schema, presets and model construction."""

from __future__ import annotations

import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10 only
    import tomli as tomllib

from . import models

PRESET_NAMES = ("dqpt", "qw16", "hubbard-spin-cut", "powerlaw-clusters", "multicluster")

MODEL_KINDS = {
    "tfim": models.TFIM,
    "powerlaw": models.PowerLawIsing,
    "xx": models.XXChain,
    "hubbard": models.FermiHubbard,
    "multicluster": models.MultiCluster,
}

TOP_KEYS = {"model", "cut", "initial", "observables", "time", "sampler", "evolver", "oracle", "output"}
REQUIRED_TOP = {"model", "cut", "observables", "time", "sampler"}
INITIAL_KEYS = {"preset", "sites"}
TIME_KEYS = {"T", "grid", "points"}
SAMPLER_KEYS = {"n_samples", "seed", "mode", "max_jumps", "dyson_order"}
EVOLVER_KEYS = {"tolerance"}
OUTPUT_KEYS = {"path", "format"}


class ConfigError(ValueError):
    """Schema violation, tagged with the offending field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class ExperimentConfig:
    model: models.ModelSpec
    cut: tuple[int, ...]
    initial: str
    flip_sites: tuple[int, ...]
    observables: tuple[str, ...]
    T: float
    grid: tuple[float, ...]
    n_samples: int
    seed: int
    mode: str
    max_jumps: int | None
    dyson_order: int | None
    tolerance: float
    oracle: bool
    output_path: str
    output_format: str
    raw: dict

    @property
    def trotter_steps(self) -> int | None:
        return getattr(self.model, "trotter_steps", None)


def _unknown(table: dict, allowed: set, where: str) -> None:
    extra = sorted(set(table) - allowed)
    if extra:
        raise ConfigError(f"{where}.{extra[0]}" if where else extra[0], "unknown key")


def _table(raw: dict, key: str, required: bool = False) -> dict:
    val = raw.get(key, {})
    if key not in raw and required:
        raise ConfigError(key, "missing")
    if not isinstance(val, dict):
        raise ConfigError(key, "expected a table")
    return val


def _int(val, field: str, minimum: int | None = None) -> int:
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(field, f"expected an integer, got {val!r}")
    if minimum is not None and val < minimum:
        raise ConfigError(field, f"must be at least {minimum}")
    return val


def _num(val, field: str) -> float:
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(field, f"expected a number, got {val!r}")
    if not math.isfinite(val):
        raise ConfigError(field, "must be finite")
    return float(val)


def _model(raw: dict) -> models.ModelSpec:
    table = dict(_table(raw, "model", required=True))
    kind = table.pop("kind", None)
    if kind not in MODEL_KINDS:
        raise ConfigError("model.kind", f"expected one of {sorted(MODEL_KINDS)}, got {kind!r}")
    cls = MODEL_KINDS[kind]
    allowed = {f.name for f in dataclasses.fields(cls)}
    if cls is models.MultiCluster:
        allowed.add("boundary_seed")
    _unknown(table, allowed, "model")
    kwargs: dict[str, Any] = {}
    for key, val in table.items():
        if isinstance(val, list):
            kwargs[key] = tuple(_num(v, f"model.{key}") if key not in ("boundaries",) else _int(v, f"model.{key}") for v in val)
        else:
            kwargs[key] = val
    if cls is models.MultiCluster:
        seed = kwargs.pop("boundary_seed", None)
        if "boundary_couplings" not in kwargs:
            if seed is None:
                raise ConfigError("model.boundary_couplings", "give the couplings or a boundary_seed")
            clusters = _int(kwargs.get("clusters"), "model.clusters", 2)
            J = _num(kwargs.get("J", 1.0), "model.J")
            kwargs["boundary_couplings"] = models.MultiCluster.random_couplings(clusters, J, _int(seed, "model.boundary_seed", 0))
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError("model", str(exc)) from None


def parse_config(raw: dict, name: str = "experiment") -> ExperimentConfig:
    """Validate a decoded TOML document; every error names its field."""
    if not isinstance(raw, dict):
        raise ConfigError("config", "expected a table")
    _unknown(raw, TOP_KEYS, "")
    for key in sorted(REQUIRED_TOP):
        if key not in raw:
            raise ConfigError(key, "missing")
    spec = _model(raw)

    cut = raw["cut"]
    if not isinstance(cut, list) or not cut:
        raise ConfigError("cut", "expected a non-empty list of subsystem sizes")
    cut = tuple(_int(c, "cut", 1) for c in cut)
    if sum(cut) != spec.n_qubits:
        raise ConfigError("cut", f"sizes sum to {sum(cut)} but the model has {spec.n_qubits} qubits")

    init = raw.get("initial", {"preset": "all-zero"})
    if isinstance(init, str):
        init = {"preset": init}
    if not isinstance(init, dict):
        raise ConfigError("initial", "expected a preset name or a table")
    _unknown(init, INITIAL_KEYS, "initial")
    preset = init.get("preset", "all-zero")
    if preset not in models.PRESETS:
        raise ConfigError("initial.preset", f"expected one of {models.PRESETS}")
    sites = init.get("sites", [])
    if not isinstance(sites, list):
        raise ConfigError("initial.sites", "expected a list of 1-based sites")
    sites = tuple(_int(s, "initial.sites", 1) for s in sites)
    if preset != "flip-sites" and sites:
        raise ConfigError("initial.sites", "only used with the flip-sites preset")
    if any(s > spec.n_qubits for s in sites):
        raise ConfigError("initial.sites", f"site outside 1..{spec.n_qubits}")

    obs = raw["observables"]
    if not isinstance(obs, list) or not obs or not all(isinstance(o, str) for o in obs):
        raise ConfigError("observables", "expected a non-empty list of names")

    time = _table(raw, "time", required=True)
    _unknown(time, TIME_KEYS, "time")
    if "T" not in time:
        raise ConfigError("time.T", "missing")
    T = _num(time["T"], "time.T")
    if T < 0:
        raise ConfigError("time.T", "must be non-negative")
    if ("grid" in time) == ("points" in time):
        raise ConfigError("time.grid", "give exactly one of grid (list) or points (count)")
    if "grid" in time:
        if not isinstance(time["grid"], list) or not time["grid"]:
            raise ConfigError("time.grid", "expected a non-empty list")
        grid = tuple(_num(t, "time.grid") for t in time["grid"])
    else:
        k = _int(time["points"], "time.points", 1)
        grid = tuple(T * (i + 1) / k for i in range(k))
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("time.grid", "times must be strictly ascending")
    if grid[0] < 0 or grid[-1] > T:
        raise ConfigError("time.grid", f"times must lie within [0, {T}]")
    steps = getattr(spec, "trotter_steps", None)
    if steps is not None:
        if T <= 0:
            raise ConfigError("time.T", "trotter mode needs a positive horizon")
        dt = T / steps
        if any(abs(round(t / dt) * dt - t) > 1e-9 * max(1.0, dt) for t in grid):
            raise ConfigError("time.grid", f"trotter mode: times must be multiples of T/trotter_steps = {dt:g}")

    sampler = _table(raw, "sampler", required=True)
    _unknown(sampler, SAMPLER_KEYS, "sampler")
    if "n_samples" not in sampler:
        raise ConfigError("sampler.n_samples", "missing")
    n_samples = _int(sampler["n_samples"], "sampler.n_samples", 2)
    seed = _int(sampler.get("seed", 0), "sampler.seed", 0)
    if seed >= 2**64:
        raise ConfigError("sampler.seed", "must be below 2^64")
    mode = sampler.get("mode", "stochastic")
    if mode not in ("stochastic", "dyson"):
        raise ConfigError("sampler.mode", "expected 'stochastic' or 'dyson'")
    max_jumps = sampler.get("max_jumps")
    dyson_order = sampler.get("dyson_order")
    if max_jumps is not None:
        max_jumps = _int(max_jumps, "sampler.max_jumps", 0)
        if mode != "stochastic":
            raise ConfigError("sampler.max_jumps", "only valid in stochastic mode")
    if mode == "dyson":
        if dyson_order is None:
            raise ConfigError("sampler.dyson_order", "required in dyson mode")
        dyson_order = _int(dyson_order, "sampler.dyson_order", 0)
    elif dyson_order is not None:
        raise ConfigError("sampler.dyson_order", "only valid in dyson mode")

    evolver = _table(raw, "evolver")
    _unknown(evolver, EVOLVER_KEYS, "evolver")
    tol = _num(evolver.get("tolerance", 1e-10), "evolver.tolerance")
    if tol <= 0:
        raise ConfigError("evolver.tolerance", "must be positive")

    oracle = raw.get("oracle", False)
    if not isinstance(oracle, bool):
        raise ConfigError("oracle", "expected true or false")

    output = _table(raw, "output")
    _unknown(output, OUTPUT_KEYS, "output")
    path = output.get("path", name)
    if not isinstance(path, str) or not path:
        raise ConfigError("output.path", "expected a file stem")
    fmt = output.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError("output.format", "expected 'csv' or 'json'")

    return ExperimentConfig(
        spec, cut, preset, sites, tuple(obs), T, grid, n_samples, seed, mode, max_jumps, dyson_order,
        tol, oracle, path, fmt, raw,
    )


def preset_text(name: str) -> str:
    if name not in PRESET_NAMES:
        raise ConfigError("config", f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
    return resources.files("pqsim").joinpath("presets", f"{name}.toml").read_text()


def load_config(source: str | Path) -> ExperimentConfig:
    """Load a TOML file, a built-in preset name, or a run manifest (``.json``)."""
    source = str(source)
    path = Path(source)
    if path.suffix == ".json" and path.exists():
        try:
            manifest = json.loads(path.read_text())
            raw = manifest["config"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ConfigError("config", f"not a run manifest: {exc}") from None
        return parse_config(raw, manifest.get("name", path.stem))
    if not path.exists() and source in PRESET_NAMES:
        return parse_config(tomllib.loads(preset_text(source)), source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {source}: {exc.strerror}") from None
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"invalid TOML: {exc}") from None
    return parse_config(raw, path.stem)


def build_experiment(cfg: ExperimentConfig):
    """``(system, initial states, observables)`` for a validated config."""
    try:
        system = models.partition(cfg.model, cfg.cut)
    except ValueError as exc:
        raise ConfigError("cut", str(exc)) from None
    try:
        initial = models.build_initial(cfg.model, system, cfg.initial, cfg.flip_sites)
    except ValueError as exc:
        raise ConfigError("initial", str(exc)) from None
    try:
        observables = models.build_observables(cfg.model, cfg.observables, system, cfg.initial)
    except ValueError as exc:
        raise ConfigError("observables", str(exc)) from None
    return system, initial, observables
