"""Experiment configuration: a single JSON file resolving to problem,
backend, envelope, schedules, grid, targets and run mode.

Schema (all paths relative to the config file's directory):

{
  "problem": {"bundled": "n6"} | {"file": "inst.json"}
             | {"generator": {"edges": [[0,1], ...], "seed": 7}},
  "mode": "state-mapping" | "ra-only" | "forward",
  "backend": {"kind": "schrodinger", "dt": 1e-4, "seed": 0,
              "sweeps": 1000, "temperature": 0.05},
  "envelope": {"a_max_ghz": 6.0, "b_max_ghz": 12.0} | {"file": "env.csv"},
  "time_scale": 0.01,
  "annealing_time": null,        # defaults to 100 * time_scale (us)
  "reverse_anchors": null,       # [[t, s], ...] on the unscaled 100 us clock
  "hgain_anchors": null,         # [[t, g-or-null], ...]; null = plateau h
  "h_grid": {"include_zero": true} | {"values": [0.0, 0.1]},
  "targets": "all-ground-states" | [19, 23],
  "initial_states": "all" | [0, 1],
  "exact": true,
  "num_reads": 1000,
  "clustering": {"k": 4, "gamma": 1.0, "seed": 0, "n_init": 10},
  "master_seed": 0,
  "output_dir": null             # usually given via --out instead
}
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .analysis import HGrid
from .ising import (IsingProblem, enumerate_ground_states, load_instance,
                    random_spin_glass)
from .instances import bundled_instance
from .schedule import (AnnealEnvelope, HGAIN_ANCHORS_100US,
                       PiecewiseLinearSchedule, REVERSE_ANCHORS_100US,
                       default_envelope, load_envelope_csv, scale_anchors)
from .simulator import BackendConfig

MODES = ("state-mapping", "ra-only", "forward")


class ConfigError(ValueError):
    """Invalid experiment configuration; message names the field path."""


@dataclass(frozen=True)
class ClusteringParams:
    k: int = 4
    gamma: float = 1.0
    seed: int = 0
    n_init: int = 10


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment description."""

    problem: IsingProblem
    mode: str
    backend: BackendConfig
    envelope: AnnealEnvelope
    time_scale: float
    annealing_time: float
    reverse_anchors: Tuple[Tuple[float, float], ...]
    hgain_anchors: Tuple[Tuple[float, Optional[float]], ...]
    h_grid: HGrid
    targets: Tuple[int, ...]
    initial_states: Tuple[int, ...]
    exact: bool
    num_reads: int
    clustering: ClusteringParams
    master_seed: int
    output_dir: Optional[str]
    raw: Dict[str, Any] = field(compare=False, default_factory=dict)

    def reverse_schedule(self) -> PiecewiseLinearSchedule:
        return scale_anchors(self.reverse_anchors, self.time_scale)

    def hgain_schedule(self, h_strength: float) -> PiecewiseLinearSchedule:
        return scale_anchors(self.hgain_anchors, self.time_scale,
                             plateau=h_strength)


def _expect(doc: Dict[str, Any], key: str, kinds, path: str,
            default=..., required: bool = False):
    if key not in doc:
        if required or default is ...:
            raise ConfigError(f"{path}.{key}: missing required field")
        return default
    value = doc[key]
    if kinds is not None and not isinstance(value, kinds):
        names = kinds.__name__ if isinstance(kinds, type) else \
            "/".join(k.__name__ for k in kinds)
        raise ConfigError(
            f"{path}.{key}: expected {names}, got {type(value).__name__}")
    return value


def _reject_unknown(doc: Dict[str, Any], known: Sequence[str],
                    path: str) -> None:
    unknown = sorted(set(doc) - set(known))
    if unknown:
        raise ConfigError(f"{path}: unknown field(s) {unknown}")


def _resolve_path(base_dir: str, value: str) -> str:
    if os.path.isabs(value):
        return value
    return os.path.normpath(os.path.join(base_dir, value))


def _load_problem(doc: Dict[str, Any], base_dir: str) -> IsingProblem:
    _reject_unknown(doc, ("bundled", "file", "generator"), "problem")
    given = [k for k in ("bundled", "file", "generator") if k in doc]
    if len(given) != 1:
        raise ConfigError(
            "problem: give exactly one of 'bundled', 'file', 'generator'")
    if "bundled" in doc:
        name = _expect(doc, "bundled", str, "problem")
        try:
            return bundled_instance(name)
        except ValueError as exc:
            raise ConfigError(f"problem.bundled: {exc}") from exc
    if "file" in doc:
        path = _resolve_path(base_dir, _expect(doc, "file", str, "problem"))
        try:
            return load_instance(path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"problem.file: {exc}") from exc
    gen = _expect(doc, "generator", dict, "problem")
    _reject_unknown(gen, ("edges", "seed", "name"), "problem.generator")
    edges = _expect(gen, "edges", list, "problem.generator", required=True)
    seed = _expect(gen, "seed", int, "problem.generator", required=True)
    name = _expect(gen, "name", str, "problem.generator",
                   default="generated")
    try:
        pairs = [(int(e[0]), int(e[1])) for e in edges]
        return random_spin_glass(pairs, seed=seed, name=name)
    except (TypeError, IndexError, ValueError) as exc:
        raise ConfigError(f"problem.generator.edges: {exc}") from exc


def _load_backend(doc: Dict[str, Any]) -> BackendConfig:
    _reject_unknown(doc, ("kind", "dt", "convergence_tolerance", "sweeps",
                          "temperature", "seed"), "backend")
    kwargs = {}
    for key, kinds in (("kind", str), ("dt", (int, float)),
                       ("convergence_tolerance", (int, float)),
                       ("sweeps", int), ("temperature", (int, float)),
                       ("seed", int)):
        if key in doc:
            kwargs[key] = _expect(doc, key, kinds, "backend")
    try:
        return BackendConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"backend: {exc}") from exc


def _load_envelope(doc: Dict[str, Any], base_dir: str) -> AnnealEnvelope:
    _reject_unknown(doc, ("a_max_ghz", "b_max_ghz", "file"), "envelope")
    if "file" in doc:
        if "a_max_ghz" in doc or "b_max_ghz" in doc:
            raise ConfigError(
                "envelope: 'file' excludes 'a_max_ghz'/'b_max_ghz'")
        path = _resolve_path(base_dir, _expect(doc, "file", str, "envelope"))
        try:
            return load_envelope_csv(path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"envelope.file: {exc}") from exc
    a_max = float(_expect(doc, "a_max_ghz", (int, float), "envelope",
                          default=6.0))
    b_max = float(_expect(doc, "b_max_ghz", (int, float), "envelope",
                          default=12.0))
    return default_envelope(a_max=a_max, b_max=b_max)


def _load_anchors(value: Any, path: str, allow_null_values: bool) \
        -> Tuple[Tuple[float, Optional[float]], ...]:
    if not isinstance(value, list) or len(value) < 2:
        raise ConfigError(f"{path}: expected a list of >= 2 [t, value] pairs")
    anchors: List[Tuple[float, Optional[float]]] = []
    for i, item in enumerate(value):
        if not isinstance(item, list) or len(item) != 2:
            raise ConfigError(f"{path}[{i}]: expected [t, value]")
        t, v = item
        if not isinstance(t, (int, float)):
            raise ConfigError(f"{path}[{i}]: time must be a number")
        if v is None and not allow_null_values:
            raise ConfigError(f"{path}[{i}]: value must be a number")
        if v is not None and not isinstance(v, (int, float)):
            raise ConfigError(f"{path}[{i}]: value must be a number or null")
        anchors.append((float(t), None if v is None else float(v)))
    return tuple(anchors)


def _load_h_grid(doc: Dict[str, Any]) -> HGrid:
    _reject_unknown(doc, ("include_zero", "values"), "h_grid")
    if "values" in doc:
        values = _expect(doc, "values", list, "h_grid")
        try:
            return HGrid(tuple(float(v) for v in values))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"h_grid.values: {exc}") from exc
    include_zero = _expect(doc, "include_zero", bool, "h_grid", default=True)
    return HGrid.default(include_zero=include_zero)


def _load_states(value: Any, path: str, num_variables: int,
                 keyword: str) -> Tuple[int, ...]:
    dim = 1 << num_variables
    if value == keyword:
        return tuple(range(dim))
    if not isinstance(value, list) or not value:
        raise ConfigError(
            f"{path}: expected \"{keyword}\" or a non-empty list of "
            f"state indices")
    states = []
    for i, item in enumerate(value):
        if not isinstance(item, int) or not 0 <= item < dim:
            raise ConfigError(
                f"{path}[{i}]: state index must be an integer in "
                f"[0, {dim})")
        states.append(item)
    if len(set(states)) != len(states):
        raise ConfigError(f"{path}: duplicate state indices")
    return tuple(states)


def config_from_dict(doc: Dict[str, Any], base_dir: str = ".") \
        -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be an object")
    _reject_unknown(doc, ("problem", "mode", "backend", "envelope",
                          "time_scale", "annealing_time", "reverse_anchors",
                          "hgain_anchors", "h_grid", "targets",
                          "initial_states", "exact", "num_reads",
                          "clustering", "master_seed", "output_dir"),
                    "config")
    problem = _load_problem(_expect(doc, "problem", dict, "config",
                                    required=True), base_dir)
    mode = _expect(doc, "mode", str, "config", default="state-mapping")
    if mode not in MODES:
        raise ConfigError(f"config.mode: expected one of {MODES}, "
                          f"got {mode!r}")
    backend = _load_backend(_expect(doc, "backend", dict, "config",
                                    default={}))
    envelope = _load_envelope(_expect(doc, "envelope", dict, "config",
                                      default={}), base_dir)
    time_scale = float(_expect(doc, "time_scale", (int, float), "config",
                               default=0.01))
    if time_scale <= 0:
        raise ConfigError("config.time_scale: must be positive")
    annealing_time = doc.get("annealing_time")
    if annealing_time is None:
        annealing_time = 100.0 * time_scale
    elif not isinstance(annealing_time, (int, float)) or annealing_time <= 0:
        raise ConfigError("config.annealing_time: must be a positive number")
    annealing_time = float(annealing_time)

    if doc.get("reverse_anchors") is not None:
        reverse_anchors = _load_anchors(doc["reverse_anchors"],
                                        "config.reverse_anchors",
                                        allow_null_values=False)
    else:
        reverse_anchors = REVERSE_ANCHORS_100US
    if doc.get("hgain_anchors") is not None:
        hgain_anchors = _load_anchors(doc["hgain_anchors"],
                                      "config.hgain_anchors",
                                      allow_null_values=True)
    else:
        hgain_anchors = HGAIN_ANCHORS_100US
    if abs(reverse_anchors[-1][0] * time_scale - annealing_time) > 1e-12 or \
            abs(hgain_anchors[-1][0] * time_scale - annealing_time) > 1e-12:
        raise ConfigError(
            "config.annealing_time: must equal the scaled final anchor "
            "time of both schedules")

    h_grid = _load_h_grid(_expect(doc, "h_grid", dict, "config", default={}))

    gs_set = enumerate_ground_states(problem)
    targets_doc = doc.get("targets", "all-ground-states")
    if targets_doc == "all-ground-states":
        targets = tuple(sorted(gs_set.indices))
    else:
        targets = _load_states(targets_doc, "config.targets",
                               problem.num_variables, "all-ground-states")
        bad = [t for t in targets if t not in gs_set.indices]
        if bad:
            raise ConfigError(
                f"config.targets: {bad} are not ground states of the "
                f"resolved problem (ground states: "
                f"{sorted(gs_set.indices)})")
    initial_states = _load_states(doc.get("initial_states", "all"),
                                  "config.initial_states",
                                  problem.num_variables, "all")

    exact = _expect(doc, "exact", bool, "config", default=True)
    num_reads = _expect(doc, "num_reads", int, "config", default=1000)
    if num_reads < 1:
        raise ConfigError("config.num_reads: must be >= 1")

    cl_doc = _expect(doc, "clustering", dict, "config", default={})
    _reject_unknown(cl_doc, ("k", "gamma", "seed", "n_init"), "clustering")
    clustering = ClusteringParams(
        k=_expect(cl_doc, "k", int, "clustering", default=4),
        gamma=float(_expect(cl_doc, "gamma", (int, float), "clustering",
                            default=1.0)),
        seed=_expect(cl_doc, "seed", int, "clustering", default=0),
        n_init=_expect(cl_doc, "n_init", int, "clustering", default=10))
    if clustering.k < 1 or clustering.n_init < 1 or clustering.gamma <= 0:
        raise ConfigError("clustering: k >= 1, n_init >= 1, gamma > 0")

    master_seed = _expect(doc, "master_seed", int, "config", default=0)
    output_dir = doc.get("output_dir")
    if output_dir is not None:
        if not isinstance(output_dir, str):
            raise ConfigError("config.output_dir: must be a string")
        output_dir = _resolve_path(base_dir, output_dir)

    return ExperimentConfig(
        problem=problem, mode=mode, backend=backend, envelope=envelope,
        time_scale=time_scale, annealing_time=annealing_time,
        reverse_anchors=reverse_anchors, hgain_anchors=hgain_anchors,
        h_grid=h_grid, targets=targets, initial_states=initial_states,
        exact=exact, num_reads=num_reads, clustering=clustering,
        master_seed=master_seed, output_dir=output_dir, raw=dict(doc))


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: invalid JSON at line {exc.lineno}, column "
            f"{exc.colno}: {exc.msg}") from exc
    return config_from_dict(doc, base_dir=os.path.dirname(
        os.path.abspath(path)))
