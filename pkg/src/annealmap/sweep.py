"""Sweep orchestration: run all (initial x target x h) state-mapping
tasks with per-task artifacts, safe resume, and deterministic merged CSVs.

Layout of a sweep output directory:

    problem.json        resolved problem instance
    grid.json           h grid, targets, initial states, run mode, settings
    tasks/g<G>_h<J>.npy per-task matrix P[final, initial] (atomic writes)
    ra_only.npy         reverse-anneal-only matrix (no h-gain encoding)
    curves.csv          gs_index,initial_state,h,p_gs (merged, sorted)
    forward.csv         state_index,proportion (forward mode)
    forward_gs.csv      gs_index,proportion among ground-state hits
    manifest.json       config snapshot, seed rule, file digests

A task artifact is complete iff its final file exists (writes go through a
temp file + atomic rename), so interrupted sweeps resume by skipping
existing task files.
"""
from __future__ import annotations

import json
import os
import warnings
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from .analysis import HGrid, ResponseCurve
from .config import ExperimentConfig
from .ising import IsingProblem, index_to_state, load_instance, save_instance
from .manifest import RunManifest, task_seed, write_manifest
from .schedule import AnnealSpec
from .simulator import (BackendConfig, encode_target_state, propagator,
                        sample, svmc_evolve, forward_anneal_run, RunPresets)

GRID_NAME = "grid.json"
PROBLEM_NAME = "problem.json"
TASKS_DIR = "tasks"
CURVES_NAME = "curves.csv"
RA_ONLY_NAME = "ra_only.npy"
FORWARD_NAME = "forward.csv"
FORWARD_GS_NAME = "forward_gs.csv"


def task_filename(target_gs: int, h_index: int) -> str:
    return f"g{target_gs:05d}_h{h_index:02d}.npy"


def _atomic_save_npy(path: str, array: np.ndarray) -> None:
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        np.save(fh, array)
    os.replace(tmp, path)


def _atomic_write_text(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _reverse_spec(cfg: ExperimentConfig, h_strength: Optional[float],
                  initial_state: Tuple[int, ...]) -> AnnealSpec:
    return AnnealSpec(
        anneal_schedule=cfg.reverse_schedule(),
        annealing_time=cfg.annealing_time,
        hgain_schedule=(None if h_strength is None
                        else cfg.hgain_schedule(h_strength)),
        initial_state=initial_state,
        num_reads=cfg.num_reads,
        time_scale=cfg.time_scale)


def _sample_columns(matrix: np.ndarray, cfg: ExperimentConfig,
                    target_gs: int, h_index: int) -> np.ndarray:
    """Replace exact probability columns with multinomial frequencies."""
    dim = matrix.shape[0]
    out = np.zeros_like(matrix)
    for initial in cfg.initial_states:
        seed = task_seed(cfg.master_seed, target_gs, h_index, initial)
        sset = sample(matrix[:, initial], cfg.num_reads, seed=seed)
        for idx, count in sset.counts.items():
            out[idx, initial] = count / cfg.num_reads
    return out


def _run_probability_matrix(cfg: ExperimentConfig, problem: IsingProblem,
                            h_strength: Optional[float], target_gs: int,
                            h_index: int) -> np.ndarray:
    """P[final, initial] over all initial basis states for one task."""
    n = cfg.problem.num_variables
    dim = 1 << n
    nominal_initial = index_to_state(target_gs, n)
    if cfg.backend.kind == "schrodinger":
        spec = _reverse_spec(cfg, h_strength, nominal_initial)
        unitary = propagator(problem, cfg.envelope, spec, cfg.backend)
        matrix = np.abs(unitary) ** 2
        if not cfg.exact:
            matrix = _sample_columns(matrix, cfg, target_gs, h_index)
        return matrix
    matrix = np.zeros((dim, dim))
    for initial in cfg.initial_states:
        spec = _reverse_spec(cfg, h_strength, index_to_state(initial, n))
        seed = task_seed(cfg.master_seed, target_gs, h_index, initial)
        backend = BackendConfig(
            kind="svmc", dt=cfg.backend.dt,
            convergence_tolerance=cfg.backend.convergence_tolerance,
            sweeps=cfg.backend.sweeps,
            temperature=cfg.backend.temperature, seed=seed)
        sset = svmc_evolve(problem, cfg.envelope, spec, backend)
        for idx, count in sset.counts.items():
            matrix[idx, initial] = count / sset.total_reads
    return matrix


def _run_mapping_task(args: Tuple[ExperimentConfig, str, int, int]) -> str:
    """Worker: one (target ground state, h index) task -> task file."""
    cfg, out_dir, target_gs, h_index = args
    h_strength = cfg.h_grid.values[h_index]
    encoded = encode_target_state(
        cfg.problem, index_to_state(target_gs, cfg.problem.num_variables))
    matrix = _run_probability_matrix(cfg, encoded, h_strength, target_gs,
                                     h_index)
    path = os.path.join(out_dir, TASKS_DIR,
                        task_filename(target_gs, h_index))
    _atomic_save_npy(path, matrix)
    return path


def _run_ra_only(cfg: ExperimentConfig, out_dir: str) -> str:
    """Reverse anneal with no h-gain schedule and unmodified linear terms."""
    matrix = _run_probability_matrix(cfg, cfg.problem, None,
                                     target_gs=0, h_index=len(cfg.h_grid))
    path = os.path.join(out_dir, RA_ONLY_NAME)
    _atomic_save_npy(path, matrix)
    return path


def grid_metadata(cfg: ExperimentConfig) -> Dict[str, Any]:
    return {
        "mode": cfg.mode,
        "h_values": list(cfg.h_grid.values),
        "targets": list(cfg.targets),
        "initial_states": list(cfg.initial_states),
        "exact": cfg.exact,
        "num_reads": cfg.num_reads,
        "backend_kind": cfg.backend.kind,
        "time_scale": cfg.time_scale,
        "annealing_time": cfg.annealing_time,
        "master_seed": cfg.master_seed,
        "clustering": {
            "k": cfg.clustering.k,
            "gamma": cfg.clustering.gamma,
            "seed": cfg.clustering.seed,
            "n_init": cfg.clustering.n_init,
        },
    }


def _merge_curves(cfg: ExperimentConfig, out_dir: str,
                  missing: List[str]) -> str:
    """Merge task artifacts into curves.csv, sorted for determinism."""
    lines = ["gs_index,initial_state,h,p_gs"]
    for target_gs in sorted(cfg.targets):
        per_h: List[Optional[np.ndarray]] = []
        for j in range(len(cfg.h_grid)):
            path = os.path.join(out_dir, TASKS_DIR,
                                task_filename(target_gs, j))
            per_h.append(np.load(path) if os.path.exists(path) else None)
            if per_h[-1] is None:
                missing.append(task_filename(target_gs, j))
        if any(matrix is None for matrix in per_h):
            # a short curve cannot yield chi; drop the whole target until
            # a resume fills in the missing h columns
            continue
        for initial in sorted(cfg.initial_states):
            for j, matrix in enumerate(per_h):
                h = cfg.h_grid.values[j]
                p = float(matrix[target_gs, initial])
                lines.append(f"{target_gs},{initial},{h:.17g},{p:.17g}")
    path = os.path.join(out_dir, CURVES_NAME)
    _atomic_write_text(path, "\n".join(lines) + "\n")
    return path


def _write_forward(cfg: ExperimentConfig, out_dir: str) -> List[str]:
    from .analysis import gs_distribution
    from .ising import enumerate_ground_states

    presets = RunPresets(envelope=cfg.envelope,
                         backend=BackendConfig(
                             kind=cfg.backend.kind, dt=cfg.backend.dt,
                             convergence_tolerance=(
                                 cfg.backend.convergence_tolerance),
                             sweeps=cfg.backend.sweeps,
                             temperature=cfg.backend.temperature,
                             seed=task_seed(cfg.master_seed, 0, 0, 0)),
                         time_scale=cfg.time_scale,
                         num_reads=cfg.num_reads,
                         exact_counts=cfg.exact)
    sset = forward_anneal_run(cfg.problem, presets)
    dim = 1 << cfg.problem.num_variables
    lines = ["state_index,proportion"]
    for i in range(dim):
        lines.append(f"{i},{sset.proportion(i):.17g}")
    forward_path = os.path.join(out_dir, FORWARD_NAME)
    _atomic_write_text(forward_path, "\n".join(lines) + "\n")

    gs_set = enumerate_ground_states(cfg.problem)
    shares = gs_distribution(sset, gs_set)
    lines = ["gs_index,proportion"]
    for gs_index in sorted(shares):
        lines.append(f"{gs_index},{shares[gs_index]:.17g}")
    gs_path = os.path.join(out_dir, FORWARD_GS_NAME)
    _atomic_write_text(gs_path, "\n".join(lines) + "\n")
    return [FORWARD_NAME, FORWARD_GS_NAME]


def run_sweep(cfg: ExperimentConfig, out_dir: str, jobs: int = 1,
              log: Optional[Callable[[str], None]] = None) -> RunManifest:
    """Execute the configured run; skips task files that already exist.

    Modes: "state-mapping" runs every (target, h) task plus one RA-only
    pass; "ra-only" runs just the RA-only pass; "forward" runs a single
    forward anneal in sampling or exact mode.
    """
    def say(msg: str) -> None:
        if log is not None:
            log(msg)

    os.makedirs(os.path.join(out_dir, TASKS_DIR), exist_ok=True)
    save_instance(cfg.problem, os.path.join(out_dir, PROBLEM_NAME))
    _atomic_write_text(os.path.join(out_dir, GRID_NAME),
                       json.dumps(grid_metadata(cfg), indent=2,
                                  sort_keys=True) + "\n")

    produced = [PROBLEM_NAME, GRID_NAME]
    failures: Dict[str, str] = {}

    if cfg.mode == "forward":
        produced += _write_forward(cfg, out_dir)
    else:
        if cfg.mode == "state-mapping":
            pending = []
            total = len(cfg.targets) * len(cfg.h_grid)
            for target_gs in cfg.targets:
                for j in range(len(cfg.h_grid)):
                    rel = os.path.join(TASKS_DIR,
                                       task_filename(target_gs, j))
                    produced.append(rel)
                    if not os.path.exists(os.path.join(out_dir, rel)):
                        pending.append((cfg, out_dir, target_gs, j))
            say(f"{len(pending)} task(s) to run, "
                f"{total - len(pending)} already complete")
            if jobs > 1 and len(pending) > 1:
                with ProcessPoolExecutor(max_workers=jobs) as pool:
                    futures = {pool.submit(_run_mapping_task, args): args
                               for args in pending}
                    for future in as_completed(futures):
                        args = futures[future]
                        name = task_filename(args[2], args[3])
                        try:
                            future.result()
                            say(f"done {name}")
                        except Exception as exc:  # record and continue
                            failures[name] = f"{type(exc).__name__}: {exc}"
                            say(f"FAILED {name}: {exc}")
            else:
                for args in pending:
                    name = task_filename(args[2], args[3])
                    try:
                        _run_mapping_task(args)
                        say(f"done {name}")
                    except Exception as exc:  # record and continue
                        failures[name] = f"{type(exc).__name__}: {exc}"
                        say(f"FAILED {name}: {exc}")
        # both state-mapping and ra-only produce the RA-only artifact
        if not os.path.exists(os.path.join(out_dir, RA_ONLY_NAME)):
            say("running reverse-anneal-only pass")
            _run_ra_only(cfg, out_dir)
        produced.append(RA_ONLY_NAME)
        if cfg.mode == "state-mapping":
            missing: List[str] = []
            produced.append(CURVES_NAME)
            _merge_curves(cfg, out_dir, missing)
            if missing:
                warnings.warn(f"curves.csv is partial; missing task "
                              f"artifacts: {missing}")

    manifest = RunManifest(config=dict(cfg.raw),
                           master_seed=cfg.master_seed)
    if failures:
        manifest.notes["failed_tasks"] = json.dumps(failures, sort_keys=True)
    manifest.record_files(
        out_dir, [rel for rel in produced
                  if os.path.exists(os.path.join(out_dir, rel))])
    write_manifest(manifest, out_dir)
    say(f"manifest written with {len(manifest.files)} file digest(s)")
    return manifest


def load_sweep_problem(out_dir: str) -> IsingProblem:
    return load_instance(os.path.join(out_dir, PROBLEM_NAME))


def load_grid_metadata(out_dir: str) -> Dict[str, Any]:
    path = os.path.join(out_dir, GRID_NAME)
    if not os.path.exists(path):
        raise FileNotFoundError(
            f"{path} not found; run the sweep command first")
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def load_curves(out_dir: str) -> Tuple[HGrid, List[ResponseCurve]]:
    """Rebuild response curves from curves.csv."""
    meta = load_grid_metadata(out_dir)
    grid = HGrid(tuple(meta["h_values"]))
    path = os.path.join(out_dir, CURVES_NAME)
    if not os.path.exists(path):
        raise FileNotFoundError(
            f"{path} not found; run the sweep command first")
    series: Dict[Tuple[int, int], List[float]] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "gs_index,initial_state,h,p_gs":
            raise ValueError(f"{path}: unexpected header {header!r}")
        for line in fh:
            gs_s, init_s, _h, p_s = line.rstrip("\n").split(",")
            series.setdefault((int(gs_s), int(init_s)),
                              []).append(float(p_s))
    curves = []
    for (gs_index, initial), values in sorted(series.items()):
        if len(values) != len(grid):
            raise ValueError(
                f"curve ({gs_index}, {initial}) has {len(values)} points, "
                f"expected {len(grid)}")
        curves.append(ResponseCurve(initial, gs_index, tuple(values)))
    return grid, curves


def load_task_matrices(out_dir: str, target_gs: int,
                       num_h: int) -> List[np.ndarray]:
    matrices = []
    for j in range(num_h):
        path = os.path.join(out_dir, TASKS_DIR, task_filename(target_gs, j))
        if not os.path.exists(path):
            raise FileNotFoundError(
                f"{path} not found; run the sweep command first")
        matrices.append(np.load(path))
    return matrices


def load_ra_only(out_dir: str) -> Optional[np.ndarray]:
    path = os.path.join(out_dir, RA_ONLY_NAME)
    return np.load(path) if os.path.exists(path) else None
