"""Command-line interface: sweep, analyze, cluster, network, tile, report.

Every failure exits nonzero with a one-line JSON error object on stderr.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import warnings
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .analysis import (ClusterAssignment, ResponseCurve,
                       SusceptibilityRecord, average_chi_per_gs,
                       clusters_to_csv, pearson, records_to_csv,
                       spectral_cluster, susceptibility_record)
from .config import ExperimentConfig, load_config
from .ising import load_instance
from .instances import BUNDLED_NAMES, bundled_instance
from .manifest import append_files
from .network import build_path, export_network, parse_network, \
    union_network
from .sweep import (load_curves, load_grid_metadata, load_ra_only,
                    load_sweep_problem, load_task_matrices, run_sweep)
from .topology import (load_defects, pegasus_graph, save_embeddings,
                       tile_disjoint_embeddings, validate_embeddings)

RECORDS_NAME = "records.csv"
AVERAGES_NAME = "averages.csv"
CORRELATIONS_NAME = "correlations.json"
CLUSTERS_NAME = "clusters.csv"
NETWORKS_DIR = "networks"
REPORT_DIR = "report"


def _require(path: str, producer: str) -> None:
    if not os.path.exists(path):
        raise FileNotFoundError(
            f"{path} not found; run the {producer} command first")


def _apply_overrides(cfg: ExperimentConfig,
                     args: argparse.Namespace) -> ExperimentConfig:
    changes: Dict[str, object] = {}
    raw = dict(cfg.raw)
    if getattr(args, "seed", None) is not None:
        changes["master_seed"] = args.seed
        raw["master_seed"] = args.seed
    if getattr(args, "backend", None) is not None:
        changes["backend"] = dataclasses.replace(cfg.backend,
                                                 kind=args.backend)
        raw.setdefault("backend", {})
        raw["backend"] = dict(raw["backend"], kind=args.backend)
    if getattr(args, "exact", False):
        changes["exact"] = True
        raw["exact"] = True
    if getattr(args, "sampled", False):
        changes["exact"] = False
        raw["exact"] = False
    if changes:
        changes["raw"] = raw
        cfg = dataclasses.replace(cfg, **changes)
    return cfg


def _resolve_out(args: argparse.Namespace,
                 cfg: Optional[ExperimentConfig] = None) -> str:
    out = getattr(args, "out", None)
    if out is None and cfg is not None:
        out = cfg.output_dir
    if out is None:
        raise ValueError("no output directory: pass --out or set "
                         "output_dir in the config")
    return out


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    out_dir = _resolve_out(args, cfg)
    log = print if args.verbose else None
    run_sweep(cfg, out_dir, jobs=args.jobs, log=log)
    print(f"sweep complete: {out_dir}")
    return 0


def _load_records_csv(path: str) -> List[SusceptibilityRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "gs_index,initial_state,chi,delta,energy,hamming":
            raise ValueError(f"{path}: unexpected header {header!r}")
        for line in fh:
            gs_s, init_s, chi_s, delta_s, energy_s, hamming_s = \
                line.rstrip("\n").split(",")
            records.append(SusceptibilityRecord(
                initial_state=int(init_s), target_gs=int(gs_s),
                chi=float(chi_s), delta=float(delta_s),
                energy=float(energy_s), hamming=float(hamming_s)))
    return records


def _safe_pearson(x: Sequence[float], y: Sequence[float]) \
        -> Optional[float]:
    try:
        return pearson(x, y)
    except ValueError:
        return None


def _correlations(records: List[SusceptibilityRecord],
                  ra_matrix: Optional[np.ndarray],
                  initial_states: Sequence[int]) -> Dict[str, Dict[str, object]]:
    by_gs: Dict[int, List[SusceptibilityRecord]] = {}
    for rec in records:
        by_gs.setdefault(rec.target_gs, []).append(rec)
    out: Dict[str, Dict[str, object]] = {"per_gs": {}, "pooled": {}}
    pooled: Dict[str, Tuple[List[float], List[float]]] = {}

    def add(bucket: Dict[str, object], name: str, xs: List[float],
            ys: List[float]) -> None:
        bucket[name] = _safe_pearson(xs, ys)
        acc = pooled.setdefault(name, ([], []))
        acc[0].extend(xs)
        acc[1].extend(ys)

    for gs_index in sorted(by_gs):
        recs = sorted(by_gs[gs_index], key=lambda r: r.initial_state)
        chis = [r.chi for r in recs]
        bucket: Dict[str, object] = {}
        add(bucket, "hamming", [r.hamming for r in recs], chis)
        add(bucket, "energy", [r.energy for r in recs], chis)
        add(bucket, "delta", [r.delta for r in recs], chis)
        if ra_matrix is not None:
            lookup = {r.initial_state: r.chi for r in recs}
            ra = [float(ra_matrix[gs_index, i]) for i in initial_states
                  if i in lookup]
            aligned = [lookup[i] for i in initial_states if i in lookup]
            add(bucket, "ra_pgs", ra, aligned)
        out["per_gs"][str(gs_index)] = bucket
    for name, (xs, ys) in pooled.items():
        out["pooled"][name] = _safe_pearson(xs, ys)
    return out


def cmd_analyze(args: argparse.Namespace) -> int:
    out_dir = _resolve_out(args)
    problem = load_sweep_problem(out_dir)
    meta = load_grid_metadata(out_dir)
    grid, curves = load_curves(out_dir)

    expected = {(g, i) for g in meta["targets"]
                for i in meta["initial_states"]}
    present = {(c.target_gs, c.initial_state) for c in curves}
    gaps = sorted(expected - present)
    if gaps:
        warnings.warn(f"sweep is missing {len(gaps)} (target, initial) "
                      f"curve(s): {gaps[:10]}{'...' if len(gaps) > 10 else ''}")

    records = [susceptibility_record(problem, c) for c in curves]
    records_to_csv(records, os.path.join(out_dir, RECORDS_NAME))

    averages = average_chi_per_gs(records)
    avg_lines = ["gs_index,mean_chi"]
    for gs_index in sorted(averages):
        avg_lines.append(f"{gs_index},{averages[gs_index]:.17g}")
    with open(os.path.join(out_dir, AVERAGES_NAME), "w",
              encoding="utf-8") as fh:
        fh.write("\n".join(avg_lines) + "\n")

    correlations = _correlations(records, load_ra_only(out_dir),
                                 meta["initial_states"])
    with open(os.path.join(out_dir, CORRELATIONS_NAME), "w",
              encoding="utf-8") as fh:
        json.dump(correlations, fh, indent=2, sort_keys=True)
        fh.write("\n")

    append_files(out_dir, [RECORDS_NAME, AVERAGES_NAME, CORRELATIONS_NAME])
    print(f"analyze complete: {len(records)} records, "
          f"{len(averages)} ground state(s)")
    return 0


def cmd_cluster(args: argparse.Namespace) -> int:
    out_dir = _resolve_out(args)
    meta = load_grid_metadata(out_dir)
    grid, curves = load_curves(out_dir)
    params = meta.get("clustering", {})
    k = args.k if args.k is not None else params.get("k", 4)
    seed = args.seed if args.seed is not None else params.get("seed", 0)
    gamma = params.get("gamma", 1.0)
    n_init = params.get("n_init", 10)

    assignments: Dict[int, ClusterAssignment] = {}
    by_gs: Dict[int, List[ResponseCurve]] = {}
    for curve in curves:
        by_gs.setdefault(curve.target_gs, []).append(curve)
    for gs_index in sorted(by_gs):
        group = sorted(by_gs[gs_index], key=lambda c: c.initial_state)
        vectors = [c.p_gs for c in group]
        keys = [c.initial_state for c in group]
        assignments[gs_index] = spectral_cluster(
            vectors, k=k, seed=seed, gamma=gamma, n_init=n_init, keys=keys)
    clusters_to_csv(assignments, os.path.join(out_dir, CLUSTERS_NAME))
    append_files(out_dir, [CLUSTERS_NAME])
    print(f"cluster complete: k={k} over {len(assignments)} "
          f"ground state(s)")
    return 0


def cmd_network(args: argparse.Namespace) -> int:
    out_dir = _resolve_out(args)
    problem = load_sweep_problem(out_dir)
    meta = load_grid_metadata(out_dir)
    num_h = len(meta["h_values"])
    net_dir = os.path.join(out_dir, NETWORKS_DIR)
    os.makedirs(net_dir, exist_ok=True)
    written = []
    for gs_index in meta["targets"]:
        matrices = load_task_matrices(out_dir, gs_index, num_h)
        paths = []
        for initial in meta["initial_states"]:
            dists = [m[:, initial] for m in matrices]
            paths.append(build_path(dists, initial, gs_index))
        net = union_network(paths, problem)
        for fmt, ext in (("json", "json"), ("graphml", "graphml"),
                         ("dot", "dot")):
            rel = os.path.join(NETWORKS_DIR, f"g{gs_index:05d}.{ext}")
            with open(os.path.join(out_dir, rel), "w",
                      encoding="utf-8") as fh:
                fh.write(export_network(net, fmt))
            written.append(rel)
    append_files(out_dir, written)
    print(f"network complete: {len(written)} file(s) in {net_dir}")
    return 0


def cmd_tile(args: argparse.Namespace) -> int:
    out_dir = _resolve_out(args)
    os.makedirs(out_dir, exist_ok=True)
    if args.pattern in BUNDLED_NAMES:
        pattern = bundled_instance(args.pattern)
    else:
        pattern = load_instance(args.pattern)
    defects = load_defects(args.defects) if args.defects else None
    graph = pegasus_graph(args.m, fabric_only=True, defects=defects)
    embeddings = tile_disjoint_embeddings(graph, pattern,
                                          seed=args.seed or 0)
    findings = validate_embeddings(graph, pattern, embeddings)
    save_embeddings(embeddings, os.path.join(out_dir, "embeddings.json"))
    summary = {
        "pattern": pattern.name or args.pattern,
        "pegasus_m": args.m,
        "fabric_nodes": len(graph.nodes),
        "defects": len(graph.defects),
        "embeddings": len(embeddings),
        "validation_findings": findings,
    }
    with open(os.path.join(out_dir, "tile_report.json"), "w",
              encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"tile complete: {len(embeddings)} disjoint embedding(s), "
          f"{len(findings)} finding(s)")
    return 0 if not findings else 1


def _load_clusters_csv(path: str) -> Dict[int, Dict[int, int]]:
    clusters: Dict[int, Dict[int, int]] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "gs_index,initial_state,cluster":
            raise ValueError(f"{path}: unexpected header {header!r}")
        for line in fh:
            gs_s, init_s, cl_s = line.rstrip("\n").split(",")
            clusters.setdefault(int(gs_s), {})[int(init_s)] = int(cl_s)
    return clusters


def cmd_report(args: argparse.Namespace) -> int:
    from . import report as rpt

    out_dir = _resolve_out(args)
    _require(os.path.join(out_dir, RECORDS_NAME), "analyze")
    _require(os.path.join(out_dir, AVERAGES_NAME), "analyze")
    problem = load_sweep_problem(out_dir)
    meta = load_grid_metadata(out_dir)
    grid, curves = load_curves(out_dir)
    records = _load_records_csv(os.path.join(out_dir, RECORDS_NAME))
    with open(os.path.join(out_dir, CORRELATIONS_NAME),
              encoding="utf-8") as fh:
        correlations = json.load(fh)

    clusters_path = os.path.join(out_dir, CLUSTERS_NAME)
    clusters = _load_clusters_csv(clusters_path) \
        if os.path.exists(clusters_path) else {}

    averages: Dict[int, float] = {}
    with open(os.path.join(out_dir, AVERAGES_NAME), encoding="utf-8") as fh:
        fh.readline()
        for line in fh:
            gs_s, chi_s = line.rstrip("\n").split(",")
            averages[int(gs_s)] = float(chi_s)

    rep_dir = os.path.join(out_dir, REPORT_DIR)
    os.makedirs(rep_dir, exist_ok=True)
    written = []

    k = meta.get("clustering", {}).get("k", 4)
    for gs_index in meta["targets"]:
        gs_clusters = clusters.get(gs_index)
        rel = os.path.join(REPORT_DIR, f"chi_map_g{gs_index:05d}.svg")
        rpt.plot_chi_map(records, gs_index, meta["targets"], gs_clusters,
                         os.path.join(out_dir, rel))
        written.append(rel)
        rel = os.path.join(REPORT_DIR, f"metrics_g{gs_index:05d}.svg")
        rpt.plot_metric_scatters(records, gs_index, gs_clusters,
                                 os.path.join(out_dir, rel))
        written.append(rel)
        rel = os.path.join(REPORT_DIR, f"curves_g{gs_index:05d}.svg")
        rpt.plot_response_curves(grid, curves, gs_index, k, gs_clusters,
                                 os.path.join(out_dir, rel))
        written.append(rel)
        net_file = os.path.join(out_dir, NETWORKS_DIR,
                                f"g{gs_index:05d}.json")
        if os.path.exists(net_file):
            with open(net_file, encoding="utf-8") as fh:
                net = parse_network(fh.read())
            rel = os.path.join(REPORT_DIR, f"network_g{gs_index:05d}.svg")
            rpt.plot_network(net, gs_index, os.path.join(out_dir, rel))
            written.append(rel)

    rel = os.path.join(REPORT_DIR, "average_chi.svg")
    rpt.plot_average_chi(averages, os.path.join(out_dir, rel))
    written.append(rel)

    forward_gs = os.path.join(out_dir, "forward_gs.csv")
    if os.path.exists(forward_gs):
        shares = {}
        with open(forward_gs, encoding="utf-8") as fh:
            fh.readline()
            for line in fh:
                gs_s, share_s = line.rstrip("\n").split(",")
                shares[int(gs_s)] = float(share_s)
        rel = os.path.join(REPORT_DIR, "forward_gs.svg")
        rpt.plot_forward_shares(shares, os.path.join(out_dir, rel))
        written.append(rel)

    rel = os.path.join(REPORT_DIR, "summary.txt")
    rpt.write_summary(problem, records, averages,
                      correlations.get("per_gs", {}),
                      os.path.join(out_dir, rel))
    written.append(rel)
    append_files(out_dir, written)
    print(f"report complete: {len(written)} file(s) in {rep_dir}")
    return 0


class _JsonErrorParser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        print(json.dumps({"error": "UsageError", "message": message}),
              file=sys.stderr)
        sys.exit(2)


def build_parser() -> argparse.ArgumentParser:
    parser = _JsonErrorParser(
        prog="annealmap",
        description="State-transition susceptibility mapping for small "
                    "Ising problems on a simulated annealer.")
    parser.add_argument("--version", action="version",
                        version=f"annealmap {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run the configured sweep")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out", default=None)
    p_sweep.add_argument("--seed", type=int, default=None,
                         help="override the config's master seed")
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--backend",
                         choices=("schrodinger", "svmc"), default=None)
    p_sweep.add_argument("--exact", action="store_true",
                         help="force exact-probability mode")
    p_sweep.add_argument("--sampled", action="store_true",
                         help="force multinomial sampling mode")
    p_sweep.add_argument("--verbose", action="store_true")
    p_sweep.set_defaults(func=cmd_sweep)

    for name, func, extras in (
            ("analyze", cmd_analyze, ()),
            ("cluster", cmd_cluster, ("k", "seed")),
            ("network", cmd_network, ()),
            ("report", cmd_report, ())):
        sp = sub.add_parser(name)
        sp.add_argument("--out", required=True,
                        help="sweep output directory")
        if "k" in extras:
            sp.add_argument("--k", type=int, default=None)
        if "seed" in extras:
            sp.add_argument("--seed", type=int, default=None)
        sp.set_defaults(func=func)

    p_tile = sub.add_parser("tile", help="tile a pattern onto Pegasus")
    p_tile.add_argument("--m", type=int, required=True,
                        help="Pegasus size parameter")
    p_tile.add_argument("--pattern", required=True,
                        help=f"bundled name {BUNDLED_NAMES} or an "
                             f"instance file")
    p_tile.add_argument("--seed", type=int, default=0)
    p_tile.add_argument("--defects", default=None,
                        help="file with one defect qubit id per line")
    p_tile.add_argument("--out", required=True)
    p_tile.set_defaults(func=cmd_tile)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # uniform machine-readable failure surface
        print(json.dumps({"error": type(exc).__name__,
                          "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
