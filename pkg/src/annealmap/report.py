"""Deterministic SVG report plots and a text summary for a completed
analysis directory: susceptibility maps, metric scatters, response-curve
panels per cluster, per-ground-state averages, forward-anneal shares, and
force-directed network drawings."""
from __future__ import annotations

from typing import Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import networkx as nx  # noqa: E402

from .analysis import HGrid, ResponseCurve, SusceptibilityRecord  # noqa: E402
from .ising import IsingProblem, complement, index_to_state, \
    state_to_index  # noqa: E402
from .network import TransitionNetwork  # noqa: E402

# fixed hash salt + stripped date metadata make SVG output byte-stable
matplotlib.rcParams["svg.hashsalt"] = "annealmap"

_CLUSTER_COLORS = ("tab:blue", "tab:red", "tab:green", "tab:purple",
                   "tab:orange", "tab:brown", "tab:pink", "tab:gray")


def _save(fig: plt.Figure, path: str) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _cluster_color(cluster: Optional[int]) -> str:
    if cluster is None:
        return "tab:blue"
    return _CLUSTER_COLORS[cluster % len(_CLUSTER_COLORS)]


def plot_chi_map(records: Sequence[SusceptibilityRecord], target_gs: int,
                 gs_indices: Sequence[int],
                 clusters: Optional[Dict[int, int]], path: str) -> None:
    """chi across all initial states for one target ground state."""
    recs = sorted((r for r in records if r.target_gs == target_gs),
                  key=lambda r: r.initial_state)
    xs = [r.initial_state for r in recs]
    ys = [r.chi for r in recs]
    colors = [_cluster_color(clusters.get(r.initial_state)
                             if clusters else None) for r in recs]
    fig, ax = plt.subplots(figsize=(8, 3.2))
    ax.scatter(xs, ys, c=colors, s=18, zorder=3)
    for gs_index in gs_indices:
        ax.axvline(gs_index, color="red", linestyle="--", linewidth=0.8,
                   zorder=1)
    ax.set_xlabel("initial state index")
    ax.set_ylabel("susceptibility chi")
    ax.set_title(f"chi toward ground state {target_gs}")
    fig.tight_layout()
    _save(fig, path)


def plot_metric_scatters(records: Sequence[SusceptibilityRecord],
                         target_gs: int,
                         clusters: Optional[Dict[int, int]],
                         path: str) -> None:
    """hamming / energy / delta versus chi for one target ground state."""
    recs = [r for r in records if r.target_gs == target_gs]
    colors = [_cluster_color(clusters.get(r.initial_state)
                             if clusters else None) for r in recs]
    fig, axes = plt.subplots(1, 3, figsize=(10.5, 3.2))
    for ax, attr in zip(axes, ("hamming", "energy", "delta")):
        ax.scatter([getattr(r, attr) for r in recs],
                   [r.chi for r in recs], c=colors, s=14)
        ax.set_xlabel(attr)
        ax.set_ylabel("chi")
    fig.suptitle(f"state metrics vs chi, ground state {target_gs}")
    fig.tight_layout()
    _save(fig, path)


def plot_response_curves(grid: HGrid, curves: Sequence[ResponseCurve],
                         target_gs: int, k: int,
                         clusters: Optional[Dict[int, int]],
                         path: str) -> None:
    """One panel per cluster, each holding its members' response curves."""
    panel_count = k if clusters else 1
    fig, axes = plt.subplots(1, panel_count,
                             figsize=(3.2 * panel_count, 3.0),
                             sharey=True, squeeze=False)
    for curve in sorted(curves, key=lambda c: c.initial_state):
        if curve.target_gs != target_gs:
            continue
        cluster = clusters.get(curve.initial_state, 0) if clusters else 0
        ax = axes[0][cluster if cluster < panel_count else 0]
        ax.plot(grid.values, curve.p_gs, linewidth=0.8,
                color=_cluster_color(cluster if clusters else None))
    for i in range(panel_count):
        axes[0][i].set_xlabel("h strength")
        axes[0][i].set_title(f"cluster {i}" if clusters else "all curves")
    axes[0][0].set_ylabel("P_GS")
    fig.suptitle(f"h-gain response curves toward ground state {target_gs}")
    fig.tight_layout()
    _save(fig, path)


def plot_average_chi(averages: Dict[int, float], path: str) -> None:
    fig, ax = plt.subplots(figsize=(4.8, 3.0))
    keys = sorted(averages)
    ax.bar([str(k) for k in keys], [averages[k] for k in keys],
           color="tab:blue")
    ax.set_xlabel("ground state index")
    ax.set_ylabel("mean chi over initial states")
    fig.tight_layout()
    _save(fig, path)


def plot_forward_shares(shares: Dict[int, float], path: str) -> None:
    fig, ax = plt.subplots(figsize=(4.8, 3.0))
    keys = sorted(shares)
    ax.bar([str(k) for k in keys], [shares[k] for k in keys],
           color="tab:green")
    ax.set_xlabel("ground state index")
    ax.set_ylabel("share of ground-state samples")
    ax.set_title("forward-anneal ground-state distribution")
    fig.tight_layout()
    _save(fig, path)


def plot_network(net: TransitionNetwork, target_gs: int, path: str,
                 seed: int = 0) -> None:
    """Force-directed drawing; node color by energy, width by multiplicity."""
    graph = nx.Graph()
    for state in sorted(net.nodes):
        graph.add_node(state, energy=net.nodes[state])
    for (u, v) in sorted(net.edges):
        graph.add_edge(u, v, multiplicity=net.edges[(u, v)])
    fig, ax = plt.subplots(figsize=(5.2, 5.2))
    if graph.number_of_nodes():
        pos = nx.spring_layout(graph, seed=seed)
        energies = [net.nodes[s] for s in graph.nodes]
        widths = [0.5 + 0.5 * net.edges[tuple(sorted(e))]
                  for e in graph.edges]
        nx.draw_networkx_edges(graph, pos, ax=ax, width=widths,
                               edge_color="gray")
        nodes = nx.draw_networkx_nodes(graph, pos, ax=ax, node_size=220,
                                       node_color=energies,
                                       cmap="viridis")
        nx.draw_networkx_labels(graph, pos, ax=ax, font_size=7)
        fig.colorbar(nodes, ax=ax, label="state energy")
    ax.set_title(f"state-transition network toward ground state "
                 f"{target_gs}")
    ax.set_axis_off()
    fig.tight_layout()
    _save(fig, path)


def write_summary(problem: IsingProblem,
                  records: Sequence[SusceptibilityRecord],
                  averages: Dict[int, float],
                  correlations: Dict[str, Dict[str, float]],
                  path: str) -> None:
    lines: List[str] = []
    lines.append(f"instance: {problem.name or 'unnamed'} "
                 f"({problem.num_variables} variables, "
                 f"{len(problem.quadratic)} couplers)")
    by_gs: Dict[int, List[SusceptibilityRecord]] = {}
    for rec in records:
        by_gs.setdefault(rec.target_gs, []).append(rec)
    for gs_index in sorted(by_gs):
        recs = by_gs[gs_index]
        top = max(recs, key=lambda r: r.chi)
        bottom = min(recs, key=lambda r: r.chi)
        comp = state_to_index(complement(
            index_to_state(gs_index, problem.num_variables)))
        lines.append(f"ground state {gs_index}:")
        lines.append(f"  mean chi      = {averages.get(gs_index, float('nan')):.6g}")
        lines.append(f"  max chi       = {top.chi:.6g} at initial state "
                     f"{top.initial_state}")
        lines.append(f"  min chi       = {bottom.chi:.6g} at initial state "
                     f"{bottom.initial_state} (complement is {comp})")
        corr = correlations.get(str(gs_index), {})
        for name in sorted(corr):
            lines.append(f"  pearson({name}, chi) = {corr[name]:.6g}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
