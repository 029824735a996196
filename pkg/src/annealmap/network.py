"""Dominant-state paths over the h sweep and their union into
state-transition networks, with deterministic GraphML/DOT/JSON export."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from .ising import IsingProblem, energy, index_to_state
from .simulator import SampleSet

Distribution = Union[SampleSet, Sequence[float]]


@dataclass(frozen=True)
class DominantPath:
    """Ordered dominant states along the h grid, consecutive dups removed."""

    initial_state: int
    target_gs: int
    states: Tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.states) == 0:
            raise ValueError("path must contain at least one state")
        if any(a == b for a, b in zip(self.states, self.states[1:])):
            raise ValueError("path has consecutive duplicate states")


@dataclass(frozen=True)
class TransitionNetwork:
    """Union of dominant paths: states with energies, undirected edges with
    multiplicity plus per-direction traversal counts."""

    nodes: Dict[int, float]
    edges: Dict[Tuple[int, int], int]
    directed_counts: Dict[Tuple[int, int], int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for (u, v) in self.edges:
            if u >= v:
                raise ValueError(f"edge ({u}, {v}) must be stored as u < v")
            if u not in self.nodes or v not in self.nodes:
                raise ValueError(f"edge ({u}, {v}) endpoint missing a node")


def dominant_state(dist_or_samples: Distribution) -> int:
    """Argmax state of a distribution or sample set, ties to lowest index."""
    if isinstance(dist_or_samples, SampleSet):
        counts = dist_or_samples.counts
        if not counts:
            raise ValueError("empty sample set")
        best_count = max(counts.values())
        return min(i for i, c in counts.items() if c == best_count)
    dist = np.asarray(dist_or_samples, dtype=float)
    if dist.size == 0:
        raise ValueError("empty distribution")
    return int(np.argmax(dist))


def build_path(per_h_distributions: Sequence[Distribution],
               initial_state: int, target_gs: int) -> DominantPath:
    """Dominant state at each ascending h, consecutive duplicates collapsed."""
    if not per_h_distributions:
        raise ValueError("need at least one distribution")
    states: List[int] = []
    for dist in per_h_distributions:
        state = dominant_state(dist)
        if not states or states[-1] != state:
            states.append(state)
    return DominantPath(initial_state, target_gs, tuple(states))


def union_network(paths: Sequence[DominantPath],
                  problem: IsingProblem) -> TransitionNetwork:
    """Merge paths: every visited state becomes a node annotated with its
    problem energy; consecutive path pairs become undirected edges whose
    multiplicity counts occurrences across all paths."""
    nodes: Dict[int, float] = {}
    edges: Dict[Tuple[int, int], int] = {}
    directed: Dict[Tuple[int, int], int] = {}
    n = problem.num_variables
    for path in paths:
        for state in path.states:
            if state not in nodes:
                nodes[state] = energy(problem, index_to_state(state, n))
        for a, b in zip(path.states, path.states[1:]):
            key = (a, b) if a < b else (b, a)
            edges[key] = edges.get(key, 0) + 1
            directed[(a, b)] = directed.get((a, b), 0) + 1
    return TransitionNetwork(nodes=nodes, edges=edges,
                             directed_counts=directed)


def _sorted_nodes(net: TransitionNetwork) -> List[int]:
    return sorted(net.nodes)


def _sorted_edges(net: TransitionNetwork) -> List[Tuple[int, int]]:
    return sorted(net.edges)


def _to_graphml(net: TransitionNetwork) -> str:
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
        '  <key id="state" for="node" attr.name="state" attr.type="long"/>',
        '  <key id="energy" for="node" attr.name="energy" '
        'attr.type="double"/>',
        '  <key id="multiplicity" for="edge" attr.name="multiplicity" '
        'attr.type="long"/>',
        '  <graph id="transitions" edgedefault="undirected">',
    ]
    for state in _sorted_nodes(net):
        lines.append(f'    <node id="n{state}">')
        lines.append(f'      <data key="state">{state}</data>')
        lines.append(
            f'      <data key="energy">{net.nodes[state]:.17g}</data>')
        lines.append('    </node>')
    for (u, v) in _sorted_edges(net):
        lines.append(f'    <edge source="n{u}" target="n{v}">')
        lines.append(f'      <data key="multiplicity">'
                     f'{net.edges[(u, v)]}</data>')
        lines.append('    </edge>')
    lines.append('  </graph>')
    lines.append('</graphml>')
    return "\n".join(lines) + "\n"


def _to_dot(net: TransitionNetwork) -> str:
    lines = ['graph transitions {']
    for state in _sorted_nodes(net):
        lines.append(f'  n{state} [state={state}, '
                     f'energy="{net.nodes[state]:.17g}"];')
    for (u, v) in _sorted_edges(net):
        lines.append(f'  n{u} -- n{v} '
                     f'[multiplicity={net.edges[(u, v)]}];')
    lines.append('}')
    return "\n".join(lines) + "\n"


def _to_json(net: TransitionNetwork) -> str:
    doc = {
        "nodes": [{"state": s, "energy": net.nodes[s]}
                  for s in _sorted_nodes(net)],
        "edges": [{
            "u": u,
            "v": v,
            "multiplicity": net.edges[(u, v)],
            "count_uv": net.directed_counts.get((u, v), 0),
            "count_vu": net.directed_counts.get((v, u), 0),
        } for (u, v) in _sorted_edges(net)],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


_EXPORTERS = {"graphml": _to_graphml, "dot": _to_dot, "json": _to_json}


def export_network(net: TransitionNetwork, format: str = "json") -> str:
    """Serialize with deterministic element order (ascending state index).

    Formats: graphml, dot, json (the lossless structured-object form).
    """
    try:
        exporter = _EXPORTERS[format]
    except KeyError:
        raise ValueError(
            f"unknown format {format!r}; expected one of "
            f"{sorted(_EXPORTERS)}") from None
    return exporter(net)


def parse_network(text: str) -> TransitionNetwork:
    """Inverse of the json export; export(parse(export(net))) is a fixed
    point."""
    doc = json.loads(text)
    nodes = {int(item["state"]): float(item["energy"])
             for item in doc["nodes"]}
    edges: Dict[Tuple[int, int], int] = {}
    directed: Dict[Tuple[int, int], int] = {}
    for item in doc["edges"]:
        u, v = int(item["u"]), int(item["v"])
        edges[(u, v)] = int(item["multiplicity"])
        if item.get("count_uv"):
            directed[(u, v)] = int(item["count_uv"])
        if item.get("count_vu"):
            directed[(v, u)] = int(item["count_vu"])
    return TransitionNetwork(nodes=nodes, edges=edges,
                             directed_counts=directed)
