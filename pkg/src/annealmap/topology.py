"""Pegasus hardware-graph construction and disjoint parallel tiling of a
small Ising pattern onto it.

Qubits are identified by linear ids derived from Pegasus coordinates
(u, w, k, z): u selects vertical (0) or horizontal (1) wires, w the wire
block, k the wire index within a block (12 per block), z the segment along
the wire. Couplers come in three families: internal (vertical/horizontal
segment crossings), external (consecutive segments of one wire), and odd
(paired wires k = 2j, 2j+1 in the same block and segment).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

import numpy as np

from .ising import IsingProblem

VERTICAL_OFFSETS = (2, 2, 2, 2, 10, 10, 10, 10, 6, 6, 6, 6)
HORIZONTAL_OFFSETS = (6, 6, 6, 6, 2, 2, 2, 2, 10, 10, 10, 10)

Coordinate = Tuple[int, int, int, int]


def coord_to_linear(coord: Coordinate, m: int) -> int:
    u, w, k, z = coord
    return ((u * m + w) * 12 + k) * (m - 1) + z


def linear_to_coord(index: int, m: int) -> Coordinate:
    index, z = divmod(index, m - 1)
    index, k = divmod(index, 12)
    u, w = divmod(index, m)
    return (u, w, k, z)


@dataclass(frozen=True)
class HardwareGraph:
    """Simple hardware graph; edges stored as sorted qubit-id pairs."""

    nodes: FrozenSet[int]
    edges: FrozenSet[Tuple[int, int]]
    family: str
    size_parameter: int
    defects: FrozenSet[int] = frozenset()

    def __post_init__(self) -> None:
        for u, v in self.edges:
            if u >= v:
                raise ValueError(f"edge ({u}, {v}) must be stored as u < v")
            if u not in self.nodes or v not in self.nodes:
                raise ValueError(f"edge ({u}, {v}) endpoint not a node")
            if u in self.defects or v in self.defects:
                raise ValueError(f"edge ({u}, {v}) touches a defect")
        if self.defects & self.nodes:
            raise ValueError("defect qubits must not remain in the node set")

    def adjacency(self) -> Dict[int, FrozenSet[int]]:
        adj: Dict[int, set] = {q: set() for q in self.nodes}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return {q: frozenset(neigh) for q, neigh in adj.items()}


@dataclass(frozen=True)
class EmbeddingSet:
    """Node-disjoint pattern placements: one map variable -> qubit each."""

    embeddings: Tuple[Dict[int, int], ...]

    def __len__(self) -> int:
        return len(self.embeddings)


def _pegasus_coordinate_edges(m: int) -> List[Tuple[Coordinate, Coordinate]]:
    edges: List[Tuple[Coordinate, Coordinate]] = []
    for u in (0, 1):
        for w in range(m):
            for k in range(12):
                for z in range(m - 1):
                    if z + 1 <= m - 2:
                        edges.append(((u, w, k, z), (u, w, k, z + 1)))
                    if k % 2 == 0:
                        edges.append(((u, w, k, z), (u, w, k + 1, z)))
    # internal couplers: a vertical segment at column x = 12w + k covering
    # rows [12z + VOFF[k], 12z + VOFF[k] + 12) crosses the horizontal
    # segments that span it
    for w in range(m):
        for k in range(12):
            for z in range(m - 1):
                x = 12 * w + k
                y0 = 12 * z + VERTICAL_OFFSETS[k]
                for step in range(12):
                    y = y0 + step
                    w2, k2 = divmod(y, 12)
                    if w2 >= m:
                        continue
                    z2, rem = divmod(x - HORIZONTAL_OFFSETS[k2], 12)
                    if 0 <= z2 <= m - 2:
                        edges.append(((0, w, k, z), (1, w2, k2, z2)))
    return edges


def pegasus_graph(m: int, fabric_only: bool = True,
                  defects: Optional[Iterable[int]] = None) -> HardwareGraph:
    """Pegasus graph of size m with linear qubit ids.

    fabric_only keeps the (m-1)(24m-8) qubits that carry at least one
    internal coupler. Defect qubits and their incident couplers are
    removed afterwards.
    """
    if m < 2:
        raise ValueError(f"pegasus size parameter must be >= 2, got {m}")
    coord_edges = _pegasus_coordinate_edges(m)
    edges = set()
    nodes = {coord_to_linear((u, w, k, z), m)
             for u in (0, 1) for w in range(m)
             for k in range(12) for z in range(m - 1)}
    internal_nodes = set()
    for a, b in coord_edges:
        la, lb = coord_to_linear(a, m), coord_to_linear(b, m)
        edges.add((la, lb) if la < lb else (lb, la))
        if a[0] != b[0]:
            internal_nodes.add(la)
            internal_nodes.add(lb)
    if fabric_only:
        nodes = internal_nodes
        edges = {(u, v) for u, v in edges if u in nodes and v in nodes}
    defect_set = frozenset(int(q) for q in (defects or ()))
    unknown = defect_set - nodes
    if unknown:
        raise ValueError(
            f"defect qubits not present in the graph: {sorted(unknown)}")
    if defect_set:
        nodes = nodes - defect_set
        edges = {(u, v) for u, v in edges
                 if u not in defect_set and v not in defect_set}
    return HardwareGraph(nodes=frozenset(nodes), edges=frozenset(edges),
                         family="pegasus", size_parameter=m,
                         defects=defect_set)


def _pattern_adjacency(pattern: IsingProblem) -> Dict[int, FrozenSet[int]]:
    adj: Dict[int, set] = {i: set() for i in range(pattern.num_variables)}
    for i, j in pattern.edges:
        adj[i].add(j)
        adj[j].add(i)
    return {i: frozenset(neigh) for i, neigh in adj.items()}


def _pattern_connected(adj: Dict[int, FrozenSet[int]]) -> bool:
    if not adj:
        return False
    seen = {0}
    stack = [0]
    while stack:
        for nxt in adj[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return len(seen) == len(adj)


def tile_disjoint_embeddings(target: HardwareGraph, pattern: IsingProblem,
                             seed: int = 0) -> EmbeddingSet:
    """Greedy randomized packing of node-disjoint pattern embeddings.

    Anchors are visited in a seeded shuffle; each placement is grown by
    backtracking over common neighbours (variables ordered by descending
    pattern degree). Qubits of accepted placements are removed before
    continuing, so the result is maximal for a one-pass-per-anchor budget
    and deterministic per seed.
    """
    n_pat = pattern.num_variables
    if n_pat > len(target.nodes):
        raise ValueError(
            f"pattern has {n_pat} variables but the target graph has only "
            f"{len(target.nodes)} usable qubits")
    pat_adj = _pattern_adjacency(pattern)
    if not _pattern_connected(pat_adj):
        raise ValueError("pattern graph must be connected")
    order = sorted(range(n_pat), key=lambda v: (-len(pat_adj[v]), v))
    adj = {q: set(neigh) for q, neigh in target.adjacency().items()}

    rng = np.random.default_rng(seed)
    anchors = sorted(target.nodes)
    rng.shuffle(anchors)
    available = set(target.nodes)
    embeddings: List[Dict[int, int]] = []

    def extend(assign: Dict[int, int], depth: int) -> bool:
        if depth == len(order):
            return True
        var = order[depth]
        placed_neighbours = [assign[u] for u in pat_adj[var] if u in assign]
        if placed_neighbours:
            candidates = set(adj[placed_neighbours[0]])
            for q in placed_neighbours[1:]:
                candidates &= adj[q]
            candidates &= available
        else:
            candidates = set(available)
        candidates -= set(assign.values())
        for q in sorted(candidates):
            assign[var] = q
            if extend(assign, depth + 1):
                return True
            del assign[var]
        return False

    for anchor in anchors:
        if anchor not in available:
            continue
        assign = {order[0]: anchor}
        if extend(assign, 1):
            embeddings.append(dict(sorted(assign.items())))
            available -= set(assign.values())
    return EmbeddingSet(tuple(embeddings))


def validate_embeddings(target: HardwareGraph, pattern: IsingProblem,
                        embedding_set: EmbeddingSet) -> List[str]:
    """Injectivity, pairwise disjointness and edge preservation; an empty
    report means the embedding set is valid."""
    findings: List[str] = []
    edge_set = set(target.edges)
    used: Dict[int, int] = {}
    for idx, emb in enumerate(embedding_set.embeddings):
        if set(emb.keys()) != set(range(pattern.num_variables)):
            findings.append(f"embedding {idx}: variables {sorted(emb)} do "
                            f"not cover 0..{pattern.num_variables - 1}")
            continue
        if len(set(emb.values())) != len(emb):
            findings.append(f"embedding {idx}: map is not injective")
        for var, qubit in emb.items():
            if qubit not in target.nodes:
                findings.append(
                    f"embedding {idx}: variable {var} uses unknown or "
                    f"defect qubit {qubit}")
            if qubit in used and used[qubit] != idx:
                findings.append(
                    f"embedding {idx}: qubit {qubit} already used by "
                    f"embedding {used[qubit]}")
            used.setdefault(qubit, idx)
        for i, j in pattern.edges:
            a, b = emb.get(i), emb.get(j)
            if a is None or b is None:
                continue
            key = (a, b) if a < b else (b, a)
            if key not in edge_set:
                findings.append(
                    f"embedding {idx}: pattern edge ({i}, {j}) maps to "
                    f"({a}, {b}) which is not a coupler")
    return findings


def save_embeddings(embedding_set: EmbeddingSet, path: str) -> None:
    """JSON list of variable -> qubit maps (keys serialized as strings)."""
    doc = [{str(var): qubit for var, qubit in sorted(emb.items())}
           for emb in embedding_set.embeddings]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_embeddings(path: str) -> EmbeddingSet:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return EmbeddingSet(tuple({int(var): int(qubit)
                               for var, qubit in emb.items()}
                              for emb in doc))


def load_defects(path: str) -> FrozenSet[int]:
    """One qubit id per line; blank lines and '#' comments are skipped."""
    defects = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            try:
                defects.add(int(text))
            except ValueError:
                raise ValueError(
                    f"{path}:{lineno}: expected a qubit id, got {text!r}")
    return frozenset(defects)
