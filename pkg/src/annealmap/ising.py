"""Ising problems over {-1,+1} spins: energies, ground states, state codecs.

Canonical state encoding used across the package: a classical state of n
spins maps to an integer index in [0, 2^n) where bit j = 0 means spin j is
+1 and bit j = 1 means spin j is -1.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

# above this, exhaustive enumeration is refused
EXHAUSTIVE_LIMIT = 24

SpinState = Tuple[int, ...]


class CapabilityError(RuntimeError):
    """Requested exact operation exceeds the configured exhaustive limit."""


@dataclass(frozen=True)
class IsingProblem:
    """An Ising problem: E(s) = sum_i h_i s_i + sum_{i<j} J_ij s_i s_j."""

    num_variables: int
    linear: Dict[int, float] = field(default_factory=dict)
    quadratic: Dict[Tuple[int, int], float] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self) -> None:
        n = self.num_variables
        if n < 1:
            raise ValueError(f"num_variables must be >= 1, got {n}")
        for i in self.linear:
            if not 0 <= i < n:
                raise ValueError(f"linear index {i} out of range [0, {n})")
        for (i, j) in self.quadratic:
            if i == j:
                raise ValueError(f"self-loop ({i}, {j}) not allowed")
            if not (0 <= i < j < n):
                raise ValueError(
                    f"quadratic pair ({i}, {j}) must satisfy 0 <= i < j < {n}")

    @property
    def edges(self) -> List[Tuple[int, int]]:
        return sorted(self.quadratic)

    def degrees(self) -> np.ndarray:
        """Degree of each variable in the coupler graph."""
        deg = np.zeros(self.num_variables, dtype=int)
        for i, j in self.quadratic:
            deg[i] += 1
            deg[j] += 1
        return deg

    def max_degree(self) -> int:
        deg = self.degrees()
        return int(deg.max()) if self.num_variables else 0


@dataclass(frozen=True)
class GroundStateSet:
    """Exact minimum energy and all minimizing states, sorted by index."""

    energy: float
    indices: Tuple[int, ...]
    states: Tuple[SpinState, ...]

    def __len__(self) -> int:
        return len(self.indices)


def state_to_index(state: Sequence[int]) -> int:
    """Canonical index of a +-1 state (bit j = 0 <-> spin +1)."""
    idx = 0
    for j, s in enumerate(state):
        if s == -1:
            idx |= 1 << j
        elif s != 1:
            raise ValueError(f"spin values must be +-1, got {s}")
    return idx


def index_to_state(index: int, num_variables: int) -> SpinState:
    """Inverse of state_to_index."""
    if not 0 <= index < (1 << num_variables):
        raise ValueError(
            f"index {index} out of range for {num_variables} variables")
    return tuple(1 - 2 * ((index >> j) & 1) for j in range(num_variables))


def complement(state: Sequence[int]) -> SpinState:
    """Negate every spin. Involutive."""
    return tuple(-s for s in state)


def energy(problem: IsingProblem, state: Sequence[int]) -> float:
    """Classical Ising energy of a single +-1 assignment."""
    if len(state) != problem.num_variables:
        raise ValueError(
            f"state length {len(state)} != num_variables "
            f"{problem.num_variables}")
    e = 0.0
    for i, h in problem.linear.items():
        e += h * state[i]
    for (i, j), jij in problem.quadratic.items():
        e += jij * state[i] * state[j]
    return e


def spin_table(num_variables: int) -> np.ndarray:
    """(2^n, n) float matrix; row k holds the spins of canonical index k."""
    k = np.arange(1 << num_variables)
    bits = (k[:, None] >> np.arange(num_variables)[None, :]) & 1
    return (1 - 2 * bits).astype(np.float64)


def all_energies(problem: IsingProblem) -> np.ndarray:
    """Energies of every canonical state, index order. Needs n <= limit.

    Vectorized per term and chunked so memory stays bounded for larger n.
    """
    n = problem.num_variables
    if n > EXHAUSTIVE_LIMIT:
        raise CapabilityError(
            f"n = {n} exceeds exhaustive limit {EXHAUSTIVE_LIMIT}; "
            "use the sampling backends instead")
    total = 1 << n
    out = np.zeros(total)
    chunk = min(total, 1 << 20)
    for start in range(0, total, chunk):
        k = np.arange(start, min(start + chunk, total))
        acc = np.zeros(len(k))
        for i, h in problem.linear.items():
            acc += h * (1.0 - 2.0 * ((k >> i) & 1))
        for (i, j), jij in problem.quadratic.items():
            si = 1.0 - 2.0 * ((k >> i) & 1)
            sj = 1.0 - 2.0 * ((k >> j) & 1)
            acc += jij * si * sj
        out[start:start + len(k)] = acc
    return out


def enumerate_ground_states(problem: IsingProblem) -> GroundStateSet:
    """Exhaustive exact ground-state search over all 2^n states.

    Ties are exact float comparisons; with integer-valued coefficients
    (the +-1 spin glasses used throughout) energies are exact integers.
    """
    energies = all_energies(problem)
    emin = float(energies.min())
    idx = np.nonzero(energies == emin)[0]
    n = problem.num_variables
    states = tuple(index_to_state(int(i), n) for i in idx)
    return GroundStateSet(energy=emin,
                          indices=tuple(int(i) for i in idx),
                          states=states)


def hamming_distance_proportion(a: Sequence[int], b: Sequence[int]) -> float:
    """Fraction of positions where two equal-length states differ."""
    if len(a) != len(b):
        raise ValueError(f"state lengths differ: {len(a)} vs {len(b)}")
    diff = sum(1 for x, y in zip(a, b) if x != y)
    return diff / len(a)


def delta_metric(problem: IsingProblem, initial: Sequence[int],
                 gs: Sequence[int]) -> float:
    """Degree-weighted distance of an initial state from a ground state.

    Averages the coupler-graph degree over the differing variables and
    divides once more by their count; the reflexive case (no differing
    variables) is defined as M+1 where M is the largest degree in the
    coupler graph.
    """
    n = problem.num_variables
    if len(initial) != n or len(gs) != n:
        raise ValueError("state lengths must match num_variables")
    differing = [v for v in range(n) if initial[v] != gs[v]]
    if not differing:
        return float(problem.max_degree() + 1)
    deg = problem.degrees()
    total = float(sum(deg[v] for v in differing))
    return (total / len(differing)) / len(differing)


def random_spin_glass(edges: Iterable[Tuple[int, int]], seed: int,
                      name: str = "") -> IsingProblem:
    """J_ij drawn uniformly from {-1,+1} per edge; no linear terms.

    Edge order fixes the draw order, so results are deterministic for a
    fixed seed.
    """
    edge_list = []
    seen = set()
    nmax = -1
    for i, j in edges:
        if i == j:
            raise ValueError(f"self-loop ({i}, {j}) not allowed")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise ValueError(f"duplicate edge {key}")
        seen.add(key)
        edge_list.append(key)
        nmax = max(nmax, key[1])
    rng = np.random.default_rng(seed)
    quad = {e: float(v)
            for e, v in zip(edge_list, rng.choice([-1.0, 1.0],
                                                  size=len(edge_list)))}
    return IsingProblem(num_variables=nmax + 1, quadratic=quad, name=name)


class InstanceFormatError(ValueError):
    """Raised when an instance file violates the schema."""


def problem_to_dict(problem: IsingProblem) -> dict:
    doc = {
        "num_variables": problem.num_variables,
        "linear": {str(i): v for i, v in sorted(problem.linear.items())},
        "quadratic": [[i, j, v] for (i, j), v in sorted(
            problem.quadratic.items())],
    }
    if problem.name:
        doc["name"] = problem.name
    return doc


def problem_from_dict(doc: dict, where: str = "instance") -> IsingProblem:
    if not isinstance(doc, dict):
        raise InstanceFormatError(f"{where}: expected an object")
    try:
        n = int(doc["num_variables"])
    except KeyError:
        raise InstanceFormatError(f"{where}: missing num_variables")
    except (TypeError, ValueError):
        raise InstanceFormatError(f"{where}: num_variables must be an integer")
    linear: Dict[int, float] = {}
    for key, val in (doc.get("linear") or {}).items():
        try:
            i = int(key)
        except ValueError:
            raise InstanceFormatError(
                f"{where}: linear key {key!r} is not an integer index")
        if not 0 <= i < n:
            raise InstanceFormatError(
                f"{where}: linear index {i} out of range [0, {n})")
        if i in linear:
            raise InstanceFormatError(f"{where}: duplicate linear index {i}")
        linear[i] = float(val)
    quadratic: Dict[Tuple[int, int], float] = {}
    for pos, entry in enumerate(doc.get("quadratic") or []):
        label = f"{where}: quadratic[{pos}]"
        if not (isinstance(entry, (list, tuple)) and len(entry) == 3):
            raise InstanceFormatError(f"{label}: expected [i, j, J]")
        i, j, val = entry
        if not (isinstance(i, int) and isinstance(j, int)):
            raise InstanceFormatError(f"{label}: indices must be integers")
        if not (0 <= i < j < n):
            raise InstanceFormatError(
                f"{label}: indices ({i}, {j}) must satisfy 0 <= i < j < {n}")
        if (i, j) in quadratic:
            raise InstanceFormatError(f"{label}: duplicate pair ({i}, {j})")
        quadratic[(i, j)] = float(val)
    return IsingProblem(num_variables=n, linear=linear, quadratic=quadratic,
                        name=str(doc.get("name", "")))


def load_instance(path: str) -> IsingProblem:
    """Load a problem from a JSON instance file with precise diagnostics."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(
            f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: "
            f"{exc.msg}") from exc
    return problem_from_dict(doc, where=path)


def save_instance(problem: IsingProblem, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(problem_to_dict(problem), fh, indent=2, sort_keys=True)
        fh.write("\n")
