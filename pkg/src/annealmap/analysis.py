"""Metric pipeline: ground-state proportions, h-gain response curves,
susceptibility, per-ground-state aggregates, Pearson correlation, and
spectral clustering of response curves."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .ising import (GroundStateSet, IsingProblem, SpinState, delta_metric,
                    energy, enumerate_ground_states,
                    hamming_distance_proportion, index_to_state,
                    state_to_index)
from .simulator import RunPresets, SampleSet, reverse_anneal_run

CHI_UPPER_BOUND = 31.0 / 30.0
DEFAULT_GAMMA = 1.0
DEFAULT_N_INIT = 10
DEFAULT_KMEANS_MAX_ITER = 300

Distribution = Union[SampleSet, Sequence[float]]


@dataclass(frozen=True)
class HGrid:
    """Ordered h-gain plateau strengths to sweep."""

    values: Tuple[float, ...]

    def __post_init__(self) -> None:
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) < 2:
            raise ValueError("h grid needs at least 2 values")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("h grid must be strictly increasing")

    def __len__(self) -> int:
        return len(self.values)

    @classmethod
    def default(cls, include_zero: bool = True) -> "HGrid":
        """0.0 to 3.0 in steps of 0.1 (31 points); include_zero=False drops
        the leading 0.0 for the 30-point variant."""
        values = np.linspace(0.0, 3.0, 31)
        if not include_zero:
            values = values[1:]
        return cls(tuple(values))


@dataclass(frozen=True)
class ResponseCurve:
    """P_GS as a function of the h grid for one (initial, target) pair."""

    initial_state: int
    target_gs: int
    p_gs: Tuple[float, ...]

    def __post_init__(self) -> None:
        vals = tuple(float(v) for v in self.p_gs)
        object.__setattr__(self, "p_gs", vals)
        if any(v < -1e-12 or v > 1.0 + 1e-12 for v in vals):
            raise ValueError("response-curve entries must lie in [0, 1]")


@dataclass(frozen=True)
class SusceptibilityRecord:
    """chi for one (initial, target) pair plus the companion state metrics.

    chi is bounded by n/(n-1) for an n-point grid; the record does not
    know the grid, so it enforces the universal limit of 2 (the 2-point
    case). Curves built from valid probabilities can never exceed their
    own grid's bound, 31/30 on the default grid.
    """

    initial_state: int
    target_gs: int
    chi: float
    delta: float
    energy: float
    hamming: float

    def __post_init__(self) -> None:
        if not -1e-12 <= self.chi <= 2.0 + 1e-12:
            raise ValueError(
                f"chi = {self.chi} outside [0, 2], the bound for the "
                f"shortest valid h grid")
        if not -1e-12 <= self.hamming <= 1.0 + 1e-12:
            raise ValueError(f"hamming = {self.hamming} outside [0, 1]")


@dataclass(frozen=True)
class ClusterAssignment:
    """Cluster id per key (initial-state index), ids in [0, k)."""

    labels: Dict[int, int]
    k: int
    seed: int

    def __post_init__(self) -> None:
        if any(not 0 <= c < self.k for c in self.labels.values()):
            raise ValueError("cluster ids must lie in [0, k)")


def _as_proportions(samples: Distribution) -> Dict[int, float]:
    if isinstance(samples, SampleSet):
        if samples.total_reads <= 0:
            raise ValueError("sample set has no reads")
        return {i: c / samples.total_reads
                for i, c in samples.counts.items()}
    dist = np.asarray(samples, dtype=float)
    if dist.size == 0:
        raise ValueError("empty distribution")
    return {int(i): float(dist[i]) for i in np.nonzero(dist)[0]}


def _state_index(state: Union[int, Sequence[int]]) -> int:
    if isinstance(state, (int, np.integer)):
        return int(state)
    return state_to_index(state)


def pgs(samples: Distribution, gs: Union[int, SpinState]) -> float:
    """Proportion of reads (or probability mass) on the given ground state."""
    return _as_proportions(samples).get(_state_index(gs), 0.0)


def gs_distribution(samples: Distribution, gs_set: GroundStateSet) \
        -> Dict[int, float]:
    """Per-ground-state share of all ground-state hits; sums to 1."""
    props = _as_proportions(samples)
    hits = {i: props.get(i, 0.0) for i in gs_set.indices}
    total = sum(hits.values())
    if total <= 0.0:
        raise ValueError("no ground-state mass in the sample set")
    return {i: v / total for i, v in hits.items()}


def sweep_response_curve(
        problem: IsingProblem,
        initial: Union[int, SpinState],
        target_gs: Union[int, SpinState],
        grid: Optional[HGrid] = None,
        presets: Optional[RunPresets] = None,
) -> Tuple[ResponseCurve, List[np.ndarray]]:
    """Reverse-anneal `initial` toward `target_gs` at every grid strength.

    Returns the response curve plus the full per-h final distributions
    (as probability vectors) for transition-network construction.
    """
    grid = grid or HGrid.default()
    presets = presets or RunPresets()
    n = problem.num_variables
    init_idx = _state_index(initial)
    target_idx = _state_index(target_gs)
    gs_set = enumerate_ground_states(problem)
    if target_idx not in gs_set.indices:
        raise ValueError(
            f"target state {target_idx} is not a ground state of "
            f"{problem.name or 'the problem'}")
    init_state = index_to_state(init_idx, n)
    target_state = index_to_state(target_idx, n)

    p_values: List[float] = []
    distributions: List[np.ndarray] = []
    for h in grid.values:
        samples = reverse_anneal_run(problem, init_state, h,
                                     presets=presets, target=target_state)
        dist = np.zeros(1 << n)
        for i, c in samples.counts.items():
            dist[i] = c / samples.total_reads
        distributions.append(dist)
        p_values.append(float(dist[target_idx]))
    curve = ResponseCurve(init_idx, target_idx, tuple(p_values))
    return curve, distributions


def chi(curve: Union[ResponseCurve, Sequence[float]]) -> float:
    """Susceptibility: sum of the P_GS values divided by (grid length - 1).

    With the default 31-point grid this is literally 31 summands over 30,
    so chi can marginally exceed 1 by construction.
    """
    values = curve.p_gs if isinstance(curve, ResponseCurve) else curve
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        raise ValueError("chi needs at least 2 grid points")
    return float(values.sum() / (values.size - 1))


def susceptibility_record(problem: IsingProblem,
                          curve: ResponseCurve) -> SusceptibilityRecord:
    """Attach the companion state metrics (delta, energy, hamming) to chi."""
    n = problem.num_variables
    init_state = index_to_state(curve.initial_state, n)
    target_state = index_to_state(curve.target_gs, n)
    return SusceptibilityRecord(
        initial_state=curve.initial_state,
        target_gs=curve.target_gs,
        chi=chi(curve),
        delta=delta_metric(problem, init_state, target_state),
        energy=energy(problem, init_state),
        hamming=hamming_distance_proportion(init_state, target_state))


def average_chi_per_gs(records: Sequence[SusceptibilityRecord]) \
        -> Dict[int, float]:
    """Mean chi over all initial states, keyed by target ground state."""
    if not records:
        raise ValueError("no records")
    by_gs: Dict[int, List[SusceptibilityRecord]] = {}
    for rec in records:
        by_gs.setdefault(rec.target_gs, []).append(rec)
    for gs, recs in by_gs.items():
        initials = {r.initial_state for r in recs}
        size = len(initials)
        if len(recs) != size or size & (size - 1) != 0 or \
                initials != set(range(size)):
            warnings.warn(
                f"records for ground state {gs} do not cover all initial "
                f"states exactly once; mean is over the provided subset")
    return {gs: float(np.mean([r.chi for r in recs]))
            for gs, recs in sorted(by_gs.items())}


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    xv = np.asarray(x, dtype=float)
    yv = np.asarray(y, dtype=float)
    if xv.shape != yv.shape or xv.ndim != 1:
        raise ValueError("pearson needs two equal-length vectors")
    if xv.size < 2:
        raise ValueError("pearson needs at least 2 samples")
    dx = xv - xv.mean()
    dy = yv - yv.mean()
    sx = float(np.sqrt(np.dot(dx, dx)))
    sy = float(np.sqrt(np.dot(dy, dy)))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("pearson undefined for zero-variance input")
    return float(np.dot(dx, dy) / (sx * sy))


def _kmeans_pp_init(points: np.ndarray, k: int,
                    rng: np.random.Generator) -> np.ndarray:
    """Seeded k-means++ center selection."""
    m = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    first = int(rng.integers(m))
    centers[0] = points[first]
    dist_sq = np.sum((points - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = dist_sq.sum()
        if total <= 0.0:
            idx = int(rng.integers(m))
        else:
            idx = int(rng.choice(m, p=dist_sq / total))
        centers[c] = points[idx]
        dist_sq = np.minimum(dist_sq,
                             np.sum((points - centers[c]) ** 2, axis=1))
    return centers


def _lloyd(points: np.ndarray, centers: np.ndarray,
           max_iter: int) -> Tuple[np.ndarray, float]:
    k = centers.shape[0]
    labels: Optional[np.ndarray] = None
    for _iteration in range(max_iter):
        sq = np.sum((points[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        new_labels = np.argmin(sq, axis=1)
        # revive any emptied cluster with the worst-fit point
        for c in range(k):
            if not np.any(new_labels == c):
                worst = int(np.argmax(sq[np.arange(len(new_labels)),
                                         new_labels]))
                new_labels[worst] = c
                sq[worst, :] = np.inf
                sq[worst, c] = 0.0
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            centers[c] = points[labels == c].mean(axis=0)
    assert labels is not None
    inertia = float(np.sum((points - centers[labels]) ** 2))
    return labels, inertia


def spectral_cluster(vectors: Sequence[Sequence[float]], k: int = 4,
                     seed: int = 0, gamma: float = DEFAULT_GAMMA,
                     n_init: int = DEFAULT_N_INIT,
                     keys: Optional[Sequence[int]] = None) \
        -> ClusterAssignment:
    """Gaussian-affinity spectral clustering with deterministic k-means.

    Pipeline: W = exp(-gamma * squared distance); symmetric normalized
    Laplacian; rows of the k lowest eigenvectors, row-normalized; seeded
    k-means++ with n_init restarts, best inertia wins (ties go to the
    lowest restart index); labels renumbered by ascending smallest member.
    """
    try:
        points = np.asarray(vectors, dtype=float)
    except ValueError:
        points = None
    if points is None or points.ndim != 2:
        raise ValueError("vectors must be equal-length 1-D sequences")
    m = points.shape[0]
    if k < 1:
        raise ValueError("k must be >= 1")
    if m < k:
        raise ValueError(f"need at least k={k} vectors, got {m}")
    if keys is None:
        keys = list(range(m))
    elif len(keys) != m:
        raise ValueError("keys length must match the number of vectors")

    diff = points[:, None, :] - points[None, :, :]
    affinity = np.exp(-gamma * np.sum(diff ** 2, axis=2))
    degree = affinity.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(degree)
    laplacian = np.eye(m) - inv_sqrt[:, None] * affinity * inv_sqrt[None, :]
    eigvals, eigvecs = np.linalg.eigh(laplacian)
    embedding = eigvecs[:, :k]
    row_norms = np.linalg.norm(embedding, axis=1)
    safe = row_norms > 0
    embedding = embedding.copy()
    embedding[safe] /= row_norms[safe, None]

    rng = np.random.default_rng(seed)
    best_labels: Optional[np.ndarray] = None
    best_inertia = np.inf
    for _restart in range(n_init):
        centers = _kmeans_pp_init(embedding, k, rng)
        labels, inertia = _lloyd(embedding, centers,
                                 DEFAULT_KMEANS_MAX_ITER)
        if inertia < best_inertia:
            best_inertia = inertia
            best_labels = labels
    assert best_labels is not None

    # renumber cluster ids by their smallest member position
    order = sorted(set(best_labels.tolist()),
                   key=lambda c: int(np.argmax(best_labels == c)))
    remap = {old: new for new, old in enumerate(order)}
    labels_map = {int(key): remap[int(lab)]
                  for key, lab in zip(keys, best_labels)}
    return ClusterAssignment(labels=labels_map, k=k, seed=seed)


def response_curves_to_csv(curves: Sequence[ResponseCurve], grid: HGrid,
                           path: str) -> None:
    """Write `gs_index,initial_state,h,p_gs` rows, sorted for determinism."""
    rows = sorted(curves, key=lambda c: (c.target_gs, c.initial_state))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("gs_index,initial_state,h,p_gs\n")
        for curve in rows:
            for h, p in zip(grid.values, curve.p_gs):
                fh.write(f"{curve.target_gs},{curve.initial_state},"
                         f"{h:.17g},{p:.17g}\n")


def records_to_csv(records: Sequence[SusceptibilityRecord],
                   path: str) -> None:
    rows = sorted(records, key=lambda r: (r.target_gs, r.initial_state))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("gs_index,initial_state,chi,delta,energy,hamming\n")
        for r in rows:
            fh.write(f"{r.target_gs},{r.initial_state},{r.chi:.17g},"
                     f"{r.delta:.17g},{r.energy:.17g},{r.hamming:.17g}\n")


def clusters_to_csv(assignments: Dict[int, ClusterAssignment],
                    path: str) -> None:
    """One row per (target gs, initial state): `gs_index,initial_state,
    cluster`."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("gs_index,initial_state,cluster\n")
        for gs_index in sorted(assignments):
            labels = assignments[gs_index].labels
            for initial in sorted(labels):
                fh.write(f"{gs_index},{initial},{labels[initial]}\n")
