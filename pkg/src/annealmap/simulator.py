"""Anneal backends: dense Schrödinger evolution and spin-vector Monte Carlo.

Units: energies in GHz, times in microseconds; the phase factor 2*pi*1e3
converts GHz*us products to radians. States use the canonical index of
:mod:`annealmap.ising` (bit j = 0 means spin +1 on variable j).
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .ising import (CapabilityError, IsingProblem, SpinState, complement,
                    state_to_index)
from .schedule import (AnnealEnvelope, AnnealSpec,
                       default_envelope, eval_schedule,
                       forward_anneal_schedule, hgain_plateau_schedule,
                       reverse_anneal_schedule)

TWO_PI_GHZ_US = 2.0 * np.pi * 1.0e3
SIMULATOR_LIMIT = 14
DEFAULT_DT_US = 2.5e-5
PRESET_ANNEAL_TIME_US = 100.0

# StateVector: length-2^n complex vector, unit Euclidean norm, indexed by
# the canonical spin-state index.
StateVector = np.ndarray


class IntegrationError(RuntimeError):
    """Raised when the integrator loses unitarity beyond tolerance."""


@dataclass(frozen=True)
class BackendConfig:
    """Numerical knobs for the two backends.

    kind: "schrodinger" or "svmc".
    dt: integration step in us (schrodinger).
    convergence_tolerance: allowed norm drift before failing the run.
    sweeps: Metropolis sweeps across the anneal (svmc); 0 means no updates.
    temperature: Metropolis temperature in GHz-equivalent units (svmc).
    """

    kind: str = "schrodinger"
    dt: float = DEFAULT_DT_US
    convergence_tolerance: float = 1e-6
    sweeps: int = 1000
    temperature: float = 0.05
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("schrodinger", "svmc"):
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.sweeps < 0:
            raise ValueError("sweeps must be >= 0")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.convergence_tolerance <= 0:
            raise ValueError("convergence_tolerance must be positive")


@dataclass(frozen=True)
class SampleSet:
    """Read counts per canonical state index.

    counts holds non-negative numbers; in exact mode they are expected
    counts (floats), otherwise integer draws. Sum equals total_reads.
    """

    counts: Dict[int, float]
    total_reads: float
    provenance: str = ""

    def __post_init__(self) -> None:
        total = sum(self.counts.values())
        if any(c < 0 for c in self.counts.values()):
            raise ValueError("counts must be non-negative")
        if abs(total - self.total_reads) > 1e-9 * max(1.0, self.total_reads):
            raise ValueError(
                f"counts sum {total} != total_reads {self.total_reads}")

    def proportion(self, index: int) -> float:
        return self.counts.get(index, 0.0) / self.total_reads


@dataclass(frozen=True)
class RunPresets:
    """Shared settings for the convenience run operations.

    time_scale rescales the 100 us template clock; the default of 0.01
    gives a 1 us anneal, which dense evolution handles in seconds.
    """

    envelope: AnnealEnvelope = field(default_factory=default_envelope)
    backend: BackendConfig = field(default_factory=BackendConfig)
    time_scale: float = 0.01
    num_reads: int = 1000
    exact_counts: bool = True


@lru_cache(maxsize=2)
def _pauli_x_sum(num_variables: int) -> np.ndarray:
    """Dense sum of single-qubit bit-flip operators (zero diagonal)."""
    dim = 1 << num_variables
    x_sum = np.zeros((dim, dim))
    k = np.arange(dim)
    for j in range(num_variables):
        x_sum[k, k ^ (1 << j)] = 1.0
    return x_sum


def _diag_fields(problem: IsingProblem) -> Tuple[np.ndarray, np.ndarray]:
    """Diagonal of sum(h_i sz_i) and sum(J_ij sz_i sz_j) per basis state."""
    n = problem.num_variables
    dim = 1 << n
    idx = np.arange(dim)
    spins = 1.0 - 2.0 * ((idx[:, None] >> np.arange(n)[None, :]) & 1)
    diag_h = np.zeros(dim)
    for i, h in problem.linear.items():
        diag_h += h * spins[:, i]
    diag_j = np.zeros(dim)
    for (i, j), coupling in problem.quadratic.items():
        diag_j += coupling * spins[:, i] * spins[:, j]
    return diag_h, diag_j


def _check_limit(problem: IsingProblem) -> None:
    if problem.num_variables > SIMULATOR_LIMIT:
        raise CapabilityError(
            f"dense evolution supports at most {SIMULATOR_LIMIT} variables, "
            f"got {problem.num_variables}")


def build_hamiltonian(problem: IsingProblem, a: float, b: float,
                      g: float) -> np.ndarray:
    """H = -(a/2) sum sx + (b/2) (g sum h_i sz_i + sum J_ij sz_i sz_j)."""
    _check_limit(problem)
    diag_h, diag_j = _diag_fields(problem)
    h_matrix = (-0.5 * a) * _pauli_x_sum(problem.num_variables)
    dim = h_matrix.shape[0]
    h_matrix[np.arange(dim), np.arange(dim)] += \
        0.5 * b * (g * diag_h + diag_j)
    return h_matrix


def uniform_superposition(num_variables: int) -> StateVector:
    dim = 1 << num_variables
    return np.full(dim, 1.0 / math.sqrt(dim), dtype=complex)


def basis_state(index: int, num_variables: int) -> StateVector:
    dim = 1 << num_variables
    if not 0 <= index < dim:
        raise ValueError(f"state index {index} out of range for "
                         f"{num_variables} variables")
    psi = np.zeros(dim, dtype=complex)
    psi[index] = 1.0
    return psi


def _segment_bounds(spec: AnnealSpec) -> np.ndarray:
    times = [spec.anneal_schedule.times]
    if spec.hgain_schedule is not None:
        times.append(spec.hgain_schedule.times)
    return np.unique(np.concatenate(times))


def _g_of(spec: AnnealSpec, t: float) -> float:
    if spec.hgain_schedule is None:
        return 1.0
    return eval_schedule(spec.hgain_schedule, t)


def _a_vanishes_between(envelope: AnnealEnvelope, s_lo: float,
                        s_hi: float) -> bool:
    """True iff the sampled A envelope is exactly zero on [s_lo, s_hi]."""
    if envelope.a(s_lo) != 0.0 or envelope.a(s_hi) != 0.0:
        return False
    s = np.asarray(envelope.s)
    a = np.asarray(envelope.a_ghz)
    inside = (s > s_lo) & (s < s_hi)
    return not np.any(a[inside] != 0.0)


def _eigh_step(x_sum: np.ndarray, diag: np.ndarray, a: float, dur: float,
               psi: np.ndarray) -> np.ndarray:
    """Advance psi by exp(-i*omega*dur*H) with H frozen (exact unitary)."""
    h_matrix = (-0.5 * a) * x_sum
    dim = h_matrix.shape[0]
    h_matrix[np.arange(dim), np.arange(dim)] += diag
    eigvals, eigvecs = np.linalg.eigh(h_matrix)
    phases = np.exp(-1j * TWO_PI_GHZ_US * dur * eigvals)
    return eigvecs @ (phases[:, None] * (eigvecs.conj().T @ psi))


def _propagate(problem: IsingProblem, envelope: AnnealEnvelope,
               spec: AnnealSpec, cfg: BackendConfig, psi: np.ndarray,
               norm_log: Optional[List[float]] = None) -> np.ndarray:
    """Integrate the Schrödinger equation; psi has one column per run.

    When norm_log is a list, the worst-column Euclidean norm after every
    integrator step is appended to it (unitarity diagnostics).
    """

    def observe(vec: np.ndarray) -> None:
        if norm_log is not None:
            norms_now = np.linalg.norm(vec, axis=0)
            norm_log.append(float(
                norms_now[np.argmax(np.abs(norms_now - 1.0))]))

    values = spec.anneal_schedule.values
    if values.min() < 0.0 or values.max() > 1.0:
        raise ValueError(
            f"anneal schedule fraction s must stay within [0, 1], got "
            f"[{values.min()}, {values.max()}]")
    diag_h, diag_j = _diag_fields(problem)
    x_sum = _pauli_x_sum(problem.num_variables)

    def coeffs(t_eval: float, s_val: float, g_val: float) -> \
            Tuple[float, np.ndarray]:
        a = envelope.a(s_val)
        b = envelope.b(s_val)
        return a, 0.5 * b * (g_val * diag_h + diag_j)

    bounds = _segment_bounds(spec)
    for t0, t1 in zip(bounds[:-1], bounds[1:]):
        if t1 <= t0:
            continue
        dur = t1 - t0
        tm = 0.5 * (t0 + t1)
        # schedules are affine inside the segment; the segment-end values
        # are left limits (duplicate anchors at t1 belong to the next one)
        s0 = eval_schedule(spec.anneal_schedule, t0)
        sm = eval_schedule(spec.anneal_schedule, tm)
        s1 = 2.0 * sm - s0
        g0 = _g_of(spec, t0)
        gm = _g_of(spec, tm)
        g1 = 2.0 * gm - g0

        if s0 == s1 and g0 == g1:
            a0, d0 = coeffs(t0, s0, g0)
            psi = _eigh_step(x_sum, d0, a0, dur, psi)
            observe(psi)
        elif _a_vanishes_between(envelope, min(s0, s1), max(s0, s1)):
            # purely diagonal segment: Simpson-integrated phases
            _, d0 = coeffs(t0, s0, g0)
            _, dm = coeffs(tm, sm, gm)
            _, d1 = coeffs(t1, s1, g1)
            integral = (dur / 6.0) * (d0 + 4.0 * dm + d1)
            psi = np.exp(-1j * TWO_PI_GHZ_US * integral)[:, None] * psi
            observe(psi)
        else:
            nsteps = max(1, math.ceil(dur / cfg.dt))
            h_step = dur / nsteps
            for k in range(nsteps):
                tk = t0 + (k + 0.5) * h_step
                sk = eval_schedule(spec.anneal_schedule, tk)
                gk = _g_of(spec, tk)
                ak, dk = coeffs(tk, sk, gk)
                psi = _eigh_step(x_sum, dk, ak, h_step, psi)
                observe(psi)

        norms = np.linalg.norm(psi, axis=0)
        drift = float(np.max(np.abs(norms - 1.0)))
        if drift > cfg.convergence_tolerance:
            raise IntegrationError(
                f"state-vector norm drifted by {drift:.3e} by t = {t1} us "
                f"(tolerance {cfg.convergence_tolerance:.1e}); "
                f"reduce BackendConfig.dt")
    return psi


def _initial_column(problem: IsingProblem, spec: AnnealSpec) -> np.ndarray:
    if spec.initial_state is not None:
        psi0 = basis_state(state_to_index(spec.initial_state),
                           problem.num_variables)
    else:
        psi0 = uniform_superposition(problem.num_variables)
    return psi0[:, None]


def evolve(problem: IsingProblem, envelope: AnnealEnvelope, spec: AnnealSpec,
           cfg: BackendConfig,
           norm_log: Optional[List[float]] = None) -> np.ndarray:
    """Deterministic closed-system evolution; returns |amplitude|^2 per state.

    The start vector is spec.initial_state as a basis state (reverse
    anneal) or the uniform superposition (forward anneal). norm_log, when
    given, collects the state norm after every integrator step.
    """
    if cfg.kind != "schrodinger":
        raise ValueError(f"evolve requires a schrodinger backend, "
                         f"got {cfg.kind!r}")
    _check_limit(problem)
    psi = _propagate(problem, envelope, spec, cfg,
                     _initial_column(problem, spec), norm_log=norm_log)
    return np.abs(psi[:, 0]) ** 2


def propagator(problem: IsingProblem, envelope: AnnealEnvelope,
               spec: AnnealSpec, cfg: BackendConfig) -> np.ndarray:
    """Full unitary U for one anneal; |U[f, i]|^2 is the final probability
    of state f when starting from basis state i, so one call covers every
    initial state of an exhaustive sweep. spec.initial_state is ignored.
    """
    if cfg.kind != "schrodinger":
        raise ValueError(f"propagator requires a schrodinger backend, "
                         f"got {cfg.kind!r}")
    _check_limit(problem)
    dim = 1 << problem.num_variables
    return _propagate(problem, envelope, spec, cfg,
                      np.eye(dim, dtype=complex))


def sample(dist: Sequence[float], num_reads: int, seed: int = 0,
           exact: bool = False, provenance: str = "") -> SampleSet:
    """Multinomial draw from a distribution; exact mode returns expected
    counts (num_reads * p) without randomness."""
    p = np.asarray(dist, dtype=float)
    if num_reads < 1:
        raise ValueError("num_reads must be >= 1")
    if p.min() < -1e-12:
        raise ValueError(f"negative probability {p.min()}")
    total = p.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"distribution sums to {total}, expected 1")
    p = np.clip(p, 0.0, None)
    if exact:
        counts = {int(i): float(p[i]) * num_reads for i in np.nonzero(p)[0]}
        return SampleSet(counts, float(num_reads), provenance)
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(num_reads, p / p.sum())
    counts = {int(i): int(draws[i]) for i in np.nonzero(draws)[0]}
    return SampleSet(counts, num_reads, provenance)


def _svmc_initial_angles(problem: IsingProblem, spec: AnnealSpec,
                         reads: int) -> np.ndarray:
    n = problem.num_variables
    if spec.initial_state is not None:
        base = np.where(np.asarray(spec.initial_state) > 0, 0.0, np.pi)
    else:
        base = np.full(n, 0.5 * np.pi)
    return np.tile(base, (reads, 1))


def svmc_evolve(problem: IsingProblem, envelope: AnnealEnvelope,
                spec: AnnealSpec, cfg: BackendConfig) -> SampleSet:
    """Classical spin-vector dynamics: per-read planar angles theta_i follow
    Metropolis updates against
    E(theta, t) = -(A/2) sum sin(theta_i)
                  + (B/2) (g sum h_i cos(theta_i)
                           + sum J_ij cos(theta_i) cos(theta_j)).
    Final spins are sign(cos theta) with ties broken to +1.
    """
    if cfg.kind != "svmc":
        raise ValueError(f"svmc_evolve requires an svmc backend, "
                         f"got {cfg.kind!r}")
    n = problem.num_variables
    reads = spec.num_reads
    rng = np.random.default_rng(cfg.seed)
    theta = _svmc_initial_angles(problem, spec, reads)
    cos_t = np.cos(theta)
    sin_t = np.sin(theta)

    h_vec = np.zeros(n)
    for i, h in problem.linear.items():
        h_vec[i] = h
    j_mat = np.zeros((n, n))
    for (i, j), coupling in problem.quadratic.items():
        j_mat[i, j] = coupling
        j_mat[j, i] = coupling

    total_time = spec.annealing_time
    for k in range(cfg.sweeps):
        t = (k + 0.5) / cfg.sweeps * total_time
        s = eval_schedule(spec.anneal_schedule, t)
        a = envelope.a(s)
        b = envelope.b(s)
        g = _g_of(spec, t)
        for i in range(n):
            proposal = rng.uniform(0.0, np.pi, reads)
            cos_p = np.cos(proposal)
            sin_p = np.sin(proposal)
            local = g * h_vec[i] + cos_t @ j_mat[:, i]
            delta = (-0.5 * a) * (sin_p - sin_t[:, i]) \
                + 0.5 * b * local * (cos_p - cos_t[:, i])
            accept = rng.random(reads) < \
                np.exp(-np.maximum(delta, 0.0) / cfg.temperature)
            theta[accept, i] = proposal[accept]
            cos_t[accept, i] = cos_p[accept]
            sin_t[accept, i] = sin_p[accept]

    bits = (cos_t < 0.0).astype(np.int64)
    indices = bits @ (1 << np.arange(n, dtype=np.int64))
    uniq, cnts = np.unique(indices, return_counts=True)
    counts = {int(u): int(c) for u, c in zip(uniq, cnts)}
    return SampleSet(counts, reads,
                     provenance=f"svmc seed={cfg.seed} sweeps={cfg.sweeps}")


def encode_target_state(problem: IsingProblem,
                        target: SpinState) -> IsingProblem:
    """Replace the linear terms with the complement of the target state, so
    an applied h-gain field pulls the anneal toward that state."""
    comp = complement(target)
    linear = {i: float(spin) for i, spin in enumerate(comp)}
    return dataclasses.replace(problem, linear=linear)


def _run_spec(problem: IsingProblem, spec: AnnealSpec,
              presets: RunPresets, provenance: str) -> SampleSet:
    if presets.backend.kind == "svmc":
        return svmc_evolve(problem, presets.envelope, spec, presets.backend)
    dist = evolve(problem, presets.envelope, spec, presets.backend)
    return sample(dist, presets.num_reads, seed=presets.backend.seed,
                  exact=presets.exact_counts, provenance=provenance)


def reverse_anneal_run(problem: IsingProblem, initial: SpinState,
                       h_strength: float,
                       presets: Optional[RunPresets] = None,
                       target: Optional[SpinState] = None) -> SampleSet:
    """Reverse anneal from `initial` with an h-gain plateau at h_strength.

    The h-gain field pulls toward `target` (default: the initial state)
    by rewriting the problem's linear terms as the complement of that
    state before the run.
    """
    presets = presets or RunPresets()
    target = tuple(target) if target is not None else tuple(initial)
    encoded = encode_target_state(problem, target)
    duration = PRESET_ANNEAL_TIME_US * presets.time_scale
    spec = AnnealSpec(
        anneal_schedule=reverse_anneal_schedule(presets.time_scale),
        annealing_time=duration,
        hgain_schedule=hgain_plateau_schedule(h_strength,
                                              presets.time_scale),
        initial_state=tuple(initial),
        num_reads=presets.num_reads,
        time_scale=presets.time_scale)
    provenance = (f"reverse_anneal h={h_strength} "
                  f"target={state_to_index(target)} "
                  f"initial={state_to_index(tuple(initial))}")
    return _run_spec(encoded, spec, presets, provenance)


def forward_anneal_run(problem: IsingProblem,
                       presets: Optional[RunPresets] = None) -> SampleSet:
    """Plain forward anneal from the uniform superposition."""
    presets = presets or RunPresets()
    duration = PRESET_ANNEAL_TIME_US * presets.time_scale
    spec = AnnealSpec(
        anneal_schedule=forward_anneal_schedule(presets.time_scale),
        annealing_time=duration,
        num_reads=presets.num_reads,
        time_scale=presets.time_scale)
    return _run_spec(problem, spec, presets, "forward_anneal")


def distribution_to_csv(dist: Sequence[float], path: str) -> None:
    """Write `state_index,probability` rows for every state."""
    p = np.asarray(dist, dtype=float)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("state_index,probability\n")
        for i, value in enumerate(p):
            fh.write(f"{i},{value:.17g}\n")
