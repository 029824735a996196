"""Independent reference implementations used only as test oracles.

Everything here is written from first principles, deliberately avoiding
the package's code paths and idioms, so that agreement between the two
routes is meaningful evidence of correctness.
"""
from __future__ import annotations

import itertools
from typing import Dict, List, Sequence, Set, Tuple

import numpy as np

TWO_PI = 2.0e3 * np.pi  # GHz * us -> radians


def brute_force_ground_states(num_variables: int,
                              linear: Dict[int, float],
                              quadratic: Dict[Tuple[int, int], float]) \
        -> Tuple[float, List[int]]:
    """Exhaustive minimum via itertools over spin tuples (no numpy)."""
    best_energy = None
    best_indices: List[int] = []
    for spins in itertools.product((1, -1), repeat=num_variables):
        e = 0.0
        for i, h in linear.items():
            e += h * spins[i]
        for (i, j), coupling in quadratic.items():
            e += coupling * spins[i] * spins[j]
        # canonical index without bit operators: 2^j per negative spin
        idx = sum(2 ** j for j, s in enumerate(spins) if s < 0)
        if best_energy is None or e < best_energy - 1e-12:
            best_energy = e
            best_indices = [idx]
        elif abs(e - best_energy) <= 1e-12:
            best_indices.append(idx)
    assert best_energy is not None
    return best_energy, sorted(best_indices)


def rk4_evolve(h_of_t, psi0: np.ndarray, t0: float, t1: float,
               steps: int) -> np.ndarray:
    """Classic fixed-step RK4 for i dpsi/dt = 2*pi*1e3 H(t) psi."""
    psi = psi0.astype(complex).copy()
    dt = (t1 - t0) / steps

    def f(t: float, y: np.ndarray) -> np.ndarray:
        return -1j * TWO_PI * (h_of_t(t) @ y)

    for k in range(steps):
        t = t0 + k * dt
        k1 = f(t, psi)
        k2 = f(t + 0.5 * dt, psi + 0.5 * dt * k1)
        k3 = f(t + 0.5 * dt, psi + 0.5 * dt * k2)
        k4 = f(t + dt, psi + dt * k3)
        psi = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return psi


# The same physical offsets as the production code, restated here; the
# oracle applies them through a different rule (interval pair-testing).
_VOFF = (2, 2, 2, 2, 10, 10, 10, 10, 6, 6, 6, 6)
_HOFF = (6, 6, 6, 6, 2, 2, 2, 2, 10, 10, 10, 10)


def pegasus_pair_oracle(m: int) -> Tuple[Set[Tuple[tuple, tuple]], Set[tuple]]:
    """Internal couplers by exhaustive pair testing of coordinate tuples.

    A vertical qubit (0, w, k, z) occupies column x = 12w + k over rows
    [12z + VOFF[k], 12z + VOFF[k] + 12); a horizontal qubit (1, w2, k2, z2)
    occupies row y = 12w2 + k2 over columns [12z2 + HOFF[k2] .. + 12).
    They are coupled iff each one's line coordinate falls inside the
    other's interval. Returns (internal coordinate edges, fabric coords).
    """
    verticals = [(w, k, z) for w in range(m) for k in range(12)
                 for z in range(m - 1)]
    horizontals = [(w2, k2, z2) for w2 in range(m) for k2 in range(12)
                   for z2 in range(m - 1)]
    # vectorized interval containment over the full cartesian product
    v = np.array(verticals)
    h = np.array(horizontals)
    vx = 12 * v[:, 0] + v[:, 1]
    vy0 = 12 * v[:, 2] + np.asarray(_VOFF)[v[:, 1]]
    hy = 12 * h[:, 0] + h[:, 1]
    hx0 = 12 * h[:, 2] + np.asarray(_HOFF)[h[:, 1]]
    row_ok = (hy[None, :] >= vy0[:, None]) & (hy[None, :] < vy0[:, None] + 12)
    col_ok = (vx[:, None] >= hx0[None, :]) & (vx[:, None] < hx0[None, :] + 12)
    pairs = np.argwhere(row_ok & col_ok)
    edges = set()
    fabric = set()
    for vi, hi in pairs:
        a = (0,) + verticals[vi]
        b = (1,) + horizontals[hi]
        edges.add((a, b))
        fabric.add(a)
        fabric.add(b)
    return edges, fabric


def pearson_reference(x: Sequence[float], y: Sequence[float]) -> float:
    """Textbook two-pass formula via numpy's covariance matrix."""
    c = np.corrcoef(np.asarray(x, float), np.asarray(y, float))
    return float(c[0, 1])
