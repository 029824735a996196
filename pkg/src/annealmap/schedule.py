"""Piecewise-linear anneal/h-gain schedules and envelope functions A(s), B(s).

Times are microseconds throughout. Schedules are right-continuous at
duplicated anchor times (an instantaneous step takes the later value).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .ising import SpinState

DEFAULT_A_MAX_GHZ = 6.0
DEFAULT_B_MAX_GHZ = 12.0
HGAIN_MAX_POINTS = 20
HGAIN_MAX_MAGNITUDE = 3.0
HGAIN_MAX_SLOPE_PER_US = 1000.0

# default anchor templates on the unscaled 100 us clock
REVERSE_ANCHORS_100US = ((0.0, 1.0), (20.0, 0.65), (80.0, 0.65), (100.0, 1.0))
HGAIN_ANCHORS_100US = ((0.0, 0.0), (0.05, 0.0), (0.1, None), (99.1, None),
                       (99.15, 0.0), (100.0, 0.0))
FORWARD_ANCHORS_100US = ((0.0, 0.0), (100.0, 1.0))


@dataclass(frozen=True)
class PiecewiseLinearSchedule:
    """Ordered (time_us, value) anchors with linear interpolation between."""

    points: Tuple[Tuple[float, float], ...]

    def __post_init__(self) -> None:
        pts = tuple((float(t), float(v)) for t, v in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 2:
            raise ValueError("schedule needs at least 2 points")
        times = [t for t, _ in pts]
        if times[0] != 0.0:
            raise ValueError(f"first anchor time must be 0, got {times[0]}")
        for a, b in zip(times, times[1:]):
            if b < a:
                raise ValueError(f"anchor times must be non-decreasing "
                                 f"({a} then {b})")

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.points])

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.points])

    @property
    def duration(self) -> float:
        return self.points[-1][0]


def eval_schedule(sched: PiecewiseLinearSchedule, t: float) -> float:
    """Linear interpolation; right-continuous at duplicated anchor times."""
    ts = sched.times
    vs = sched.values
    if t < ts[0] or t > ts[-1]:
        raise ValueError(
            f"t = {t} outside schedule range [{ts[0]}, {ts[-1]}]")
    # index of the last anchor with time <= t; at a duplicated time this is
    # the later anchor, giving right-continuity
    i = int(np.searchsorted(ts, t, side="right")) - 1
    if i >= len(ts) - 1:
        return float(vs[-1])
    if ts[i] == t:
        return float(vs[i])
    t0, t1 = ts[i], ts[i + 1]
    lam = (t - t0) / (t1 - t0)
    return float(vs[i] * (1.0 - lam) + vs[i + 1] * lam)


def validate_hgain_schedule(
        sched: PiecewiseLinearSchedule,
        max_points: int = HGAIN_MAX_POINTS,
        max_magnitude: float = HGAIN_MAX_MAGNITUDE,
        max_slope: float = HGAIN_MAX_SLOPE_PER_US) -> List[str]:
    """Device-limit check; returns a list of violations (empty == valid).

    Negative plateau values are allowed; only magnitude, point count and
    ramp slope are constrained.
    """
    report: List[str] = []
    pts = sched.points
    if len(pts) > max_points:
        report.append(f"point count {len(pts)} exceeds maximum {max_points}")
    for idx, (t, v) in enumerate(pts):
        if abs(v) > max_magnitude:
            report.append(
                f"anchor {idx} at t={t}: |value| {abs(v)} exceeds "
                f"maximum {max_magnitude}")
    for idx in range(len(pts) - 1):
        (t0, v0), (t1, v1) = pts[idx], pts[idx + 1]
        if t1 == t0:
            if v1 != v0:
                report.append(
                    f"anchors {idx}-{idx + 1}: instantaneous step at "
                    f"t={t0} has unbounded slope")
            continue
        slope = abs((v1 - v0) / (t1 - t0))
        if slope > max_slope:
            report.append(
                f"anchors {idx}-{idx + 1}: |slope| {slope:g} exceeds "
                f"maximum {max_slope:g} per us")
    return report


@dataclass(frozen=True)
class AnnealEnvelope:
    """Sampled A(s), B(s) energy envelopes (GHz), linear in s between rows."""

    s: Tuple[float, ...]
    a_ghz: Tuple[float, ...]
    b_ghz: Tuple[float, ...]

    def a(self, s: float) -> float:
        return float(np.interp(s, self.s, self.a_ghz))

    def b(self, s: float) -> float:
        return float(np.interp(s, self.s, self.b_ghz))


def load_envelope(rows: Iterable[Tuple[float, float, float]]) \
        -> AnnealEnvelope:
    """Build an envelope from (s, A_GHz, B_GHz) rows, validating invariants."""
    s_list: List[float] = []
    a_list: List[float] = []
    b_list: List[float] = []
    for rownum, row in enumerate(rows):
        try:
            s, a, b = (float(x) for x in row)
        except (TypeError, ValueError):
            raise ValueError(f"envelope row {rownum}: expected three numbers")
        if s_list:
            if s <= s_list[-1]:
                raise ValueError(
                    f"envelope row {rownum}: s must be strictly increasing")
            if a > a_list[-1]:
                raise ValueError(
                    f"envelope row {rownum}: A must be non-increasing")
            if b < b_list[-1]:
                raise ValueError(
                    f"envelope row {rownum}: B must be non-decreasing")
        s_list.append(s)
        a_list.append(a)
        b_list.append(b)
    if len(s_list) < 2:
        raise ValueError("envelope needs at least 2 rows")
    if s_list[0] != 0.0 or s_list[-1] != 1.0:
        raise ValueError(
            f"envelope s range must be [0, 1], got "
            f"[{s_list[0]}, {s_list[-1]}]")
    return AnnealEnvelope(tuple(s_list), tuple(a_list), tuple(b_list))


def load_envelope_csv(path: str) -> AnnealEnvelope:
    """Read `s,A_GHz,B_GHz` comma-separated text with a header row."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != \
                ["s", "A_GHz", "B_GHz"]:
            raise ValueError(
                f"{path}: expected header 's,A_GHz,B_GHz', got {header}")
        rows = [tuple(cell for cell in row) for row in reader if row]
    try:
        return load_envelope(rows)  # type: ignore[arg-type]
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc


def default_envelope(a_max: float = DEFAULT_A_MAX_GHZ,
                     b_max: float = DEFAULT_B_MAX_GHZ,
                     samples: int = 1001) -> AnnealEnvelope:
    """Analytic stand-in A(s) = a_max*(1-s)^2, B(s) = b_max*s, sampled.

    Endpoints are exact: A(1) = 0, B(0) = 0, B(1) = b_max.
    """
    s = np.linspace(0.0, 1.0, samples)
    a = a_max * (1.0 - s) ** 2
    b = b_max * s
    return AnnealEnvelope(tuple(s), tuple(a), tuple(b))


@dataclass(frozen=True)
class AnnealSpec:
    """One anneal: s(t) schedule, optional g(t), duration, initial state."""

    anneal_schedule: PiecewiseLinearSchedule
    annealing_time: float
    hgain_schedule: Optional[PiecewiseLinearSchedule] = None
    initial_state: Optional[SpinState] = None
    num_reads: int = 1000
    reinitialize_state: bool = True
    time_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.annealing_time <= 0:
            raise ValueError("annealing_time must be positive")
        if self.time_scale <= 0:
            raise ValueError("time_scale must be positive")
        if self.num_reads < 1:
            raise ValueError("num_reads must be >= 1")
        sched = self.anneal_schedule
        if sched.points[0][0] != 0.0 or \
                sched.points[-1][0] != self.annealing_time:
            raise ValueError(
                f"anneal schedule must span [0, {self.annealing_time}], "
                f"got [{sched.points[0][0]}, {sched.points[-1][0]}]")
        start, end = sched.points[0][1], sched.points[-1][1]
        if self.initial_state is not None:
            if start != 1.0 or end != 1.0:
                raise ValueError(
                    "reverse anneal (initial_state given) must start and "
                    f"end at s = 1, got s = {start} .. {end}")
        else:
            if start != 0.0 or end != 1.0:
                raise ValueError(
                    f"forward anneal must run s = 0 .. 1, got "
                    f"s = {start} .. {end}")
        if self.hgain_schedule is not None:
            hg = self.hgain_schedule
            if hg.points[0][0] != 0.0 or \
                    hg.points[-1][0] != self.annealing_time:
                raise ValueError(
                    f"h-gain schedule must span [0, {self.annealing_time}]")


def scale_anchors(anchors: Sequence[Tuple[float, Optional[float]]],
                  time_scale: float,
                  plateau: float = 0.0) -> PiecewiseLinearSchedule:
    """Scale template anchor times by time_scale; None values take plateau."""
    pts = tuple((t * time_scale, plateau if v is None else v)
                for t, v in anchors)
    return PiecewiseLinearSchedule(pts)


def reverse_anneal_schedule(time_scale: float = 1.0) \
        -> PiecewiseLinearSchedule:
    """Reverse-anneal shape: s = 1 -> 0.65 (pause) -> 1 on a 100*ts clock."""
    return scale_anchors(REVERSE_ANCHORS_100US, time_scale)


def forward_anneal_schedule(time_scale: float = 1.0) \
        -> PiecewiseLinearSchedule:
    return scale_anchors(FORWARD_ANCHORS_100US, time_scale)


def hgain_plateau_schedule(h_strength: float, time_scale: float = 1.0) \
        -> PiecewiseLinearSchedule:
    """h-gain shape: off, fast ramp to h, plateau, ramp off at the end."""
    return scale_anchors(HGAIN_ANCHORS_100US, time_scale,
                         plateau=h_strength)
