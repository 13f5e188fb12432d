"""Counting and at-risk processes built from one trajectory, per mark cell.

The carrier type is a right-continuous pure-jump step function stored as
sorted jump times plus increments; event composition then reduces to sorted
merges and the at-risk count is represented exactly by placing its unit
drops one float ulp after each sojourn (a sojourn equal to ``t`` is still at
risk at ``t``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParseError
from .partition import Cell


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Right-continuous step function: ``value(t) = origin + sum of increments at times <= t``.

    Times are strictly increasing; construct via :meth:`from_jumps` to sort
    and aggregate tied times.
    """

    times: np.ndarray
    increments: np.ndarray
    origin: float = 0.0

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        incs = np.asarray(self.increments, dtype=float)
        if times.shape != incs.shape or times.ndim != 1:
            raise ValueError("times and increments must be 1-d arrays of equal length")
        if times.size and not np.all(np.diff(times) > 0):
            raise ValueError("jump times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "increments", incs)
        levels = float(self.origin) + np.cumsum(incs)
        object.__setattr__(self, "_levels", levels)
        object.__setattr__(self, "_lookup", np.concatenate(([self.origin], levels)))

    @classmethod
    def from_jumps(cls, times, increments, origin: float = 0.0,
                   tie_tol: float = 0.0) -> "StepFunction":
        """Build from unordered jumps, aggregating ties into one increment.

        ``tie_tol`` merges imported event times closer than the tolerance;
        simulator output needs none (equal times compare exactly).
        """
        times = np.asarray(times, dtype=float)
        increments = np.asarray(increments, dtype=float)
        order = np.argsort(times, kind="stable")
        times = times[order]
        increments = increments[order]
        if times.size:
            keep = np.empty(times.size, dtype=bool)
            keep[0] = True
            np.greater(np.diff(times), tie_tol, out=keep[1:])
            group = np.cumsum(keep) - 1
            agg_times = times[keep]
            agg_incs = np.zeros(agg_times.size)
            np.add.at(agg_incs, group, increments)
        else:
            agg_times, agg_incs = times, increments
        return cls(agg_times, agg_incs, origin)

    @classmethod
    def zero(cls) -> "StepFunction":
        return cls(np.empty(0), np.empty(0), 0.0)

    def value(self, t):
        """Evaluate at scalar or array ``t`` (right-continuous)."""
        out = self._lookup[np.searchsorted(self.times, t, side="right")]
        if np.isscalar(t):
            return float(out)
        return out

    __call__ = value

    def value_before(self, t):
        """Left limit at ``t``: the value just before any jump at ``t``."""
        out = self._lookup[np.searchsorted(self.times, t, side="left")]
        if np.isscalar(t):
            return float(out)
        return out

    def truncated(self, t_max: float) -> "StepFunction":
        """Drop every jump strictly after ``t_max``."""
        keep = self.times <= t_max
        return StepFunction(self.times[keep], self.increments[keep], self.origin)

    @property
    def final_value(self) -> float:
        if self.times.size == 0:
            return float(self.origin)
        return float(self._levels[-1])

    def to_csv(self, path) -> None:
        """Write ``time,value`` rows (cumulative values)."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("# right-continuous step function; value holds at and after each time\n")
            fh.write("time,value\n")
            if self.times.size == 0 or self.times[0] > 0.0:
                fh.write(f"0,{self.origin:.17g}\n")
            for t, v in zip(self.times, self._levels):
                fh.write(f"{t:.17g},{v:.17g}\n")

    @classmethod
    def from_csv(cls, path) -> "StepFunction":
        times: list[float] = []
        values: list[float] = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line or line.startswith("#") or line == "time,value":
                    continue
                parts = line.split(",")
                if len(parts) != 2:
                    raise ParseError(f"expected 'time,value', got {line!r}", lineno)
                try:
                    times.append(float(parts[0]))
                    values.append(float(parts[1]))
                except ValueError:
                    raise ParseError(f"non-numeric field in {line!r}", lineno) from None
        if not times:
            return cls.zero()
        origin = values[0] if times[0] == 0.0 else 0.0
        jt, jv = [], []
        prev = origin
        for t, v in zip(times, values):
            if t == 0.0 and v == origin and not jt:
                continue
            jt.append(t)
            jv.append(v - prev)
            prev = v
        return cls(np.asarray(jt), np.asarray(jv), origin)


@dataclass(frozen=True, eq=False)
class CellData:
    """Sojourns of a trajectory whose starting mark fell in one cell.

    ``times[i]`` is the sojourn length and ``censored[i]`` whether it was cut
    at the deadline of its own mark.  ``n_total`` is the full trajectory
    length (needed for the visit-fraction threshold), ``horizon`` the cell's
    censorship infimum.
    """

    n_total: int
    times: np.ndarray
    censored: np.ndarray
    horizon: float = math.inf

    def __post_init__(self):
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "censored", np.asarray(self.censored, dtype=bool))
        if self.times.shape != self.censored.shape:
            raise ValueError("times and censored must have equal length")

    @property
    def visits(self) -> int:
        return int(self.times.size)


def cell_events(traj, cell: Cell, horizon: float = math.inf) -> CellData:
    """Select the sojourns whose starting mark lies in the cell.

    Only marks followed by a sojourn count (the final mark has none).
    ``horizon`` is carried through for downstream window checks; it is not
    recomputable from the trajectory alone.
    """
    mask = cell.contains_array(traj.marks[:-1])
    return CellData(
        n_total=int(traj.sojourns.size),
        times=traj.sojourns[mask],
        censored=traj.censored[mask],
        horizon=horizon,
    )


def risk_function(cd: CellData) -> StepFunction:
    """At-risk count ``Y(t)``: sojourns (censored included) with length >= t.

    Represented with unit drops one ulp after each sojourn so that
    right-continuous evaluation honours the >= convention exactly at
    event times.
    """
    if cd.visits == 0:
        return StepFunction.zero()
    uniq, counts = np.unique(cd.times, return_counts=True)
    drop_times = np.nextafter(uniq, np.inf)
    return StepFunction(drop_times, -counts.astype(float), origin=float(cd.visits))


def count_function(cd: CellData) -> StepFunction:
    """Event count ``N(t)``: sojourns with length <= t, ties aggregated.

    Censored sojourns enter at their deadline like any other termination;
    every estimation window sits strictly below the cell horizon, where they
    have not yet been counted.
    """
    if cd.visits == 0:
        return StepFunction.zero()
    uniq, counts = np.unique(cd.times, return_counts=True)
    return StepFunction(uniq, counts.astype(float), origin=0.0)


def generalized_inverse(y: int) -> float:
    """``1/y`` extended by 0 at 0; always at most 1 on integer counts."""
    if y < 0:
        raise ValueError(f"count must be nonnegative, got {y}")
    return 0.0 if y == 0 else 1.0 / y


def empirical_measure(traj, cell: Cell) -> float:
    """Fraction of sojourn-starting marks that fall in the cell."""
    n = int(traj.sojourns.size)
    if n == 0:
        raise ValueError("empirical measure needs at least one sojourn")
    return float(np.count_nonzero(cell.contains_array(traj.marks[:-1]))) / n
