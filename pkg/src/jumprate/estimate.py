"""Nelson-Aalen type estimation of the cumulative rate, per cell and global.

Each cell of the partition gets its own estimator ``sum over events <= t of
(tie multiplicity) / (at-risk count)``; cells visited too rarely (empirical
visit fraction at or below ``1/sqrt(n)``) are gated to the zero function.
The pointwise variance is the standard counting-process plug-in, and the
normal bands built from it rest on an asymptotic-normality result whose
rate assumption is not checkable from data; outputs label them as such.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .counting import CellData, StepFunction, cell_events, empirical_measure
from .model import ProcessSpec
from .partition import Cell, Partition, cell_horizon
from .simulate import Trajectory

CI_NOTE = (
    "pointwise bands are asymptotic normal bands; the underlying "
    "convergence-rate assumption is not verifiable from the data"
)


def _event_jumps(cd: CellData) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distinct uncensored event times, their multiplicities, and Y at each."""
    events = cd.times[~cd.censored]
    if events.size == 0:
        empty = np.empty(0)
        return empty, empty, empty
    uniq, counts = np.unique(events, return_counts=True)
    all_sorted = np.sort(cd.times)
    at_risk = cd.visits - np.searchsorted(all_sorted, uniq, side="left")
    return uniq, counts.astype(float), at_risk.astype(float)


def nelson_aalen(cd: CellData) -> StepFunction:
    """Cumulative-rate estimator: jump ``m / Y(s)`` at each distinct event time.

    Censored sojourns stay in the at-risk count but contribute no jump.  A
    tie of multiplicity ``m`` enters as a single ``m / Y`` increment.
    """
    times, mult, at_risk = _event_jumps(cd)
    return StepFunction(times, mult / at_risk if times.size else mult)


def variance_estimate(cd: CellData) -> StepFunction:
    """Plug-in variance: jump ``m / Y(s)^2`` at each distinct event time."""
    times, mult, at_risk = _event_jumps(cd)
    return StepFunction(times, mult / at_risk**2 if times.size else mult)


@dataclass(frozen=True, eq=False)
class CumulativeEstimate:
    """Per-cell cumulative-rate estimate with plug-in variance.

    ``threshold_passed`` records whether the cell's empirical visit fraction
    strictly exceeds ``1/sqrt(n)``; gated cells stand for the zero function
    in the global estimator.
    """

    lhat: StepFunction
    variance: StepFunction
    visits: int
    nu_hat: float
    threshold_passed: bool
    horizon: float


def confidence_band(ce: CumulativeEstimate, t: float, level: float) -> tuple[float, float]:
    """Pointwise normal band at time ``t``; the lower edge is floored at 0.

    Asymptotic only: see :data:`CI_NOTE`.
    """
    if not 0.0 <= t < ce.horizon:
        raise ValueError(f"t={t} outside [0, horizon={ce.horizon})")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    center = ce.lhat.value(t)
    half = norm.ppf(0.5 * (1.0 + level)) * math.sqrt(ce.variance.value(t))
    return max(0.0, center - half), center + half


def estimate_cell(traj: Trajectory, cell: Cell, spec: ProcessSpec,
                  t_max: float) -> CumulativeEstimate:
    """Assemble the cell estimate, truncated to the window ``[0, t_max]``.

    ``t_max`` must stay strictly below the cell horizon; the estimator is
    undefined at and beyond it.
    """
    horizon = cell_horizon(spec, cell)
    if t_max >= horizon:
        raise ValueError(f"t_max={t_max} must be below the cell horizon {horizon}")
    cd = cell_events(traj, cell, horizon=horizon)
    nu_hat = empirical_measure(traj, cell)
    return CumulativeEstimate(
        lhat=nelson_aalen(cd).truncated(t_max),
        variance=variance_estimate(cd).truncated(t_max),
        visits=cd.visits,
        nu_hat=nu_hat,
        threshold_passed=nu_hat > 1.0 / math.sqrt(cd.n_total),
        horizon=horizon,
    )


@dataclass(frozen=True, eq=False)
class GlobalCumulative:
    """Partition-wide cumulative-rate estimator of ``(x, s) -> estimate``."""

    partition: Partition
    per_cell: tuple[CumulativeEstimate, ...]
    t_max: float

    def evaluate(self, x: float, s: float) -> float:
        """Estimate at mark ``x`` and time ``s``; 0 outside the region or in gated cells."""
        if not 0.0 <= s <= self.t_max:
            raise ValueError(f"s={s} outside the evaluation window [0, {self.t_max}]")
        idx = self.partition.locate(x)
        if idx is None:
            return 0.0
        ce = self.per_cell[idx]
        if not ce.threshold_passed:
            return 0.0
        return ce.lhat.value(s)

    def cell_for(self, x: float) -> CumulativeEstimate | None:
        idx = self.partition.locate(x)
        return None if idx is None else self.per_cell[idx]


def global_cumulative(traj: Trajectory, p: Partition, spec: ProcessSpec,
                      t_max: float) -> GlobalCumulative:
    """Estimate every cell of the partition on the common window ``[0, t_max]``."""
    horizons = [cell_horizon(spec, c) for c in p.cells]
    min_horizon = min(horizons)
    if t_max >= min_horizon:
        raise ValueError(
            f"t_max={t_max} must be below the smallest cell horizon {min_horizon}"
        )
    return GlobalCumulative(
        partition=p,
        per_cell=tuple(estimate_cell(traj, c, spec, t_max) for c in p.cells),
        t_max=t_max,
    )


def default_t_max(horizon: float) -> float:
    """Default evaluation window: 80% of the horizon (must stay strictly below it)."""
    if not math.isfinite(horizon):
        raise ValueError("an infinite horizon needs an explicit window")
    return 0.8 * horizon


def write_cumulative_csv(ce: CumulativeEstimate, t_max: float, path,
                         level: float = 0.95, grid_points: int = 512) -> None:
    """Sample the estimate on a uniform grid: ``time,estimate,variance,ci_low,ci_high``.

    A gated cell (threshold not passed) is written as the zero function.
    """
    grid = np.linspace(0.0, t_max, grid_points)
    if ce.threshold_passed:
        est = ce.lhat.value(grid)
        var = ce.variance.value(grid)
        z = norm.ppf(0.5 * (1.0 + level))
        half = z * np.sqrt(var)
        low = np.maximum(0.0, est - half)
        high = est + half
    else:
        est = var = low = high = np.zeros_like(grid)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {CI_NOTE}\n")
        fh.write("time,estimate,variance,ci_low,ci_high\n")
        for row in zip(grid, est, var, low, high):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
