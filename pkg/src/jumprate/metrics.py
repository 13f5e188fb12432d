"""Error metrics against oracles and replicate summary statistics.

The Monte-Carlo rate oracle deliberately avoids the estimation code path:
it runs only the mark chain (no sojourns) and forms the ratio of empirical
means of density and survival over one cell, which converges to the cell
rate by the ergodic theorem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .counting import StepFunction
from .model import ProcessSpec, survival
from .partition import Cell, cell_horizon
from .simulate import Seed
from .smooth import SampledCurve


@dataclass(frozen=True)
class ReplicateSummary:
    """Five-number summary (type-7 quantiles) of one metric across replicates."""

    values: tuple[float, ...]
    min: float
    q1: float
    median: float
    q3: float
    max: float

    def to_record(self, n: int, metric: str) -> dict:
        """JSON record ``{n, metric, min, q1, median, q3, max}``."""
        return {
            "n": n,
            "metric": metric,
            "min": self.min,
            "q1": self.q1,
            "median": self.median,
            "q3": self.q3,
            "max": self.max,
        }


def boxplot_summary(values) -> ReplicateSummary:
    """Five-number summary with linearly interpolated quantiles."""
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise ValueError("cannot summarise an empty value list")
    q = np.quantile(arr, [0.0, 0.25, 0.5, 0.75, 1.0])
    return ReplicateSummary(tuple(arr.tolist()), *(float(v) for v in q))


def integrated_square_error(curve: SampledCurve, oracle, interval) -> float:
    """Trapezoid integral of the squared error over ``[a, b]`` on the curve grid."""
    a, b = interval
    grid = curve.grid
    if not (grid[0] <= a < b <= grid[-1]):
        raise ValueError(
            f"interval [{a}, {b}] outside the curve grid [{grid[0]}, {grid[-1]}]"
        )
    inside = grid[(grid > a) & (grid < b)]
    nodes = np.concatenate(([a], inside, [b]))
    est = curve.at(nodes)
    truth = np.array([float(oracle(t)) for t in nodes])
    return float(np.trapezoid((est - truth) ** 2, nodes))


def sup_distance(step: StepFunction, oracle, interval, grid_points: int) -> float:
    """Largest |step - oracle| over ``[a, b]``, exact at the step's jumps.

    Both the post-jump values and the left limits at jump times enter, so
    the supremum over the step function is missed only by whatever the
    oracle does between grid points.
    """
    a, b = interval
    if not a < b:
        raise ValueError(f"empty interval [{a}, {b}]")
    if grid_points < 2:
        raise ValueError(f"need at least 2 grid points, got {grid_points}")
    grid = np.linspace(a, b, grid_points)
    truth_grid = np.array([float(oracle(t)) for t in grid])
    worst = float(np.max(np.abs(step.value(grid) - truth_grid)))
    jumps = step.times[(step.times >= a) & (step.times <= b)]
    if jumps.size:
        truth_jumps = np.array([float(oracle(t)) for t in jumps])
        worst = max(worst, float(np.max(np.abs(step.value(jumps) - truth_jumps))))
        worst = max(worst, float(np.max(np.abs(step.value_before(jumps) - truth_jumps))))
    return worst


def _chain_samples(spec: ProcessSpec, cell: Cell, burn_in: int, samples: int,
                   seed: Seed) -> np.ndarray:
    """Post-burn-in marks of the transition chain started at the cell midpoint."""
    rng = np.random.default_rng(seed)
    z = cell.midpoint
    for _ in range(burn_in):
        z = spec.kernel_sampler(z, rng)
    out = np.empty(samples)
    for i in range(samples):
        z = spec.kernel_sampler(z, rng)
        out[i] = z
    return out


def _cell_rate_terms(spec: ProcessSpec, cell: Cell, t: float, burn_in: int,
                     samples: int, seed: Seed) -> tuple[np.ndarray, np.ndarray]:
    """Jump-rate values and survival weights at the cell's visited marks."""
    marks = _chain_samples(spec, cell, burn_in, samples, seed)
    hits = marks[cell.contains_array(marks)]
    if hits.size == 0:
        raise ValueError(
            f"chain never visited [{cell.low}, {cell.high}] in {samples} samples"
        )
    rates = np.array([spec.jump_rate(z, t) for z in hits])
    weights = np.array([survival(spec, z, t) for z in hits])
    return rates, weights


def mc_oracle_l(spec: ProcessSpec, cell: Cell, t: float, burn_in: int,
                samples: int, seed: Seed) -> float:
    """Monte-Carlo approximation of the cell-aggregated jump rate at time ``t``.

    Ratio of empirical means of density and survival over the visited marks,
    which reduces to a survival-weighted mean of jump-rate values.  When all
    rate values coincide the convex combination is returned outright, so the
    constant-rate identity holds to the last bit.
    """
    if t >= cell_horizon(spec, cell):
        raise ValueError(f"t={t} at or beyond the cell horizon")
    if samples < 1:
        raise ValueError(f"need at least one sample, got {samples}")
    rates, weights = _cell_rate_terms(spec, cell, t, burn_in, samples, seed)
    if np.all(rates == rates[0]):
        return float(rates[0])
    return float(np.dot(rates, weights) / np.sum(weights))


def cell_rate_bound(spec: ProcessSpec, cell: Cell, t: float, burn_in: int,
                    samples: int, seed: Seed, grid_points: int = 33) -> float:
    """Largest Monte-Carlo cell rate over a time grid on ``[0, t]``.

    Numeric check that the cell-aggregated rate stays bounded on the
    estimation window; one chain draw is shared across all grid times.
    """
    if t >= cell_horizon(spec, cell):
        raise ValueError(f"t={t} at or beyond the cell horizon")
    if grid_points < 2:
        raise ValueError(f"need at least 2 grid points, got {grid_points}")
    marks = _chain_samples(spec, cell, burn_in, samples, seed)
    hits = marks[cell.contains_array(marks)]
    if hits.size == 0:
        raise ValueError(
            f"chain never visited [{cell.low}, {cell.high}] in {samples} samples"
        )
    worst = 0.0
    for s in np.linspace(0.0, t, grid_points):
        rates = np.array([spec.jump_rate(z, s) for z in hits])
        if np.all(rates == rates[0]):
            worst = max(worst, abs(float(rates[0])))
            continue
        weights = np.array([survival(spec, z, s) for z in hits])
        worst = max(worst, abs(float(np.dot(rates, weights) / np.sum(weights))))
    return worst


def mc_oracle_l_se(spec: ProcessSpec, cell: Cell, t: float, burn_in: int,
                   samples: int, seed: Seed) -> tuple[float, float]:
    """Oracle value plus its delete-one jackknife standard error."""
    rates, weights = _cell_rate_terms(spec, cell, t, burn_in, samples, seed)
    num = np.dot(rates, weights)
    den = np.sum(weights)
    estimate = float(num / den)
    m = rates.size
    if m < 2:
        return estimate, float("inf")
    loo = (num - rates * weights) / (den - weights)
    se = float(np.sqrt((m - 1) / m * np.sum((loo - np.mean(loo)) ** 2)))
    return estimate, se
