"""Kernel smoothing of the cumulative-rate estimator into a jump-rate estimate.

The smoothed rate at ``u`` is ``(1/b) * sum over jumps (s, d) of K((u-s)/b) * d``
with the integral truncated to the estimation window and no boundary
correction, so values within one bandwidth of the window edges are biased;
the report window marks the interior where the estimate is trustworthy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import simpson

from .counting import StepFunction, cell_events, empirical_measure
from .estimate import nelson_aalen
from .model import ProcessSpec
from .partition import Partition, cell_horizon
from .simulate import Trajectory

_MASS_TOL = 1e-9
_TV_TOL = 1e-6
_CHECK_GRID = 20001


@dataclass(frozen=True, eq=False)
class Kernel:
    """Continuous kernel supported on [-1, 1] with unit mass.

    ``eval`` must accept scalars and numpy arrays.  Mass, support and the
    declared total variation are verified numerically at construction.
    """

    name: str
    eval: Callable[[np.ndarray], np.ndarray]
    total_variation: float

    def __post_init__(self):
        if self.total_variation <= 0:
            raise ValueError("total variation must be positive")
        for v in (-10.0, -1.5, -1.0000001, 1.0000001, 1.5, 10.0):
            if float(self.eval(v)) != 0.0:
                raise ValueError(f"kernel {self.name!r} not supported on [-1, 1]")
        grid = np.linspace(-1.0, 1.0, _CHECK_GRID)
        values = np.asarray(self.eval(grid), dtype=float)
        if np.any(values < 0):
            raise ValueError(f"kernel {self.name!r} takes negative values")
        mass = float(simpson(values, x=grid))
        if abs(mass - 1.0) > _MASS_TOL:
            raise ValueError(f"kernel {self.name!r} mass {mass} differs from 1")
        tv = float(np.sum(np.abs(np.diff(values))))
        if abs(tv - self.total_variation) > _TV_TOL:
            raise ValueError(
                f"kernel {self.name!r} declared TV {self.total_variation}, "
                f"measured {tv}"
            )


def epanechnikov() -> Kernel:
    """Parabolic kernel 0.75*(1 - v^2) on [-1, 1]; total variation 1.5."""

    def k(v):
        v = np.asarray(v, dtype=float)
        out = 0.75 * np.maximum(0.0, 1.0 - v * v)
        return out if out.ndim else float(out)

    return Kernel("epanechnikov", k, 1.5)


def biweight() -> Kernel:
    """Quartic kernel (15/16)*(1 - v^2)^2 on [-1, 1]; total variation 1.875."""

    def k(v):
        v = np.asarray(v, dtype=float)
        w = np.maximum(0.0, 1.0 - v * v)
        out = 0.9375 * w * w
        return out if out.ndim else float(out)

    return Kernel("biweight", k, 1.875)


def triangular() -> Kernel:
    """Tent kernel 1 - |v| on [-1, 1]; total variation 2."""

    def k(v):
        v = np.asarray(v, dtype=float)
        out = np.maximum(0.0, 1.0 - np.abs(v))
        return out if out.ndim else float(out)

    return Kernel("triangular", k, 2.0)


_KERNELS = {
    "epanechnikov": epanechnikov,
    "biweight": biweight,
    "triangular": triangular,
}


def kernel_by_name(name: str) -> Kernel:
    try:
        return _KERNELS[name]()
    except KeyError:
        raise ValueError(
            f"unknown kernel {name!r}; choose from {sorted(_KERNELS)}"
        ) from None


@dataclass(frozen=True, eq=False)
class SampledCurve:
    """Function values on a uniform time grid."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.shape != values.shape or grid.ndim != 1 or grid.size < 2:
            raise ValueError("grid and values must be equal-length 1-d arrays (>= 2 points)")
        steps = np.diff(grid)
        if not (np.all(steps > 0) and np.allclose(steps, steps[0], rtol=1e-9, atol=0.0)):
            raise ValueError("grid must be uniform and strictly increasing")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def at(self, t) -> float | np.ndarray:
        """Linear interpolation inside the grid range."""
        out = np.interp(t, self.grid, self.values)
        return float(out) if np.isscalar(t) else out


def bandwidth_from_visits(h: int, alpha: float, b_min: float) -> float:
    """Power-rule bandwidth ``h**(-alpha)``, floored at ``b_min``."""
    if h < 1:
        raise ValueError(f"visit count must be at least 1, got {h}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if b_min <= 0:
        raise ValueError(f"b_min must be positive, got {b_min}")
    return max(h ** (-alpha), b_min)


def kernel_smooth(lhat: StepFunction, k: Kernel, b: float, t_max: float,
                  grid_points: int = 512) -> SampledCurve:
    """Smooth a pure-jump estimator into a rate curve on ``[0, t_max]``.

    The jump integral is truncated to the window exactly; no boundary
    correction is applied.
    """
    if b <= 0:
        raise ValueError(f"bandwidth must be positive, got {b}")
    if grid_points < 2:
        raise ValueError(f"need at least 2 grid points, got {grid_points}")
    if lhat.times.size and lhat.times[-1] > t_max:
        raise ValueError(
            f"estimator has jumps beyond t_max={t_max} (last at {lhat.times[-1]})"
        )
    grid = np.linspace(0.0, t_max, grid_points)
    keep = lhat.times >= 0.0
    times = lhat.times[keep]
    deltas = lhat.increments[keep]
    if times.size == 0:
        return SampledCurve(grid, np.zeros_like(grid))
    values = np.empty_like(grid)
    chunk = 256
    for start in range(0, grid.size, chunk):
        u = grid[start:start + chunk, None]
        values[start:start + chunk] = (k.eval((u - times[None, :]) / b) @ deltas) / b
    return SampledCurve(grid, values)


@dataclass(frozen=True, eq=False)
class RateEstimate:
    """Per-cell smoothed rate with the bandwidth that produced it."""

    curve: SampledCurve
    bandwidth: float
    visits: int
    nu_hat: float
    threshold_passed: bool


@dataclass(frozen=True, eq=False)
class GlobalRate:
    """Partition-wide jump-rate estimator of ``(x, s) -> rate``.

    Values are computed on all of ``[0, t_max]`` but only trustworthy on the
    report window; :meth:`edge_biased` flags the rest.
    """

    partition: Partition
    per_cell: tuple[RateEstimate, ...]
    t_max: float
    report_window: tuple[float, float]

    def evaluate(self, x: float, s: float) -> float:
        if not 0.0 <= s <= self.t_max:
            raise ValueError(f"s={s} outside the evaluation window [0, {self.t_max}]")
        idx = self.partition.locate(x)
        if idx is None:
            return 0.0
        re = self.per_cell[idx]
        if not re.threshold_passed:
            return 0.0
        return float(re.curve.at(s))

    def edge_biased(self, s: float) -> bool:
        r1, r2 = self.report_window
        return not r1 <= s <= r2

    def cell_for(self, x: float) -> RateEstimate | None:
        idx = self.partition.locate(x)
        return None if idx is None else self.per_cell[idx]


def global_rate(traj: Trajectory, p: Partition, spec: ProcessSpec, k: Kernel,
                alpha: float, t_max: float, report_window: tuple[float, float],
                grid_points: int = 512) -> GlobalRate:
    """Smooth every cell with its own visit-count bandwidth.

    Requires ``0 < r1 < r2 < t_max < min cell horizon``: convergence of the
    smoothed estimate holds on interior compacts only.  The bandwidth floor
    is twice the grid spacing so each kernel window sees at least one grid
    point.
    """
    r1, r2 = report_window
    if not 0.0 < r1 < r2 < t_max:
        raise ValueError(
            f"need 0 < r1 < r2 < t_max, got r1={r1}, r2={r2}, t_max={t_max}"
        )
    min_horizon = min(cell_horizon(spec, c) for c in p.cells)
    if t_max >= min_horizon:
        raise ValueError(
            f"t_max={t_max} must be below the smallest cell horizon {min_horizon}"
        )
    b_min = 2.0 * t_max / (grid_points - 1)
    grid = np.linspace(0.0, t_max, grid_points)
    estimates = []
    for cell in p.cells:
        horizon = cell_horizon(spec, cell)
        cd = cell_events(traj, cell, horizon=horizon)
        nu_hat = empirical_measure(traj, cell)
        passed = nu_hat > 1.0 / math.sqrt(cd.n_total)
        if passed and cd.visits >= 1:
            b = bandwidth_from_visits(cd.visits, alpha, b_min)
            curve = kernel_smooth(nelson_aalen(cd).truncated(t_max), k, b,
                                  t_max, grid_points)
        else:
            b = math.nan
            curve = SampledCurve(grid, np.zeros_like(grid))
        estimates.append(RateEstimate(curve, b, cd.visits, nu_hat, passed))
    return GlobalRate(p, tuple(estimates), t_max, (r1, r2))


def write_rate_csv(gr: GlobalRate, x: float, path) -> None:
    """Sample the rate at mark ``x`` on its cell grid: ``time,rate,flag_edge``."""
    re = gr.cell_for(x)
    if re is None:
        raise ValueError(f"mark {x} outside the partition region")
    grid = re.curve.grid
    values = re.curve.values if re.threshold_passed else np.zeros_like(grid)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# flag_edge=1 marks times outside the report window (kernel edge bias)\n")
        fh.write("time,rate,flag_edge\n")
        for t, v in zip(grid, values):
            fh.write(f"{t:.17g},{v:.17g},{int(gr.edge_biased(t))}\n")
