"""Finite partitions of a compact mark region into half-open cells."""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .model import ProcessSpec

# Grid resolution for the censorship infimum when no shortcut applies.
HORIZON_GRID = 1024


@dataclass(frozen=True)
class Cell:
    """Interval cell ``[low, high)``, closed on the right when flagged."""

    low: float
    high: float
    closed_right: bool = False

    def __post_init__(self):
        if not self.low < self.high:
            raise ValueError(f"degenerate cell [{self.low}, {self.high})")

    @property
    def diameter(self) -> float:
        return self.high - self.low

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.low + self.high)

    def contains(self, x: float) -> bool:
        if self.closed_right:
            return self.low <= x <= self.high
        return self.low <= x < self.high

    def contains_array(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        if self.closed_right:
            return (x >= self.low) & (x <= self.high)
        return (x >= self.low) & (x < self.high)


@dataclass(frozen=True)
class Partition:
    """Contiguous cells covering ``[region[0], region[1]]``; the last cell is closed."""

    cells: tuple[Cell, ...]
    region: tuple[float, float]

    def locate(self, x: float) -> int | None:
        """Index of the unique cell containing ``x``, or None outside the region."""
        lows = [c.low for c in self.cells]
        idx = bisect_right(lows, x) - 1
        if idx < 0:
            return None
        if self.cells[idx].contains(x):
            return idx
        return None

    def to_json(self) -> str:
        """JSON array of [low, high] pairs, for experiment reports."""
        return json.dumps([[c.low, c.high] for c in self.cells])


def uniform_partition(
    region_low: float,
    region_high: float,
    width: float,
    state_space=None,
) -> Partition:
    """Cover ``[region_low, region_high]`` with contiguous cells of the given width.

    All cells have the requested width except possibly a narrower last one.
    When ``state_space`` is given the region must sit strictly inside it
    (cells whose closure touches the boundary are rejected: the horizon and
    visit-probability guarantees fail there).
    """
    if not region_low < region_high:
        raise ValueError(f"empty region [{region_low}, {region_high}]")
    if width <= 0:
        raise ValueError(f"width must be positive, got {width}")
    if state_space is not None:
        if region_low <= state_space.lower or region_high >= state_space.upper:
            raise ValueError(
                f"region [{region_low}, {region_high}] must lie strictly inside "
                f"({state_space.lower}, {state_space.upper})"
            )

    span = region_high - region_low
    n = max(1, math.ceil(span / width))
    edges = [region_low + i * width for i in range(n)]
    # Guard against a spurious sliver cell from floating-point ceil.
    if len(edges) > 1 and region_high - edges[-1] < 1e-9 * width:
        edges.pop()
    edges.append(region_high)

    cells = tuple(
        Cell(lo, hi, closed_right=(i == len(edges) - 2))
        for i, (lo, hi) in enumerate(zip(edges, edges[1:]))
    )
    return Partition(cells=cells, region=(region_low, region_high))


def cell_horizon(spec: ProcessSpec, cell: Cell) -> float:
    """Infimum of the censorship deadline over the cell.

    Exact for constant or monotone continuous deadlines (the infimum sits at
    a grid endpoint); otherwise a dense-grid lower envelope that converges as
    the deadline is continuous.  Estimation windows must stay strictly below
    this value.
    """
    space = spec.state_space
    if not (space.lower < cell.low and cell.high < space.upper):
        raise ValueError(
            f"cell [{cell.low}, {cell.high}] not strictly inside "
            f"({space.lower}, {space.upper})"
        )
    grid = np.linspace(cell.low, cell.high, HORIZON_GRID)
    horizon = min(float(spec.censorship(float(x))) for x in grid)
    if horizon <= 0:
        raise ValueError(
            f"censorship infimum {horizon} on [{cell.low}, {cell.high}] "
            "is not positive"
        )
    return horizon
