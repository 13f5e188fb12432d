"""Process definitions: jump rate, transition sampler, deterministic censorship.

A process is described by three characteristics: a jump rate ``rate(z, t)``
governing how quickly the process leaves mark ``z`` after time ``t`` in that
mark, a transition sampler drawing the next mark, and a censorship deadline
``t*(z)`` at which the sojourn is cut short deterministically.  The derived
quantities (cumulative rate, survival function, sojourn density) are computed
here; everything downstream consumes only these.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NumericError

# Rejection sampling gives up after this many proposals.
REJECTION_BUDGET = 10**6

_SIMPSON_TOL = 1e-10
_SIMPSON_MAX_DEPTH = 50


@dataclass(frozen=True)
class StateSpace:
    """Open interval of admissible marks.

    All marks produced by a process must lie strictly inside
    ``(lower, upper)``; the boundary is excluded.
    """

    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"empty state space: ({self.lower}, {self.upper})")

    def contains(self, z: float) -> bool:
        return self.lower < z < self.upper


@dataclass(frozen=True)
class ProcessSpec:
    """Immutable description of a marked renewal process.

    Fields
    ------
    state_space:
        Open interval of marks.
    jump_rate:
        ``(z, t) -> rate >= 0``, the instantaneous event intensity at elapsed
        time ``t`` in mark ``z``.
    kernel_sampler:
        ``(z, rng) -> next mark``, one draw of the transition kernel.  The
        kernel is represented only as a sampler; its density is never needed.
    censorship:
        ``z -> deadline > 0`` (may be ``math.inf``).  The sojourn in ``z`` is
        forced to end at the deadline if no event occurred before.
    analytic_cumulative:
        Optional closed form of the time integral of ``jump_rate``; when
        absent the integral is computed by adaptive quadrature.
    cumulative_inverse:
        Optional closed-form inverse ``(z, target) -> s`` solving
        ``cumulative(z, s) = target``; used by the sojourn sampler when
        available, bisection otherwise.

    Instances are immutable and safe to share across workers; all operations
    on them are pure.
    """

    state_space: StateSpace
    jump_rate: Callable[[float, float], float]
    kernel_sampler: Callable[[float, np.random.Generator], float]
    censorship: Callable[[float], float]
    analytic_cumulative: Callable[[float, float], float] | None = None
    cumulative_inverse: Callable[[float, float], float] | None = None


@dataclass
class Diagnostics:
    """Grid-level sanity numbers for a process spec; advisory only."""

    lipschitz_estimate: float
    rate_bound_estimate: Callable[[float], float]
    warnings: list[str] = field(default_factory=list)


def _check_domain(spec: ProcessSpec, z: float, t: float) -> None:
    if not spec.state_space.contains(z):
        raise ValueError(
            f"mark {z} outside state space "
            f"({spec.state_space.lower}, {spec.state_space.upper})"
        )
    if t < 0:
        raise ValueError(f"negative time {t}")


def _adaptive_simpson(f, a: float, b: float, tol: float, max_depth: int) -> float:
    """Adaptive Simpson quadrature with absolute tolerance ``tol``."""

    def simpson(lo, hi, flo, fmid, fhi):
        return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)

    def recurse(lo, hi, flo, fmid, fhi, whole, eps, depth):
        mid = 0.5 * (lo + hi)
        lmid = 0.5 * (lo + mid)
        rmid = 0.5 * (mid + hi)
        fl = f(lmid)
        fr = f(rmid)
        left = simpson(lo, mid, flo, fl, fmid)
        right = simpson(mid, hi, fmid, fr, fhi)
        if abs(left + right - whole) <= 15.0 * eps:
            return left + right + (left + right - whole) / 15.0
        if depth >= max_depth:
            raise NumericError(
                f"quadrature did not converge on [{lo}, {hi}] "
                f"(residual {abs(left + right - whole):.3e}, depth {depth})"
            )
        return recurse(lo, mid, flo, fl, fmid, left, eps / 2.0, depth + 1) + recurse(
            mid, hi, fmid, fr, fhi, right, eps / 2.0, depth + 1
        )

    if b <= a:
        return 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = simpson(a, b, fa, fm, fb)
    return recurse(a, b, fa, fm, fb, whole, tol, 0)


def cumulative_rate(spec: ProcessSpec, z: float, t: float) -> float:
    """Time integral of the jump rate on ``[0, t]`` for mark ``z``.

    Uses the closed form when the spec provides one, adaptive Simpson
    quadrature (absolute tolerance 1e-10) otherwise.
    """
    _check_domain(spec, z, t)
    if t == 0.0:
        return 0.0
    if spec.analytic_cumulative is not None:
        return spec.analytic_cumulative(z, t)
    return _adaptive_simpson(
        lambda s: spec.jump_rate(z, s), 0.0, t, _SIMPSON_TOL, _SIMPSON_MAX_DEPTH
    )


def survival(spec: ProcessSpec, z: float, t: float) -> float:
    """Probability that the sojourn in ``z`` exceeds ``t``, censorship aside."""
    return math.exp(-cumulative_rate(spec, z, t))


def density(spec: ProcessSpec, z: float, t: float) -> float:
    """Sojourn density at elapsed time ``t``: rate times survival."""
    return spec.jump_rate(z, t) * survival(spec, z, t)


def _truncated_normal_sampler(center: float, sd_of: Callable[[float], float],
                              lower: float, upper: float):
    """Rejection sampler for a normal law restricted to an open interval."""

    def sampler(z: float, rng: np.random.Generator) -> float:
        sd = sd_of(z)
        for _ in range(REJECTION_BUDGET):
            y = rng.normal(center, sd)
            if lower < y < upper:
                return y
        raise NumericError(
            f"rejection sampling exhausted {REJECTION_BUDGET} proposals at mark {z}"
        )

    return sampler


def machine_model() -> ProcessSpec:
    """Reference reliability model on the temperature interval (0, 60).

    The jump (failure) rate grows linearly with the temperature mark,
    ``3 + 0.05 z``, every sojourn is inspected (censored) at time 1, and
    repairs reset the temperature toward 20 with a normal error whose
    standard deviation ``0.5 + |z - 20|`` grows with the distance from the
    nominal regime, truncated to the state space.
    """
    space = StateSpace(0.0, 60.0)

    def rate(z: float, t: float) -> float:
        return 3.0 + 0.05 * z

    def cumulative(z: float, t: float) -> float:
        return (3.0 + 0.05 * z) * t

    def inverse(z: float, target: float) -> float:
        return target / (3.0 + 0.05 * z)

    return ProcessSpec(
        state_space=space,
        jump_rate=rate,
        kernel_sampler=_truncated_normal_sampler(
            20.0, lambda z: 0.5 + abs(z - 20.0), 0.0, 60.0
        ),
        censorship=lambda z: 1.0,
        analytic_cumulative=cumulative,
        cumulative_inverse=inverse,
    )


def constant_model(c: float, t_star: float = 1.0) -> ProcessSpec:
    """Constant jump rate ``c`` with censorship ``t_star``, machine-model kernel.

    The transition kernel is the same truncated normal as in the machine
    model, so the mark chain has the same long-run behaviour while the
    sojourn law is exactly exponential below the deadline.
    """
    if c <= 0:
        raise ValueError(f"rate must be positive, got {c}")
    if t_star <= 0:
        raise ValueError(f"censorship must be positive, got {t_star}")
    return ProcessSpec(
        state_space=StateSpace(0.0, 60.0),
        jump_rate=lambda z, t: c,
        kernel_sampler=_truncated_normal_sampler(
            20.0, lambda z: 0.5 + abs(z - 20.0), 0.0, 60.0
        ),
        censorship=lambda z: t_star,
        analytic_cumulative=lambda z, t: c * t,
        cumulative_inverse=lambda z, target: target / c,
    )


def model_by_name(name: str) -> ProcessSpec:
    """Resolve a CLI model name: ``machine`` or ``constant:<c>``."""
    if name == "machine":
        return machine_model()
    if name.startswith("constant:"):
        try:
            c = float(name.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad constant model spec: {name!r}") from None
        return constant_model(c)
    raise ValueError(f"unknown model {name!r}")


def validate_characteristics(
    spec: ProcessSpec,
    mark_grid,
    time_grid,
    warn_increment: float = 1.0,
) -> Diagnostics:
    """Finite-difference diagnostics of the jump rate on mark and time grids.

    Reports an empirical Lipschitz constant of the rate in the mark, a
    callable upper envelope of the rate over the mark grid, and warnings
    wherever the rate changes by more than ``warn_increment`` between
    adjacent grid marks (a discontinuity indicator).  Diagnostics never
    raise for rate behaviour; they only describe it.
    """
    marks = sorted(float(z) for z in mark_grid)
    times = [float(t) for t in time_grid]
    if not marks or not times:
        raise ValueError("mark and time grids must be nonempty")

    lipschitz = 0.0
    warnings: list[str] = []
    warned_pairs = set()
    for t in times:
        values = [spec.jump_rate(z, t) for z in marks]
        for (z1, v1), (z2, v2) in zip(zip(marks, values), zip(marks[1:], values[1:])):
            gap = z2 - z1
            if gap <= 0:
                continue
            lipschitz = max(lipschitz, abs(v2 - v1) / gap)
            if abs(v2 - v1) > warn_increment and (z1, z2) not in warned_pairs:
                warned_pairs.add((z1, z2))
                warnings.append(
                    f"rate changes by {abs(v2 - v1):.6g} between marks "
                    f"{z1:.6g} and {z2:.6g} at t={t:.6g}"
                )

    def rate_bound(t: float) -> float:
        return max(spec.jump_rate(z, t) for z in marks)

    return Diagnostics(lipschitz, rate_bound, warnings)
