"""Seeded simulation of the embedded chain (marks and sojourns).

Sojourns are drawn by inverse transform on the cumulative rate; the
deterministic censorship shows up as an atom: when the inverted exponential
clock would overshoot the deadline the sojourn is set to exactly the
deadline and flagged censored.  Only the embedded chain is materialised;
the continuous-time path is never needed downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ParseError
from .model import ProcessSpec, cumulative_rate

# Bisection tolerance (in time) for the sojourn inverse transform.
_INVERT_TOL = 1e-10
_BRACKET_LIMIT = 2.0**60

_MASK64 = (1 << 64) - 1

Seed = int


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(master: Seed, *indices: int) -> Seed:
    """Mix a master seed with index coordinates into a reproducible sub-seed.

    Distinct index tuples give distinct, order-sensitive streams; the same
    tuple always gives the same seed.
    """
    state = _splitmix64(master & _MASK64)
    for idx in indices:
        state = _splitmix64((state ^ _splitmix64((idx + 1) & _MASK64)) & _MASK64)
    return state


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One observation of the embedded chain.

    ``marks`` has one more entry than ``sojourns``: ``sojourns[i]`` is the
    time spent in ``marks[i]`` before jumping to ``marks[i+1]``, and
    ``censored[i]`` is True exactly when that sojourn was cut at the deadline
    of ``marks[i]`` (equality is bitwise; the atom assigns the deadline
    exactly).
    """

    marks: np.ndarray
    sojourns: np.ndarray
    censored: np.ndarray

    def __post_init__(self):
        marks = np.asarray(self.marks, dtype=float)
        sojourns = np.asarray(self.sojourns, dtype=float)
        censored = np.asarray(self.censored, dtype=bool)
        if marks.size != sojourns.size + 1:
            raise ValueError("need exactly one more mark than sojourns")
        if sojourns.size != censored.size:
            raise ValueError("sojourns and censor flags must align")
        if sojourns.size and not np.all(sojourns > 0):
            raise ValueError("sojourns must be strictly positive")
        object.__setattr__(self, "marks", marks)
        object.__setattr__(self, "sojourns", sojourns)
        object.__setattr__(self, "censored", censored)

    @property
    def n_jumps(self) -> int:
        return int(self.sojourns.size)


def sample_sojourn(spec: ProcessSpec, z: float, u: float) -> tuple[float, bool]:
    """Invert the cumulative rate at ``-log(u)``; censor at the deadline.

    Returns ``(s, censored)``.  The sojourn law has survival
    ``exp(-cumulative(z, t))`` below the deadline and an atom of the
    remaining mass exactly at it.
    """
    if not 0.0 < u < 1.0:
        raise ValueError(f"u must be in (0, 1), got {u}")
    target = -math.log(u)
    deadline = spec.censorship(z)
    if deadline <= 0:
        raise ValueError(f"censorship at mark {z} must be positive, got {deadline}")

    if math.isfinite(deadline):
        total = cumulative_rate(spec, z, deadline)
        if target >= total:
            return deadline, True

    if spec.cumulative_inverse is not None:
        s = spec.cumulative_inverse(z, target)
        # Rounding may push the inverse onto the deadline; the censor flag
        # must stay bitwise consistent with the returned sojourn.
        if s >= deadline:
            return deadline, True
        return s, False

    if math.isfinite(deadline):
        hi = deadline
    else:
        hi = 1.0
        while cumulative_rate(spec, z, hi) < target:
            hi *= 2.0
            if hi > _BRACKET_LIMIT:
                raise NumericError(
                    f"no bracket for sojourn inverse at mark {z}: "
                    f"cumulative rate stays below {target}"
                )

    lo = 0.0
    while hi - lo > _INVERT_TOL:
        mid = 0.5 * (lo + hi)
        if cumulative_rate(spec, z, mid) < target:
            lo = mid
        else:
            hi = mid
    s = 0.5 * (lo + hi)
    if s >= deadline:
        return deadline, True
    return s, False


def sample_transition(spec: ProcessSpec, z: float, rng: np.random.Generator) -> float:
    """One draw of the transition kernel from mark ``z``."""
    if not spec.state_space.contains(z):
        raise ValueError(f"mark {z} outside state space")
    return spec.kernel_sampler(z, rng)


def simulate_chain(spec: ProcessSpec, z0: float, n_jumps: int, seed: Seed) -> Trajectory:
    """Simulate ``n_jumps`` sojourn/transition steps from ``z0``, deterministically.

    The same ``(spec, z0, n_jumps, seed)`` always yields a bit-identical
    trajectory.  Distinct replicates should use sub-seeds from
    :func:`derive_seed`.
    """
    if not spec.state_space.contains(z0):
        raise ValueError(f"start mark {z0} outside state space")
    if n_jumps < 0:
        raise ValueError(f"n_jumps must be nonnegative, got {n_jumps}")

    rng = np.random.default_rng(seed)
    marks = [float(z0)]
    sojourns = np.empty(n_jumps)
    censored = np.empty(n_jumps, dtype=bool)
    z = float(z0)
    for i in range(n_jumps):
        u = rng.random()
        while u == 0.0:
            u = rng.random()
        s, flag = sample_sojourn(spec, z, u)
        sojourns[i] = s
        censored[i] = flag
        z = float(spec.kernel_sampler(z, rng))
        marks.append(z)
    return Trajectory(np.asarray(marks), sojourns, censored)


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """Write ``index,mark,sojourn,censored`` rows; row 0 carries only the start mark.

    Floats use 17 significant digits, so the file round-trips bit-exactly.
    """
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("index,mark,sojourn,censored\n")
        fh.write(f"0,{traj.marks[0]:.17g},,\n")
        for i in range(traj.n_jumps):
            fh.write(
                f"{i + 1},{traj.marks[i + 1]:.17g},{traj.sojourns[i]:.17g},"
                f"{int(traj.censored[i])}\n"
            )


def read_trajectory_csv(path) -> Trajectory:
    """Parse a trajectory CSV written by :func:`write_trajectory_csv`."""
    marks: list[float] = []
    sojourns: list[float] = []
    censored: list[bool] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if lineno == 1:
                if line != "index,mark,sojourn,censored":
                    raise ParseError(f"unexpected header {line!r}", lineno)
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise ParseError(f"expected 4 fields, got {len(parts)}", lineno)
            idx_s, mark_s, sojourn_s, flag_s = parts
            try:
                idx = int(idx_s)
                mark = float(mark_s)
            except ValueError:
                raise ParseError(f"bad index or mark in {line!r}", lineno) from None
            if idx != len(marks):
                raise ParseError(f"index {idx} out of order", lineno)
            marks.append(mark)
            if idx == 0:
                if sojourn_s or flag_s:
                    raise ParseError("row 0 must have empty sojourn and flag", lineno)
                continue
            try:
                sojourns.append(float(sojourn_s))
                censored.append(bool(int(flag_s)))
            except ValueError:
                raise ParseError(f"bad sojourn or flag in {line!r}", lineno) from None
    if not marks:
        raise ParseError("empty trajectory file", 1)
    return Trajectory(np.asarray(marks), np.asarray(sojourns), np.asarray(censored, dtype=bool))
