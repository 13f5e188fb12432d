import numpy as np
import pytest

from jumprate import (Cell, CellData, StepFunction, Trajectory, cell_events,
                      count_function, derive_seed, empirical_measure,
                      generalized_inverse, risk_function, simulate_chain)

HAND_TRAJ = Trajectory(
    marks=np.array([19.0, 21.0, 30.0, 20.5]),
    sojourns=np.array([0.2, 0.5, 0.3]),
    censored=np.array([False, False, False]),
)
CELL = Cell(18.0, 22.0, closed_right=True)


def _cd(times, censored=None):
    times = np.asarray(times, dtype=float)
    if censored is None:
        censored = np.zeros(times.size, dtype=bool)
    return CellData(n_total=times.size, times=times, censored=np.asarray(censored))


def test_step_function_right_continuous():
    f = StepFunction(np.array([0.5, 1.0]), np.array([2.0, 1.0]), origin=1.0)
    assert f.value(0.4999) == 1.0
    assert f.value(0.5) == 3.0
    assert f.value_before(0.5) == 1.0
    assert f.value(2.0) == 4.0
    np.testing.assert_allclose(f.value(np.array([0.0, 0.5, 0.75, 1.0])),
                               [1.0, 3.0, 3.0, 4.0])


def test_step_function_tie_aggregation():
    f = StepFunction.from_jumps([0.3, 0.1, 0.3], [1.0, 2.0, 4.0])
    np.testing.assert_array_equal(f.times, [0.1, 0.3])
    np.testing.assert_array_equal(f.increments, [2.0, 5.0])


def test_step_function_tie_tolerance():
    f = StepFunction.from_jumps([0.1, 0.1 + 1e-12, 0.5], [1.0, 1.0, 1.0], tie_tol=1e-9)
    assert f.times.size == 2
    assert f.value(0.2) == 2.0


def test_step_function_rejects_unsorted():
    with pytest.raises(ValueError):
        StepFunction(np.array([0.5, 0.2]), np.array([1.0, 1.0]))


def test_step_function_truncated():
    f = StepFunction(np.array([0.2, 0.6, 0.9]), np.ones(3))
    g = f.truncated(0.6)
    assert g.times.tolist() == [0.2, 0.6]
    assert g.final_value == 2.0


def test_step_function_csv_roundtrip(tmp_path):
    f = StepFunction(np.array([0.25, 0.5]), np.array([-1.0, -2.0]), origin=3.0)
    path = tmp_path / "step.csv"
    f.to_csv(path)
    g = StepFunction.from_csv(path)
    probe = np.array([0.0, 0.25, 0.3, 0.5, 1.0])
    np.testing.assert_array_equal(f.value(probe), g.value(probe))


def test_cell_events_hand_trajectory():
    cd = cell_events(HAND_TRAJ, CELL)
    assert cd.n_total == 3
    assert sorted(cd.times.tolist()) == [0.2, 0.5]
    assert cd.visits == 2


def test_cell_events_disjoint_and_full():
    assert cell_events(HAND_TRAJ, Cell(40.0, 50.0)).visits == 0
    assert cell_events(HAND_TRAJ, Cell(0.1, 59.9, closed_right=True)).visits == 3


def test_risk_function_hand_values():
    y = risk_function(_cd([0.2, 0.5, 0.3]))
    assert y.value(0.0) == 3.0
    assert y.value(0.3) == 2.0  # sojourns 0.5 and 0.3 are both still at risk at 0.3
    assert y.value(0.51) == 0.0
    assert y.value(0.5) == 1.0


def test_risk_includes_censored():
    y = risk_function(_cd([0.4, 0.2], censored=[True, False]))
    assert y.value(0.3) == 1.0
    assert y.value(0.4) == 1.0
    assert y.value(0.41) == 0.0


def test_count_function_hand_values():
    n = count_function(_cd([0.2, 0.5, 0.3]))
    assert n.value(0.35) == 2.0
    assert n.value(0.1) == 0.0
    assert n.value(1.0) == 3.0


def test_count_function_tie_aggregation():
    n = count_function(_cd([0.2, 0.2]))
    assert n.times.tolist() == [0.2]
    assert n.increments.tolist() == [2.0]


def test_count_empty():
    n = count_function(_cd([]))
    assert n.value(5.0) == 0.0


def test_count_risk_split_identity():
    rng = np.random.default_rng(3)
    times = rng.uniform(0.01, 1.0, 40)
    cd = _cd(times)
    n = count_function(cd)
    for t in rng.uniform(0.0, 1.2, 25):
        assert n.value(t) + np.sum(times > t) == cd.visits


def test_count_risk_monotone_integer():
    rng = np.random.default_rng(4)
    cd = _cd(rng.uniform(0.01, 1.0, 30))
    grid = np.linspace(0.0, 1.2, 200)
    n_vals = count_function(cd).value(grid)
    y_vals = risk_function(cd).value(grid)
    assert np.all(np.diff(n_vals) >= 0)
    assert np.all(np.diff(y_vals) <= 0)
    assert np.all(n_vals == np.round(n_vals))
    assert np.all(y_vals == np.round(y_vals))
    assert risk_function(cd).value(0.0) == cd.visits


def test_generalized_inverse():
    assert generalized_inverse(0) == 0.0
    assert generalized_inverse(4) == 0.25
    assert generalized_inverse(1) == 1.0
    for y in range(0, 20):
        assert generalized_inverse(y) <= 1.0
    with pytest.raises(ValueError):
        generalized_inverse(-1)


def test_empirical_measure_hand_values():
    assert empirical_measure(HAND_TRAJ, CELL) == pytest.approx(2.0 / 3.0)
    assert empirical_measure(HAND_TRAJ, Cell(0.1, 59.9, closed_right=True)) == 1.0
    assert empirical_measure(HAND_TRAJ, Cell(40.0, 50.0)) == 0.0


def test_empirical_measure_needs_sojourns():
    lone = Trajectory(np.array([30.0]), np.empty(0), np.empty(0, dtype=bool))
    with pytest.raises(ValueError):
        empirical_measure(lone, CELL)


def test_risk_fraction_stabilises(machine_spec, center_cell):
    # Long-run at-risk fractions settle as the trajectory grows.
    traj = simulate_chain(machine_spec, 30.0, 200_000, derive_seed(9, 0))
    half = Trajectory(traj.marks[:100_001], traj.sojourns[:100_000],
                      traj.censored[:100_000])
    y_full = risk_function(cell_events(traj, center_cell))
    y_half = risk_function(cell_events(half, center_cell))
    for t in (0.2, 0.5, 0.8):
        assert abs(y_full.value(t) / 200_000 - y_half.value(t) / 100_000) < 0.01
