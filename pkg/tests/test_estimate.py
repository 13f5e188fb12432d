import numpy as np
import pytest

from jumprate import (Cell, CellData, ProcessSpec, StateSpace, Trajectory,
                      confidence_band, derive_seed, estimate_cell,
                      global_cumulative, nelson_aalen, simulate_chain,
                      sup_distance, uniform_partition, variance_estimate)
from jumprate.estimate import default_t_max


def _cd(times, censored=None, n_total=None):
    times = np.asarray(times, dtype=float)
    if censored is None:
        censored = np.zeros(times.size, dtype=bool)
    return CellData(
        n_total=times.size if n_total is None else n_total,
        times=times,
        censored=np.asarray(censored),
        horizon=2.0,
    )


def test_nelson_aalen_hand_values():
    lhat = nelson_aalen(_cd([0.2, 0.5, 0.3]))
    assert lhat.value(0.35) == pytest.approx(5.0 / 6.0, abs=1e-12)
    assert lhat.value(0.6) == pytest.approx(11.0 / 6.0, abs=1e-12)
    np.testing.assert_allclose(lhat.increments, [1 / 3, 1 / 2, 1.0])


def test_nelson_aalen_censored_stays_at_risk():
    lhat = nelson_aalen(_cd([0.4, 0.2], censored=[True, False]))
    assert lhat.times.tolist() == [0.2]
    assert lhat.value(1.0) == pytest.approx(0.5, abs=1e-12)


def test_nelson_aalen_empty():
    lhat = nelson_aalen(_cd([]))
    assert lhat.value(3.0) == 0.0


def test_nelson_aalen_tie_jump():
    lhat = nelson_aalen(_cd([0.2, 0.2, 0.7]))
    # tie of multiplicity 2 with 3 at risk enters as a single 2/3 jump
    assert lhat.value(0.2) == pytest.approx(2.0 / 3.0, abs=1e-12)


def test_nelson_aalen_jumps_bounded_by_one():
    rng = np.random.default_rng(10)
    for _ in range(50):
        m = int(rng.integers(1, 40))
        times = np.round(rng.uniform(0.01, 1.0, m), 2)
        censored = rng.random(m) < 0.3
        lhat = nelson_aalen(_cd(times, censored))
        if lhat.increments.size:
            assert np.all(lhat.increments <= 1.0 + 1e-12)
            assert np.all(lhat.increments > 0.0)
            assert np.all(np.diff(lhat.value(np.linspace(0, 1.2, 100))) >= 0)


def test_variance_hand_values():
    var = variance_estimate(_cd([0.2, 0.5, 0.3]))
    assert var.value(0.6) == pytest.approx(49.0 / 36.0, abs=1e-12)
    assert variance_estimate(_cd([])).value(1.0) == 0.0
    single = variance_estimate(_cd([0.2]))
    assert single.value(0.2) == 1.0
    assert single.value(5.0) == 1.0


def test_monotone_coupling_fresh_event():
    # Adding one uncensored event never lowers the estimate from that time on.
    rng = np.random.default_rng(12)
    for _ in range(200):
        m = int(rng.integers(1, 25))
        times = np.unique(np.round(rng.uniform(0.01, 1.0, m), 3))
        censored = rng.random(times.size) < 0.3
        base = nelson_aalen(_cd(times, censored))
        s0 = float(rng.uniform(0.01, 1.0))
        while s0 in times:
            s0 = float(rng.uniform(0.01, 1.0))
        extended = nelson_aalen(
            _cd(np.append(times, s0), np.append(censored, False))
        )
        probes = np.concatenate(([s0], times[times >= s0], [1.0, 1.5]))
        assert np.all(extended.value(probes) >= base.value(probes) - 1e-12)


def test_confidence_band_fixture():
    ce = estimate_fixture()
    low, high = confidence_band(ce, 0.6, 0.95)
    assert low == 0.0  # floored: the raw lower edge is negative
    assert high == pytest.approx(4.119957981963396, abs=1e-9)


def estimate_fixture():
    from jumprate.estimate import CumulativeEstimate

    cd = _cd([0.2, 0.5, 0.3])
    return CumulativeEstimate(
        lhat=nelson_aalen(cd),
        variance=variance_estimate(cd),
        visits=3,
        nu_hat=1.0,
        threshold_passed=True,
        horizon=2.0,
    )


def test_confidence_band_degenerate():
    ce = estimate_fixture()
    low, high = confidence_band(ce, 0.1, 0.95)
    assert (low, high) == (0.0, 0.0)  # no events yet: point band at zero
    low, high = confidence_band(ce, 0.6, 1e-12)
    assert high - low < 1e-9


def test_confidence_band_validation():
    ce = estimate_fixture()
    with pytest.raises(ValueError):
        confidence_band(ce, 2.0, 0.95)
    with pytest.raises(ValueError):
        confidence_band(ce, 0.5, 1.0)


def test_estimate_cell_machine(machine_spec, machine_traj_400, center_cell):
    ce = estimate_cell(machine_traj_400, center_cell, machine_spec, 0.8)
    assert abs(ce.nu_hat - 0.735) < 0.04
    assert ce.threshold_passed  # 1/sqrt(400) = 0.05
    assert ce.visits == round(ce.nu_hat * 400)
    assert ce.horizon == 1.0
    assert ce.lhat.times.size == 0 or ce.lhat.times[-1] <= 0.8


def test_estimate_cell_rare_visits(machine_spec, center_cell):
    marks = np.full(401, 30.0)
    marks[5] = 20.0
    marks[100] = 21.0
    traj = Trajectory(marks, np.full(400, 0.3), np.zeros(400, dtype=bool))
    ce = estimate_cell(traj, center_cell, machine_spec, 0.8)
    assert ce.nu_hat == pytest.approx(0.005)
    assert not ce.threshold_passed


def test_estimate_cell_window_validation(machine_spec, machine_traj_400, center_cell):
    with pytest.raises(ValueError):
        estimate_cell(machine_traj_400, center_cell, machine_spec, 1.0)
    ce = estimate_cell(machine_traj_400, center_cell, machine_spec, 0.8)
    assert ce is not None


def test_default_t_max():
    assert default_t_max(1.0) == pytest.approx(0.8)
    with pytest.raises(ValueError):
        default_t_max(float("inf"))


def test_global_cumulative_near_truth(machine_spec, center_partition):
    traj = simulate_chain(machine_spec, 30.0, 4000, derive_seed(13, 1))
    gc = global_cumulative(traj, center_partition, machine_spec, 0.9)
    assert abs(gc.evaluate(20.0, 0.8) - 3.2) < 0.3
    assert gc.evaluate(25.0, 0.8) == 0.0  # outside the region
    with pytest.raises(ValueError):
        gc.evaluate(20.0, 0.95)


def test_global_cumulative_gated_cells(machine_spec, center_partition):
    marks = np.full(401, 30.0)
    marks[7] = 20.0
    traj = Trajectory(marks, np.full(400, 0.3), np.zeros(400, dtype=bool))
    gc = global_cumulative(traj, center_partition, machine_spec, 0.8)
    assert gc.evaluate(20.0, 0.5) == 0.0
    assert gc.evaluate(20.0, 0.8) == 0.0


def test_global_cumulative_window_validation(machine_spec, machine_traj_400,
                                             center_partition):
    with pytest.raises(ValueError):
        global_cumulative(machine_traj_400, center_partition, machine_spec, 1.2)


def test_constant_rate_tracks_oracle(center_cell):
    # With a constant rate the cell-aggregated cumulative rate is exactly c*t,
    # and the estimator integrating only where the at-risk count is positive
    # coincides with it below the largest sojourn.
    from jumprate import constant_model

    spec = constant_model(2.0, t_star=1.0)
    traj = simulate_chain(spec, 30.0, 10_000, derive_seed(101, 0))
    ce = estimate_cell(traj, center_cell, spec, 0.9)
    s_max = traj.sojourns.max()

    def partial_oracle(t):
        return 2.0 * min(t, s_max)

    assert sup_distance(ce.lhat, partial_oracle, (0.0, 0.8), 801) < 0.05
    assert sup_distance(ce.lhat, lambda t: 2.0 * t, (0.0, 0.8), 801) < 0.05


def test_diameter_bias_envelope(machine_spec, center_cell):
    # The cell-aggregated curve sits within rate-slope * diameter of the
    # center-mark curve; at large n the estimate respects that envelope up
    # to small noise.
    traj = simulate_chain(machine_spec, 30.0, 20_000, derive_seed(17, 0))
    ce = estimate_cell(traj, center_cell, machine_spec, 0.9)
    grid = np.linspace(0.0, 0.8, 401)
    excess = np.abs(ce.lhat.value(grid) - 4.0 * grid) - 0.2 * grid
    assert float(excess.max()) < 0.1


DISCRETE_STATES = (10.0, 20.0, 30.0)
DISCRETE_ROWS = {
    10.0: (0.2, 0.5, 0.3),
    20.0: (0.4, 0.2, 0.4),
    30.0: (0.3, 0.3, 0.4),
}


def _discrete_spec():
    def sampler(z, rng):
        return float(rng.choice(DISCRETE_STATES, p=DISCRETE_ROWS[z]))

    return ProcessSpec(
        state_space=StateSpace(0.0, 60.0),
        jump_rate=lambda z, t: 0.1 * z,
        kernel_sampler=sampler,
        censorship=lambda z: 1.5,
        analytic_cumulative=lambda z, t: 0.1 * z * t,
        cumulative_inverse=lambda z, target: target / (0.1 * z),
    )


def _discrete_state_estimator(traj, x, t):
    """Direct per-state cumulative-rate estimator, coded independently."""
    total = 0.0
    n = traj.n_jumps
    for i in range(n):
        if traj.marks[i] != x or traj.sojourns[i] > t:
            continue
        at_risk = sum(
            1
            for j in range(n)
            if traj.marks[j] == x and traj.sojourns[j] >= traj.sojourns[i]
        )
        total += 1.0 / at_risk
    return total


def test_singleton_cell_matches_discrete_estimator():
    spec = _discrete_spec()
    traj = simulate_chain(spec, 20.0, 300, 31)
    cell = Cell(20.0, 20.5)  # contains exactly the state 20.0
    ce = estimate_cell(traj, cell, spec, 1.4)
    for t in np.linspace(0.1, 1.35, 14):
        assert ce.lhat.value(t) == pytest.approx(
            _discrete_state_estimator(traj, 20.0, t), abs=1e-12
        )
    from jumprate import empirical_measure

    assert empirical_measure(traj, cell) == pytest.approx(
        np.mean(traj.marks[:-1] == 20.0)
    )


def test_partition_evaluation_picks_cell(machine_spec, machine_traj_400):
    p = uniform_partition(18.0, 22.0, 1.0, machine_spec.state_space)
    gc = global_cumulative(machine_traj_400, p, machine_spec, 0.8)
    idx = p.locate(20.3)
    expected = gc.per_cell[idx]
    value = gc.evaluate(20.3, 0.5)
    if expected.threshold_passed:
        assert value == expected.lhat.value(0.5)
    else:
        assert value == 0.0
