import pytest

from jumprate import Cell, derive_seed, machine_model, simulate_chain, uniform_partition


@pytest.fixture(scope="session")
def machine_spec():
    return machine_model()


@pytest.fixture(scope="session")
def center_cell():
    return Cell(18.0, 22.0, closed_right=True)


@pytest.fixture(scope="session")
def center_partition(machine_spec):
    return uniform_partition(18.0, 22.0, 4.0, machine_spec.state_space)


@pytest.fixture(scope="session")
def machine_traj_400(machine_spec):
    return simulate_chain(machine_spec, 30.0, 400, derive_seed(42, 400, 0))
