import random

import pytest

from gdrp.model import (DroneType, Fleet, baseline_instance, builtin_fleet,
                        example1_instance, example2_instance, example_drone,
                        generate_instance)


@pytest.fixture(scope="session")
def table3():
    return builtin_fleet("table3")


@pytest.fixture(scope="session")
def baseline10():
    return baseline_instance(10)


@pytest.fixture(scope="session")
def example1():
    return example1_instance()


@pytest.fixture(scope="session")
def example2():
    return example2_instance()


@pytest.fixture(scope="session")
def demo_drone():
    return example_drone()


def random_fleet(rng, max_units=4):
    """Reference-like fleet with 1..max_units units across 1-2 types."""
    types = []
    small_count = rng.randint(0, 2)
    if small_count:
        types.append(DroneType(type_id=1, self_mass=3.0, takeoff_coeff=0.3,
                               flight_coeff=10.0, max_total_mass=5.0,
                               energy_capacity=300.0, count=small_count))
    large_count = rng.randint(1, max_units - small_count)
    types.append(DroneType(type_id=2, self_mass=10.0, takeoff_coeff=1.0,
                           flight_coeff=5.0, max_total_mass=20.0,
                           energy_capacity=1500.0, count=large_count))
    return Fleet(types=tuple(types))


def random_case(seed, n_max=6):
    """Seeded (instance, fleet, dispatch) triple for oracle comparisons."""
    rng = random.Random(seed)
    n = rng.randint(3, n_max)
    inst = generate_instance(n, area=(8.0, 8.0), mass_range=(0.5, 2.0), seed=seed)
    fleet = random_fleet(rng)
    dispatch = "required" if (rng.random() < 0.5 and n >= fleet.total_units) else "optional"
    return inst, fleet, dispatch
