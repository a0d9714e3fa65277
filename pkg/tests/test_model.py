import json
import math

import numpy as np
import pytest

from gdrp.model import (Customer, DroneType, Fleet, Instance, OutOfRange,
                        baseline_instance, build_distance_matrix,
                        builtin_fleet, builtin_instance, fleet_from_dict,
                        fleet_to_dict, generate_instance, instance_from_dict,
                        instance_to_dict, make_instance)


def test_distance_matrix_345():
    d = build_distance_matrix((0.0, 0.0), [Customer(id=1, position=(3.0, 4.0), package_mass=1.0)])
    assert d[0, 1] == 5.0
    assert d[1, 0] == 5.0
    assert d[0, 0] == 0.0


def test_distance_matrix_customer_at_depot():
    d = build_distance_matrix((0.0, 0.0), [Customer(id=1, position=(0.0, 0.0), package_mass=1.0)])
    assert d[0, 1] == 0.0


def test_distance_matrix_baseline_pair():
    # customers 1 (0.88, -4.81) and 8 (1.79, -2.75), by hand
    inst = baseline_instance(10)
    expected = math.sqrt(0.91 ** 2 + 2.06 ** 2)
    assert abs(inst.distance(1, 8) - expected) < 1e-12
    assert abs(expected - 2.2520) < 5e-5


def test_distance_matrix_symmetry_and_triangle():
    for seed in range(20):
        inst = generate_instance(6, seed=seed)
        d = inst.distance_matrix
        assert np.allclose(d, d.T)
        n1 = inst.n + 1
        for i in range(n1):
            for j in range(n1):
                for k in range(n1):
                    assert d[i, j] <= d[i, k] + d[k, j] + 1e-9


def test_baseline_instance_values():
    inst = baseline_instance(10)
    assert inst.n == 10
    assert inst.customers[0].position == (0.88, -4.81)
    assert inst.customers[0].package_mass == 0.89
    full = baseline_instance(18)
    assert full.customers[17].position == (2.59, 0.49)
    assert full.customers[17].package_mass == 0.97
    with pytest.raises(OutOfRange):
        baseline_instance(0)
    with pytest.raises(OutOfRange):
        baseline_instance(19)


def test_builtin_instances_resolve():
    assert builtin_instance("appendix-d:3").n == 3
    assert builtin_instance("example1").n == 3
    assert builtin_instance("example2").n == 2
    with pytest.raises(ValueError):
        builtin_instance("nope")


def test_example_geometries():
    e1 = builtin_instance("example1")
    for i, j, want in [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0),
                       (0, 2, math.sqrt(2)), (1, 3, math.sqrt(2))]:
        assert abs(e1.distance(i, j) - want) < 1e-12
    e2 = builtin_instance("example2")
    assert abs(e2.distance(0, 1) - 1.0) < 1e-12
    assert abs(e2.distance(0, 2) - 1.0) < 1e-12
    assert abs(e2.distance(1, 2) - 1.8) < 1e-12


def test_reference_fleet_values():
    fleet = builtin_fleet("table3")
    small, large = fleet.types
    assert (small.self_mass, small.takeoff_coeff, small.flight_coeff) == (3.0, 0.3, 10.0)
    assert (small.max_total_mass, small.energy_capacity, small.count) == (5.0, 300.0, 3)
    assert (large.self_mass, large.takeoff_coeff, large.flight_coeff) == (10.0, 1.0, 5.0)
    assert (large.max_total_mass, large.energy_capacity, large.count) == (20.0, 1500.0, 2)
    assert builtin_fleet("large-only").total_units == 5
    assert builtin_fleet("small-only").total_units == 5
    assert fleet.units()[0] == (1, 1)
    assert fleet.units()[-1] == (2, 2)


def test_type_invariants():
    with pytest.raises(ValueError):
        Customer(id=1, position=(0, 0), package_mass=0.0)
    with pytest.raises(ValueError):
        Customer(id=1, position=(0, 0), package_mass=1.0, time_window=(2.0, 1.0))
    with pytest.raises(ValueError):
        DroneType(type_id=1, self_mass=5.0, takeoff_coeff=0.1, flight_coeff=1.0,
                  max_total_mass=5.0, energy_capacity=10.0)
    with pytest.raises(ValueError):
        DroneType(type_id=1, self_mass=5.0, takeoff_coeff=0.1, flight_coeff=0.0,
                  max_total_mass=8.0, energy_capacity=10.0)
    with pytest.raises(ValueError):
        Fleet(types=(DroneType(type_id=1, self_mass=1, takeoff_coeff=0, flight_coeff=1,
                               max_total_mass=2, energy_capacity=1),
                     DroneType(type_id=1, self_mass=1, takeoff_coeff=0, flight_coeff=1,
                               max_total_mass=2, energy_capacity=1)))


def test_instance_invariants():
    c = [Customer(id=1, position=(1, 0), package_mass=1.0)]
    with pytest.raises(ValueError):
        Instance(depot_position=(0, 0), customers=tuple(c),
                 distance_matrix=np.zeros((3, 3)))
    bad = np.array([[0.0, 1.0], [2.0, 0.0]])
    with pytest.raises(ValueError):
        Instance(depot_position=(0, 0), customers=tuple(c), distance_matrix=bad)
    with pytest.raises(ValueError):
        Instance(depot_position=(0, 0),
                 customers=(Customer(id=2, position=(1, 0), package_mass=1.0),),
                 distance_matrix=np.array([[0.0, 1.0], [1.0, 0.0]]))


def test_matrix_is_readonly(baseline10):
    with pytest.raises(ValueError):
        baseline10.distance_matrix[0, 1] = 99.0


def test_instance_json_roundtrip(tmp_path):
    customers = [
        Customer(id=1, position=(0.57, -1.23), package_mass=1.31,
                 package_volume=2.5, time_window=(0.5, 3.25)),
        Customer(id=2, position=(2.0, 0.125), package_mass=0.77),
    ]
    inst = make_instance((0.25, 0.5), customers, service_time=0.1)
    data = instance_to_dict(inst)
    back = instance_from_dict(json.loads(json.dumps(data)))
    assert back.depot_position == inst.depot_position
    assert back.service_time == inst.service_time
    for a, b in zip(inst.customers, back.customers):
        assert a == b
    assert np.array_equal(back.distance_matrix, inst.distance_matrix)


def test_instance_json_with_distance_override():
    c = [Customer(id=1, position=(1.0, 0.0), package_mass=1.0)]
    override = np.array([[0.0, 7.5], [7.5, 0.0]])
    inst = make_instance((0, 0), c, distance_override=override)
    data = instance_to_dict(inst)
    assert data["distance_override"] == [[0.0, 7.5], [7.5, 0.0]]
    back = instance_from_dict(data)
    assert back.distance(0, 1) == 7.5


def test_instance_json_with_obstacles():
    c = [Customer(id=1, position=(2.0, 0.0), package_mass=1.0)]
    sq = [(0.9, -0.1), (1.1, -0.1), (1.1, 0.1), (0.9, 0.1)]
    inst = make_instance((0, 0), c, obstacles=[sq])
    back = instance_from_dict(instance_to_dict(inst))
    assert back.obstacles == inst.obstacles
    assert back.distance(0, 1) == inst.distance(0, 1)
    assert back.distance(0, 1) > 2.0


def test_fleet_json_roundtrip(table3):
    back = fleet_from_dict(json.loads(json.dumps(fleet_to_dict(table3))))
    assert back == table3


def test_generate_instance_props():
    a = generate_instance(8, area=(6.0, 4.0), mass_range=(0.5, 2.0), seed=11)
    b = generate_instance(8, area=(6.0, 4.0), mass_range=(0.5, 2.0), seed=11)
    assert [c.position for c in a.customers] == [c.position for c in b.customers]
    assert a.depot_position == (0.0, 0.0)
    for c in a.customers:
        assert -3.0 <= c.position[0] <= 3.0
        assert -2.0 <= c.position[1] <= 2.0
        assert 0.5 <= c.package_mass <= 2.0
    assert [c.position for c in generate_instance(8, seed=12).customers] != \
           [c.position for c in a.customers]
