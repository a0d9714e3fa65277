import math
import random

import pytest

from gdrp import milp
from gdrp.milp import (InfeasibleInput, MissingVariable,
                       SymmetryEncodingTooLarge, VariableIndex, build_model,
                       evaluate_assignment, export_lp, parse_lp,
                       solution_to_assignment)
from gdrp.model import (Customer, DroneType, Fleet, baseline_instance,
                        builtin_fleet, example_drone, generate_instance,
                        make_instance)
from gdrp.solver import Solution, SolveOptions, Tour, brute_force, solve
from conftest import random_case


def expected_counts(n, hk, symmetry=True, dispatch="optional"):
    U = sum(hk)
    counts = {
        "6": n, "7": n, "8": U, "9": U, "10": n * (n + 1) * U, "11": U,
        "14": U, "16": (n + 1) * U, "flow": n * U,
        "B2": (n + 1) ** 2 * U, "B3": (n + 1) ** 2 * U,
        "B4": (n + 1) ** 2 * U, "B5": (n + 1) ** 2 * U, "B6": U,
        "B7": (n + 1) * n * U, "B8": (n + 1) * n * U,
        "B9": n * (n - 1) * U, "B10": n * (n - 1) * U, "B11": n * (n - 1) * U,
        "B12": n * (n - 1) * U, "B13": n * (n - 1) * U,
    }
    if symmetry:
        counts["B14"] = sum(h - 1 for h in hk)
        counts["B15"] = sum(h - 1 for h in hk)
        counts["B16"] = n * U
    if dispatch == "required":
        counts["dispatch"] = U
    return {k: v for k, v in counts.items() if v}


def test_minimal_model():
    inst = generate_instance(1, seed=0)
    fleet = Fleet(types=(example_drone(1),))
    model = build_model(inst, fleet)
    counts = model.counts_by_tag()
    assert counts["6"] == 1
    # x family: (n+1)^2 = 4 binaries, two of them diagonal (fixed by tag-16 rows)
    xs = [v for v in model.variables if v.index.family == "x"]
    assert len(xs) == 4
    assert counts["16"] == 2
    res = solve(inst, fleet, SolveOptions(dispatch="optional"))
    assign = solution_to_assignment(res.best, model, inst, fleet)
    obj, violations = evaluate_assignment(model, assign)
    assert violations == []
    assert abs(obj - res.best.total_energy) <= 1e-9


def test_b9_count_small():
    inst = generate_instance(3, seed=0)
    model = build_model(inst, Fleet(types=(example_drone(1),)))
    assert model.counts_by_tag()["B9"] == 6  # n^2 - n with n = 3


@pytest.mark.parametrize("seed", range(20))
def test_count_formulas_random_sizes(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 5)
    hk = [rng.randint(1, 3) for _ in range(rng.randint(1, 2))]
    symmetry = rng.random() < 0.7
    dispatch = "required" if rng.random() < 0.3 else "optional"
    inst = generate_instance(n, seed=seed)
    types = tuple(DroneType(type_id=i + 1, self_mass=3 + i, takeoff_coeff=0.5,
                            flight_coeff=5.0, max_total_mass=20.0 + i,
                            energy_capacity=900.0, count=h)
                  for i, h in enumerate(hk))
    model = build_model(inst, Fleet(types=types), symmetry_breaking=symmetry,
                        dispatch=dispatch)
    assert model.counts_by_tag() == expected_counts(n, hk, symmetry, dispatch)


def test_symmetry_flag_removes_tags():
    inst = generate_instance(3, seed=1)
    fleet = Fleet(types=(example_drone(2),))
    off = build_model(inst, fleet, symmetry_breaking=False)
    tags = set(off.counts_by_tag())
    assert not tags & {"B14", "B15", "B16"}
    assert not any(v.index.family == "y" for v in off.variables)
    on = build_model(inst, fleet, symmetry_breaking=True)
    assert {"B14", "B15", "B16"} <= set(on.counts_by_tag())


def test_lp_export_roundtrip():
    inst = baseline_instance(4)
    fleet = builtin_fleet("table3")
    model = build_model(inst, fleet)
    text = export_lp(model)
    assert text == export_lp(model)  # deterministic
    parsed = parse_lp(text)
    assert len(parsed.constraints) == len(model.constraints)
    byname = {c.name: c for c in model.constraints}
    for name, coeffs, sense, rhs in parsed.constraints:
        c = byname[name]
        assert sense == c.sense
        assert abs(rhs - c.rhs) <= 1e-9 * max(1.0, abs(c.rhs))
        want = {k.name: v for k, v in c.coeffs.items()}
        assert set(coeffs) == set(want)
        for k, v in want.items():
            assert abs(coeffs[k] - v) <= 1e-9 * max(1.0, abs(v))
    want_obj = {k.name: v for k, v in model.objective.items()}
    assert set(parsed.objective) == set(want_obj)
    for k, v in want_obj.items():
        assert abs(parsed.objective[k] - v) <= 1e-9 * max(1.0, abs(v))
    binaries = {v.index.name for v in model.variables if v.binary}
    assert set(parsed.binaries) == binaries
    for v in model.variables:
        if not v.binary:
            lo, hi = parsed.bounds[v.index.name]
            assert abs(lo - v.lower) <= 1e-9 and abs(hi - v.upper) <= 1e-9


def test_minimal_lp_has_single_coverage_row():
    inst = generate_instance(1, seed=0)
    model = build_model(inst, Fleet(types=(example_drone(1),)))
    text = export_lp(model)
    assert sum(1 for line in text.splitlines() if line.startswith(" c6_")) == 1


def test_solution_to_assignment_example1(example1):
    fleet = Fleet(types=(example_drone(1),))
    model = build_model(example1, fleet)
    sol = Solution(tours=(Tour(drone_type=1, unit_index=1, visits=(2, 1, 3)),),
                   total_energy=0.0, total_distance=0.0)
    assign = solution_to_assignment(sol, model, example1, fleet)

    def idx(fam, *i):
        return VariableIndex(family=fam, indices=tuple(i))

    for i, j in ((0, 2), (2, 1), (1, 3), (3, 0)):
        assert assign[idx("x", i, j, 1, 1)] == 1.0
    assert sum(v for k, v in assign.items() if k.family == "x") == 4.0
    assert assign[idx("u", 1, 1, 1)] == 2.0
    assert assign[idx("u", 2, 1, 1)] == 1.0
    assert assign[idx("u", 3, 1, 1)] == 3.0
    assert assign[idx("z", 0, 2, 1, 1)] == 22.0
    obj, violations = evaluate_assignment(model, assign)
    assert violations == []
    assert abs(obj - (77 + 33 * math.sqrt(2))) <= 1e-9


def test_forced_self_loop_violates_16(example1):
    fleet = Fleet(types=(example_drone(1),))
    model = build_model(example1, fleet)
    res = solve(example1, fleet)
    assign = solution_to_assignment(res.best, model, example1, fleet)
    assign[VariableIndex(family="x", indices=(1, 1, 1, 1))] = 1.0
    _, violations = evaluate_assignment(model, assign)
    assert any(name.startswith("c16_1_") for name, _ in violations)


def test_infeasible_input_rejected(example1):
    fleet = Fleet(types=(example_drone(1),))
    model = build_model(example1, fleet)
    bad = Solution(tours=(Tour(drone_type=1, unit_index=1, visits=(1, 1)),),
                   total_energy=0.0, total_distance=0.0)
    with pytest.raises(InfeasibleInput):
        solution_to_assignment(bad, model, example1, fleet)


def test_missing_variable(example1):
    fleet = Fleet(types=(example_drone(1),))
    model = build_model(example1, fleet)
    with pytest.raises(MissingVariable):
        evaluate_assignment(model, {})


def test_random_optima_satisfy_model():
    checked = 0
    for seed in range(60):
        inst, fleet, dispatch = random_case(seed + 2000, n_max=6)
        try:
            res = solve(inst, fleet, SolveOptions(dispatch=dispatch))
        except Exception:
            continue
        model = build_model(inst, fleet)
        assign = solution_to_assignment(res.best, model, inst, fleet)
        obj, violations = evaluate_assignment(model, assign)
        assert violations == [], (seed, violations[:3])
        assert abs(obj - res.best.total_energy) <= 1e-6
        checked += 1
        if checked >= 50:
            break
    assert checked >= 50


def test_bigm_slack_bounds():
    # with x = 0 the weight-propagation rows must stay slack by construction
    for seed in (0, 3, 7):
        inst, fleet, dispatch = random_case(seed + 3000, n_max=5)
        try:
            res = solve(inst, fleet, SolveOptions(dispatch=dispatch))
        except Exception:
            continue
        model = build_model(inst, fleet)
        assign = solution_to_assignment(res.best, model, inst, fleet)
        mass = {c.id: c.package_mass for c in inst.customers}
        for c in model.constraints:
            if c.tag not in ("B7", "B8"):
                continue
            i, j, k, t = map(int, c.name.split("_")[1:])
            if assign[VariableIndex(family="x", indices=(i, j, k, t))] == 1.0:
                continue
            dtype = fleet.type_by_id(k)
            big = dtype.max_total_mass - dtype.self_mass - mass[j]
            wi = assign[VariableIndex(family="w", indices=(i, k, t))]
            wj = assign[VariableIndex(family="w", indices=(j, k, t))]
            assert -(big + mass[j]) - 1e-9 <= wi - wj - mass[j] <= big + 1e-9


def test_symmetry_rows_admit_optimum():
    # relabeling an optimal solution satisfies (B14)-(B16): the optimal value
    # survives symmetry breaking
    for seed in range(10):
        inst, fleet, dispatch = random_case(seed + 4000, n_max=5)
        opts = SolveOptions(dispatch=dispatch)
        try:
            res = brute_force(inst, fleet, opts)
        except Exception:
            continue
        model = build_model(inst, fleet, symmetry_breaking=True,
                            dispatch=dispatch)
        assign = solution_to_assignment(res.best, model, inst, fleet)
        obj, violations = evaluate_assignment(model, assign)
        assert violations == []
        assert abs(obj - res.best.total_energy) <= 1e-6


def test_lex_overflow_guard_warns():
    rng = random.Random(0)
    customers = [Customer(id=i + 1, position=(rng.uniform(-3, 3), rng.uniform(-3, 3)),
                          package_mass=1.0, time_window=(0.0, 10.0))
                 for i in range(53)]
    inst = make_instance((0, 0), customers, service_time=0.0)
    fleet = Fleet(types=(DroneType(type_id=1, self_mass=10, takeoff_coeff=1,
                                   flight_coeff=1, max_total_mass=100,
                                   energy_capacity=1e9, count=2, speed=30.0),))
    with pytest.warns(SymmetryEncodingTooLarge):
        model = build_model(inst, fleet, symmetry_breaking=True, time_windows=True)
    tags = set(model.counts_by_tag())
    assert "B14" in tags and "B15" not in tags and "B16" not in tags


def test_time_window_model():
    customers = [Customer(id=1, position=(1, 0), package_mass=1.0, time_window=(0.0, 2.0)),
                 Customer(id=2, position=(0, 1), package_mass=1.0, time_window=(0.1, 3.0))]
    inst = make_instance((0, 0), customers, service_time=0.05)
    fleet = Fleet(types=(DroneType(type_id=1, self_mass=10, takeoff_coeff=1,
                                   flight_coeff=1, max_total_mass=100,
                                   energy_capacity=1e9, count=1, speed=10.0),))
    model = build_model(inst, fleet, time_windows=True)
    tags = set(model.counts_by_tag())
    assert "C2" in tags
    assert not tags & {"B9", "B10", "B11", "B12", "B13"}
    assert not any(v.index.family in ("u", "s") for v in model.variables)
    n = inst.n
    assert model.counts_by_tag()["C2"] == n * n  # i in 0..n, j in 1..n, i != j

    opts = SolveOptions(enable_time_windows=True, dispatch="optional")
    res = solve(inst, fleet, opts)
    assign = solution_to_assignment(res.best, model, inst, fleet)
    obj, violations = evaluate_assignment(model, assign)
    assert violations == []
    assert abs(obj - res.best.total_energy) <= 1e-9
    # infinite windows cannot be linearized
    bad = [Customer(id=1, position=(1, 0), package_mass=1.0, time_window=(0.0, math.inf))]
    with pytest.raises(ValueError):
        build_model(make_instance((0, 0), bad), fleet, time_windows=True)


def test_volume_rows_data_driven():
    customers = [Customer(id=1, position=(1, 0), package_mass=1.0, package_volume=2.0),
                 Customer(id=2, position=(0, 1), package_mass=1.0, package_volume=3.0)]
    inst = make_instance((0, 0), customers)
    capped = DroneType(type_id=1, self_mass=10, takeoff_coeff=1, flight_coeff=1,
                       max_total_mass=100, energy_capacity=1e9, count=2,
                       volume_capacity=4.0)
    model = build_model(inst, Fleet(types=(capped,)))
    assert model.counts_by_tag()["C1"] == 2
    nocap = build_model(inst, Fleet(types=(example_drone(2),)))
    assert "C1" not in nocap.counts_by_tag()


def test_dispatch_rows():
    inst = generate_instance(3, seed=5)
    fleet = Fleet(types=(example_drone(2),))
    model = build_model(inst, fleet, dispatch="required")
    assert model.counts_by_tag()["dispatch"] == 2
    res = solve(inst, fleet, SolveOptions(dispatch="required"))
    assign = solution_to_assignment(res.best, model, inst, fleet)
    _, violations = evaluate_assignment(model, assign)
    assert violations == []
    # an idle-drone solution violates the dispatch rows
    lazy = solve(inst, Fleet(types=(example_drone(1),)), SolveOptions(dispatch="optional"))
    single = Solution(tours=lazy.best.tours, total_energy=lazy.best.total_energy,
                      total_distance=lazy.best.total_distance)
    assign2 = solution_to_assignment(single, model, inst, fleet)
    _, violations2 = evaluate_assignment(model, assign2)
    assert any(name.startswith("cdispatch") for name, _ in violations2)


def test_assignment_debug_dump(example1):
    fleet = Fleet(types=(example_drone(1),))
    model = build_model(example1, fleet)
    res = solve(example1, fleet)
    assign = solution_to_assignment(res.best, model, example1, fleet)
    dump = milp.assignment_to_dict(assign)
    assert sorted(dump["x"]) == sorted(
        [[0, 2, 1, 1], [2, 1, 1, 1], [1, 3, 1, 1], [3, 0, 1, 1]])
    assert dump["z"]["z_0_2_1_1"] == 22.0
    assert dump["u"]["u_2_1_1"] == 1.0
