import logging

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from betrun import compiled_available
from betrun.tsp import (
    TspInstance,
    TspSolver,
    TsplibError,
    dist,
    format_tour,
    format_tsplib,
    parse_tsplib,
    tour_cost,
    validate_tour,
)
from oracles import tsp_optimum

SMALL = """NAME : five
COMMENT : hand made
TYPE : TSP
DIMENSION : 5
EDGE_WEIGHT_TYPE : EUC_2D
NODE_COORD_SECTION
1 0 0
2 3 0
3 3 4
4 0 4
5 1.5 2.2
EOF
"""


def random_instance(n, seed, ceil=False):
    rng = np.random.default_rng(seed)
    return TspInstance(f"r{n}_{seed}", rng.uniform(0, 1000, size=(n, 2)),
                       edge_weight_type="CEIL_2D" if ceil else "EUC_2D")


def test_parse_small():
    inst = parse_tsplib(SMALL)
    assert inst.name == "five" and inst.n == 5 and inst.comment == "hand made"
    assert dist(inst, 0, 2) == 5
    assert dist(inst, 0, 1) == 3


def test_parse_without_eof_and_bytes():
    inst = parse_tsplib(SMALL.replace("EOF\n", "").encode())
    assert inst.n == 5


def test_format_round_trip():
    inst = random_instance(17, 3)
    again = parse_tsplib(format_tsplib(inst))
    assert np.array_equal(again.coords, inst.coords)
    assert again.name == inst.name


@pytest.mark.parametrize("mutate,fragment", [
    (lambda s: s.replace("TYPE : TSP", "TYPE : ATSP"), "TYPE"),
    (lambda s: s.replace("EUC_2D", "GEO"), "EDGE_WEIGHT_TYPE"),
    (lambda s: s.replace("DIMENSION : 5", "DIMENSION : 6"), "DIMENSION"),
    (lambda s: s.replace("DIMENSION : 5\n", ""), "DIMENSION"),
    (lambda s: s.replace("3 3 4", "3 3 four"), "malformed"),
    (lambda s: s.replace("3 3 4", "3 3"), "malformed"),
    (lambda s: s.replace("NODE_COORD_SECTION", "EDGE_WEIGHT_SECTION"), "section"),
    (lambda s: s.split("NODE_COORD_SECTION")[0], "NODE_COORD_SECTION"),
    (lambda s: s.replace("4 0 4", "3 0 4"), "duplicate"),
])
def test_parse_errors(mutate, fragment):
    with pytest.raises(TsplibError) as exc:
        parse_tsplib(mutate(SMALL))
    assert fragment.lower() in str(exc.value).lower()
    assert exc.value.line is not None


def test_parse_error_reports_line():
    with pytest.raises(TsplibError) as exc:
        parse_tsplib(SMALL.replace("3 3 4", "3 3 x"))
    assert exc.value.line == 9
    assert str(exc.value).startswith("line 9:")


def test_unknown_keyword_warns(caplog):
    with caplog.at_level(logging.WARNING):
        parse_tsplib(SMALL.replace("COMMENT", "DISPLAY_DATA_TYPE : NO\nCOMMENT"))
    assert "DISPLAY_DATA_TYPE" in caplog.text


def test_rounding_modes():
    assert dist(TspInstance("c", [[0, 0], [1, 1]], edge_weight_type="CEIL_2D"), 0, 1) == 2
    assert dist(TspInstance("e", [[0, 0], [1, 1]]), 0, 1) == 1
    # nint rounds halves up
    assert dist(TspInstance("h", [[0, 0], [2.5, 0]]), 0, 1) == 3
    assert dist(TspInstance("h", [[0, 0], [3, 0]], edge_weight_type="CEIL_2D"), 0, 1) == 3


def test_distance_matrix_matches_dist():
    inst = random_instance(40, 1, ceil=True)
    d = inst.distance_matrix
    for i in range(0, 40, 7):
        for j in range(40):
            assert d[i, j] == dist(inst, i, j)


def test_neighbor_lists_sorted_and_exclusive():
    inst = random_instance(60, 2)
    nb = inst.neighbor_lists(10)
    d = inst.distance_matrix
    for i in range(60):
        row = [int(c) for c in nb[i]]
        assert i not in row and len(set(row)) == 10
        keys = [(d[i, c], c) for c in row]
        assert keys == sorted(keys)
        others = sorted((d[i, c], c) for c in range(60) if c != i)
        assert keys == others[:10]
    assert inst.neighbor_lists(100).shape == (60, 59)


def test_format_tour():
    inst = parse_tsplib(SMALL)
    lines = format_tour(inst, [0, 1, 2, 3, 4], 14).splitlines()
    assert "TYPE : TOUR" in lines and "DIMENSION : 5" in lines
    body = lines[lines.index("TOUR_SECTION") + 1:]
    assert body == ["1", "2", "3", "4", "5", "-1", "EOF"]


def test_validate_tour():
    inst = parse_tsplib(SMALL)
    validate_tour(inst, [4, 3, 2, 1, 0])
    with pytest.raises(ValueError):
        validate_tour(inst, [0, 1, 2, 3, 3])
    with pytest.raises(ValueError):
        tour_cost(inst, [0, 1, 2])


def _check_record(inst, solver, rec, budget):
    assert rec.budget == budget and rec.budget_used <= budget
    validate_tour(inst, rec.solution)
    assert tour_cost(inst, rec.solution) == rec.best_quality
    times = [t for t, _ in rec.trajectory]
    quals = [q for _, q in rec.trajectory]
    assert times == sorted(times) and times[0] == solver.init_cost(inst)
    assert all(a > b for a, b in zip(quals, quals[1:]))
    assert quals[-1] == rec.best_quality and times[-1] <= budget


@pytest.mark.parametrize("n", [3, 4, 5, 12, 80])
def test_solver_valid_tours(n):
    inst = random_instance(n, n)
    s = TspSolver()
    for seed in range(5):
        budget = s.init_cost(inst) * 30
        _check_record(inst, s, s.solve(inst, seed, budget), budget)


def test_solver_infeasible_below_init():
    inst = random_instance(20, 0)
    s = TspSolver()
    rec = s.solve(inst, 1, s.init_cost(inst) - 1)
    assert not rec.feasible and rec.trajectory == () and rec.solution is None
    assert s.solve(inst, 1, s.init_cost(inst)).feasible


def test_solver_rejects_two_cities():
    with pytest.raises(ValueError):
        TspSolver().solve(TspInstance("two", [[0, 0], [1, 1]]), 1, 100)


def test_solver_rejects_tiny_kick_window():
    with pytest.raises(ValueError):
        TspSolver(kick_window=2)


def test_solver_deterministic(tiny_tsp):
    s = TspSolver()
    b = s.init_cost(tiny_tsp) * 50
    assert s.solve(tiny_tsp, 42, b) == s.solve(tiny_tsp, 42, b)
    assert s.solve(tiny_tsp, 42, b) != s.solve(tiny_tsp, 43, b)


_PREFIX_INST = random_instance(30, 11)


@given(st.integers(0, 2**64 - 1), st.integers(300, 6000), st.integers(0, 6000))
def test_anytime_prefix(seed, b, extra):
    s = TspSolver()
    short = s.solve(_PREFIX_INST, seed, b)
    long = s.solve(_PREFIX_INST, seed, b + extra)
    assert long.truncated(b) == short.trajectory
    assert long.best_quality <= short.best_quality


def test_oracle_on_square_with_centre():
    inst = parse_tsplib(SMALL)
    perms = ([0, 4, 1, 2, 3], [0, 1, 4, 2, 3], [0, 1, 2, 4, 3], [0, 1, 2, 3, 4])
    assert tsp_optimum(inst.distance_matrix) == min(tour_cost(inst, p) for p in perms)


def test_nine_city_optimum_rate():
    s = TspSolver()
    hits = 0
    for i in range(100):
        inst = random_instance(9, 1000 + i)
        opt = tsp_optimum(inst.distance_matrix)
        rec = s.solve(inst, i, s.init_cost(inst) * 100)
        assert rec.best_quality >= opt
        hits += rec.best_quality == opt
    assert hits >= 95


@pytest.mark.skipif(not compiled_available(), reason="compiled kernels not built")
@pytest.mark.parametrize("n,ceil", [(5, False), (9, True), (40, False), (150, True)])
def test_compiled_matches_python(n, ceil):
    inst = random_instance(n, 77 + n, ceil)
    c, p = TspSolver(backend="compiled"), TspSolver(backend="python")
    for seed in range(4):
        b = c.init_cost(inst) * 25
        assert c.solve(inst, seed, b) == p.solve(inst, seed, b)


@pytest.mark.skipif(not compiled_available(), reason="compiled kernels not built")
def test_compiled_matches_python_without_dense_matrix(monkeypatch):
    import betrun.tsp.instance as mod

    monkeypatch.setattr(mod, "DENSE_LIMIT", 10)
    inst = random_instance(30, 5)
    assert inst.distance_matrix is None
    c, p = TspSolver(backend="compiled"), TspSolver(backend="python")
    b = c.init_cost(inst) * 20
    assert c.solve(inst, 3, b) == p.solve(inst, 3, b)


def test_wallclock_mode_runs(tiny_tsp):
    s = TspSolver("wallclock")
    rec = s.solve(tiny_tsp, 1, 20_000)
    assert rec.feasible and tour_cost(tiny_tsp, rec.solution) == rec.best_quality
    assert rec.budget_used >= 0


def test_three_node_document_and_small_costs():
    doc = "NAME : tri\nTYPE : TSP\nDIMENSION : 3\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n" \
          "1 0 0\n2 10 0\n3 5 8.660254037844386\n"
    inst = parse_tsplib(doc)
    assert inst.n == 3
    assert tour_cost(inst, [0, 1, 2]) == 30
    assert dist(TspInstance("p", [[0, 0], [3, 4]]), 0, 1) == 5
    assert dist(inst, 1, 1) == 0 and dist(inst, 0, 2) == dist(inst, 2, 0)


@given(st.permutations(list(range(8))), st.integers(0, 7), st.booleans())
def test_cost_invariant_under_rotation_and_reversal(order, shift, reverse):
    inst = random_instance(8, 21)
    other = order[shift:] + order[:shift]
    if reverse:
        other = other[::-1]
    assert tour_cost(inst, other) == tour_cost(inst, order)


def test_unit_square_solved_immediately():
    side = 100
    inst = TspInstance("sq", [[0, 0], [side, 0], [side, side], [0, side]])
    s = TspSolver()
    for seed in range(10):
        assert s.solve(inst, seed, s.init_cost(inst) + 4 * 3).best_quality == 4 * side


def test_seven_city_never_beats_optimum():
    s = TspSolver()
    for i in range(20):
        inst = random_instance(7, 300 + i)
        opt = tsp_optimum(inst.distance_matrix)
        best = min(s.solve(inst, seed, s.init_cost(inst) * 20).best_quality for seed in range(3))
        assert best >= opt
