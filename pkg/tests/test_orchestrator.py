import json
import sys
import textwrap
from concurrent.futures import ThreadPoolExecutor

import pytest
from hypothesis import given
from hypothesis import strategies as st

from betrun import (
    BetAndRunResult,
    ExternalSolver,
    NoFeasibleRun,
    RunRecord,
    Strategy,
    catalog,
    derive_seed,
    measure_t_init,
    resolve_schedule,
    run_bet_and_run,
)
from betrun.orchestrator import continue_run, select_winner
from betrun.tsp import TspSolver
from mocks import TableSolver, table


def oracle_quality(seed, budget, init=10):
    """Best tabulated quality reachable by ``seed`` within ``budget``."""
    if budget < init:
        return float("inf")
    return [q for t, q in table(seed, init=init) if t <= budget][-1]


def sequential_oracle(strategy, total, master):
    sched = resolve_schedule(strategy, total)
    seeds = [derive_seed(master, i) for i in range(len(sched.phase1))]
    finals = [oracle_quality(s, b) for s, b in zip(seeds, sched.phase1)]
    w = min(range(len(finals)), key=lambda i: (finals[i], i))
    if finals[w] == float("inf"):
        return w, finals[w]
    return w, oracle_quality(seeds[w], sched.phase1[w] + sched.phase2)


strategy_st = st.sampled_from(list(catalog().values())) | st.builds(
    lambda k, x: Strategy("fixed", k, x), st.integers(1, 12), st.sampled_from(["0.5", "3", "8"])
)


@given(strategy_st, st.integers(2_000, 60_000), st.integers(0, 2**64 - 1))
def test_matches_sequential_oracle(strategy, total, master):
    solver = TableSolver()
    w, q = sequential_oracle(strategy, total, master)
    if q == float("inf"):
        with pytest.raises(NoFeasibleRun):
            run_bet_and_run(solver, None, strategy, total, master)
        return
    res = run_bet_and_run(solver, None, strategy, total, master)
    assert (res.winner_index, res.best_quality) == (w, q)
    assert res.accounted_time == total
    sched = res.schedule
    assert [r.budget for r in res.phase1] == list(sched.phase1)
    if sched.phase2:
        assert res.final.budget == sched.phase1[w] + sched.phase2
        assert res.final.seed == res.phase1[w].seed


def test_single_run_equals_direct_call(tiny_tsp):
    s = TspSolver()
    total = s.init_cost(tiny_tsp) * 100
    res = run_bet_and_run(s, tiny_tsp, Strategy.parse("restarts:1:100"), total, 9)
    assert res.final == s.solve(tiny_tsp, derive_seed(9, 0), total)
    assert res.schedule.phase2 == 0


def test_four_quarters_is_best_of_four(tiny_tsp):
    s = TspSolver()
    total = s.init_cost(tiny_tsp) * 100
    res = run_bet_and_run(s, tiny_tsp, Strategy.parse("restarts:4:25"), total, 3)
    direct = [s.solve(tiny_tsp, derive_seed(3, i), total // 4) for i in range(4)]
    assert res.best_quality == min(r.best_quality for r in direct)
    assert res.final == direct[res.winner_index]


def test_phase2_is_seed_replay():
    solver = TableSolver()
    res = run_bet_and_run(solver, None, Strategy.parse("restarts:4:10"), 10_000, 5)
    w = res.phase1[res.winner_index]
    assert solver.calls[-1] == (w.seed, 1000 + 6000)
    assert res.final.truncated(w.budget) == w.trajectory
    assert res.final.best_quality <= w.best_quality


def test_truncation_leftover_goes_to_phase2():
    res = run_bet_and_run(TableSolver(), None, Strategy.parse("restarts:3:33"), 1003, 1)
    assert res.schedule.phase1 == (330, 330, 330)
    assert res.schedule.phase2 == 13
    assert res.final.budget == 343


def test_losers_drop_solutions():
    res = run_bet_and_run(TableSolver(), None, Strategy.parse("restarts:10:4"), 10_000, 2)
    for i, r in enumerate(res.phase1):
        assert (r.solution is not None) == (i == res.winner_index)


def test_select_winner_lowest_index_on_ties():
    recs = [RunRecord(i, 10, 10, q) for i, q in enumerate([5, 3, 3, 4])]
    assert select_winner(recs) == 1


def test_no_feasible_run():
    solver = TableSolver(init=10_000)
    with pytest.raises(NoFeasibleRun):
        run_bet_and_run(solver, None, Strategy.parse("restarts:10:4"), 20_000, 1)


def test_infeasible_runs_lose():
    bad = {derive_seed(1, 0), derive_seed(1, 1)}
    res = run_bet_and_run(TableSolver(infeasible_seeds=bad), None,
                          Strategy.parse("restarts:4:10"), 10_000, 1)
    assert res.winner_index >= 2
    assert res.phase1[0].best_quality == float("inf")


def test_continue_run_rejects_bad_args():
    with pytest.raises(ValueError):
        continue_run(TableSolver(), None, 1, 0, 5)
    with pytest.raises(ValueError):
        continue_run(TableSolver(), None, 1, 5, -1)


def test_json_round_trip():
    res = run_bet_and_run(TableSolver(), None, Strategy.parse("luby:10:1"), 50_000, 4)
    d = json.loads(json.dumps(res.to_dict(with_solution=True)))
    assert set(d) >= {"strategy", "schedule", "phase1", "winner_index", "final", "accounted_time"}
    again = BetAndRunResult.from_dict(d)
    assert again.final.best_quality == res.final.best_quality
    assert again.final == res.final and again.schedule == res.schedule
    # Phase-1 records are serialized without solutions
    assert again.phase1 == tuple(r.without_solution() for r in res.phase1)
    assert again.strategy == res.strategy and again.accounted_time == res.accounted_time


def test_json_inf_quality():
    d = RunRecord(1, 5, 5, float("inf")).to_dict()
    assert d["best_quality"] == "inf"
    assert RunRecord.from_dict(json.loads(json.dumps(d))).best_quality == float("inf")


@pytest.mark.parametrize("workers", [2, 8])
def test_executor_is_deterministic(tiny_tsp, workers):
    s = TspSolver()
    total = s.init_cost(tiny_tsp) * 200
    strat = Strategy.parse("restarts:40:1")
    seq = run_bet_and_run(s, tiny_tsp, strat, total, 6)
    with ThreadPoolExecutor(workers) as ex:
        par = run_bet_and_run(s, tiny_tsp, strat, total, 6, executor=ex)
    assert par == seq


def test_measure_t_init_virtual(tiny_tsp):
    assert measure_t_init(TspSolver(), tiny_tsp) == 30 * 10
    assert measure_t_init(TspSolver("wallclock"), tiny_tsp) >= 1


def test_wallclock_reports_raw_elapsed(tiny_tsp):
    res = run_bet_and_run(TspSolver("wallclock"), tiny_tsp, Strategy.parse("restarts:4:25"),
                          40_000, 1)
    assert res.raw_elapsed_us is not None and res.raw_elapsed_us > 0
    assert res.accounted_time == 40_000


def _script(tmp_path, body):
    p = tmp_path / "fake_solver.py"
    p.write_text(textwrap.dedent(body))
    return f"{sys.executable} {p} {{instance}} {{seed}} {{timelimit_s}}"


def test_external_parses_improvements(tmp_path):
    cmd = _script(tmp_path, """
        import sys
        print("starting", sys.argv[1:], flush=True)
        for q in (50, 40, 45, 30):
            print(f"best {q}", flush=True)
    """)
    ext = ExternalSolver(cmd, init_cost_us=1000)
    rec = ext.solve("inst.tsp", 7, 5_000_000)
    assert [q for _, q in rec.trajectory] == [50, 40, 30]
    assert rec.best_quality == 30
    times = [t for t, _ in rec.trajectory]
    assert times == sorted(set(times))


def test_external_command_fields():
    ext = ExternalSolver("solver -i {instance} -s {seed} -t {timelimit_s}")
    assert ext.command("a b.tsp", 3, 1_500_000) == ["solver", "-i", "a b.tsp", "-s", "3", "-t", "1.5"]


def test_external_killed_at_budget_keeps_last_quality(tmp_path):
    cmd = _script(tmp_path, """
        import time
        print("quality = 12.5", flush=True)
        time.sleep(30)
    """)
    rec = ExternalSolver(cmd).solve("x", 1, 300_000)
    assert rec.best_quality == 12.5 and rec.budget_used <= 300_000


@pytest.mark.parametrize("body", ["import sys; print('best 3'); sys.exit(2)", "print('nothing')"])
def test_external_failures_are_infeasible(tmp_path, body):
    rec = ExternalSolver(_script(tmp_path, body)).solve("x", 1, 5_000_000)
    assert not rec.feasible


def test_external_spawn_failure():
    assert not ExternalSolver("/nonexistent/solver {seed}").solve("x", 1, 100_000).feasible


def test_external_needs_declared_init_cost():
    ext = ExternalSolver("true")
    with pytest.raises(NotImplementedError):
        ext.init_cost("x")
    with pytest.raises(NotImplementedError):
        measure_t_init(ext, "x")
