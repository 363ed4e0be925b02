"""Compare the compiled and pure-Python solver kernels.

Both backends must return identical records; the script reports time per
virtual unit and the speedup. Usage::

    python benchmarks/bench_kernels.py [--multiplier 20] [--repeats 3]
"""

import argparse
import time

from betrun import compiled_available
from betrun.corpus import mvc_corpus, tsp_corpus
from betrun.mvc import MvcSolver
from betrun.tsp import TspSolver


def timed(solver, inst, seed, budget, repeats):
    best, rec = float("inf"), None
    for _ in range(repeats):
        t = time.perf_counter()
        rec = solver.solve(inst, seed, budget)
        best = min(best, time.perf_counter() - t)
    return best, rec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--multiplier", type=int, default=20, help="budget in multiples of t_init")
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    if not compiled_available():
        raise SystemExit("compiled kernels are not built; install with the extension enabled")

    cases = [("tsp", TspSolver, tsp_corpus(20)[i]) for i in (0, 10, 19)]
    cases += [("mvc", MvcSolver, mvc_corpus(20)[i]) for i in (0, 10, 19)]
    print(f"{'problem':8s}{'instance':10s}{'budget':>10s}{'compiled':>12s}{'python':>12s}"
          f"{'ns/unit c':>11s}{'ns/unit py':>12s}{'speedup':>9s}")
    for problem, cls, inst in cases:
        fast, slow = cls(backend="compiled"), cls(backend="python")
        budget = args.multiplier * fast.init_cost(inst)
        tc, rc = timed(fast, inst, 1, budget, args.repeats)
        tp, rp = timed(slow, inst, 1, budget, 1)
        if rc != rp:
            raise SystemExit(f"{problem} {inst.name}: backends disagree")
        print(f"{problem:8s}{inst.name:10s}{budget:>10d}{tc:>11.4f}s{tp:>11.3f}s"
              f"{tc / budget * 1e9:>11.1f}{tp / budget * 1e9:>12.1f}{tp / tc:>8.0f}x")


if __name__ == "__main__":
    main()
