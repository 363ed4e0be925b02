"""FastVC-style local search behind the anytime solver contract.

Construction adds the higher-degree endpoint of every uncovered edge and then
drops vertices whose loss is zero. The search removes a vertex picked by BMS
(best loss among a random sample of cover members), then adds an endpoint of
a random uncovered edge: the endpoint other than the vertex just removed if
the edge touches it, else the endpoint with higher gain, then the one changed
longer ago, then the smaller id. Whenever the candidate is a cover it is
recorded if it is a new best and its minimum-loss vertex is removed.

Virtual time: one unit per vertex addition or removal; construction costs
``m + n`` units.
"""

from __future__ import annotations

from .. import _backend
from ..orchestrator import INF, AnytimeSolver, RunRecord
from .graph import Graph

BMS_SAMPLE = 50


class MvcSolver(AnytimeSolver):
    name = "mvc"

    def __init__(self, time_mode: str = "virtual", bms: int = BMS_SAMPLE,
                 backend: str | None = None):
        if time_mode not in ("virtual", "wallclock"):
            raise ValueError(f"unknown time mode {time_mode!r}")
        self.time_mode = time_mode
        self.bms = bms
        self.backend = backend or _backend.default_backend()
        self._kernel = _backend.kernel("mvc", self.backend)

    def init_cost(self, graph: Graph) -> int:
        return graph.m + graph.n

    def _call(self, graph: Graph, seed: int, budget: int, wallclock: bool):
        off, adj, adj_e = graph.csr
        return self._kernel.solve(graph.n, off, adj, adj_e, graph.edges[:, 0], graph.edges[:, 1],
                                  seed, int(budget), wallclock, self.bms)

    def construct(self, graph: Graph, seed: int) -> None:
        self._call(graph, seed, 0, True)

    def solve(self, graph: Graph, seed: int, budget: int) -> RunRecord:
        best, traj, cover, used = self._call(graph, seed, budget, self.time_mode == "wallclock")
        if best < 0:
            return RunRecord(seed, budget, used, INF)
        return RunRecord(seed, budget, used, int(best),
                         tuple((int(t), int(q)) for t, q in traj), tuple(sorted(cover)))


def solve_mvc(graph: Graph, seed: int, budget: int, time_mode: str = "virtual",
              backend: str | None = None) -> RunRecord:
    return MvcSolver(time_mode, backend=backend).solve(graph, seed, budget)
