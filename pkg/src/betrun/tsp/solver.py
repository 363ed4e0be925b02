"""Chained 2-opt solver behind the anytime solver contract.

Construction is a nearest-neighbour tour from a seed-chosen start city using
precomputed neighbour lists; improvement is 2-opt over the neighbour lists
with don't-look bits; at every local optimum a segment-local double-bridge
kick (all three cut points within ``kick_window`` consecutive tour positions)
is applied to the incumbent, which is only replaced on improvement.

Virtual time: one unit per evaluated 2-opt candidate; construction costs
``n * k`` units for ``k = min(neighbors, n - 1)``.
"""

from __future__ import annotations

import math
import time

from .. import _backend
from ..orchestrator import INF, AnytimeSolver, RunRecord
from .instance import TspInstance

DEFAULT_NEIGHBORS = 10
DEFAULT_KICK_WINDOW = 50


class TspSolver(AnytimeSolver):
    name = "tsp"

    def __init__(self, time_mode: str = "virtual", neighbors: int = DEFAULT_NEIGHBORS,
                 kick_window: int = DEFAULT_KICK_WINDOW, backend: str | None = None):
        if time_mode not in ("virtual", "wallclock"):
            raise ValueError(f"unknown time mode {time_mode!r}")
        self.time_mode = time_mode
        if kick_window < 3:
            raise ValueError("kick_window must be at least 3")
        self.neighbors = neighbors
        self.kick_window = kick_window
        self.backend = backend or _backend.default_backend()
        self._kernel = _backend.kernel("tsp", self.backend)

    def init_cost(self, instance: TspInstance) -> int:
        return instance.n * min(self.neighbors, instance.n - 1)

    def construct(self, instance: TspInstance, seed: int) -> None:
        # neighbour lists are part of construction: build them uncached
        instance._cache.pop(min(self.neighbors, instance.n - 1), None)
        self._kernel.solve(instance.coords, instance.ceil, instance.distance_matrix,
                           instance.neighbor_lists(self.neighbors), seed, 0, True, self.kick_window)

    def solve(self, instance: TspInstance, seed: int, budget: int) -> RunRecord:
        if instance.n < 3:
            raise ValueError("the solver needs at least 3 cities")
        best, traj, tour, used = self._kernel.solve(
            instance.coords, instance.ceil, instance.distance_matrix,
            instance.neighbor_lists(self.neighbors), seed, int(budget),
            self.time_mode == "wallclock", self.kick_window,
        )
        if best < 0:
            return RunRecord(seed, budget, used, INF)
        return RunRecord(seed, budget, used, int(best),
                         tuple((int(t), int(q)) for t, q in traj), tuple(tour))


def solve_tsp(instance: TspInstance, seed: int, budget: int, time_mode: str = "virtual",
              backend: str | None = None) -> RunRecord:
    return TspSolver(time_mode, backend=backend).solve(instance, seed, budget)
