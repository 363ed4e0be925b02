"""Seeded generators for the small "desk" benchmark corpus.

TSP: uniform and clustered Euclidean instances with 50 to 300 cities.
MVC: Erdos-Renyi style random graphs with 200 to 2000 vertices.
Everything is derived from one integer seed, so the corpus can be rebuilt
instead of shipped.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .mvc.graph import Graph, format_dimacs
from .tsp.instance import TspInstance, format_tsplib

COORD_SPAN = 10_000.0
DEFAULT_SEED = 20170


def _rng(seed: int, tag: str, i: int) -> np.random.Generator:
    return np.random.default_rng([seed, sum(map(ord, tag)), i])


def _log_spaced(lo: int, hi: int, count: int) -> list[int]:
    if count == 1:
        return [lo]
    return [int(round(lo * (hi / lo) ** (i / (count - 1)))) for i in range(count)]


def uniform_tsp(n: int, rng: np.random.Generator, name: str) -> TspInstance:
    coords = np.round(rng.uniform(0.0, COORD_SPAN, size=(n, 2)), 1)
    return TspInstance(name, coords, comment="uniform random")


def clustered_tsp(n: int, rng: np.random.Generator, name: str,
                  clusters: int | None = None) -> TspInstance:
    """Cities scattered normally around ``clusters`` uniform centres."""
    c = clusters or max(3, n // 25)
    centres = rng.uniform(0.0, COORD_SPAN, size=(c, 2))
    which = rng.integers(0, c, size=n)
    spread = COORD_SPAN / np.sqrt(n)
    coords = centres[which] + rng.normal(0.0, spread, size=(n, 2))
    coords = np.round(np.clip(coords, 0.0, COORD_SPAN), 1)
    return TspInstance(name, coords, comment=f"clustered ({c} centres)")


def random_graph(n: int, avg_degree: float, rng: np.random.Generator, name: str) -> Graph:
    """``G(n, m)`` with ``m = round(n * avg_degree / 2)`` distinct edges."""
    m = int(round(n * avg_degree / 2))
    seen: set[tuple[int, int]] = set()
    while len(seen) < m:
        u, v = rng.integers(0, n, size=2)
        if u != v:
            seen.add((int(min(u, v)), int(max(u, v))))
    return Graph.from_edges(n, sorted(seen), name=name)


def tsp_corpus(count: int = 20, seed: int = DEFAULT_SEED, n_min: int = 50,
               n_max: int = 300) -> list[TspInstance]:
    """Half uniform, half clustered; sizes log-spaced."""
    sizes = _log_spaced(n_min, n_max, (count + 1) // 2)
    out = []
    for i in range(count):
        n = sizes[i // 2]
        rng = _rng(seed, "tsp", i)
        if i % 2 == 0:
            out.append(uniform_tsp(n, rng, f"u{n}_{i:02d}"))
        else:
            out.append(clustered_tsp(n, rng, f"c{n}_{i:02d}"))
    return out


def mvc_corpus(count: int = 20, seed: int = DEFAULT_SEED, n_min: int = 200,
               n_max: int = 2000, avg_degree: float = 4.0) -> list[Graph]:
    sizes = _log_spaced(n_min, n_max, count)
    return [random_graph(n, avg_degree, _rng(seed, "mvc", i), f"g{n}_{i:02d}")
            for i, n in enumerate(sizes)]


def write_corpus(directory: str | os.PathLike, seed: int = DEFAULT_SEED,
                 tsp_count: int = 20, mvc_count: int = 20) -> tuple[list[Path], list[Path]]:
    """Write ``tsp/*.tsp`` and ``mvc/*.dimacs`` below ``directory``."""
    root = Path(directory)
    (root / "tsp").mkdir(parents=True, exist_ok=True)
    (root / "mvc").mkdir(parents=True, exist_ok=True)
    tsp_paths, mvc_paths = [], []
    for inst in tsp_corpus(tsp_count, seed):
        p = root / "tsp" / f"{inst.name}.tsp"
        p.write_text(format_tsplib(inst), encoding="utf-8")
        tsp_paths.append(p)
    for g in mvc_corpus(mvc_count, seed):
        p = root / "mvc" / f"{g.name}.dimacs"
        p.write_text(format_dimacs(g), encoding="utf-8")
        mvc_paths.append(p)
    return tsp_paths, mvc_paths
