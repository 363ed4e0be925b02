"""Undirected simple graphs: parsing (DIMACS, edge list, MatrixMarket) and cover checks."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable

import numpy as np

log = logging.getLogger(__name__)

FORMATS = ("dimacs", "edgelist", "mtx")


class GraphFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph on vertices ``0..n-1``.

    ``edges`` is an ``(m, 2)`` int32 array with ``u < v`` in every row, rows
    sorted lexicographically and unique.
    """

    name: str
    n: int
    edges: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_edges(cls, n: int, pairs: Iterable[tuple[int, int]], name: str = "graph") -> "Graph":
        arr = np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise ValueError("edge endpoint out of range")
        loops = arr[:, 0] == arr[:, 1]
        if loops.any():
            log.warning("%s: dropping %d self-loop(s)", name, int(loops.sum()))
            arr = arr[~loops]
        arr = np.sort(arr, axis=1)
        arr = np.unique(arr, axis=0) if len(arr) else arr
        edges = np.ascontiguousarray(arr, dtype=np.int32).reshape(-1, 2)
        edges.setflags(write=False)
        return cls(name=name, n=int(n), edges=edges)

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def degree(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n).astype(np.int32)

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(offsets, neighbours, edge_ids)``, neighbours in ascending edge-id order."""
        m = self.m
        src = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        dst = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        eid = np.concatenate([np.arange(m), np.arange(m)])
        order = np.lexsort((eid, src))
        offsets = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=self.n), out=offsets[1:])
        return (
            offsets,
            np.ascontiguousarray(dst[order], dtype=np.int32),
            np.ascontiguousarray(eid[order], dtype=np.int32),
        )

    def neighbors(self, v: int) -> np.ndarray:
        off, adj, _ = self.csr
        return adj[off[v]:off[v + 1]]


def is_cover(g: Graph, members: Iterable[int]) -> bool:
    """True iff every edge has at least one endpoint in ``members``."""
    mask = np.zeros(g.n, dtype=bool)
    for v in members:
        v = int(v)
        if not 0 <= v < g.n:
            raise ValueError(f"vertex {v} not in graph with {g.n} vertices")
        mask[v] = True
    if g.m == 0:
        return True
    return bool(np.all(mask[g.edges[:, 0]] | mask[g.edges[:, 1]]))


def _ints(parts: list[str], lineno: int) -> list[int]:
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise GraphFormatError(f"expected integers, got {' '.join(parts)!r}", lineno) from None


def _parse_dimacs(lines: list[str], name: str) -> Graph:
    n = None
    pairs = []
    for lineno, raw in enumerate(lines, 1):
        parts = raw.split()
        if not parts or parts[0] == "c":
            continue
        if parts[0] == "p":
            if len(parts) != 4 or n is not None:
                raise GraphFormatError("malformed problem line", lineno)
            n, _m = _ints(parts[2:], lineno)
        elif parts[0] == "e":
            if n is None:
                raise GraphFormatError("edge before problem line", lineno)
            if len(parts) < 3:
                raise GraphFormatError("malformed edge line", lineno)
            u, v = _ints(parts[1:3], lineno)
            if not (1 <= u <= n and 1 <= v <= n):
                raise GraphFormatError(f"vertex out of range 1..{n}", lineno)
            pairs.append((u - 1, v - 1))
        else:
            raise GraphFormatError(f"unknown line type {parts[0]!r}", lineno)
    if n is None:
        raise GraphFormatError("missing 'p edge' problem line")
    return Graph.from_edges(n, pairs, name)


def _parse_edgelist(lines: list[str], name: str, zero_based: bool) -> Graph:
    pairs = []
    base = 0 if zero_based else 1
    for lineno, raw in enumerate(lines, 1):
        parts = raw.split()
        if not parts or parts[0][0] in "#%":
            continue
        if len(parts) < 2:
            raise GraphFormatError("edge line needs two vertex ids", lineno)
        u, v = _ints(parts[:2], lineno)
        if u < base or v < base:
            raise GraphFormatError(f"vertex id below {base}", lineno)
        pairs.append((u - base, v - base))
    n = 1 + max((max(p) for p in pairs), default=-1)
    return Graph.from_edges(n, pairs, name)


def _parse_mtx(lines: list[str], name: str) -> Graph:
    if not lines or not lines[0].lower().startswith("%%matrixmarket"):
        raise GraphFormatError("missing %%MatrixMarket banner", 1)
    banner = lines[0].lower().split()
    if "coordinate" not in banner:
        raise GraphFormatError("only coordinate MatrixMarket files are supported", 1)
    size = None
    pairs = []
    for lineno, raw in enumerate(lines[1:], 2):
        parts = raw.split()
        if not parts or parts[0].startswith("%"):
            continue
        if size is None:
            if len(parts) != 3:
                raise GraphFormatError("malformed size line", lineno)
            rows, cols, _nnz = _ints(parts, lineno)
            if rows != cols:
                raise GraphFormatError("adjacency matrix must be square", lineno)
            size = rows
            continue
        if len(parts) < 2:
            raise GraphFormatError("malformed entry line", lineno)
        u, v = _ints(parts[:2], lineno)
        if not (1 <= u <= size and 1 <= v <= size):
            raise GraphFormatError(f"vertex out of range 1..{size}", lineno)
        pairs.append((u - 1, v - 1))
    if size is None:
        raise GraphFormatError("missing size line")
    return Graph.from_edges(size, pairs, name)


def parse_graph(text: str | bytes, format: str = "dimacs", name: str = "graph",
                zero_based: bool = False) -> Graph:
    """Parse ``text`` in one of :data:`FORMATS` into a normalized :class:`Graph`."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    lines = text.splitlines()
    fmt = format.lower()
    if fmt == "dimacs":
        return _parse_dimacs(lines, name)
    if fmt == "edgelist":
        return _parse_edgelist(lines, name, zero_based)
    if fmt == "mtx":
        return _parse_mtx(lines, name)
    raise ValueError(f"unknown graph format {format!r}")


def guess_format(path: str | Path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix == ".mtx":
        return "mtx"
    if suffix in (".edges", ".txt", ".el"):
        return "edgelist"
    return "dimacs"


def load_graph(path: str | Path, format: str | None = None) -> Graph:
    path = Path(path)
    return parse_graph(path.read_bytes(), format or guess_format(path), name=path.stem)


def format_dimacs(g: Graph) -> str:
    lines = [f"p edge {g.n} {g.m}"]
    lines += [f"e {u + 1} {v + 1}" for u, v in g.edges.tolist()]
    return "\n".join(lines) + "\n"


def format_cover(members: Iterable[int]) -> str:
    """Sorted 1-based vertex ids, one per line."""
    return "".join(f"{v + 1}\n" for v in sorted(int(v) for v in members))
