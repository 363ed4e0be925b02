"""TSPLIB instances, the rounded Euclidean metrics and tour utilities."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)

SUPPORTED_WEIGHT_TYPES = ("EUC_2D", "CEIL_2D")
# Dense integer distance matrix is built up to this many cities.
DENSE_LIMIT = 3000


class TsplibError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True, eq=False)
class TspInstance:
    name: str
    coords: np.ndarray  # (n, 2) float64
    edge_weight_type: str = "EUC_2D"
    comment: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        coords = np.ascontiguousarray(self.coords, dtype=np.float64).reshape(-1, 2)
        if not np.all(np.isfinite(coords)):
            raise ValueError("coordinates must be finite")
        if self.edge_weight_type not in SUPPORTED_WEIGHT_TYPES:
            raise TsplibError(f"unsupported EDGE_WEIGHT_TYPE {self.edge_weight_type}")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def ceil(self) -> bool:
        return self.edge_weight_type == "CEIL_2D"

    def _round(self, d: np.ndarray) -> np.ndarray:
        if self.ceil:
            return np.ceil(d).astype(np.int64)
        return np.floor(d + 0.5).astype(np.int64)

    def _rows(self, lo: int, hi: int) -> np.ndarray:
        dx = self.coords[lo:hi, 0:1] - self.coords[None, :, 0]
        dy = self.coords[lo:hi, 1:2] - self.coords[None, :, 1]
        return self._round(np.sqrt(dx * dx + dy * dy))

    @cached_property
    def distance_matrix(self) -> np.ndarray | None:
        """Dense int32 matrix of rounded distances, or None for large instances."""
        if self.n > DENSE_LIMIT:
            return None
        d = self._rows(0, self.n)
        if d.size and d.max() >= 2**31:
            return None
        return np.ascontiguousarray(d, dtype=np.int32)

    def neighbor_lists(self, k: int = 10) -> np.ndarray:
        """The ``min(k, n-1)`` nearest cities of each city, ordered by (distance, index)."""
        k = min(k, self.n - 1)
        if k in self._cache:
            return self._cache[k]
        n = self.n
        out = np.empty((n, k), dtype=np.int32)
        idx = np.arange(n, dtype=np.int64)
        chunk = max(1, 2_000_000 // max(n, 1))
        for lo in range(0, n, chunk):
            hi = min(n, lo + chunk)
            # (distance, index) packed into one unique sortable key
            key = self._rows(lo, hi) * n + idx[None, :]
            key[np.arange(hi - lo), np.arange(lo, hi)] = np.iinfo(np.int64).max
            if k < n - 1:
                part = np.partition(key, k - 1, axis=1)[:, :k]
            else:
                part = key[:, :]
            part = np.sort(part, axis=1)[:, :k]
            out[lo:hi] = part % n
        out.setflags(write=False)
        self._cache[k] = out
        return out


def _rounded(instance: TspInstance, d: float) -> int:
    if instance.ceil:
        return int(math.ceil(d))
    return int(d + 0.5)


def dist(instance: TspInstance, i: int, j: int) -> int:
    """TSPLIB distance between cities ``i`` and ``j`` (nint or ceiling)."""
    xi, yi = instance.coords[i]
    xj, yj = instance.coords[j]
    dx = float(xi) - float(xj)
    dy = float(yi) - float(yj)
    return _rounded(instance, math.sqrt(dx * dx + dy * dy))


def validate_tour(instance: TspInstance, order: Sequence[int]) -> None:
    n = instance.n
    if len(order) != n or sorted(int(c) for c in order) != list(range(n)):
        raise ValueError("tour is not a permutation of the cities")


def tour_cost(instance: TspInstance, order: Sequence[int]) -> int:
    """Closed tour length; recomputed from coordinates, independent of any cache."""
    validate_tour(instance, order)
    order = [int(c) for c in order]
    total = 0
    for a, b in zip(order, order[1:] + order[:1]):
        total += dist(instance, a, b)
    return total


def parse_tsplib(text: str | bytes, name: str | None = None) -> TspInstance:
    """Parse a TSPLIB ``.tsp`` document with a NODE_COORD_SECTION."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    header: dict[str, str] = {}
    coords: dict[int, tuple[float, float]] = {}
    in_coords = False
    last_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        last_line = lineno
        line = raw.strip()
        if not line:
            continue
        if line == "EOF":
            break
        if in_coords:
            head = line.split(":", 1)[0].strip()
            if head.replace("_", "").isalpha() and head.isupper():
                in_coords = False
            else:
                parts = line.split()
                if len(parts) != 3:
                    raise TsplibError(f"malformed coordinate line {line!r}", lineno)
                try:
                    idx = int(parts[0])
                    x, y = float(parts[1]), float(parts[2])
                except ValueError:
                    raise TsplibError(f"malformed coordinate line {line!r}", lineno) from None
                if idx in coords:
                    raise TsplibError(f"duplicate node {idx}", lineno)
                coords[idx] = (x, y)
                continue
        if line.startswith("NODE_COORD_SECTION"):
            in_coords = True
            continue
        if ":" in line:
            key, value = (s.strip() for s in line.split(":", 1))
        else:
            parts = line.split(None, 1)
            key, value = parts[0], (parts[1].strip() if len(parts) > 1 else "")
        key = key.upper()
        if key in ("NAME", "TYPE", "DIMENSION", "EDGE_WEIGHT_TYPE", "COMMENT"):
            header[key] = value
            if key == "TYPE" and value.split()[0].upper() != "TSP":
                raise TsplibError(f"unsupported TYPE {value}", lineno)
            if key == "EDGE_WEIGHT_TYPE" and value not in SUPPORTED_WEIGHT_TYPES:
                raise TsplibError(f"unsupported EDGE_WEIGHT_TYPE {value}", lineno)
        elif key.endswith("_SECTION"):
            raise TsplibError(f"unsupported section {key}", lineno)
        else:
            log.warning("line %d: ignoring unknown TSPLIB keyword %s", lineno, key)

    if "DIMENSION" not in header:
        raise TsplibError("missing DIMENSION", last_line)
    try:
        dim = int(header["DIMENSION"])
    except ValueError:
        raise TsplibError(f"bad DIMENSION {header['DIMENSION']!r}") from None
    if not coords:
        raise TsplibError("missing NODE_COORD_SECTION", last_line)
    if len(coords) != dim or sorted(coords) != list(range(1, dim + 1)):
        raise TsplibError(
            f"DIMENSION is {dim} but {len(coords)} nodes numbered "
            f"{min(coords)}..{max(coords)} were given", last_line
        )
    xy = np.array([coords[i] for i in range(1, dim + 1)], dtype=np.float64)
    return TspInstance(
        name=name or header.get("NAME", "unnamed"),
        coords=xy,
        edge_weight_type=header.get("EDGE_WEIGHT_TYPE", "EUC_2D"),
        comment=header.get("COMMENT", ""),
    )


def load_tsplib(path: str | Path) -> TspInstance:
    path = Path(path)
    inst = parse_tsplib(path.read_bytes())
    if inst.name == "unnamed":
        object.__setattr__(inst, "name", path.stem)
    return inst


def format_tsplib(instance: TspInstance) -> str:
    lines = [
        f"NAME : {instance.name}",
        "TYPE : TSP",
        f"DIMENSION : {instance.n}",
        f"EDGE_WEIGHT_TYPE : {instance.edge_weight_type}",
        "NODE_COORD_SECTION",
    ]
    lines += [f"{i} {x!r} {y!r}" for i, (x, y) in enumerate(instance.coords.tolist(), 1)]
    lines.append("EOF")
    return "\n".join(lines) + "\n"


def format_tour(instance: TspInstance, order: Iterable[int], length: int | None = None) -> str:
    """Render a tour in TSPLIB TOUR format (1-based city ids)."""
    order = [int(c) for c in order]
    lines = [f"NAME : {instance.name}.tour", "TYPE : TOUR"]
    if length is not None:
        lines.append(f"COMMENT : length {length}")
    lines += [f"DIMENSION : {len(order)}", "TOUR_SECTION"]
    lines += [str(c + 1) for c in order]
    lines += ["-1", "EOF"]
    return "\n".join(lines) + "\n"
