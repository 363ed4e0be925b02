"""Kernel backend selection.

The compiled Cython kernels are used when importable; ``BETRUN_BACKEND=python``
forces the pure-Python twins.
"""

from __future__ import annotations

import importlib
import os
from types import ModuleType

BACKENDS = ("compiled", "python")


def default_backend() -> str:
    forced = os.environ.get("BETRUN_BACKEND", "").strip().lower()
    if forced in BACKENDS:
        return forced
    return "compiled" if compiled_available() else "python"


def compiled_available() -> bool:
    try:
        importlib.import_module("betrun.tsp._kernel")
        importlib.import_module("betrun.mvc._kernel")
    except ImportError:
        return False
    return True


def kernel(problem: str, backend: str | None = None) -> ModuleType:
    """Kernel module for ``problem`` ("tsp" or "mvc")."""
    backend = backend or default_backend()
    if backend == "auto":
        backend = default_backend()
    if backend == "compiled":
        return importlib.import_module(f"betrun.{problem}._kernel")
    if backend == "python":
        return importlib.import_module(f"betrun.{problem}._kernel_py")
    raise ValueError(f"unknown backend {backend!r}")
