"""Kernel backend selection.

The compiled extension (`delaysim._kernels`, built from Cython) is used
when importable; otherwise the numpy fallback (`delaysim._kernels_py`)
takes over. Both expose the same functions with bit-identical results,
so switching backends never changes simulation output, only speed.
"""

from __future__ import annotations

from . import _kernels_py

try:
    from . import _kernels  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on build environment
    _kernels = None

_active = _kernels if _kernels is not None else _kernels_py


def kernels():
    """Return the active kernel module."""
    return _active


def name() -> str:
    """Name of the active backend: "compiled" or "python"."""
    return _active.BACKEND_NAME


def available() -> tuple[str, ...]:
    """Names of all importable backends."""
    if _kernels is None:
        return ("python",)
    return ("compiled", "python")


def use(backend_name: str) -> str:
    """Select a backend by name; returns the previous name (for restoring)."""
    global _active
    previous = _active.BACKEND_NAME
    if backend_name == "python":
        _active = _kernels_py
    elif backend_name == "compiled":
        if _kernels is None:
            raise ValueError("compiled kernels are not available in this installation")
        _active = _kernels
    else:
        raise ValueError(f"unknown backend {backend_name!r}; expected 'python' or 'compiled'")
    return previous
