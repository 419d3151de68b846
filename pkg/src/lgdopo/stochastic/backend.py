"""Selection of the ensemble integration kernel.

``LGDOPO_BACKEND`` may be ``auto`` (default: compiled if importable),
``cython`` (fail if unavailable) or ``python``.
"""
import os

from . import _kernel_py

try:
    from . import _kernel as _kernel_c
except ImportError:  # extension not built
    _kernel_c = None

BACKENDS = ("auto", "cython", "python")


def available() -> list[str]:
    return ["cython", "python"] if _kernel_c is not None else ["python"]


def get_kernel(name: str | None = None):
    """Return ``(backend_name, advance)`` for the requested backend."""
    name = (name or os.environ.get("LGDOPO_BACKEND", "auto")).lower()
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}; choose from {BACKENDS}")
    if name == "python" or (name == "auto" and _kernel_c is None):
        return "python", _kernel_py.advance
    if _kernel_c is None:
        raise ImportError("compiled kernel requested but lgdopo.stochastic._kernel is not built")
    return "cython", _kernel_c.advance
