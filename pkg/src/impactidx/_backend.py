"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; the pure
Python twin is the fallback. `IMPACTIDX_KERNELS=py` (or `c`) forces a
backend for the whole process.
"""

import os

from . import _kernels_py
from .errors import ConfigError

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None


def load_kernels(name: str = "auto"):
    """Resolve a kernels module by name: "auto", "c", or "py"."""
    if name == "auto":
        name = os.environ.get("IMPACTIDX_KERNELS", "auto").strip().lower() or "auto"
    if name == "auto":
        return _compiled if _compiled is not None else _kernels_py
    if name == "c":
        if _compiled is None:
            raise ConfigError("compiled kernels requested but the extension is not built")
        return _compiled
    if name == "py":
        return _kernels_py
    raise ConfigError(f"unknown kernel backend {name!r} (use auto, c, or py)")


def available_backends():
    return ("c", "py") if _compiled is not None else ("py",)


DEFAULT_KERNELS = load_kernels()
