"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the pure-Python
module is used.  Setting ``SUBSTRUCT_KERNELS=python`` in the environment
forces the fallback, which is handy for testing the two against each other.
"""
import os
from types import ModuleType

from . import _kernels_py

try:  # pragma: no cover - depends on the build
    from . import _kernels as _kernels_c
except ImportError:  # pragma: no cover
    _kernels_c = None

_NAMES = ("ldl_symbolic", "ldl_numeric", "ldl_solve", "csr_assemble")

backend: str = ""
ldl_symbolic = ldl_numeric = ldl_solve = csr_assemble = None


def available_backends() -> list[str]:
    """Names of the backends that can be selected."""
    out = ["python"]
    if _kernels_c is not None:
        out.insert(0, "cython")
    return out


def use_backend(name: str) -> str:
    """Switch the active backend to ``"cython"`` or ``"python"``.

    Returns the previous backend name.
    """
    global backend
    if name == "cython":
        if _kernels_c is None:
            raise RuntimeError("compiled kernels are not available")
        mod: ModuleType = _kernels_c
    elif name == "python":
        mod = _kernels_py
    else:
        raise ValueError(f"unknown backend {name!r}")
    previous = backend
    g = globals()
    for attr in _NAMES:
        g[attr] = getattr(mod, attr)
    backend = name
    return previous


def _default() -> str:
    want = os.environ.get("SUBSTRUCT_KERNELS", "").strip().lower()
    if want == "python" or _kernels_c is None:
        return "python"
    return "cython"


use_backend(_default())
