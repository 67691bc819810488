"""Selection of the compiled extension core or its pure-Python fallback.

The compiled module is preferred when importable. Set CREDOSIM_BACKEND to
"compiled" or "python" to force one side (the benchmark and the equivalence
tests do this); "auto" restores the default.
"""

from __future__ import annotations

import os

from . import _kernels_py


def _load(name: str):
    if name == "python":
        return _kernels_py
    if name == "compiled":
        from . import _kernels  # raises ImportError if the extension is absent

        return _kernels
    if name in ("", "auto"):
        try:
            from . import _kernels
        except ImportError:
            return _kernels_py
        return _kernels
    raise ValueError(f"CREDOSIM_BACKEND={name!r}; expected auto, compiled, or python")


def get():
    """Return the active kernel module (honors CREDOSIM_BACKEND)."""
    return _load(os.environ.get("CREDOSIM_BACKEND", "auto"))
