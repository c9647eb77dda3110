"""Pick the compiled search kernel when it is importable, else the Python one.

Set ``SARPLAN_PURE_PYTHON=1`` to force the fallback. The compiled kernel keeps
explored-cell sets in 64-bit words, so larger grids always use Python.
"""

from __future__ import annotations

import os

from . import _kernel_py

try:
    from . import _kernel_c  # type: ignore[attr-defined]
except ImportError:  # extension not built
    _kernel_c = None

COMPILED_MAX_CELLS = 64


def compiled_available() -> bool:
    return _kernel_c is not None and os.environ.get("SARPLAN_PURE_PYTHON", "") not in ("1", "true", "yes")


def select(n_cells: int, prefer: str | None = None):
    """Kernel module to use for a grid of ``n_cells`` cells.

    ``prefer`` may be ``"python"`` or ``"compiled"`` to pin a backend
    (benchmarks and tests); a compiled request that cannot be honoured raises.
    """
    if prefer == "python":
        return _kernel_py
    if prefer == "compiled":
        if _kernel_c is None:
            raise RuntimeError("compiled kernel is not built; run `python setup.py build_ext --inplace`")
        if n_cells > COMPILED_MAX_CELLS:
            raise ValueError(f"compiled kernel handles at most {COMPILED_MAX_CELLS} cells")
        return _kernel_c
    if compiled_available() and n_cells <= COMPILED_MAX_CELLS:
        return _kernel_c
    return _kernel_py


def backend_name(mod) -> str:
    return "compiled" if mod is _kernel_c and mod is not None else "python"
