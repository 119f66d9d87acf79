"""Backend selection for the mining-draw kernels.

The compiled extension is used when it was built; otherwise the numpy
implementation is used. Set ``CHAINSIM_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from chainsim._kernels_py import first_below_scalar  # noqa: F401

try:
    if os.environ.get("CHAINSIM_PURE_PYTHON"):
        raise ImportError("compiled kernels disabled by environment")
    from chainsim._kernels import count_below, first_below, mix64
    BACKEND = "cython"
except ImportError:
    from chainsim._kernels_py import count_below, first_below, mix64
    BACKEND = "python"

__all__ = ["BACKEND", "count_below", "first_below", "first_below_scalar", "mix64"]
