"""Kernel backend selection: the compiled extension when importable, else the Python reference.

Set ``HOGPRED_PURE_PYTHON=1`` to force the reference implementation.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("HOGPRED_PURE_PYTHON") == "1":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py
        BACKEND = "python"

gfp_relative = _impl.gfp_relative
steps_to_value = _impl.steps_to_value
