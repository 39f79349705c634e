"""Kernel backend selection.

The compiled extension is preferred when importable; the numpy reference
implementation is the fallback.  Set TANGENTCUT_PURE_PYTHON=1 to force the
fallback (used by the benchmark and for debugging).
"""

import os

from . import reference

compiled = None
if os.environ.get("TANGENTCUT_PURE_PYTHON", "0") in ("", "0"):
    try:
        from . import _fast as compiled
    except ImportError:
        compiled = None

active = compiled if compiled is not None else reference


def backend_name() -> str:
    return "compiled" if active is not reference else "reference"


structure_matrices = active.structure_matrices
edge_angle_norms = active.edge_angle_norms
