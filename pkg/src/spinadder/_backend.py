"""Pick the per-pulse kernel: compiled extension if importable, else numpy.

Set ``SPINADDER_BACKEND=python`` to force the numpy fallback.
"""
import os

from . import _fallback

try:
    from . import _kernel as _compiled
except ImportError:  # extension not built
    _compiled = None

if _compiled is not None and os.environ.get("SPINADDER_BACKEND", "").lower() != "python":
    apply_table = _compiled.apply_table
    NAME = "cython"
else:
    apply_table = _fallback.apply_table
    NAME = "python"
