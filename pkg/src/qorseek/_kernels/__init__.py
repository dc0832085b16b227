"""Hot-loop kernels with a compiled core and a pure-Python fallback.

The Cython extension `_core` is preferred; set QORSEEK_PURE=1 to force
the numpy fallback (used by the benchmark and for debugging).
"""

import os

if os.environ.get("QORSEEK_PURE") == "1":
    from . import _fallback as _impl
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _fallback as _impl

IMPLEMENTATION = _impl.IMPLEMENTATION
dominates = _impl.dominates
front_mask = _impl.front_mask
min_scaled_distances = _impl.min_scaled_distances
hv_improvement_batch = _impl.hv_improvement_batch
