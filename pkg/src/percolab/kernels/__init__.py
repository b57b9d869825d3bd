"""Backend dispatch for the hot kernels.

PERCOLAB_BACKEND=numba (default when numba imports) or numpy selects the
implementation at import time. Both expose the same functions with identical
outputs; see benchmarks/bench_kernels.py for the speed comparison.
"""

import os
import warnings

_requested = os.environ.get("PERCOLAB_BACKEND", "").strip().lower()

if _requested not in ("", "numba", "numpy"):
    raise ValueError(f"PERCOLAB_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

if _requested == "numpy":
    from . import numpy_backend as _impl
else:
    try:
        from . import numba_backend as _impl
    except ImportError:
        if _requested == "numba":
            raise
        warnings.warn("numba unavailable; falling back to the numpy backend")
        from . import numpy_backend as _impl

BACKEND = _impl.NAME

union_labels = _impl.union_labels
edges_within_euclid = _impl.edges_within_euclid
edges_within_hyperbolic = _impl.edges_within_hyperbolic
assign_first_match_euclid = _impl.assign_first_match_euclid
assign_first_match_hyperbolic = _impl.assign_first_match_hyperbolic
near_any_hyperbolic = _impl.near_any_hyperbolic
bfs_scan_hyperbolic = _impl.bfs_scan_hyperbolic
