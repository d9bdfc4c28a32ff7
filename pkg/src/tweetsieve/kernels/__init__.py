"""Hot numeric kernels with a numba and a pure-numpy implementation.

The backend is picked once at import time from the ``TWEETSIEVE_BACKEND``
environment variable (``numba`` by default, ``numpy`` to force the
fallback). Both implementations share one signature set:

- ``gat_edge_forward(indptr, indices, z_self, z_neigh, attn, slope)``
- ``gat_edge_backward(..., alpha, dout)``
- ``neighbor_counts(x, eps2)``
- ``neighbors_within(x, queries, eps2)``
"""

from __future__ import annotations

import os
import warnings

_requested = os.environ.get("TWEETSIEVE_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    warnings.warn(
        f"unknown TWEETSIEVE_BACKEND={_requested!r}; using numba", stacklevel=1
    )
    _requested = "numba"

if _requested == "numba":
    try:
        from . import numba_impl as _impl

        _active = "numba"
    except ImportError as exc:  # numba missing or broken: stay usable
        warnings.warn(f"numba backend unavailable ({exc}); falling back to numpy")
        from . import numpy_impl as _impl

        _active = "numpy"
else:
    from . import numpy_impl as _impl

    _active = "numpy"

gat_edge_forward = _impl.gat_edge_forward
gat_edge_backward = _impl.gat_edge_backward
neighbor_counts = _impl.neighbor_counts
neighbors_within = _impl.neighbors_within


def backend_name() -> str:
    return _active


def get_backend(name: str):
    """Explicit backend module lookup (used by tests and benchmarks)."""
    if name == "numba":
        from . import numba_impl

        return numba_impl
    if name == "numpy":
        from . import numpy_impl

        return numpy_impl
    raise ValueError(f"unknown backend {name!r}")
