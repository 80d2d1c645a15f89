"""Kernel backend selection: compiled extension when available, numpy otherwise.

Set SPARSETF_BACKEND=numpy or SPARSETF_BACKEND=cython to force a backend;
forcing cython raises if the extension was not built.
"""

import os

from . import perspective_np

_requested = os.environ.get("SPARSETF_BACKEND", "").strip().lower()
if _requested not in ("", "numpy", "cython"):
    raise ValueError(f"SPARSETF_BACKEND must be 'numpy' or 'cython', got {_requested!r}")

if _requested == "numpy":
    _impl = perspective_np
    backend_name = "numpy"
else:
    try:
        from . import _perspective_cy as _impl
        backend_name = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        _impl = perspective_np
        backend_name = "numpy"

prox_pairs = _impl.prox_pairs
positive_cubic_roots = _impl.positive_cubic_roots

__all__ = ["prox_pairs", "positive_cubic_roots", "backend_name", "perspective_np"]
