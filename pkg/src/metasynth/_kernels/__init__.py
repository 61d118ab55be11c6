"""Hot kernels with a compiled backend and a pure-Python fallback.

The Cython extension is used when it has been built; set
``METASYNTH_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels

if os.environ.get("METASYNTH_PURE_PYTHON"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = "python" if _impl is _pykernels else "cython"

feature_hash = _impl.feature_hash
hashed_counts = _impl.hashed_counts
mmr_greedy = _impl.mmr_greedy


def available_backends():
    """Map backend name to kernel module for every backend importable here."""
    backends = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        backends["cython"] = _ckernels
    return backends
