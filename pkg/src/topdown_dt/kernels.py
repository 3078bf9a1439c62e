"""Backend selection for the bitset kernels.

The compiled extension is used when it imports; set ``TOPDOWN_DT_PURE=1``
to force the pure-Python implementation (useful for cross-checking).
"""

from __future__ import annotations

import os

from . import _kernels_py

_compiled = None
if not os.environ.get("TOPDOWN_DT_PURE"):
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:  # pragma: no cover - depends on the build
        _compiled = None

_impl = _compiled if _compiled is not None else _kernels_py

BACKEND: str = _impl.BACKEND
ORACLE_MAX_N: int = _impl.ORACLE_MAX_N

influence_counts = _impl.influence_counts
cofactor_counts = _impl.cofactor_counts
relevant_mask = _impl.relevant_mask
restrict = _impl.restrict
is_monotone = _impl.is_monotone
optimal_size = _impl.optimal_size
optimal_depth = _impl.optimal_depth

# the proper-learning search is branchy object code, not a table pass
find_core = _kernels_py.find_core
low_mask = _kernels_py.low_mask
full_mask = _kernels_py.full_mask


def backends() -> dict:
    """All importable backends by name."""
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["compiled"] = _compiled
    return out
