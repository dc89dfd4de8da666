"""Numeric kernel backend selection.

The compiled Cython extension is used when it was built; otherwise the
pure-numpy fallback provides identical semantics. Set NEGOBENCH_KERNEL=python
to force the fallback (useful for the benchmark and for debugging).
"""

import os

from . import _pykern

if os.environ.get("NEGOBENCH_KERNEL", "").lower() == "python":
    _impl = _pykern
    BACKEND = "python"
else:
    try:
        from . import _cykern as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykern
        BACKEND = "python"

project_simplex = _impl.project_simplex
project_simplex_floor = _impl.project_simplex_floor
log_nash_product = _impl.log_nash_product
log_nash_gradient = _impl.log_nash_gradient
nbs_ascent = _impl.nbs_ascent
prd_2p = _impl.prd_2p
rm_2p = _impl.rm_2p

__all__ = [
    "BACKEND",
    "project_simplex",
    "project_simplex_floor",
    "log_nash_product",
    "log_nash_gradient",
    "nbs_ascent",
    "prd_2p",
    "rm_2p",
]
