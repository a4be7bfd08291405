"""Kernel selection: the compiled extension if importable, numpy otherwise.

Set ``BCERASURE_PURE_PYTHON=1`` to force the numpy fallback.
"""

import os

from . import _pykernels

MODIFIED = _pykernels.MODIFIED
PENALIZED = _pykernels.PENALIZED
SPHERE = _pykernels.SPHERE

_impl = _pykernels
if not os.environ.get("BCERASURE_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = "compiled" if _impl is not _pykernels else "python"

batch_empirical_mi = _impl.batch_empirical_mi
objective_batch = _impl.objective_batch
grid_scan = _impl.grid_scan
tilted_channel = _impl.tilted_channel
