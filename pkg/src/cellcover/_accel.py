"""Import-time selection between the compiled and pure kernels.

The compiled extension is optional; absence (no compiler at install time)
silently falls back to the pure twins.  Set CELLCOVER_NO_ACCEL=1 to force the
pure implementation, e.g. for the benchmark baseline.
"""

import os

from . import _kernels as _pure

if os.environ.get("CELLCOVER_NO_ACCEL"):
    _impl = _pure
else:
    try:
        from . import _kernels_c as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pure

IMPL = _impl.IMPL
pair_audit = _impl.pair_audit
grid_scan = _impl.grid_scan

pure_pair_audit = _pure.pair_audit
pure_grid_scan = _pure.grid_scan
