"""Join/count kernel backend selection.

The compiled extension is preferred when it imported cleanly; otherwise
the dict-based pure Python implementation is used. Both expose the same
four functions and produce identical counts and pair lists. Setting the
environment variable RULELM_PURE_KERNELS forces the fallback.
"""

import os

if os.environ.get("RULELM_PURE_KERNELS"):
    from . import pure as backend
else:
    try:
        from . import native as backend  # type: ignore[no-redef]
    except ImportError:
        from . import pure as backend  # type: ignore[no-redef]

BACKEND_NAME = backend.NAME

__all__ = ["backend", "BACKEND_NAME"]
