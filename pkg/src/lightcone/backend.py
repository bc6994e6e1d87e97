"""Select the compiled kernel extension or its pure-Python twin at import.

Set ``LIGHTCONE_PURE_PYTHON=1`` to force the fallback (used by the backend
comparison tests and the benchmark).
"""

import os

from . import _kernels_py

if os.environ.get("LIGHTCONE_PURE_PYTHON", "").strip() in ("1", "true", "yes"):
    kernels = _kernels_py
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _kernels_py

BACKEND = kernels.BACKEND_NAME

assoc_legendre_block = kernels.assoc_legendre_block
rk4_riccati = kernels.rk4_riccati
