"""Select the kernel implementation at import time.

The compiled module is preferred. Setting ``REALCHAR_BACKEND=python``
forces the numpy fallback; ``REALCHAR_BACKEND=cython`` makes a missing
extension an error instead of a silent fallback.
"""

import os

_choice = os.environ.get("REALCHAR_BACKEND", "").strip().lower()

if _choice == "python":
    from . import _pykernels as kernels
else:
    try:
        from . import _ckernels as kernels
    except ImportError:
        if _choice == "cython":
            raise
        from . import _pykernels as kernels

BACKEND = kernels.BACKEND


def get_kernels(name: str | None = None):
    """Return a specific backend module by name, or the active one."""
    if name is None:
        return kernels
    if name == "python":
        from . import _pykernels

        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown backend {name!r}")
