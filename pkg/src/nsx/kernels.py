"""Kernel backend selection.

Imports the compiled Cython kernels when available, otherwise the NumPy
fallbacks. NSX_PURE_PYTHON=1 forces the fallback lane (used by the
benchmark and the twin-lane tests).
"""

import os

if os.environ.get("NSX_PURE_PYTHON"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

BACKEND = _impl.BACKEND
convective = _impl.convective
sum_abs_pow = _impl.sum_abs_pow
sum_pow_scalar = _impl.sum_pow_scalar
project_div_free = _impl.project_div_free
