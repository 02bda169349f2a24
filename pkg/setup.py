"""Build script; compiles the optional Cython kernel extension.

The extension accelerates the pointwise hot loops (convective products,
Helmholtz-Leray projection, compensated norm accumulation). If Cython or a
C compiler is unavailable the package still installs and selects the pure
NumPy fallbacks at import time. Set NSX_NO_EXT=1 to skip the build.
"""

import os

from setuptools import setup


def _extensions():
    if os.environ.get("NSX_NO_EXT"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError as exc:
        print(f"nsx: skipping compiled kernels ({exc})")
        return []
    ext = Extension(
        "nsx._kernels",
        ["src/nsx/_kernels.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=_extensions())
