"""Pure NumPy implementations of the hot kernels.

Semantics must match nsx._kernels exactly (up to roundoff of the summation
order); tests/test_kernels.py compares the two lanes. Norm accumulations use
extended-precision pairwise sums, the compiled lane uses Neumaier
compensation in long double.
"""

import numpy as np

BACKEND = "python"


def convective(a: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """out[i] = sum_j a[j] * grad[i, j] for flattened physical fields.

    a: (3, N), grad: (3, 3, N) with grad[i, j] = d_j b_i.
    """
    return np.einsum("jx,ijx->ix", a, grad)


def sum_abs_pow(f: np.ndarray, p: float) -> float:
    """sum over points of |f|^p, |f| the Euclidean magnitude of (3, N) data."""
    mag2 = f[0] * f[0] + f[1] * f[1] + f[2] * f[2]
    if p == 2.0:
        return float(np.sum(mag2, dtype=np.longdouble))
    return float(np.sum(mag2 ** np.longdouble(p / 2.0), dtype=np.longdouble))


def sum_pow_scalar(f: np.ndarray, p: float) -> float:
    """sum over points of |f|^p for flattened scalar data."""
    a = np.abs(f)
    if p == 2.0:
        return float(np.sum(a * a, dtype=np.longdouble))
    return float(np.sum(a ** np.longdouble(p), dtype=np.longdouble))


def project_div_free(c: np.ndarray, k1: np.ndarray, k2: np.ndarray, k3: np.ndarray, inv_ksq: np.ndarray) -> None:
    """In-place Helmholtz-Leray projection of flattened coefficients.

    c: (3, M) complex, k*: (M,) wavenumbers, inv_ksq: (M,) with 0 at k = 0
    (which leaves the mean mode untouched).
    """
    s = (k1 * c[0] + k2 * c[1] + k3 * c[2]) * inv_ksq
    c[0] -= k1 * s
    c[1] -= k2 * s
    c[2] -= k3 * s
