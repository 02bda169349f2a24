"""Spectral differential and convolution operators on periodic fields.

Everything here is a pure function; multiplier algebra acts mode-wise and
the only FFTs happen inside the pseudospectral product. The half-spectrum
variants (`*_half`) operate on stacked rfft-layout arrays and are the fast
path shared by the direct and mild solvers.
"""

import numpy as np

from . import kernels
from .errors import GridMismatch, InvalidTime, UnderresolvedMollifier
from .fields import MollifierSpec, ScalarField, SpectralVectorField
from .grid import GridSpec, from_half, to_half, workspace
from .runtime import irfftn, rfftn


def heat_propagate(f: SpectralVectorField, t: float) -> SpectralVectorField:
    """Apply the heat semigroup: multiply each mode by exp(-|k|^2 t)."""
    if t < 0:
        raise InvalidTime(f"heat propagation needs t >= 0, got {t}")
    if t == 0.0:
        return f
    mult = np.exp(-workspace(f.grid).ksq * t)
    return SpectralVectorField.from_components(
        f.grid, *(mult * c for c in f.components), time_tag=f.time_tag + t
    )


def heat_propagate_scalar(f: ScalarField, t: float) -> ScalarField:
    if t < 0:
        raise InvalidTime(f"heat propagation needs t >= 0, got {t}")
    mult = np.exp(-workspace(f.grid).ksq * t)
    return ScalarField(f.grid, mult * f.coefficients, f.role_tag)


def leray_project(f: SpectralVectorField) -> SpectralVectorField:
    """Mode-wise I - k k^T/|k|^2; the k = 0 mode passes through unchanged."""
    ws = workspace(f.grid)
    c = f.stacked()
    flat = c.reshape(3, -1)
    kernels.project_div_free(
        flat,
        np.broadcast_to(ws.k1, c.shape[1:]).ravel(),
        np.broadcast_to(ws.k2, c.shape[1:]).ravel(),
        np.broadcast_to(ws.k3, c.shape[1:]).ravel(),
        np.broadcast_to(ws.inv_ksq, c.shape[1:]).ravel(),
    )
    return SpectralVectorField.from_components(
        f.grid, c[0], c[1], c[2], time_tag=f.time_tag, analytic=None
    )


def project_half(c: np.ndarray, grid: GridSpec) -> None:
    """In-place Leray projection of a stacked (3, n, n, m) half-spectrum."""
    ws = workspace(grid)
    shape = c.shape[1:]
    kernels.project_div_free(
        c.reshape(3, -1),
        np.broadcast_to(ws.k1, shape).ravel(),
        np.broadcast_to(ws.k2, shape).ravel(),
        np.broadcast_to(ws.k3h, shape).ravel(),
        np.broadcast_to(ws.inv_ksq_half, shape).ravel(),
    )


def gradient(f: ScalarField) -> SpectralVectorField:
    """Spectral gradient: mode-wise multiplication by i k."""
    ws = workspace(f.grid)
    c = f.coefficients
    return SpectralVectorField.from_components(
        f.grid, 1j * ws.k1 * c, 1j * ws.k2 * c, 1j * ws.k3 * c
    )


def divergence(f: SpectralVectorField) -> ScalarField:
    ws = workspace(f.grid)
    c1, c2, c3 = f.components
    return ScalarField(f.grid, 1j * (ws.k1 * c1 + ws.k2 * c2 + ws.k3 * c3))


def curl(f: SpectralVectorField) -> SpectralVectorField:
    ws = workspace(f.grid)
    c1, c2, c3 = f.components
    return SpectralVectorField.from_components(
        f.grid,
        1j * (ws.k2 * c3 - ws.k3 * c2),
        1j * (ws.k3 * c1 - ws.k1 * c3),
        1j * (ws.k1 * c2 - ws.k2 * c1),
        time_tag=f.time_tag,
    )


def laplacian(f: ScalarField) -> ScalarField:
    return ScalarField(f.grid, -workspace(f.grid).ksq * f.coefficients, f.role_tag)


_MOLLIFIER_CACHE: dict = {}


def mollifier_multiplier(grid: GridSpec, m: MollifierSpec, half: bool = False) -> np.ndarray:
    """Fourier multiplier of the sampled, renormalized mollifier.

    The kernel is sampled at wrapped distances from the origin, normalized so
    its discrete integral is exactly 1 (hence the mean mode is preserved
    exactly), and transformed. Raises UnderresolvedMollifier when the width
    spans fewer than two grid cells.
    """
    if m.width < 2.0 * grid.spacing:
        raise UnderresolvedMollifier(
            f"width {m.width} < 2 cells ({2 * grid.spacing}) on n={grid.n_per_axis}"
        )
    key = (grid, m, half)
    cached = _MOLLIFIER_CACHE.get(key)
    if cached is not None:
        return cached
    ws = workspace(grid)
    L = grid.box_length
    d1 = (ws.x1 + L / 2) % L - L / 2
    d2 = (ws.x2 + L / 2) % L - L / 2
    d3 = (ws.x3 + L / 2) % L - L / 2
    r2 = d1 * d1 + d2 * d2 + d3 * d3
    if m.profile == "bump":
        y2 = r2 / m.width**2
        rho = np.zeros_like(r2)
        inside = y2 < 1.0
        rho[inside] = np.exp(-1.0 / (1.0 - y2[inside]))
    else:
        sigma = m.width / 2.0
        rho = np.exp(-r2 / (2.0 * sigma**2))
    rho /= rho.sum() * grid.cell_volume
    # rho-hat(k) = integral of rho e^{-ik.x}; rho is even so this is real
    mult_half = (rfftn(rho) * grid.cell_volume).real
    mult = mult_half if half else from_half(mult_half.astype(np.complex128), grid.n_per_axis).real
    mult.setflags(write=False)
    if len(_MOLLIFIER_CACHE) > 16:
        _MOLLIFIER_CACHE.clear()
    _MOLLIFIER_CACHE[key] = mult
    return mult


def mollify(f: SpectralVectorField, m: MollifierSpec) -> SpectralVectorField:
    mult = mollifier_multiplier(f.grid, m)
    return SpectralVectorField.from_components(
        f.grid, *(mult * c for c in f.components), time_tag=f.time_tag
    )


def nonlinear_half(a: np.ndarray, b: np.ndarray, grid: GridSpec) -> np.ndarray:
    """P(a . grad b) for stacked half-spectra, dealiased; returns a new array.

    Pseudospectral route: truncate both inputs, transform to physical space,
    form the convective product, transform back, truncate, project.
    """
    ws = workspace(grid)
    n = grid.n_per_axis
    shape = (n, n, n)
    mask = ws.dealias_half
    ad = a * mask
    bd = b * mask
    a_phys = np.empty((3,) + shape)
    for i in range(3):
        a_phys[i] = irfftn(ad[i] * shape[0] ** 3, shape)
    grads = np.empty((3, 3) + shape)
    for i in range(3):
        for j, kj in enumerate((ws.k1, ws.k2, ws.k3h)):
            grads[i, j] = irfftn(1j * kj * bd[i] * shape[0] ** 3, shape)
    conv = kernels.convective(a_phys.reshape(3, -1), grads.reshape(3, 3, -1))
    conv = conv.reshape((3,) + shape)
    out = np.empty_like(a)
    for i in range(3):
        out[i] = rfftn(conv[i]) / shape[0] ** 3
    out *= mask
    project_half(out, grid)
    return out


def nonlinear_term(a: SpectralVectorField, b: SpectralVectorField) -> SpectralVectorField:
    """leray_project(a . grad b), dealiased per the grid's rule.

    Bilinear in (a, b); the result carries the advected field's time tag.
    """
    if a.grid != b.grid:
        raise GridMismatch("nonlinear_term needs both fields on one grid")
    ah = np.stack([to_half(c) for c in a.components])
    bh = np.stack([to_half(c) for c in b.components])
    out = nonlinear_half(ah, bh, a.grid)
    full = from_half(out, a.grid.n_per_axis)
    return SpectralVectorField.from_components(
        a.grid, full[0], full[1], full[2], time_tag=b.time_tag
    )


def dealias_field(f: SpectralVectorField) -> SpectralVectorField:
    mask = workspace(f.grid).dealias
    return SpectralVectorField.from_components(
        f.grid, *(mask * c for c in f.components), time_tag=f.time_tag
    )


def physical_magnitude(f: SpectralVectorField) -> np.ndarray:
    p1, p2, p3 = f.to_physical()
    return np.sqrt(p1 * p1 + p2 * p2 + p3 * p3)
