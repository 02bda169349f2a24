"""Periodic-box grid description and cached spectral workspaces.

Conventions used throughout the package:

* physical points ``x_i = j * L / n`` for ``j = 0..n-1`` on each axis,
* a field is represented by coefficients ``c[m1, m2, m3]`` such that
  ``f(x) = sum_m c_m exp(i k_m . x)`` with ``k_m = (2 pi / L) m`` and ``m`` in
  standard FFT order, so ``c = fftn(f) / n**3``,
* Parseval: ``int |f|^2 dx = L^3 sum_m |c_m|^2``.

The half-spectrum helpers convert between the full complex cube and the
rfft layout ``(n, n, n//2 + 1)`` used inside the solvers, where the real FFT
is roughly twice as fast.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .runtime import fftn, irfftn, rfftn


@dataclass(frozen=True)
class GridSpec:
    """Resolution, box size and dealiasing rule for a cubic periodic grid."""

    n_per_axis: int
    box_length: float
    dealias_fraction: float = 2.0 / 3.0

    def __post_init__(self):
        n = self.n_per_axis
        if n < 8 or n % 2 != 0:
            raise InvalidArgument(f"n_per_axis must be even and >= 8, got {n}")
        if not self.box_length > 0:
            raise InvalidArgument("box_length must be positive")
        if not 0 < self.dealias_fraction <= 1:
            raise InvalidArgument("dealias_fraction must lie in (0, 1]")
        if self.dealias_fraction * n < 4:
            raise InvalidArgument("dealias_fraction * n_per_axis must be >= 4")

    @property
    def spacing(self) -> float:
        return self.box_length / self.n_per_axis

    @property
    def cell_volume(self) -> float:
        return self.spacing**3

    @property
    def volume(self) -> float:
        return self.box_length**3

    @property
    def kept_mode_max(self) -> int:
        """Largest retained |mode number| for dealiased products.

        2K+1 modes per axis are kept out of n; with the default 2/3 rule this
        gives 3K < n, so triple products of kept modes alias to modes that are
        themselves truncated and the product quadrature is exact.
        """
        return int((self.dealias_fraction * self.n_per_axis - 1) // 2)

    @property
    def half_width(self) -> int:
        return self.n_per_axis // 2 + 1


class _Workspace:
    """Precomputed wavenumber arrays and masks for one grid (broadcastable)."""

    def __init__(self, grid: GridSpec):
        n = grid.n_per_axis
        m = grid.half_width
        modes = np.fft.fftfreq(n, d=1.0 / n).astype(np.float64)  # 0,1,..,-1
        scale = 2.0 * np.pi / grid.box_length
        self.k1 = (scale * modes).reshape(n, 1, 1)
        self.k2 = (scale * modes).reshape(1, n, 1)
        self.k3 = (scale * modes).reshape(1, 1, n)
        self.k3h = (scale * np.arange(m, dtype=np.float64)).reshape(1, 1, m)
        self.ksq = self.k1**2 + self.k2**2 + self.k3**2
        self.ksq_half = self.k1**2 + self.k2**2 + self.k3h**2
        kmax = grid.kept_mode_max
        keep = np.abs(modes) <= kmax
        keep_h = np.arange(m) <= kmax
        self.dealias = (
            keep.reshape(n, 1, 1) & keep.reshape(1, n, 1) & keep.reshape(1, 1, n)
        )
        self.dealias_half = (
            keep.reshape(n, 1, 1) & keep.reshape(1, n, 1) & keep_h.reshape(1, 1, m)
        )
        inv = np.zeros_like(self.ksq)
        np.divide(1.0, self.ksq, out=inv, where=self.ksq > 0)
        self.inv_ksq = inv
        inv_h = np.zeros_like(self.ksq_half)
        np.divide(1.0, self.ksq_half, out=inv_h, where=self.ksq_half > 0)
        self.inv_ksq_half = inv_h
        x = np.arange(n, dtype=np.float64) * grid.spacing
        self.x1 = x.reshape(n, 1, 1)
        self.x2 = x.reshape(1, n, 1)
        self.x3 = x.reshape(1, 1, n)
        # Parseval weights for the half-spectrum (interior k3 planes count twice)
        hw = np.full((n, n, m), 2.0)
        hw[..., 0] = 1.0
        hw[..., -1] = 1.0
        self.half_weight = hw
        # top-octave mask: any axis mode number >= n/4 (resolvedness proxy)
        octave = np.abs(modes) >= n // 4
        octave_h = np.arange(m) >= n // 4
        self.tail_half = (
            octave.reshape(n, 1, 1)
            | octave.reshape(1, n, 1)
            | octave_h.reshape(1, 1, m)
        )


_WORKSPACES: dict[GridSpec, _Workspace] = {}


def workspace(grid: GridSpec) -> _Workspace:
    ws = _WORKSPACES.get(grid)
    if ws is None:
        if len(_WORKSPACES) > 8:
            _WORKSPACES.clear()
        ws = _Workspace(grid)
        _WORKSPACES[grid] = ws
    return ws


def to_half(c: np.ndarray) -> np.ndarray:
    """View of the non-redundant rfft part of a full Hermitian cube."""
    m = c.shape[-1] // 2 + 1
    return c[..., :m]


def from_half(h: np.ndarray, n: int) -> np.ndarray:
    """Rebuild the full cube from an rfft half-spectrum by Hermitian mirroring."""
    m = n // 2 + 1
    full = np.empty(h.shape[:-1] + (n,), dtype=np.complex128)
    full[..., :m] = h
    tail = np.conj(h[..., 1 : n // 2])[..., ::-1]
    tail = np.roll(tail[..., ::-1, :, :], 1, axis=-3)
    tail = np.roll(tail[..., :, ::-1, :], 1, axis=-2)
    full[..., m:] = tail
    return full


def spectral_from_physical(f: np.ndarray) -> np.ndarray:
    """Coefficient cube of a real field sampled on the grid (exactly Hermitian)."""
    n = f.shape[-1]
    return from_half(rfftn(f) / f.size, n)


def physical_from_spectral(c: np.ndarray) -> np.ndarray:
    """Real grid samples of a Hermitian coefficient cube."""
    n = c.shape[-1]
    return irfftn(to_half(c) * c.size, (n, n, n))


def hermitian_violation(c: np.ndarray) -> float:
    """max |c(-m) - conj(c(m))| relative to the largest coefficient."""
    flipped = c[::-1, ::-1, ::-1]
    flipped = np.roll(flipped, (1, 1, 1), axis=(0, 1, 2))
    scale = float(np.max(np.abs(c)))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(flipped - np.conj(c)))) / scale


def full_spectral(c: np.ndarray) -> np.ndarray:
    """fftn-based coefficients (kept for cross-checks against the rfft path)."""
    return fftn(c) / c.size
