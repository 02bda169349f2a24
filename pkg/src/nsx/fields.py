"""Spectral vector/scalar fields on a periodic box.

Fields are immutable value objects: coefficient arrays are write-locked at
construction and every operation returns a fresh field. ``analytic`` is an
optional provenance handle (see :mod:`nsx.seeds`) that lets the scaling map
``f -> lam f(lam x)`` be evaluated exactly instead of by grid interpolation.
"""

from dataclasses import dataclass, field as dfield
from typing import Optional

import numpy as np

from .errors import GridMismatch, InvalidArgument
from .grid import (
    GridSpec,
    hermitian_violation,
    physical_from_spectral,
    spectral_from_physical,
)

_PROFILES = ("bump", "gaussian")


def _lock(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SpectralVectorField:
    grid: GridSpec
    components: tuple
    time_tag: float = 0.0
    analytic: Optional[object] = dfield(default=None, compare=False)

    @staticmethod
    def from_components(grid, c1, c2, c3, time_tag=0.0, analytic=None):
        n = grid.n_per_axis
        for c in (c1, c2, c3):
            if c.shape != (n, n, n):
                raise GridMismatch(f"component shape {c.shape} != grid {n}^3")
        return SpectralVectorField(
            grid, (_lock(c1), _lock(c2), _lock(c3)), float(time_tag), analytic
        )

    @staticmethod
    def zero(grid: GridSpec, time_tag: float = 0.0) -> "SpectralVectorField":
        n = grid.n_per_axis
        z = np.zeros((n, n, n), dtype=np.complex128)
        return SpectralVectorField.from_components(grid, z, z.copy(), z.copy(), time_tag)

    @staticmethod
    def from_physical(grid, f1, f2, f3, time_tag=0.0, analytic=None):
        return SpectralVectorField.from_components(
            grid,
            spectral_from_physical(np.asarray(f1, dtype=np.float64)),
            spectral_from_physical(np.asarray(f2, dtype=np.float64)),
            spectral_from_physical(np.asarray(f3, dtype=np.float64)),
            time_tag,
            analytic,
        )

    def to_physical(self):
        return tuple(physical_from_spectral(c) for c in self.components)

    def stacked(self) -> np.ndarray:
        """Writable (3, n, n, n) copy of the coefficients."""
        return np.stack([c.copy() for c in self.components])

    def hermitian_violation(self) -> float:
        return max(hermitian_violation(c) for c in self.components)

    def mean_mode(self) -> np.ndarray:
        return np.array([c[0, 0, 0] for c in self.components])

    def __add__(self, other: "SpectralVectorField") -> "SpectralVectorField":
        if self.grid != other.grid:
            raise GridMismatch("cannot add fields on different grids")
        analytic = None
        if self.analytic is not None and other.analytic is not None:
            analytic = self.analytic + other.analytic
        return SpectralVectorField.from_components(
            self.grid,
            *(a + b for a, b in zip(self.components, other.components)),
            time_tag=self.time_tag,
            analytic=analytic,
        )

    def __sub__(self, other: "SpectralVectorField") -> "SpectralVectorField":
        return self + (-1.0) * other

    def __rmul__(self, alpha: float) -> "SpectralVectorField":
        analytic = None if self.analytic is None else float(alpha) * self.analytic
        return SpectralVectorField.from_components(
            self.grid,
            *(alpha * c for c in self.components),
            time_tag=self.time_tag,
            analytic=analytic,
        )


@dataclass(frozen=True)
class ScalarField:
    grid: GridSpec
    coefficients: np.ndarray
    role_tag: str = "diagnostic"

    def __post_init__(self):
        if self.role_tag not in ("pressure", "potential", "diagnostic"):
            raise InvalidArgument(f"unknown role_tag {self.role_tag!r}")
        object.__setattr__(self, "coefficients", _lock(self.coefficients))

    @staticmethod
    def from_physical(grid, f, role_tag="diagnostic"):
        return ScalarField(grid, spectral_from_physical(np.asarray(f, np.float64)), role_tag)

    def to_physical(self) -> np.ndarray:
        return physical_from_spectral(self.coefficients)

    def hermitian_violation(self) -> float:
        return hermitian_violation(self.coefficients)


@dataclass(frozen=True)
class MollifierSpec:
    """Width and shape of the convolution kernel used a la Leray.

    ``width`` is the physical support radius of the bump profile; the
    gaussian profile uses a standard deviation of ``width / 2``. The sampled
    kernel is renormalized numerically so its discrete integral is exactly 1.
    """

    width: float
    profile: str = "bump"

    def __post_init__(self):
        if not self.width > 0:
            raise InvalidArgument("mollifier width must be positive")
        if self.profile not in _PROFILES:
            raise InvalidArgument(f"profile must be one of {_PROFILES}")
