"""Divergence-free analytic seed families, scaling, and the scissors split.

Seeds carry an analytic description so the scaling map ``f -> lam f(lam x)``
is evaluated in closed form (spectrally for the gaussian-curl family, by
exact resampling for the windowed Taylor-Green family) rather than by
interpolating grid data. Both families are closed under the scaling map and
under scalar multiples, and sums of seeds scale member-wise, so scissors
constructions keep exact provenance.

The analytic origin is the box center: scaling dilates about it, which keeps
centered seeds centered.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidArgument, ScaleOutOfBox, SeedOutOfBox
from .fields import SpectralVectorField
from .grid import GridSpec, from_half, workspace
from .runtime import rfftn
from .spectral import project_half


@dataclass(frozen=True)
class ScalingParams:
    """Scissors knobs: the two scalings and the split fraction."""

    lambda_tilde: float
    lambda_hat: float
    split_fraction: float

    def __post_init__(self):
        if self.lambda_tilde <= 0 or self.lambda_hat <= 0:
            raise InvalidArgument("scalings must be positive")
        if not 0 < self.split_fraction <= 1:
            raise InvalidArgument("split_fraction must lie in (0, 1]")


@dataclass(frozen=True)
class SeedSpec:
    kind: str
    radius: float
    amplitude: float
    center: tuple = (0.0, 0.0, 0.0)
    orientation: tuple = (0.0, 0.0, 1.0)

    def __post_init__(self):
        if self.kind not in ("gaussian-curl", "taylor-green-windowed"):
            raise InvalidArgument(f"unknown seed kind {self.kind!r}")
        if self.radius <= 0:
            raise InvalidArgument("seed radius must be positive")
        norm = math.sqrt(sum(o * o for o in self.orientation))
        if norm == 0:
            raise InvalidArgument("orientation must be a nonzero vector")
        object.__setattr__(
            self, "orientation", tuple(o / norm for o in self.orientation)
        )
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))


def _box_center_phase(grid: GridSpec, extra_center) -> np.ndarray:
    ws = workspace(grid)
    x0 = grid.box_length / 2.0
    c1, c2, c3 = (x0 + extra_center[0], x0 + extra_center[1], x0 + extra_center[2])
    return np.exp(-1j * (ws.k1 * c1 + ws.k2 * c2 + ws.k3 * c3))


@dataclass(frozen=True)
class GaussianCurlSource:
    """curl of a Gaussian vector potential: amp * grad g_r(x - c) X o.

    Closed form in Fourier space, hence built directly as (exactly
    divergence-free, mean-free) coefficients of the periodized field.
    Closed under the scaling map: lam f(lam x) has center c/lam and radius
    r/lam at unchanged amplitude.
    """

    center: tuple
    radius: float
    amplitude: float
    orientation: tuple

    def support_radius(self) -> float:
        return self.radius + max(abs(c) for c in self.center)

    def scaled(self, lam: float) -> "GaussianCurlSource":
        return GaussianCurlSource(
            tuple(c / lam for c in self.center),
            self.radius / lam,
            self.amplitude,
            self.orientation,
        )

    def __add__(self, other):
        return SumSource((self, other))

    def __rmul__(self, alpha: float):
        return replace(self, amplitude=alpha * self.amplitude)

    def build(self, grid: GridSpec) -> np.ndarray:
        ws = workspace(grid)
        r2 = self.radius**2
        ghat = (
            self.amplitude
            * (2.0 * math.pi * r2) ** 1.5
            * np.exp(-0.5 * r2 * ws.ksq)
            * _box_center_phase(grid, self.center)
            / grid.volume
        )
        o1, o2, o3 = self.orientation
        k1, k2, k3 = ws.k1, ws.k2, ws.k3
        return np.stack(
            [
                1j * (k2 * o3 - k3 * o2) * ghat,
                1j * (k3 * o1 - k1 * o3) * ghat,
                1j * (k1 * o2 - k2 * o1) * ghat,
            ]
        )


def _rotation_to(axis) -> np.ndarray:
    """Rotation matrix taking e_z to the given unit axis (Rodrigues)."""
    a = np.asarray(axis, dtype=float)
    ez = np.array([0.0, 0.0, 1.0])
    v = np.cross(ez, a)
    c = float(ez @ a)
    if np.linalg.norm(v) < 1e-14:
        return np.eye(3) if c > 0 else np.diag([1.0, -1.0, -1.0])
    vx = np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]])
    return np.eye(3) + vx + vx @ vx / (1.0 + c)


@dataclass(frozen=True)
class WindowedTaylorGreenSource:
    """Gaussian-windowed Taylor-Green vortex, rotated so its axis is o.

    Sampled in physical space from the analytic expression, transformed,
    projected (the window breaks exact solenoidality) and mean-zeroed.
    Closed under scaling: center c/lam, radius r/lam, amplitude lam * amp.
    """

    center: tuple
    radius: float
    amplitude: float
    orientation: tuple

    def support_radius(self) -> float:
        return self.radius + max(abs(c) for c in self.center)

    def scaled(self, lam: float) -> "WindowedTaylorGreenSource":
        return WindowedTaylorGreenSource(
            tuple(c / lam for c in self.center),
            self.radius / lam,
            lam * self.amplitude,
            self.orientation,
        )

    def __add__(self, other):
        return SumSource((self, other))

    def __rmul__(self, alpha: float):
        return replace(self, amplitude=alpha * self.amplitude)

    def build(self, grid: GridSpec) -> np.ndarray:
        ws = workspace(grid)
        n = grid.n_per_axis
        x0 = grid.box_length / 2.0
        d = [ws.x1 - (x0 + self.center[0]),
             ws.x2 - (x0 + self.center[1]),
             ws.x3 - (x0 + self.center[2])]
        rot = _rotation_to(self.orientation)
        y = [sum(rot[j, i] * d[j] for j in range(3)) for i in range(3)]
        kappa = 2.0 / self.radius
        window = self.amplitude * np.exp(
            -(y[0] ** 2 + y[1] ** 2 + y[2] ** 2) / (2.0 * self.radius**2)
        )
        tg1 = np.sin(kappa * y[0]) * np.cos(kappa * y[1]) * np.cos(kappa * y[2]) * window
        tg2 = -np.cos(kappa * y[0]) * np.sin(kappa * y[1]) * np.cos(kappa * y[2]) * window
        half = np.empty((3, n, n, n // 2 + 1), dtype=np.complex128)
        for i in range(3):
            phys = rot[i, 0] * tg1 + rot[i, 1] * tg2
            half[i] = rfftn(np.broadcast_to(phys, (n, n, n))) / n**3
        half[:, 0, 0, 0] = 0.0
        project_half(half, grid)
        return from_half(half, n)


@dataclass(frozen=True)
class SumSource:
    members: tuple

    def support_radius(self) -> float:
        return max(m.support_radius() for m in self.members)

    def scaled(self, lam: float) -> "SumSource":
        return SumSource(tuple(m.scaled(lam) for m in self.members))

    def __add__(self, other):
        extra = other.members if isinstance(other, SumSource) else (other,)
        return SumSource(self.members + tuple(extra))

    def __rmul__(self, alpha: float):
        return SumSource(tuple(alpha * m for m in self.members))

    def build(self, grid: GridSpec) -> np.ndarray:
        out = self.members[0].build(grid)
        for m in self.members[1:]:
            out += m.build(grid)
        return out


def source_for(spec: SeedSpec):
    cls = (
        GaussianCurlSource
        if spec.kind == "gaussian-curl"
        else WindowedTaylorGreenSource
    )
    return cls(spec.center, spec.radius, spec.amplitude, spec.orientation)


def field_from_source(source, grid: GridSpec, time_tag: float = 0.0) -> SpectralVectorField:
    c = source.build(grid)
    return SpectralVectorField.from_components(
        grid, c[0], c[1], c[2], time_tag=time_tag, analytic=source
    )


def make_divfree_seed(spec: SeedSpec, grid: GridSpec) -> SpectralVectorField:
    """Construct a divergence-free, mean-free Schwartz-class seed."""
    if spec.radius > grid.box_length / 8.0:
        raise SeedOutOfBox(
            f"radius {spec.radius} exceeds box_length/8 = {grid.box_length / 8}"
        )
    return field_from_source(source_for(spec), grid)


def scale_field(f: SpectralVectorField, lam: float) -> SpectralVectorField:
    """The critical-scaling map f -> lam f(lam x), evaluated exactly.

    Requires analytic provenance; the norm law is
    ||scale(f, lam)||_p = lam^(1 - 3/p) ||f||_p up to resampling error.
    """
    if lam <= 0:
        raise InvalidArgument("scaling factor must be positive")
    if f.analytic is None:
        raise InvalidArgument(
            "scale_field needs a field with analytic provenance (see make_divfree_seed)"
        )
    if lam == 1.0:
        return f
    if f.analytic.support_radius() / lam > f.grid.box_length / 4.0:
        raise ScaleOutOfBox(
            f"scaled support {f.analytic.support_radius() / lam:.3g} exceeds "
            f"box_length/4 = {f.grid.box_length / 4:.3g}"
        )
    return field_from_source(f.analytic.scaled(lam), f.grid, time_tag=f.time_tag)


def scissors_split(theta0: SpectralVectorField, params: ScalingParams):
    """theta0 = (1 - eps) theta0 + eps theta0; returns (u0, w0), exact."""
    eps = params.split_fraction
    return (1.0 - eps) * theta0, eps * theta0


def apply_scissors_scaling(
    u0: SpectralVectorField,
    w0: SpectralVectorField,
    params: ScalingParams,
    caloric_t_grid=None,
):
    """v0 = scale(u0, lambda_tilde) + scale(w0, lambda_hat) plus a norm ledger.

    The ledger records the critical-norm triangle bound and the
    sub/supercritical norms (L2, L6, grad L2, caloric proxy) before and after
    scaling; the scaling directions follow the change-of-variables law
    lam^(1 - 3/p), under which p < 3 norms grow as lam -> 0 (see the
    direction note in the experiment reports).
    """
    from .norms import besov_caloric_norm, grad_lp_norm, lp_norm

    u_scaled = scale_field(u0, params.lambda_tilde)
    w_scaled = scale_field(w0, params.lambda_hat)
    v0 = u_scaled + w_scaled
    if caloric_t_grid is None:
        caloric_t_grid = np.geomspace(1e-3, 1.0, 16)

    def entry(f):
        return {
            "l2": lp_norm(f, 2).value,
            "l3": lp_norm(f, 3).value,
            "l6": lp_norm(f, 6).value,
            "grad_l2": grad_lp_norm(f, 2),
            "caloric": besov_caloric_norm(f, caloric_t_grid),
        }

    l3_u, l3_w = lp_norm(u0, 3).value, lp_norm(w0, 3).value
    l3_v = lp_norm(v0, 3).value
    ledger = {
        "unscaled_u0": entry(u0),
        "unscaled_w0": entry(w0),
        "scaled_u0": entry(u_scaled),
        "scaled_w0": entry(w_scaled),
        "v0": entry(v0),
        "triangle_l3": {
            "lhs": l3_v,
            "rhs": l3_u + l3_w,
            "passed": bool(l3_v <= l3_u + l3_w + 1e-10 * (l3_u + l3_w)),
        },
    }
    return v0, ledger


def random_divfree_field(
    grid: GridSpec, seed: int, band: int = 4, amplitude: float = 1.0
) -> SpectralVectorField:
    """Seeded random band-limited divergence-free field (no analytic form)."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    n = grid.n_per_axis
    phys = rng.standard_normal((3, n, n, n))
    f = SpectralVectorField.from_physical(grid, *phys)
    ws = workspace(grid)
    modes = np.fft.fftfreq(n, d=1.0 / n)
    keep = np.abs(modes) <= band
    mask = keep.reshape(n, 1, 1) & keep.reshape(1, n, 1) & keep.reshape(1, 1, n)
    c = f.stacked() * mask
    c[:, 0, 0, 0] = 0.0
    flat = c.reshape(3, -1)
    from . import kernels

    kernels.project_div_free(
        flat,
        np.broadcast_to(ws.k1, c.shape[1:]).ravel(),
        np.broadcast_to(ws.k2, c.shape[1:]).ravel(),
        np.broadcast_to(ws.k3, c.shape[1:]).ravel(),
        np.broadcast_to(ws.inv_ksq, c.shape[1:]).ravel(),
    )
    field = SpectralVectorField.from_components(grid, c[0], c[1], c[2])
    from .norms import lp_norm

    scale = lp_norm(field, 2).value
    if scale == 0.0:
        return field
    return (amplitude / scale) * field
