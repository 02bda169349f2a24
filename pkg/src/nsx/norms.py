"""Lebesgue norms, exact heat-kernel norms, and static inequality checkers.

Physical-space norms use periodic trapezoid quadrature (exact for
band-limited integrands at even integer p); accumulation happens in the
compensated-sum kernels. Heat-kernel norms are free-space closed forms; the
gradient-kernel norm is reduced to one cached 1-d radial integral.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from . import kernels
from .errors import InvalidArgument, InvalidExponent, InvalidTime, NotCalibrated
from .fields import ScalarField, SpectralVectorField
from .grid import GridSpec, to_half, workspace
from .runtime import irfftn, rfftn
from .spectral import heat_propagate, nonlinear_term, workspace as _ws


@dataclass(frozen=True)
class NormReport:
    p: float
    value: float
    grid: GridSpec
    quadrature: str = "trapezoid-periodic"


@dataclass(frozen=True)
class ExponentTriple:
    """Exponents (p, q, r, s) for the bilinear estimate, 1/p = 1/r + 1/s."""

    p: float
    q: float
    r: float
    s: float

    def __post_init__(self):
        if not (1 < self.p <= self.q < math.inf):
            raise InvalidExponent(f"need 1 < p <= q < inf, got p={self.p}, q={self.q}")
        if abs(1 / self.p - 1 / self.r - 1 / self.s) > 1e-12:
            raise InvalidExponent("1/p = 1/r + 1/s violated")


@dataclass(frozen=True)
class CheckResult:
    inequality_id: str
    lhs: float
    rhs: float
    margin: float
    passed: bool
    vacuous: bool = False


def _physical_stack(f: SpectralVectorField) -> np.ndarray:
    n = f.grid.n_per_axis
    out = np.empty((3, n, n, n))
    for i, c in enumerate(f.components):
        out[i] = irfftn(to_half(c) * n**3, (n, n, n))
    return out


def lp_norm(f: SpectralVectorField, p: float) -> NormReport:
    """L^p norm of |f| over the box; max over grid points when p = inf."""
    if p < 1:
        raise InvalidExponent(f"p must be >= 1, got {p}")
    phys = _physical_stack(f)
    if math.isinf(p):
        value = float(np.sqrt((phys * phys).sum(axis=0).max(initial=0.0)))
    else:
        s = kernels.sum_abs_pow(phys.reshape(3, -1), float(p))
        value = (f.grid.cell_volume * s) ** (1.0 / p)
    return NormReport(p, value, f.grid)


def lp_norm_scalar(f: ScalarField, p: float) -> NormReport:
    if p < 1:
        raise InvalidExponent(f"p must be >= 1, got {p}")
    n = f.grid.n_per_axis
    phys = irfftn(to_half(f.coefficients) * n**3, (n, n, n))
    if math.isinf(p):
        value = float(np.abs(phys).max(initial=0.0))
    else:
        s = kernels.sum_pow_scalar(phys.ravel(), float(p))
        value = (f.grid.cell_volume * s) ** (1.0 / p)
    return NormReport(p, value, f.grid)


def parseval_l2(f: SpectralVectorField) -> float:
    """L^2 norm from the coefficient side: L^3 sum |c|^2."""
    total = sum(
        float(np.sum((c * np.conj(c)).real, dtype=np.longdouble)) for c in f.components
    )
    return math.sqrt(f.grid.volume * total)


def gradient_tensor_physical(f: SpectralVectorField) -> np.ndarray:
    """grad[i, j] = d_j f_i on the grid, shape (3, 3, n, n, n)."""
    ws = _ws(f.grid)
    n = f.grid.n_per_axis
    out = np.empty((3, 3, n, n, n))
    for i, c in enumerate(f.components):
        ch = to_half(c) * n**3
        for j, kj in enumerate((ws.k1, ws.k2, ws.k3h)):
            out[i, j] = irfftn(1j * kj * ch, (n, n, n))
    return out


def _grad_lp(grad: np.ndarray, cell_volume: float, p: float) -> float:
    mag2 = np.einsum("ijxyz,ijxyz->xyz", grad, grad)
    if p == 2.0:
        s = float(np.sum(mag2, dtype=np.longdouble))
    else:
        s = float(np.sum(mag2 ** np.longdouble(p / 2.0), dtype=np.longdouble))
    return (cell_volume * s) ** (1.0 / p)


def grad_norms(f: SpectralVectorField) -> dict[float, NormReport]:
    """Frobenius-magnitude gradient norms in L^2 and L^3."""
    grad = gradient_tensor_physical(f)
    return {
        p: NormReport(p, _grad_lp(grad, f.grid.cell_volume, p), f.grid)
        for p in (2.0, 3.0)
    }


def grad_lp_norm(f: SpectralVectorField, p: float) -> float:
    return _grad_lp(gradient_tensor_physical(f), f.grid.cell_volume, p)


def kernel_norm_exact(t: float, r: float) -> float:
    """||K_t||_{L^r} in closed form: (4 pi t)^{-(3/2)(1 - 1/r)} r^{-3/(2r)}."""
    if t <= 0:
        raise InvalidTime(f"kernel norm needs t > 0, got {t}")
    if r < 1:
        raise InvalidExponent(f"r must be >= 1, got {r}")
    return (4.0 * math.pi * t) ** (-1.5 * (1.0 - 1.0 / r)) * r ** (-1.5 / r)


@lru_cache(maxsize=64)
def _grad_kernel_radial(r: float) -> float:
    """I(r) = int_0^inf u^{r+2} exp(-r u^2) du to 1e-10 relative."""
    val, _ = quad(lambda u: u ** (r + 2) * math.exp(-r * u * u), 0, np.inf,
                  epsabs=0.0, epsrel=1e-12, limit=200)
    return val


def grad_kernel_norm(t: float, r: float) -> float:
    """|| |grad K_t| ||_{L^r} by radial quadrature of the sampled kernel."""
    if t <= 0:
        raise InvalidTime(f"kernel norm needs t > 0, got {t}")
    if r < 1:
        raise InvalidExponent(f"r must be >= 1, got {r}")
    i_r = _grad_kernel_radial(r)
    pref = 4.0 * math.pi * (4.0 * math.pi * t) ** (-1.5 * r) * (2.0 * t) ** (-r)
    pref *= (4.0 * t) ** ((r + 3.0) / 2.0)
    return (pref * i_r) ** (1.0 / r)


def young_exponent(p: float, q: float) -> float:
    """r with 1/q + 1 = 1/r + 1/p for the convolution inequality."""
    inv_r = 1.0 + 1.0 / q - 1.0 / p
    if inv_r <= 0:
        raise InvalidExponent(f"no admissible r for p={p}, q={q}")
    return 1.0 / inv_r


def prop31_check(f: SpectralVectorField, p: float, q: float, t: float):
    """Verify the two heat-kernel smoothing bounds; margins are lhs/rhs.

    Returns a pair of CheckResults (plain bound, gradient bound).
    """
    if not (1 < p <= q < math.inf):
        raise InvalidExponent(f"need 1 < p <= q < inf, got ({p}, {q})")
    if t <= 0:
        raise InvalidTime("prop31_check needs t > 0")
    r = young_exponent(p, q)
    heated = heat_propagate(f, t)
    norm_p = lp_norm(f, p).value
    lhs13 = lp_norm(heated, q).value
    rhs13 = kernel_norm_exact(t, r) * norm_p
    lhs14 = grad_lp_norm(heated, q)
    rhs14 = grad_kernel_norm(t, r) * norm_p
    return (
        _result("heat-smoothing", lhs13, rhs13),
        _result("heat-gradient-smoothing", lhs14, rhs14),
    )


def _result(inequality_id: str, lhs: float, rhs: float) -> CheckResult:
    if rhs == 0.0:
        vac = lhs == 0.0
        return CheckResult(inequality_id, lhs, rhs, 0.0 if vac else math.inf, vac, vac)
    margin = lhs / rhs
    return CheckResult(inequality_id, lhs, rhs, margin, margin <= 1.0)


def bilinear_bound_check(
    a: SpectralVectorField,
    b: SpectralVectorField,
    triple: ExponentTriple,
    constant: float | None,
) -> CheckResult:
    """||P(a . grad b)||_p <= C ||a||_r ||grad b||_s with the calibrated C."""
    if constant is None:
        raise NotCalibrated("bilinear_bound_check needs a calibrated constant")
    lhs = lp_norm(nonlinear_term(a, b), triple.p).value
    rhs = constant * lp_norm(a, triple.r).value * grad_lp_norm(b, triple.s)
    return _result("bilinear", lhs, rhs)


def weighted_grad_l32(f: SpectralVectorField) -> float:
    """||grad |f|^{3/2}||_{L^2}, pseudospectral with dealiasing."""
    phys = _physical_stack(f)
    mag = np.sqrt((phys * phys).sum(axis=0))
    g = mag**1.5
    n = f.grid.n_per_axis
    ws = _ws(f.grid)
    gh = rfftn(g) / n**3 * ws.dealias_half
    # Parseval on the half-spectrum: interior k3 planes count twice
    w = np.full(gh.shape, 2.0)
    w[..., 0] = 1.0
    w[..., -1] = 1.0
    total = float(np.sum(w * ws.ksq_half * (gh * np.conj(gh)).real, dtype=np.longdouble))
    return math.sqrt(f.grid.volume * total)


def interpolation_check(
    f: SpectralVectorField,
    constant_l3: float | None,
    constant_l5: float | None,
):
    """The two interpolation inequalities used by the t* and stability steps.

    (a) ||f||_3 <= C ||f||_2^{1/2} ||grad f||_2^{1/2}
    (b) ||f||_5 <= C ||f||_3^{2/5} ||grad |f|^{3/2}||_2^{2/5}
    """
    if constant_l3 is None or constant_l5 is None:
        raise NotCalibrated("interpolation_check needs calibrated constants")
    l2 = lp_norm(f, 2).value
    l3 = lp_norm(f, 3).value
    l5 = lp_norm(f, 5).value
    g2 = grad_lp_norm(f, 2)
    ra = _result("interp-l3", l3, constant_l3 * math.sqrt(l2) * math.sqrt(g2))
    rb = _result("interp-l5", l5, constant_l5 * l3**0.4 * weighted_grad_l32(f) ** 0.4)
    return ra, rb


def besov_caloric_norm(f: SpectralVectorField, t_grid) -> float:
    """Caloric proxy sup over the grid of t^{1/2} ||K_t * f||_{L^inf}."""
    ts = [float(t) for t in t_grid]
    if not ts:
        raise InvalidArgument("t_grid must be nonempty")
    if any(t <= 0 for t in ts):
        raise InvalidArgument("t_grid entries must be positive")
    return max(math.sqrt(t) * lp_norm(heat_propagate(f, t), math.inf).value for t in ts)
