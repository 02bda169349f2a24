"""Direct pseudospectral integration of the mollified system.

The default scheme treats diffusion with an exact integrating factor and the
projected convective term explicitly inside a classical RK4 stage loop, so
the linear part contributes no stiffness error at all; an IMEX
Crank-Nicolson/Adams-Bashforth2 alternative is kept for cross-checks. All
state lives in rfft half-spectra; trajectory monitors sample the norm series
every ``max(1, n_steps // 512)`` steps.

Split evolutions exploit that the perturbation system is the difference of
two plain runs: stepping w and v = u + w independently and forming
u = v - w reproduces the lockstep stage-coupled discretization exactly
(the change of variables is linear and commutes with the stage loop), so
the split-sum identity holds to machine precision.
"""

import math
from dataclasses import dataclass, field as dfield

import numpy as np

from .conditions import BootstrapReport
from .errors import Diverged, GridMismatch, InvalidArgument, StepTooLarge
from .fields import MollifierSpec, ScalarField, SpectralVectorField
from .grid import GridSpec, from_half, to_half, workspace
from .mild import _grad_l3_half, _lp_multi_half
from .runtime import irfftn, rfftn
from .spectral import mollifier_multiplier, nonlinear_half

SCHEMES = ("integrating-factor-rk4", "imex-cn-ab2")


@dataclass(frozen=True)
class TimeStepper:
    scheme: str = "integrating-factor-rk4"
    dt: float = 1e-3
    t_final: float = 0.25
    cfl_safety: float = 0.45

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise InvalidArgument(f"scheme must be one of {SCHEMES}")
        if self.dt <= 0:
            raise InvalidArgument("dt must be positive")
        if self.t_final < self.dt:
            raise InvalidArgument("t_final must be >= dt")
        if not 0 < self.cfl_safety < 1:
            raise InvalidArgument("cfl_safety must lie in (0, 1)")

    def validate_for(self, grid: GridSpec) -> None:
        guard = self.cfl_safety * grid.spacing**2
        if self.dt > guard:
            raise StepTooLarge(
                f"dt = {self.dt} exceeds cfl_safety * h^2 = {guard:.3g} "
                f"on n = {grid.n_per_axis}"
            )


@dataclass
class TrajectoryMonitor:
    """Time series of every monitored quantity along one trajectory."""

    times: np.ndarray
    l2: np.ndarray
    l3: np.ndarray
    l5: np.ndarray
    l6: np.ndarray
    lq: np.ndarray
    grad_l2: np.ndarray
    grad_l3: np.ndarray
    dissipation: np.ndarray  # cumulative trapezoid of ||grad v||_2^2
    energy_lhs: np.ndarray
    energy_rhs: np.ndarray
    decay18: np.ndarray
    decay19: np.ndarray
    tail_fraction: np.ndarray
    div_rel: np.ndarray
    exponent_q: float
    ess_sup_l3: float = 0.0
    t_star: float | None = None

    @property
    def energy_residual(self) -> np.ndarray:
        return self.energy_lhs - self.energy_rhs

    def write_csv(self, path) -> None:
        cols = (
            "t", "l2", "l3", "l6", "grad_l2", "grad_l3",
            "decay18", "decay19", "energy_residual", "tail_fraction",
        )
        data = (
            self.times, self.l2, self.l3, self.l6, self.grad_l2, self.grad_l3,
            self.decay18, self.decay19, self.energy_residual, self.tail_fraction,
        )
        with open(path, "w") as fh:
            fh.write(",".join(cols) + "\n")
            for row in zip(*data):
                fh.write(",".join(repr(float(v)) for v in row) + "\n")


@dataclass
class DifferenceSeries:
    """Norms of the difference of two lockstep trajectories."""

    times: np.ndarray
    l2: np.ndarray
    l3: np.ndarray
    l5: np.ndarray
    grad_l2: np.ndarray


@dataclass
class EvolveResult:
    monitor: TrajectoryMonitor
    initial: SpectralVectorField
    final: SpectralVectorField
    snapshots: dict = dfield(default_factory=dict)


class _MonitorBuilder:
    def __init__(self, gspec: GridSpec, q: float):
        self.gspec = gspec
        self.q = q
        self.rows: list[dict] = []

    def sample(self, t: float, h: np.ndarray) -> None:
        gspec = self.gspec
        ws = workspace(gspec)
        norms = _lp_multi_half(h, gspec, (2.0, 3.0, 5.0, 6.0, self.q))
        g2, g3 = _grad_multi_half(h, gspec)
        beta = 0.5 * (1.0 - 3.0 / self.q)
        e_h = (h * np.conj(h)).real * ws.half_weight
        total = float(np.sum(e_h, dtype=np.longdouble))
        tail = float(np.sum(e_h[:, ws.tail_half], dtype=np.longdouble))
        div2 = float(
            np.sum(
                ws.half_weight
                * np.abs(ws.k1 * h[0] + ws.k2 * h[1] + ws.k3h * h[2]) ** 2,
                dtype=np.longdouble,
            )
        )
        self.rows.append(
            {
                "t": t,
                "l2": norms[2.0],
                "l3": norms[3.0],
                "l5": norms[5.0],
                "l6": norms[6.0],
                "lq": norms[self.q],
                "grad_l2": g2,
                "grad_l3": g3,
                "decay18": t**beta * norms[self.q] if t > 0 else 0.0,
                "decay19": math.sqrt(t) * g3 if t > 0 else 0.0,
                "tail": tail / total if total > 0 else 0.0,
                "div_rel": math.sqrt(div2) / (g2 / math.sqrt(gspec.volume) + 1e-300),
            }
        )

    def build(self) -> TrajectoryMonitor:
        r = self.rows
        times = np.array([x["t"] for x in r])
        grad_l2 = np.array([x["grad_l2"] for x in r])
        l2 = np.array([x["l2"] for x in r])
        dissip = np.concatenate(
            [[0.0], np.cumsum(np.diff(times) * 0.5 * (grad_l2[:-1] ** 2 + grad_l2[1:] ** 2))]
        )
        mon = TrajectoryMonitor(
            times=times,
            l2=l2,
            l3=np.array([x["l3"] for x in r]),
            l5=np.array([x["l5"] for x in r]),
            l6=np.array([x["l6"] for x in r]),
            lq=np.array([x["lq"] for x in r]),
            grad_l2=grad_l2,
            grad_l3=np.array([x["grad_l3"] for x in r]),
            dissipation=dissip,
            energy_lhs=0.5 * l2**2 + dissip,
            energy_rhs=np.full(len(r), 0.5 * l2[0] ** 2),
            decay18=np.array([x["decay18"] for x in r]),
            decay19=np.array([x["decay19"] for x in r]),
            tail_fraction=np.array([x["tail"] for x in r]),
            div_rel=np.array([x["div_rel"] for x in r]),
            exponent_q=self.q,
            ess_sup_l3=float(np.max([x["l3"] for x in r])),
        )
        return mon


def _grad_multi_half(h: np.ndarray, gspec: GridSpec):
    ws = workspace(gspec)
    n = gspec.n_per_axis
    mag2 = np.zeros((n, n, n))
    for i in range(3):
        hi = h[i] * n**3
        for kj in (ws.k1, ws.k2, ws.k3h):
            g = irfftn(1j * kj * hi, (n, n, n))
            mag2 += g * g
    cv = gspec.cell_volume
    g2 = math.sqrt(cv * float(np.sum(mag2, dtype=np.longdouble)))
    g3 = (cv * float(np.sum(mag2 ** np.longdouble(1.5), dtype=np.longdouble))) ** (1 / 3)
    return g2, g3


class _Integrator:
    """Half-spectrum state advanced one step at a time."""

    def __init__(self, v0: SpectralVectorField, m: MollifierSpec | None,
                 stepper: TimeStepper, nonlinearity: bool = True):
        stepper.validate_for(v0.grid)
        self.gspec = v0.grid
        self.ws = workspace(v0.grid)
        n_steps = max(1, round(stepper.t_final / stepper.dt))
        self.dt = stepper.t_final / n_steps  # snap so steps tile [0, t_final]
        self.n_steps = n_steps
        self.scheme = stepper.scheme
        self.mol = (
            mollifier_multiplier(v0.grid, m, half=True) if m is not None else None
        )
        self.nonlinearity = nonlinearity
        self.E = np.exp(-self.ws.ksq_half * self.dt / 2.0)
        self.E2 = self.E * self.E
        self.cn_num = 1.0 - 0.5 * self.dt * self.ws.ksq_half
        self.cn_den = 1.0 / (1.0 + 0.5 * self.dt * self.ws.ksq_half)
        self.h = np.stack([to_half(c).copy() for c in v0.components])
        self.t = 0.0
        self._n_prev = None

    def _rhs(self, h: np.ndarray) -> np.ndarray:
        if not self.nonlinearity:
            return np.zeros_like(h)
        adv = h if self.mol is None else self.mol * h
        return -nonlinear_half(adv, h, self.gspec)

    def step(self) -> None:
        dt, E = self.dt, self.E
        if self.scheme == "integrating-factor-rk4":
            h = self.h
            n1 = self._rhs(h)
            eh = E * h
            n2 = self._rhs(eh + 0.5 * dt * (E * n1))
            n3 = self._rhs(eh + 0.5 * dt * n2)
            n4 = self._rhs(E * (eh + dt * n3))
            self.h = E * (eh + (dt / 6.0) * (E * n1 + 2.0 * n2 + 2.0 * n3)) + (dt / 6.0) * n4
        else:
            if self._n_prev is None:
                # bootstrap AB2 with one integrating-factor RK4 step
                n_curr = self._rhs(self.h)
                h = self.h
                eh = E * h
                n2 = self._rhs(eh + 0.5 * dt * (E * n_curr))
                n3 = self._rhs(eh + 0.5 * dt * n2)
                n4 = self._rhs(E * (eh + dt * n3))
                self.h = E * (eh + (dt / 6.0) * (E * n_curr + 2.0 * n2 + 2.0 * n3)) + (dt / 6.0) * n4
                self._n_prev = n_curr
            else:
                n_curr = self._rhs(self.h)
                self.h = self.cn_den * (
                    self.cn_num * self.h + dt * (1.5 * n_curr - 0.5 * self._n_prev)
                )
                self._n_prev = n_curr
        self.t += dt

    def check_finite(self) -> None:
        if not np.all(np.isfinite(self.h)):
            raise Diverged(
                f"non-finite state at t = {self.t:.6g}",
                last_valid_time=self.t - self.dt,
            )

    def field(self) -> SpectralVectorField:
        full = from_half(self.h, self.gspec.n_per_axis)
        return SpectralVectorField.from_components(
            self.gspec, full[0], full[1], full[2], time_tag=self.t
        )


def _stride(n_steps: int) -> int:
    return max(1, n_steps // 512)


def evolve(
    v0: SpectralVectorField,
    m: MollifierSpec | None,
    stepper: TimeStepper,
    q: float = 6.0,
    nonlinearity: bool = True,
    store_times=(),
) -> EvolveResult:
    """Integrate d_t v = Lap v - P((rho_eps * v) . grad v) from v0.

    ``m = None`` disables the mollification (ordinary convective term);
    ``nonlinearity=False`` is the test hook that reduces the step to the
    exact heat flow. Snapshots are stored at the step times nearest each
    entry of ``store_times``.
    """
    integ = _Integrator(v0, m, stepper, nonlinearity)
    mb = _MonitorBuilder(v0.grid, q)
    stride = _stride(integ.n_steps)
    mb.sample(0.0, integ.h)
    wanted = sorted(set(round(t / integ.dt) for t in store_times))
    snapshots = {}
    for step in range(1, integ.n_steps + 1):
        integ.step()
        if step % 16 == 0 or step == integ.n_steps:
            integ.check_finite()
        if step % stride == 0 or step == integ.n_steps:
            mb.sample(integ.t, integ.h)
        if wanted and step == wanted[0]:
            wanted.pop(0)
            snapshots[integ.t] = integ.field()
    final = integ.field()
    return EvolveResult(mb.build(), v0, final, snapshots)


@dataclass
class PairResult:
    monitor_a: TrajectoryMonitor
    monitor_b: TrajectoryMonitor
    difference: DifferenceSeries
    final_a: SpectralVectorField
    final_b: SpectralVectorField


def evolve_difference(
    a0: SpectralVectorField,
    b0: SpectralVectorField,
    m: MollifierSpec | None,
    stepper: TimeStepper,
    q: float = 6.0,
) -> PairResult:
    """Advance two initial data in lockstep and monitor their difference.

    Serves both split evolutions (difference = perturbation solution) and
    the stability experiment (difference = w = v - v~) without storing any
    dense trajectory.
    """
    if a0.grid != b0.grid:
        raise GridMismatch("paired evolution needs one shared grid")
    ia = _Integrator(a0, m, stepper)
    ib = _Integrator(b0, m, stepper)
    mb_a = _MonitorBuilder(a0.grid, q)
    mb_b = _MonitorBuilder(a0.grid, q)
    rows = []

    def sample_diff(t, d):
        norms = _lp_multi_half(d, a0.grid, (2.0, 3.0, 5.0))
        g2, _ = _grad_multi_half(d, a0.grid)
        rows.append((t, norms[2.0], norms[3.0], norms[5.0], g2))

    stride = _stride(ia.n_steps)
    mb_a.sample(0.0, ia.h)
    mb_b.sample(0.0, ib.h)
    sample_diff(0.0, ia.h - ib.h)
    for step in range(1, ia.n_steps + 1):
        ia.step()
        ib.step()
        if step % 16 == 0 or step == ia.n_steps:
            ia.check_finite()
            ib.check_finite()
        if step % stride == 0 or step == ia.n_steps:
            mb_a.sample(ia.t, ia.h)
            mb_b.sample(ib.t, ib.h)
            sample_diff(ia.t, ia.h - ib.h)
    diff = DifferenceSeries(
        times=np.array([r[0] for r in rows]),
        l2=np.array([r[1] for r in rows]),
        l3=np.array([r[2] for r in rows]),
        l5=np.array([r[3] for r in rows]),
        grad_l2=np.array([r[4] for r in rows]),
    )
    return PairResult(mb_a.build(), mb_b.build(), diff, ia.field(), ib.field())


def evolve_split_ns(w0, m, stepper, **kw) -> EvolveResult:
    """The split system's Navier-Stokes half: identical to ``evolve``."""
    return evolve(w0, m, stepper, **kw)


def evolve_split_pert(
    u0: SpectralVectorField,
    w_run: EvolveResult,
    m: MollifierSpec | None,
    stepper: TimeStepper,
    q: float = 6.0,
) -> PairResult:
    """Perturbation trajectory about a frozen split-NS solution.

    ``w_run`` supplies the initial datum of the coefficient trajectory; w is
    re-advanced in lockstep (deterministically identical to the recorded
    run) and the perturbation is the difference v - w with v0 = u0 + w0.
    monitor_a tracks v, monitor_b tracks w, difference tracks u.
    """
    w0 = w_run.initial
    return evolve_difference(u0 + w0, w0, m, stepper, q)


def energy_ledger(monitor: TrajectoryMonitor) -> np.ndarray:
    """Signed residual of the energy identity at each sample time."""
    return monitor.energy_residual


def find_t_star(
    diff: DifferenceSeries,
    T: float,
    c_cal: float,
):
    """Earliest positive sample with ||u(t)||_3 < 1/(8C) on (0, T].

    Also evaluates the L^4-in-time bound int_0^T ||u||_3^4 <= C^4 ||u0||_2^4
    that underwrites existence of the crossing. Returns (t_star | None, info).
    """
    mask = diff.times <= T * (1.0 + 1e-12)
    ts = diff.times[mask]
    l3 = diff.l3[mask]
    integral = float(np.trapezoid(l3**4, ts))
    bound = c_cal**4 * diff.l2[0] ** 4
    info = {
        "l4_time_integral": integral,
        "l4_time_bound": bound,
        "l4_time_ok": bool(integral <= bound),
        "threshold": 1.0 / (8.0 * c_cal),
    }
    hit = np.nonzero((ts > 0) & (l3 < info["threshold"]))[0]
    t_star = float(ts[hit[0]]) if hit.size else None
    return t_star, info


@dataclass(frozen=True)
class PressureField:
    q: ScalarField
    recovered_from: str
    poisson_residual: float


def recover_pressure(
    w: SpectralVectorField,
    baseline: SpectralVectorField | None = None,
) -> PressureField:
    """Solve -Lap q = div div (b w + w b + w w) spectrally, zero-mean gauge.

    With ``baseline=None`` the primal source v v is used instead. The
    returned residual re-evaluates the Poisson equation from the computed q.
    """
    gspec = w.grid
    ws = workspace(gspec)
    n = gspec.n_per_axis
    wp = [irfftn(to_half(c) * n**3, (n, n, n)) for c in w.components]
    if baseline is None:
        bp = wp
        tag = "primal"
        prods = [[wp[i] * wp[j] for j in range(3)] for i in range(3)]
    else:
        if baseline.grid != gspec:
            raise GridMismatch("pressure recovery needs one shared grid")
        bp = [irfftn(to_half(c) * n**3, (n, n, n)) for c in baseline.components]
        tag = "difference-system"
        prods = [
            [bp[i] * wp[j] + wp[i] * bp[j] + wp[i] * wp[j] for j in range(3)]
            for i in range(3)
        ]
    kvecs = (ws.k1, ws.k2, ws.k3h)
    source = np.zeros((n, n, gspec.half_width), dtype=np.complex128)
    for i in range(3):
        for j in range(3):
            source += kvecs[i] * kvecs[j] * (rfftn(prods[i][j]) / n**3)
    qh = source * ws.inv_ksq_half
    qh[0, 0, 0] = 0.0
    resid_num = math.sqrt(
        float(
            np.sum(
                ws.half_weight * np.abs(ws.ksq_half * qh - source) ** 2,
                dtype=np.longdouble,
            )
        )
    )
    resid_den = math.sqrt(
        float(np.sum(ws.half_weight * np.abs(source) ** 2, dtype=np.longdouble))
    )
    resid = resid_num / resid_den if resid_den > 0 else 0.0
    scalar = ScalarField(gspec, from_half(qh, n), role_tag="pressure")
    return PressureField(scalar, tag, resid)


def assumption_A_monitor(
    monitor: TrajectoryMonitor,
    T: float,
    eps_A: float,
) -> dict:
    """Residual of |int_0^{T/2} ||grad v||_2^2 - (1/2)||v0||_2^2| and verdict.

    When the assumption holds, the follow-up chain is evaluated under both
    readings of the epsilon bound (given once squared, once linear; the
    source alternates between them) without deciding between the two.
    """
    if eps_A <= 0:
        raise InvalidArgument("eps_A must be positive")
    half = T / 2.0
    if monitor.times[-1] < half * (1 - 1e-9):
        raise InvalidArgument("trajectory must cover [0, T/2]")
    i_half = int(np.argmin(np.abs(monitor.times - half)))
    residual = abs(monitor.dissipation[i_half] - 0.5 * monitor.l2[0] ** 2)
    verdict = bool(residual < eps_A)
    l2_half = monitor.l2[i_half]
    out = {
        "residual": residual,
        "eps_A": eps_A,
        "holds": verdict,
        "t_half": float(monitor.times[i_half]),
        "l2_at_half": l2_half,
        "bound_literal": 2.0 * eps_A,
        "bound_dimensional": math.sqrt(2.0 * eps_A),
        "literal_ok": bool(l2_half < 2.0 * eps_A),
        "dimensional_ok": bool(l2_half < math.sqrt(2.0 * eps_A)),
    }
    sel = (monitor.times >= half * (1 - 1e-12)) & (monitor.times <= T * (1 + 1e-12))
    if np.any(sel):
        out["inf_l3_on_half_window"] = float(np.min(monitor.l3[sel]))
    return out


def ess_monitor(
    monitor: TrajectoryMonitor,
    bootstrap: BootstrapReport | None = None,
    c_cal: float | None = None,
    norm_u0_l3: float | None = None,
) -> dict:
    """sup-norm monitors for the regularity criterion and decay remark."""
    sup_l3 = float(np.max(monitor.l3))
    sup_grad_l2 = float(np.max(monitor.grad_l2))
    out = {
        "sup_l3": sup_l3,
        "sup_grad_l2": sup_grad_l2,
        "smooth_proxy": bool(
            math.isfinite(sup_grad_l2)
            and sup_grad_l2 <= 10.0 * max(monitor.grad_l2[0], 1e-300)
            and float(np.max(monitor.tail_fraction)) < 1e-6
        ),
    }
    if bootstrap is not None:
        out["M_v"] = bootstrap.M_v
        out["within_M_v"] = bool(sup_l3 <= bootstrap.M_v)
        if c_cal is not None and norm_u0_l3 is not None:
            cap = bootstrap.K + c_cal * norm_u0_l3
            out["decay_remark_cap"] = cap
            out["decay_remark_ok"] = bool(np.all(monitor.decay18 <= cap))
    return out
