"""Smallness conditions and the bootstrap constants.

The quadratic closure has two shapes: the single-datum root
K = (1 - sqrt(1 - 4 C^2 ||w0||_3)) / (2C) when there is no Stokes part, and
the two-datum root K = (1/2 - sqrt(1/4 - 4 C^2 (||w0||_3 + T max^2))) / (2C)
with max = max(||u0||_q, ||grad u0||_3). K' is the stability-proof root and
is reported as NaN when its own discriminant is negative; NoClosure is
raised on the discriminant that governs K.
"""

import math
from dataclasses import dataclass

from .errors import InvalidArgument, NoClosure, NotCalibrated

CONDITION_IDS = (16, 17, 23, 25, 26, 28, 37)


@dataclass(frozen=True)
class ConditionReport:
    condition_id: int
    lhs: float
    threshold: float
    passed: bool

    @staticmethod
    def make(condition_id: int, lhs: float, threshold: float) -> "ConditionReport":
        # strict inequality throughout, matching the source conditions
        return ConditionReport(condition_id, lhs, threshold, bool(lhs < threshold))


@dataclass(frozen=True)
class BootstrapReport:
    C_cal: float
    K: float
    K_prime: float
    M_u: float
    M_w: float
    M_v: float
    discriminant: float


def bootstrap_constants(
    norm_w0_l3: float,
    norm_u0_max: float,
    T: float,
    c_cal: float,
    norm_u0_l3: float = 0.0,
) -> BootstrapReport:
    """Solve the bootstrap quadratic and assemble the a-priori bounds.

    ``norm_u0_max`` is max(||u0||_q, ||grad u0||_3); ``norm_u0_l3`` feeds the
    uniform-in-time bound M_w = C(||w0|| + K^2 + 2 ||u0||_3 K + ||u0||_3^2).
    Raises NoClosure when the discriminant is negative.
    """
    if min(norm_w0_l3, norm_u0_max, norm_u0_l3) < 0:
        raise InvalidArgument("norms must be nonnegative")
    if c_cal <= 0 or T <= 0:
        raise InvalidArgument("c_cal and T must be positive")
    c2 = c_cal * c_cal
    if norm_u0_max == 0.0:
        disc = 1.0 - 4.0 * c2 * norm_w0_l3
        if disc < 0:
            raise NoClosure(
                f"1 - 4C^2 ||w0||_3 = {disc:.6g} < 0: no real bootstrap root"
            )
        K = (1.0 - math.sqrt(disc)) / (2.0 * c_cal)
    else:
        disc = 0.25 - 4.0 * c2 * (norm_w0_l3 + T * norm_u0_max**2)
        if disc < 0:
            raise NoClosure(
                f"1/4 - 4C^2 (||w0||_3 + T max^2) = {disc:.6g} < 0: no real bootstrap root"
            )
        K = (0.5 - math.sqrt(disc)) / (2.0 * c_cal)
    disc_prime = 0.25 - 4.0 * c2 * norm_w0_l3
    K_prime = (
        (0.5 - math.sqrt(disc_prime)) / (2.0 * c_cal)
        if disc_prime >= 0
        else math.nan
    )
    M_w = c_cal * (norm_w0_l3 + K * K + 2.0 * norm_u0_l3 * K + norm_u0_l3**2)
    M_u = norm_u0_l3
    return BootstrapReport(c_cal, K, K_prime, M_u, M_w, M_u + M_w, disc)


def check_condition(
    condition_id: int,
    *,
    c_cal: float,
    T: float | None = None,
    theta: float = 0.125,
    norm_u0_lq: float | None = None,
    norm_grad_u0_l3: float | None = None,
    norm_w0_l3: float | None = None,
    max_w_l3: float | None = None,
    norm_u0_l2: float | None = None,
    n_intervals: int | None = None,
) -> ConditionReport:
    """Evaluate one numbered smallness condition against its threshold.

    Thresholds for 16/17 follow the theta policy (default 1/8, matching the
    unambiguous 1/(8C) conditions); 23/25/26/28/37 use their printed
    constants. Pass/fail is strict.
    """
    if c_cal is None or c_cal <= 0:
        raise NotCalibrated("check_condition needs a calibrated constant")
    if condition_id not in CONDITION_IDS:
        raise InvalidArgument(f"unknown condition id {condition_id}")

    def need(value, name):
        if value is None:
            raise InvalidArgument(f"condition {condition_id} needs {name}")
        return value

    if condition_id == 16:
        T = need(T, "T")
        lhs = math.sqrt(T) * max(
            need(norm_u0_lq, "norm_u0_lq"), need(norm_grad_u0_l3, "norm_grad_u0_l3")
        )
        return ConditionReport.make(16, lhs, theta / c_cal)
    if condition_id == 17:
        return ConditionReport.make(17, need(norm_w0_l3, "norm_w0_l3"), theta / c_cal)
    if condition_id == 23:
        return ConditionReport.make(
            23, need(norm_w0_l3, "norm_w0_l3"), 1.0 / (4.0 * c_cal)
        )
    if condition_id == 25:
        return ConditionReport.make(25, need(max_w_l3, "max_w_l3"), 1.0 / (8.0 * c_cal))
    if condition_id == 26:
        T = need(T, "T")
        lhs = T ** (-0.25) * need(norm_u0_l2, "norm_u0_l2")
        return ConditionReport.make(26, lhs, 1.0 / (8.0 * c_cal))
    if condition_id == 28:
        w = need(norm_w0_l3, "norm_w0_l3")
        disc = 1.0 - 4.0 * c_cal * c_cal * w
        lhs = 1.0 - math.sqrt(disc) if disc >= 0 else math.inf
        return ConditionReport.make(28, lhs, 0.25)
    # condition 37: perturbation budget for the induction over the partition
    w = need(norm_w0_l3, "norm_w0_l3")
    M = need(n_intervals, "n_intervals")
    return ConditionReport.make(37, w, 1.0 / (8.0 * c_cal * (2.0 * c_cal) ** M))
