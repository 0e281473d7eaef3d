"""Distortion-rate and rate-distortion boundaries of the two-layer, two-user
Gaussian refinement region, together with the converse witness and a grid
scanner that cross-validates the two characterizations against each other.

Notation used throughout (all rates in nats):

* ``d1_star = var * exp(-2 r1)`` is the first-layer distortion floor and
  ``d_hat = min(d, d1_star)`` clamps a side target to it;
* the normalized side targets are ``a = d2_hat/d1_star``, ``b = d3_hat/d1_star``;
* ``pi = (1 - a)(1 - b)`` and ``delta = a b - exp(-2 (r2 + r3))`` drive the
  central-distortion penalty ``1 / (1 - (max(sqrt(pi) - sqrt(delta), 0))^2)``;
* ``R(x) = -log(x)/2`` is the rate that moves a distortion ratio to ``x``.

For individually feasible inputs ``delta >= 0`` always holds (``a >= exp(-2 r2)``
and ``b >= exp(-2 r3)``); a materially negative value therefore raises.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import (InfeasibleDistortion, InvalidRegimeInput, NegativeDelta,
                     OutOfRegime)
from .model import (FEASIBILITY_RTOL, UNCONSTRAINED, GaussianSource, RateTuple,
                    Regime, Unconstrained)

#: Relative half-width of the band around regime boundaries inside which the
#: adjacent branches are reconciled instead of trusted blindly.
BOUNDARY_RTOL = 1e-9


def rate_to_reach(ratio: float) -> float:
    """Rate (nats) required to bring a distortion ratio down to ``ratio``."""
    if ratio >= 1.0:
        return 0.0
    return -0.5 * math.log(ratio)


@dataclass(frozen=True)
class DrBoundResult:
    """Central-distortion bound for fixed rates and side targets."""

    d1_star: float
    d2_hat: float
    d3_hat: float
    pi: float
    delta: float
    d4_bound: float
    regime: Regime


@dataclass(frozen=True)
class RdBoundResult:
    """Rate requirements for fixed distortion targets, r1 and r4."""

    r1_star: float
    r2_bound: float
    r3_bound: float
    d4_hat: float
    sum_bound: float
    excess: float
    regime: Regime


@dataclass(frozen=True)
class ConverseWitness:
    """Closed-form maximizer of the converse's auxiliary bound.

    ``epsilon_star`` is the slack value whose bound ``t(eps)`` is largest; it
    is ``inf`` when the supremum is approached only in the limit (then the
    bound degrades to the trivial ``t = 1``).
    """

    epsilon_star: float
    pi_star: float
    delta_star: float
    t_bound: float


def _floors(sx2: float, rates: RateTuple) -> tuple[float, float, float]:
    return (sx2 * math.exp(-2.0 * rates.r1),
            sx2 * math.exp(-2.0 * (rates.r1 + rates.r2)),
            sx2 * math.exp(-2.0 * (rates.r1 + rates.r3)))


def _check_side_feasibility(sx2: float, rates: RateTuple,
                            d1: float | Unconstrained, d2: float, d3: float) -> float:
    """Validate the three individual floors; returns d1_star."""
    f1, f2, f3 = _floors(sx2, rates)
    if d1 is not UNCONSTRAINED:
        if not d1 > 0:
            raise InfeasibleDistortion(f"d1 must be positive, got {d1}")
        if d1 < f1 * (1.0 - FEASIBILITY_RTOL):
            raise InfeasibleDistortion(f"d1={d1} below its floor {f1}")
    for name, d, f in (("d2", d2, f2), ("d3", d3, f3)):
        if not d > 0:
            raise InfeasibleDistortion(f"{name} must be positive, got {d}")
        if d < f * (1.0 - FEASIBILITY_RTOL):
            raise InfeasibleDistortion(f"{name}={d} below its floor {f}")
    return f1


def _pi_delta(d1_star: float, d2_hat: float, d3_hat: float,
              rate_sum_23: float) -> tuple[float, float]:
    a = d2_hat / d1_star
    b = d3_hat / d1_star
    pi = (1.0 - a) * (1.0 - b)
    s = math.exp(-2.0 * rate_sum_23)
    delta = a * b - s
    if delta < -FEASIBILITY_RTOL * max(a * b, s):
        raise NegativeDelta(
            f"delta={delta} is negative beyond rounding; inputs are inconsistent"
        )
    # Snap within-rounding values of delta to the exact boundary: sqrt(delta)
    # has unbounded sensitivity at zero, so treating leftover input rounding
    # as a genuine excess would inject noise of order sqrt(eps) into the
    # bound for side targets sitting exactly on their rate floors.
    if abs(delta) <= FEASIBILITY_RTOL * max(a * b, s):
        delta = 0.0
    return max(pi, 0.0), max(delta, 0.0)


def dr_bound(source: GaussianSource, rates: RateTuple,
             d1: float | Unconstrained, d2: float, d3: float) -> DrBoundResult:
    """Tight lower bound on the central distortion d4.

    Requires ``(d1, d2, d3)`` individually feasible at ``rates``.  The bound is
    ``var * exp(-2 (r1+r2+r3+r4)) / (1 - (max(sqrt(pi)-sqrt(delta), 0))^2)``;
    when ``pi < delta`` the positive part vanishes, the penalty collapses to 1
    and the regime is reported as degenerate.
    """
    sx2 = source.variance
    d1s = _check_side_feasibility(sx2, rates, d1, d2, d3)
    d2h = min(d2, d1s)
    d3h = min(d3, d1s)
    pi, delta = _pi_delta(d1s, d2h, d3h, rates.r2 + rates.r3)
    if pi < delta:
        regime = Regime.DEGENERATE_PI_LESS_DELTA
        denom = 1.0
    else:
        regime = Regime.NON_DEGENERATE
        gap = math.sqrt(pi) - math.sqrt(delta)
        denom = 1.0 - gap * gap
        if denom <= 0.0:
            raise InvalidRegimeInput(
                f"penalty denominator {denom} not positive (pi={pi}, delta={delta})"
            )
    d4_bound = sx2 * math.exp(-2.0 * rates.total()) / denom
    return DrBoundResult(d1s, d2h, d3h, pi, delta, d4_bound, regime)


def t_of_epsilon(epsilon: float, d1_star: float, d2: float, d3: float,
                 rate_sum_23: float) -> float:
    """The converse's auxiliary lower-bound factor at slack ``epsilon``."""
    s = math.exp(-2.0 * rate_sum_23)
    num = epsilon * (d1_star + epsilon)
    den = (d2 + epsilon) * (d3 + epsilon) - (d1_star + epsilon) * d1_star * s
    if den <= 0.0:
        raise InvalidRegimeInput(
            f"t(eps) denominator {den} not positive at eps={epsilon}"
        )
    return num / den


def converse_witness(source: GaussianSource, rates: RateTuple,
                     d1: float | Unconstrained, d2: float, d3: float) -> ConverseWitness:
    """Closed-form slack maximizing the converse bound on the d4 penalty.

    Only defined when both side targets sit at or below the first-layer floor
    (``d2, d3 <= d1_star``); otherwise raises :class:`OutOfRegime`.  Uses the
    unclamped targets: ``pi_star = (1 - d2/d1*)(1 - d3/d1*)`` and
    ``delta_star = d2 d3 / d1*^2 - exp(-2 (r2+r3))``.  When
    ``pi_star >= delta_star`` the maximizer is
    ``eps* = d1* sqrt(delta*) / (sqrt(pi*) - sqrt(delta*))`` with
    ``t(eps*) = 1 / (1 - (sqrt(pi*) - sqrt(delta*))^2)``; otherwise the
    supremum ``t = 1`` is approached only as ``eps -> inf``.
    """
    sx2 = source.variance
    d1s = _check_side_feasibility(sx2, rates, d1, d2, d3)
    tol = FEASIBILITY_RTOL * d1s
    if d2 > d1s + tol or d3 > d1s + tol:
        raise OutOfRegime(
            f"witness needs d2, d3 <= d1_star={d1s}, got d2={d2}, d3={d3}"
        )
    pi_star, delta_star = _pi_delta(d1s, min(d2, d1s), min(d3, d1s),
                                    rates.r2 + rates.r3)
    gap = math.sqrt(pi_star) - math.sqrt(delta_star)
    if gap > 0.0:
        eps_star = d1s * math.sqrt(delta_star) / gap
        t_bound = 1.0 / (1.0 - gap * gap)
    else:
        eps_star = math.inf
        t_bound = 1.0
    return ConverseWitness(eps_star, pi_star, delta_star, t_bound)


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def maximize_t_numeric(source: GaussianSource, rates: RateTuple,
                       d1: float | Unconstrained, d2: float, d3: float,
                       *, eps_lo: float = 1e-9, eps_hi: float = 1e9,
                       rtol: float = 1e-10) -> tuple[float, float]:
    """Golden-section maximization of ``t(eps)`` over ``log eps``.

    Numeric counterpart of :func:`converse_witness`; the two are compared in
    the self-verification suite.  Returns ``(eps, t(eps))`` at the maximizer.
    """
    sx2 = source.variance
    d1s = _check_side_feasibility(sx2, rates, d1, d2, d3)
    rate_sum = rates.r2 + rates.r3

    def f(x: float) -> float:
        return t_of_epsilon(math.exp(x), d1s, d2, d3, rate_sum)

    lo, hi = math.log(eps_lo), math.log(eps_hi)
    xtol = rtol * max(1.0, abs(lo), abs(hi))
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > xtol:
        if fc < fd:
            lo, c, fc = c, d, fd
            d = lo + _INVPHI * (hi - lo)
            fd = f(d)
        else:
            hi, d, fd = d, c, fc
            c = hi - _INVPHI * (hi - lo)
            fc = f(c)
    x = 0.5 * (lo + hi)
    return math.exp(x), f(x)


def _excess_term(a: float, b: float, z: float) -> float:
    """Extra sum rate beyond R(z) in the excess regime, in nats.

    ``0.5 log[(1-z)^2 / ((1-z)^2 - (sqrt(pi) - w)^2)]`` with
    ``w = sqrt((a-z)(b-z))``; algebraically this inverts the d4 bound for the
    implied ``exp(-2 (r2+r3))``, so it is nonnegative wherever defined.
    """
    pi = (1.0 - a) * (1.0 - b)
    w = math.sqrt(max(a - z, 0.0) * max(b - z, 0.0))
    gap = math.sqrt(pi) - w
    num = (1.0 - z) * (1.0 - z)
    den = num - gap * gap
    if den <= 0.0:
        raise InvalidRegimeInput(
            f"excess-term denominator {den} not positive (a={a}, b={b}, z={z})"
        )
    return max(0.5 * math.log(num / den), 0.0)


def rd_bound(source: GaussianSource, r1: float, r4: float,
             dist) -> RdBoundResult:
    """Rate requirements on (r2, r3) for the targets in ``dist``.

    ``dist`` carries (d1, d2, d3, d4); ``r1`` must already cover the
    first-layer requirement ``R(min(d1, var)/var)``.  Individual bounds are
    ``r2 >= R(d2_hat/d1_star)`` and ``r3 >= R(d3_hat/d1_star)``; the sum bound
    uses ``z = d4 exp(2 r4) / d1_star`` and splits into three regimes:

    * low (``z < a + b - 1``): ``R(z)`` alone suffices;
    * slack (``z`` above the harmonic threshold ``1/(1/a + 1/b - 1)``): the
      individual bounds already imply the sum, which is 0;
    * excess (between): ``R(z)`` plus the strictly positive term of
      :func:`_excess_term`.

    Membership of a rate pair is ``r2 >= r2_bound``, ``r3 >= r3_bound`` and
    ``r2 + r3 >= sum_bound``; this is equivalent point-by-point to the
    distortion-side characterization of :func:`dr_bound`.
    """
    sx2 = source.variance
    for name, value in (("r1", r1), ("r4", r4)):
        if not (math.isfinite(value) and value >= 0.0):
            raise ValueError(f"{name} must be a finite nonnegative rate, got {value}")
    d1 = dist.d1
    d1_eff = sx2 if d1 is UNCONSTRAINED else min(d1, sx2)
    if d1 is not UNCONSTRAINED and not d1 > 0:
        raise InfeasibleDistortion(f"d1 must be positive, got {d1}")
    for name, value in (("d2", dist.d2), ("d3", dist.d3), ("d4", dist.d4)):
        if not value > 0:
            raise InfeasibleDistortion(f"{name} must be positive, got {value}")
    r1_star = rate_to_reach(d1_eff / sx2)
    if r1 < r1_star * (1.0 - FEASIBILITY_RTOL) - 1e-15:
        raise InfeasibleDistortion(
            f"r1={r1} below the first-layer requirement {r1_star}"
        )
    d1s = sx2 * math.exp(-2.0 * r1)
    a = min(dist.d2, d1s) / d1s
    b = min(dist.d3, d1s) / d1s
    r2_bound = rate_to_reach(a)
    r3_bound = rate_to_reach(b)
    d4_hat = dist.d4 * math.exp(2.0 * r4)
    z = d4_hat / d1s

    low_thr = a + b - 1.0
    harmonic_thr = 1.0 / (1.0 / a + 1.0 / b - 1.0)
    if low_thr > harmonic_thr * (1.0 + FEASIBILITY_RTOL):
        raise InvalidRegimeInput(
            f"threshold order violated: a+b-1={low_thr} > harmonic {harmonic_thr}"
        )

    def near(threshold: float) -> bool:
        return threshold > 0.0 and abs(z - threshold) <= BOUNDARY_RTOL * max(z, threshold)

    excess = 0.0
    if near(harmonic_thr):
        # At the harmonic corner the excess branch lands exactly on the sum of
        # the individual bounds, so the constraint it would add is redundant.
        if abs(z - harmonic_thr) <= 1e-12 * harmonic_thr and low_thr < z:
            corner = rate_to_reach(z) + _excess_term(a, b, min(z, harmonic_thr))
            if abs(corner - (r2_bound + r3_bound)) > BOUNDARY_RTOL * max(1.0, corner):
                raise InvalidRegimeInput(
                    f"branch disagreement at the harmonic corner: {corner} vs "
                    f"{r2_bound + r3_bound}"
                )
        regime = Regime.RD_SLACK
        sum_bound = 0.0
    elif z > harmonic_thr:
        regime = Regime.RD_SLACK
        sum_bound = 0.0
    elif near(low_thr):
        # Both branches are continuous here; take the weaker (smaller) one.
        sum_low = rate_to_reach(z)
        sum_excess = sum_low + _excess_term(a, b, z)
        if sum_low <= sum_excess:
            regime = Regime.RD_LOW
            sum_bound = sum_low
        else:  # pragma: no cover - excess term is nonnegative
            regime = Regime.RD_EXCESS
            sum_bound = sum_excess
            excess = sum_excess - sum_low
    elif low_thr > 0.0 and z < low_thr:
        regime = Regime.RD_LOW
        sum_bound = rate_to_reach(z)
    else:
        regime = Regime.RD_EXCESS
        excess = _excess_term(a, b, z)
        sum_bound = rate_to_reach(z) + excess
    return RdBoundResult(r1_star, r2_bound, r3_bound, d4_hat, sum_bound,
                         excess, regime)


def invert_dr_sum_rate(source: GaussianSource, r1: float, d2: float, d3: float,
                       d4_hat: float, *, tol: float = 1e-12,
                       max_iter: int = 200) -> float:
    """Numeric inversion of the d4 bound for the required sum rate r2 + r3.

    Bisects on ``s = exp(-2 (r2+r3))`` until the central-distortion bound at
    ``(d2, d3, s)`` meets ``d4_hat``; the bound is strictly increasing in
    ``s``, so the root is unique.  Serves as the independent oracle for the
    closed-form sum bound of :func:`rd_bound`.
    """
    sx2 = source.variance
    if not (d2 > 0 and d3 > 0 and d4_hat > 0):
        raise InfeasibleDistortion("distortions must be positive")
    d1s = sx2 * math.exp(-2.0 * r1)
    a = min(d2, d1s) / d1s
    b = min(d3, d1s) / d1s
    z = d4_hat / d1s
    pi = (1.0 - a) * (1.0 - b)
    ab = a * b

    def d4_norm(s: float) -> float:
        delta = max(ab - s, 0.0)
        gap = max(math.sqrt(pi) - math.sqrt(delta), 0.0)
        return s / (1.0 - gap * gap)

    if z >= d4_norm(ab):
        return 0.0  # slack: the individual bounds alone are binding
    lo, hi = 0.0, ab
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if d4_norm(mid) >= z:
            hi = mid
        else:
            lo = mid
    return -0.5 * math.log(0.5 * (lo + hi))


# ---------------------------------------------------------------------------
# Cross-validation of the two characterizations on a grid.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Cartesian product grid over operating points.

    ``d1_values`` entries may be :data:`UNCONSTRAINED`; all other axes hold
    positive floats.  Rates are in nats.
    """

    r1_values: tuple[float, ...]
    r4_values: tuple[float, ...]
    d1_values: tuple[float | Unconstrained, ...]
    d2_values: tuple[float, ...]
    d3_values: tuple[float, ...]
    r2_values: tuple[float, ...]
    r3_values: tuple[float, ...]
    d4_values: tuple[float, ...]

    def total_points(self) -> int:
        n = 1
        for axis in (self.r1_values, self.r4_values, self.d1_values,
                     self.d2_values, self.d3_values, self.r2_values,
                     self.r3_values, self.d4_values):
            n *= len(axis)
        return n


@dataclass
class EquivalenceReport:
    """Outcome of scanning both region characterizations over a grid."""

    evaluated: int = 0
    skipped_infeasible: int = 0
    boundary: int = 0
    in_both: int = 0
    out_both: int = 0
    regime_counts: dict[str, int] = field(default_factory=dict)
    mismatches: list[dict] = field(default_factory=list)

    @property
    def mismatch_count(self) -> int:
        return len(self.mismatches)


def default_grid(source: GaussianSource, points_per_axis: int) -> GridSpec:
    """A grid that reaches all three sum-rate regimes and both sides of every
    boundary; total size ``4 * points_per_axis**5``."""
    if points_per_axis < 2:
        raise ValueError("need at least two points per swept axis")
    k = points_per_axis
    sx2 = source.variance

    def lin(lo: float, hi: float) -> tuple[float, ...]:
        step = (hi - lo) / (k - 1)
        return tuple(lo + i * step for i in range(k))

    def geo(lo: float, hi: float) -> tuple[float, ...]:
        ratio = (hi / lo) ** (1.0 / (k - 1))
        return tuple(lo * ratio ** i for i in range(k))

    return GridSpec(
        r1_values=(0.0, 0.35),
        r4_values=(0.0, 0.25),
        d1_values=(UNCONSTRAINED,),
        d2_values=tuple(v * sx2 for v in geo(0.16, 1.07)),
        d3_values=tuple(v * sx2 for v in geo(0.13, 0.97)),
        r2_values=lin(0.12, 1.31),
        r3_values=lin(0.17, 1.13),
        d4_values=tuple(v * sx2 for v in geo(0.015, 1.10)),
    )


def equivalence_scan(source: GaussianSource, grid: GridSpec) -> EquivalenceReport:
    """Classify every grid point by both characterizations and reconcile.

    The three individual floors are literally the same inequalities on both
    sides, so points that clearly fail one are skipped (counted as
    infeasible).  For the rest, the distortion-side verdict ``d4 >= d4_bound``
    is compared with the rate-side verdict ``r2 + r3 >= sum_bound``; verdicts
    within a relative band of ``1e-9`` around either boundary are recorded as
    boundary points rather than disagreements.
    """
    from .model import DistortionTuple  # local import to avoid cycle at load

    report = EquivalenceReport()
    sx2 = source.variance
    tol = BOUNDARY_RTOL
    for r1, r4 in itertools.product(grid.r1_values, grid.r4_values):
        d1s = sx2 * math.exp(-2.0 * r1)
        for d1 in grid.d1_values:
            # An unconstrained d1 imposes nothing, so its margin is vacuous.
            m1 = math.inf if d1 is UNCONSTRAINED else (d1 - d1s) / d1s
            for r2, r3 in itertools.product(grid.r2_values, grid.r3_values):
                f2 = d1s * math.exp(-2.0 * r2)
                f3 = d1s * math.exp(-2.0 * r3)
                rates = RateTuple(r1, r2, r3, r4)
                for d2, d3 in itertools.product(grid.d2_values, grid.d3_values):
                    base = min(m1, (d2 - f2) / f2, (d3 - f3) / f3)
                    if base < -tol:
                        report.skipped_infeasible += len(grid.d4_values)
                        continue
                    if base <= tol:
                        report.boundary += len(grid.d4_values)
                        continue
                    dr = dr_bound(source, rates, d1, d2, d3)
                    for d4 in grid.d4_values:
                        rd = rd_bound(source, r1, r4,
                                      DistortionTuple(d1, d2, d3, d4))
                        report.evaluated += 1
                        key = rd.regime.value
                        report.regime_counts[key] = report.regime_counts.get(key, 0) + 1
                        m_dr = (d4 - dr.d4_bound) / dr.d4_bound
                        m_rd = (r2 + r3) - rd.sum_bound
                        dr_in = m_dr > tol
                        dr_out = m_dr < -tol
                        rd_in = m_rd > tol
                        rd_out = m_rd < -tol
                        if not (dr_in or dr_out) or not (rd_in or rd_out):
                            report.boundary += 1
                        elif dr_in == rd_in:
                            if dr_in:
                                report.in_both += 1
                            else:
                                report.out_both += 1
                        else:
                            report.mismatches.append({
                                "rates": rates.as_tuple(),
                                "d": (None if d1 is UNCONSTRAINED else d1,
                                      d2, d3, d4),
                                "dr_margin": m_dr,
                                "rd_margin": m_rd,
                                "regime": key,
                            })
    return report
