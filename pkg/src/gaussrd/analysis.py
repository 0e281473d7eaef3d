"""Comparison analyses built on top of the region primitives.

Four studies live here, all on a unit-variance source unless stated:

* a side-information (binning) alternative for the second user, compared with
  the plain two-description slice of the main region;
* the loss from freezing the first-layer test channel while the rate budget
  of a late stage grows;
* conditional refinement of both descriptions (splitting an extra rate
  ``r4`` onto the two side branches) versus spending the same total rate in
  the plain two-description system;
* closed-form high-rate asymptotes of the central distortion and their
  convergence against the exact bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import InfeasibleDistortion, InvalidChannel, OutOfRegime
from .model import FEASIBILITY_RTOL, GaussianSource, RateTuple, Regime
from .regions import dr_bound

#: Tolerance for the internal consistency assertions between specialized
#: closed forms and the general region evaluation.
SPECIALIZATION_RTOL = 1e-12


@dataclass(frozen=True)
class WzChannel:
    """Two-stage forward channel whose refinement is decoded by binning.

    ``U1 = X + N1 + N2`` is the coarse description, ``U2 = X + N2`` refines
    it, and ``gamma = sigma2_sq / (sigma1_sq + sigma2_sq)`` is the combining
    weight the second user applies when only the coarse estimate is at hand.
    """

    sigma1_sq: float
    sigma2_sq: float
    gamma: float

    def __post_init__(self) -> None:
        for name in ("sigma1_sq", "sigma2_sq"):
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise InvalidChannel(f"{name} must be positive finite, got {value}")
        if not 0.0 < self.gamma < 1.0:
            raise InvalidChannel(f"gamma must lie in (0, 1), got {self.gamma}")


def wz_channel_from_rates(source: GaussianSource, r1: float, r2: float) -> WzChannel:
    """Solve the two noise variances so the coarse and refined estimates hit
    ``d1* = var exp(-2 r1)`` and ``d2* = var exp(-2 (r1+r2))`` exactly."""
    if not r1 > 0.0 or not r2 > 0.0:
        raise InvalidChannel(
            f"both stage rates must be positive to invert the channel, "
            f"got r1={r1}, r2={r2}"
        )
    sx2 = source.variance
    d1s = sx2 * math.exp(-2.0 * r1)
    d2s = sx2 * math.exp(-2.0 * (r1 + r2))
    sigma2_sq = sx2 * d2s / (sx2 - d2s)
    sigma1_sq = sx2 * d1s / (sx2 - d1s) - sigma2_sq
    gamma = sigma2_sq / (sigma1_sq + sigma2_sq)
    return WzChannel(sigma1_sq, sigma2_sq, gamma)


def wz_region(source: GaussianSource, rates: RateTuple, d3_prime: float) -> float:
    """Central-distortion bound of the binning alternative.

    The first two stages are pinned at ``(d1*, d2*)`` by
    :func:`wz_channel_from_rates`; ``d3_prime`` is the second user's target
    (feasible when at least ``var exp(-2 (r1+r3))``) and the returned value is
    the least central distortion reachable with the remaining rates::

        exp(-2 (r3+r4)) var s1 s2
        -------------------------------------------------
        (var + s1 + s2) ((1-gamma)^2 min(d3', d1*) + gamma s1)

    It coincides with the plain two-description slice at both ends of the
    feasible range of ``d3_prime`` and is strictly worse in between.
    """
    sx2 = source.variance
    ch = wz_channel_from_rates(source, rates.r1, rates.r2)
    d1s = sx2 * math.exp(-2.0 * rates.r1)
    floor3 = sx2 * math.exp(-2.0 * (rates.r1 + rates.r3))
    if d3_prime < floor3 * (1.0 - FEASIBILITY_RTOL):
        raise InfeasibleDistortion(f"d3'={d3_prime} below its floor {floor3}")
    s1, s2, g = ch.sigma1_sq, ch.sigma2_sq, ch.gamma
    numerator = math.exp(-2.0 * (rates.r3 + rates.r4)) * sx2 * s1 * s2
    denominator = (sx2 + s1 + s2) * ((1.0 - g) ** 2 * min(d3_prime, d1s) + g * s1)
    return numerator / denominator


def md_region_slice(source: GaussianSource, rates: RateTuple, d3: float) -> float:
    """Two-description slice with the first two stages pinned at their floors.

    Evaluates the general bound at ``d2 = var exp(-2 (r1+r2))`` and the given
    ``d3``, and asserts the specialized closed forms
    ``pi = (1 - exp(-2 r2))(1 - d3_hat/d1*)`` and
    ``delta = exp(-2 r2)(d3_hat/d1* - exp(-2 r3))`` against the general ones.
    """
    sx2 = source.variance
    d1s = sx2 * math.exp(-2.0 * rates.r1)
    d2s = sx2 * math.exp(-2.0 * (rates.r1 + rates.r2))
    result = dr_bound(source, rates, d1s, d2s, d3)
    d3h = min(d3, d1s)
    e2 = math.exp(-2.0 * rates.r2)
    pi_special = (1.0 - e2) * (1.0 - d3h / d1s)
    delta_special = e2 * (d3h / d1s - math.exp(-2.0 * rates.r3))
    scale = max(1.0, result.pi, result.delta)
    assert abs(pi_special - result.pi) <= SPECIALIZATION_RTOL * scale, \
        f"pi specialization mismatch: {pi_special} vs {result.pi}"
    assert abs(max(delta_special, 0.0) - result.delta) <= SPECIALIZATION_RTOL * scale, \
        f"delta specialization mismatch: {delta_special} vs {result.delta}"
    return result.d4_bound


@dataclass(frozen=True)
class SweepRow:
    d3: float
    d4_wz: float
    d4_md: float
    gap: float


def wz_md_sweep(source: GaussianSource, rates: RateTuple,
                points: int = 200) -> list[SweepRow]:
    """Sweep the second user's target across its feasible range.

    Rows run from the floor ``var exp(-2 (r1+r3))`` up to ``d1*`` inclusive;
    ``gap = d4_wz - d4_md`` is zero at both ends and positive inside.
    """
    if points < 2:
        raise ValueError(f"need at least 2 sweep points, got {points}")
    sx2 = source.variance
    lo = sx2 * math.exp(-2.0 * (rates.r1 + rates.r3))
    hi = sx2 * math.exp(-2.0 * rates.r1)
    rows = []
    for i in range(points):
        d3 = lo + (hi - lo) * i / (points - 1)
        wz = wz_region(source, rates, d3)
        md = md_region_slice(source, rates, d3)
        rows.append(SweepRow(d3, wz, md, wz - md))
    return rows


@dataclass(frozen=True)
class FixedChannelConfig:
    """Coupling strength of the late-stage rate to the first layer."""

    alpha: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha) and self.alpha >= 0.0):
            raise ValueError(f"alpha must be a nonnegative real, got {self.alpha}")


@dataclass(frozen=True)
class FixedChannelLoss:
    """Multiplicative penalty for keeping the first-layer channel frozen."""

    ratio: float
    d2_floor: float


def fixed_channel_loss(source: GaussianSource, r1: float, r3: float,
                       config: FixedChannelConfig) -> FixedChannelLoss:
    """Distortion penalty of a frozen first-layer channel.

    With the late-stage budget ``alpha r1``, an adaptive design reaches
    ``var exp(-2 (alpha r1 + r3))`` while the frozen channel cannot go below
    ``d2_floor = d1* (1 + exp(-2 (alpha r1 + r3)) - exp(-2 r3))``; the
    returned ratio of the two,

        ``exp(2 alpha r1) + exp(-2 r3) - exp(2 (alpha r1 - r3))``,

    is at least 1, equals ``1 + O(alpha)`` as ``alpha -> 0``, and grows
    without bound in ``r1`` for fixed positive ``alpha`` and ``r3``.
    """
    for name, value in (("r1", r1), ("r3", r3)):
        if not (math.isfinite(value) and value >= 0.0):
            raise ValueError(f"{name} must be a nonnegative rate, got {value}")
    a = config.alpha
    d1s = source.variance * math.exp(-2.0 * r1)
    d2_floor = d1s * (1.0 + math.exp(-2.0 * (a * r1 + r3)) - math.exp(-2.0 * r3))
    ratio = (math.exp(2.0 * a * r1) + math.exp(-2.0 * r3)
             - math.exp(2.0 * (a * r1 - r3)))
    return FixedChannelLoss(ratio, d2_floor)


@dataclass(frozen=True)
class MdcrSplit:
    """How the conditional-refinement rate divides onto the two branches."""

    beta: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")


@dataclass(frozen=True)
class MdcrComparison:
    d4_mdcr: float
    d4_md: float
    ratio: float


def mdcr_compare(source: GaussianSource, r2: float, r3: float, r4: float,
                 split: MdcrSplit, d2: float, d3: float) -> MdcrComparison:
    """Conditional refinement versus re-budgeted plain two-description coding.

    Both systems run at zero first-layer rate and identical total rate: the
    refinement system keeps ``(r2, r3)`` on the side branches and spends
    ``r4`` centrally, while the comparison system folds the same budget into
    the branches as ``(r2 + beta r4, r3 + (1-beta) r4)``.  The central-
    distortion bounds share their numerator, so the ratio isolates the
    penalty denominators; it is at least 1 and nondecreasing in ``r4``.
    Requires the re-budgeted system to be non-degenerate.
    """
    sx2 = source.variance
    for name, d in (("d2", d2), ("d3", d3)):
        if not 0.0 < d < sx2:
            raise InfeasibleDistortion(
                f"{name} must lie strictly between 0 and the source variance, got {d}"
            )
    rates_mdcr = RateTuple(0.0, r2, r3, r4)
    rates_md = RateTuple(0.0, r2 + split.beta * r4,
                         r3 + (1.0 - split.beta) * r4, 0.0)
    bound_md = dr_bound(source, rates_md, sx2, d2, d3)
    if bound_md.regime is Regime.DEGENERATE_PI_LESS_DELTA:
        raise OutOfRegime(
            "re-budgeted system is degenerate at these targets; the comparison "
            "premise fails"
        )
    bound_mdcr = dr_bound(source, rates_mdcr, sx2, d2, d3)
    return MdcrComparison(bound_mdcr.d4_bound, bound_md.d4_bound,
                          bound_mdcr.d4_bound / bound_md.d4_bound)


@dataclass(frozen=True)
class AsymptoticConfig:
    """Balanced high-rate scaling: side rates ``r'``, side targets
    ``b exp(-2 (1-eta) r')``, and conditional-refinement exponent ``eta1``."""

    r_prime: float
    b: float
    eta: float
    eta1: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.r_prime) and self.r_prime > 0.0):
            raise ValueError(f"r_prime must be positive, got {self.r_prime}")
        if not (math.isfinite(self.b) and self.b >= 1.0):
            raise ValueError(f"b must be at least 1, got {self.b}")
        if not 0.0 <= self.eta < 1.0:
            raise ValueError(f"eta must lie in [0, 1), got {self.eta}")
        if not 0.0 <= self.eta1 <= self.eta:
            raise ValueError(
                f"eta1 must lie in [0, eta={self.eta}], got {self.eta1}"
            )


@dataclass(frozen=True)
class HighRateAsymptotes:
    d4_asymptote_md: float
    d4_asymptote_mdcr: float
    product_bound: float


def high_rate_asymptote(config: AsymptoticConfig) -> HighRateAsymptotes:
    """Leading-order central distortion for balanced descriptions at rate r'.

    Unit source variance.  The plain system obeys
    ``exp(-2 r') / (2 (b + sqrt(b^2 - 1)))`` when the side targets stay at
    constant ratio (``eta = 0``) and ``exp(-2 (1+eta) r') / (4 b)`` when they
    shrink; the conditional-refinement system with exponent ``eta1`` keeps the
    sharper constant only when ``eta1 = eta``.  The product of the two side
    targets with the central one is bounded by ``exp(-4 r') / 4`` either way.
    """
    rp, b, eta, eta1 = config.r_prime, config.b, config.eta, config.eta1
    sharp = 2.0 * (b + math.sqrt(b * b - 1.0))
    if eta == 0.0:
        md = math.exp(-2.0 * rp) / sharp
    else:
        md = math.exp(-2.0 * (1.0 + eta) * rp) / (4.0 * b)
    if eta1 == eta:
        mdcr = math.exp(-2.0 * (1.0 + eta) * rp) / sharp
    else:
        mdcr = math.exp(-2.0 * (1.0 + eta) * rp) / (4.0 * b)
    product = math.exp(-4.0 * rp) / 4.0
    return HighRateAsymptotes(md, mdcr, product)


@dataclass(frozen=True)
class ConvergenceRow:
    r_prime: float
    exact: float
    asymptote: float
    ratio: float


def asymptote_convergence(config: AsymptoticConfig,
                          r_grid: list[float]) -> list[ConvergenceRow]:
    """Exact-to-asymptote ratio of the plain system's bound along a rate grid.

    Unit source variance, balanced descriptions, side targets
    ``b exp(-2 (1-eta) r')``.  Grid rates must be at least 1 nat and
    increasing; the ratio tends to 1 as ``r'`` grows.
    """
    if not r_grid:
        raise ValueError("rate grid is empty")
    previous = None
    for rp in r_grid:
        if rp < 1.0:
            raise ValueError(f"grid rates must be at least 1 nat, got {rp}")
        if previous is not None and rp <= previous:
            raise ValueError("grid rates must be strictly increasing")
        previous = rp
    source = GaussianSource(1.0)
    rows = []
    for rp in r_grid:
        side = config.b * math.exp(-2.0 * (1.0 - config.eta) * rp)
        rates = RateTuple(0.0, rp, rp, 0.0)
        exact = dr_bound(source, rates, 1.0, side, side).d4_bound
        asym = high_rate_asymptote(replace(config, r_prime=rp)).d4_asymptote_md
        rows.append(ConvergenceRow(rp, exact, asym, exact / asym))
    return rows
