"""Core domain types shared by every other module.

Conventions: rates are nonnegative and carried internally in nats per source
symbol; distortions are mean squared errors.  The first-layer distortion may
be the distinguished value :data:`UNCONSTRAINED`, which makes the
two-description reduction visible in the type rather than hidden in a
sentinel float.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

LN2 = math.log(2.0)

#: Relative tolerance used for feasibility comparisons against exponential
#: floors, absorbing rounding in exp/log round trips.
FEASIBILITY_RTOL = 1e-12


class Unconstrained(enum.Enum):
    """Singleton tag for a distortion component with no constraint."""

    UNCONSTRAINED = "unconstrained"

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return "UNCONSTRAINED"


UNCONSTRAINED = Unconstrained.UNCONSTRAINED


class RateUnit(enum.Enum):
    NATS = "nats"
    BITS = "bits"


class Regime(enum.Enum):
    """Which branch of a region evaluation produced the returned bound."""

    NON_DEGENERATE = "non-degenerate"
    DEGENERATE_PI_LESS_DELTA = "degenerate-pi-less-delta"
    RD_LOW = "rd-low"
    RD_SLACK = "rd-slack"
    RD_EXCESS = "rd-excess"


def _require_finite_number(name: str, value: float) -> None:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ValueError(f"{name} must be a real number, got {value!r}")
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class GaussianSource:
    """Memoryless Gaussian source, characterized by its variance."""

    variance: float

    def __post_init__(self) -> None:
        _require_finite_number("variance", self.variance)
        if self.variance <= 0.0:
            raise ValueError(f"variance must be positive, got {self.variance}")


@dataclass(frozen=True)
class RateTuple:
    """Rates of the four descriptions, in nats per source symbol."""

    r1: float
    r2: float
    r3: float
    r4: float

    def __post_init__(self) -> None:
        for name, value in zip(("r1", "r2", "r3", "r4"), self.as_tuple()):
            _require_finite_number(name, value)
            if value < 0.0:
                raise ValueError(f"{name} must be nonnegative, got {value}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.r1, self.r2, self.r3, self.r4)

    def total(self) -> float:
        return self.r1 + self.r2 + self.r3 + self.r4


@dataclass(frozen=True)
class DistortionTuple:
    """Distortion targets for the four decoders.

    ``d1`` may be :data:`UNCONSTRAINED`; the remaining components are
    nonnegative reals.  Zero is admitted because discrete expected
    distortions can be exactly zero; the Gaussian operations reject
    non-positive targets through their feasibility checks instead.
    """

    d1: float | Unconstrained
    d2: float
    d3: float
    d4: float

    def __post_init__(self) -> None:
        if self.d1 is not UNCONSTRAINED:
            _require_finite_number("d1", self.d1)
            if self.d1 < 0.0:
                raise ValueError(f"d1 must be nonnegative, got {self.d1}")
        for name, value in (("d2", self.d2), ("d3", self.d3), ("d4", self.d4)):
            _require_finite_number(name, value)
            if value < 0.0:
                raise ValueError(f"{name} must be nonnegative, got {value}")


def convert_rate(value: float, from_unit: RateUnit, to_unit: RateUnit) -> float:
    """Convert a rate between nats and bits; the factor is ln 2 exactly."""
    if from_unit is to_unit:
        return value
    if from_unit is RateUnit.BITS and to_unit is RateUnit.NATS:
        return value * LN2
    if from_unit is RateUnit.NATS and to_unit is RateUnit.BITS:
        return value / LN2
    raise ValueError(f"unsupported unit pair {from_unit!r} -> {to_unit!r}")


def _clears_floor(d: float, floor: float, rtol: float) -> bool:
    return d >= floor * (1.0 - rtol)


def feasible_individual(
    source: GaussianSource,
    rates: RateTuple,
    dist: DistortionTuple,
    *,
    rtol: float = FEASIBILITY_RTOL,
) -> bool:
    """True when each first-round decoder target clears its exponential floor.

    The three tests are ``d1 >= var*exp(-2 r1)``, ``d2 >= var*exp(-2 (r1+r2))``
    and ``d3 >= var*exp(-2 (r1+r3))``; an unconstrained ``d1`` passes its test
    vacuously, and ``d4`` is not consulted here.
    """
    sx2 = source.variance
    if dist.d1 is not UNCONSTRAINED:
        if not _clears_floor(dist.d1, sx2 * math.exp(-2.0 * rates.r1), rtol):
            return False
    if not _clears_floor(dist.d2, sx2 * math.exp(-2.0 * (rates.r1 + rates.r2)), rtol):
        return False
    if not _clears_floor(dist.d3, sx2 * math.exp(-2.0 * (rates.r1 + rates.r3)), rtol):
        return False
    return True
