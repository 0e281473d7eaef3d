"""Small dense linear-Gaussian engine.

Everything here operates on explicit covariance matrices of at most six
jointly Gaussian variables: validation, conditional (MMSE) estimation via the
Schur complement, seeded Monte Carlo cross-checks, and assembly of the joint
covariance induced by a forward test channel.

The Monte Carlo path uses ``numpy.random.default_rng`` (the PCG64 generator),
so a fixed seed yields reproducible streams across platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidChannel, SingularObservation

if TYPE_CHECKING:  # pragma: no cover
    from .channel import TestChannel
    from .model import GaussianSource

#: Symmetry check tolerance, relative to the largest entry magnitude.
SYMMETRY_RTOL = 1e-12
#: Eigenvalue floor for positive semidefiniteness, relative to the trace.
PSD_RTOL = 1e-10
#: Invertibility threshold for observed sub-blocks, relative to their trace.
OBSERVATION_RTOL = 1e-12

# Variable order used by :func:`assemble_msr_covariance`.
IDX_X = 0        # the source
IDX_XPRIME = 1   # first-layer quantization residual
IDX_U1 = 2       # common-layer description
IDX_U2 = 3       # refinement description, user 1
IDX_U3 = 4       # refinement description, user 2
IDX_U4 = 5       # central refinement description


@dataclass(frozen=True)
class CovarianceMatrix:
    """Validated covariance of up to six jointly Gaussian variables."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.entries, dtype=float, copy=True)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionMismatch(f"covariance must be square, got shape {arr.shape}")
        n = arr.shape[0]
        if not 1 <= n <= 6:
            raise DimensionMismatch(f"dimension must be between 1 and 6, got {n}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("covariance entries must be finite")
        scale = float(np.max(np.abs(arr)))
        if scale > 0 and float(np.max(np.abs(arr - arr.T))) > SYMMETRY_RTOL * scale:
            raise ValueError("covariance matrix is not symmetric")
        arr = 0.5 * (arr + arr.T)
        trace = float(np.trace(arr))
        if trace < 0:
            raise ValueError("covariance trace is negative")
        eigs = np.linalg.eigvalsh(arr)
        if eigs.min() < -PSD_RTOL * max(trace, 1e-300):
            raise ValueError(
                f"covariance is not positive semidefinite "
                f"(min eigenvalue {eigs.min():.3e}, trace {trace:.3e})"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class MmseResult:
    """Linear MMSE estimator of one variable from a subset of the others."""

    coefficients: np.ndarray
    error_variance: float
    target_index: int
    observed_indices: tuple[int, ...] = field(default=())


def _check_indices(joint: CovarianceMatrix, target_index: int,
                   observed_indices: Sequence[int]) -> tuple[int, ...]:
    n = joint.dim
    if not 0 <= target_index < n:
        raise DimensionMismatch(f"target index {target_index} out of range for dim {n}")
    obs = tuple(int(i) for i in observed_indices)
    if len(set(obs)) != len(obs):
        raise DimensionMismatch(f"observed indices contain duplicates: {obs}")
    for i in obs:
        if not 0 <= i < n:
            raise DimensionMismatch(f"observed index {i} out of range for dim {n}")
    if target_index in obs:
        raise DimensionMismatch("target index may not be observed")
    return obs


def conditional_mmse(joint: CovarianceMatrix, target_index: int,
                     observed_indices: Sequence[int]) -> MmseResult:
    """MMSE estimate of one coordinate given a subset of the others.

    Returns the linear coefficients on the observed coordinates and the
    conditional error variance ``S_tt - S_to S_oo^{-1} S_ot`` (the Schur
    complement).  An empty observation set returns the prior variance.

    Raises :class:`SingularObservation` when the observed sub-block is not
    invertible (smallest eigenvalue at most ``1e-12`` times its trace).
    """
    obs = _check_indices(joint, target_index, observed_indices)
    sigma = joint.entries
    prior = float(sigma[target_index, target_index])
    if not obs:
        return MmseResult(np.zeros(0), prior, target_index, obs)
    oo = sigma[np.ix_(obs, obs)]
    ot = sigma[np.ix_(obs, [target_index])][:, 0]
    eigs = np.linalg.eigvalsh(oo)
    if eigs.min() <= OBSERVATION_RTOL * max(float(np.trace(oo)), 1e-300):
        raise SingularObservation(
            f"observed block {obs} is singular (min eigenvalue {eigs.min():.3e})"
        )
    coeffs = np.linalg.solve(oo, ot)
    err = prior - float(ot @ coeffs)
    # Clamp the unavoidable last-ulp noise; the true value lies in [0, prior].
    err = min(max(err, 0.0), prior)
    return MmseResult(coeffs, err, target_index, obs)


def conditional_covariance(joint: CovarianceMatrix,
                           target_indices: Sequence[int],
                           observed_indices: Sequence[int]) -> np.ndarray:
    """Covariance of a block of coordinates given another block.

    Mathematically the block Schur complement ``S_tt - S_to S_oo^{-1} S_ot``;
    with a single target this reduces to the error variance of
    :func:`conditional_mmse`.  Computed by eliminating one observed
    coordinate at a time (in the order given), so each subtraction's rounding
    stays relative to the already-conditioned scale -- the one-shot block
    solve loses most of its digits when the conditional variances span many
    decades.
    """
    targets = tuple(int(i) for i in target_indices)
    if not targets:
        raise DimensionMismatch("need at least one target index")
    for t in targets:
        obs = _check_indices(joint, t, observed_indices)
    sigma = joint.entries
    idx = targets + obs
    arr = sigma[np.ix_(idx, idx)].copy()
    nt = len(targets)
    if obs:
        ref = max(float(np.trace(arr[nt:, nt:])), 1e-300)
        for j in range(nt, len(idx)):
            pivot = arr[j, j]
            if pivot <= OBSERVATION_RTOL * ref:
                raise SingularObservation(
                    f"observed block {obs} is singular "
                    f"(pivot {pivot:.3e} at coordinate {idx[j]})"
                )
            col = arr[:, j].copy()
            # Zeroes row and column j as a side effect, removing it from all
            # later pivots.
            arr -= np.outer(col, col) / pivot
    cond = arr[:nt, :nt]
    return 0.5 * (cond + cond.T)


def central_distortion_extended(residual_variance: float,
                                channel: "TestChannel") -> float:
    """``var(X' | U2, U3, U4)`` by extended-precision elimination.

    Mirrors the (X', U2, U3, U4) block of :func:`assemble_msr_covariance`
    (an infinite noise variance is a zero-rate description and drops its
    coordinate) but carries the arithmetic in ``numpy.longdouble``.
    Conditioning down to a central distortion many orders of magnitude below
    ``var(X')`` amplifies entry rounding by the ratio of the two scales, and
    double-precision entries alone cap the achievable agreement with the
    closed form near ``eps * var(X') / d4``; the wider mantissa pushes that
    floor below 1e-11 across the supported rate range (on platforms where
    ``longdouble`` is plain double the floor simply stays at the double one).
    """
    ld = np.longdouble
    d1 = ld(residual_variance)
    sigmas = (channel.sigma2_sq, channel.sigma3_sq, channel.sigma4_sq)
    finite = [i for i, s in enumerate(sigmas) if not math.isinf(s)]
    n = 1 + len(finite)
    arr = np.zeros((n, n), dtype=ld)
    arr[0, 0] = d1
    pos = {}
    for row, i in enumerate(finite, start=1):
        pos[i] = row
        arr[0, row] = arr[row, 0] = d1
        arr[row, row] = d1 + ld(sigmas[i])
    if 0 in pos and 1 in pos:
        c23 = d1 + ld(channel.rho) * np.sqrt(ld(sigmas[0]) * ld(sigmas[1]))
        arr[pos[0], pos[1]] = arr[pos[1], pos[0]] = c23
    if 0 in pos and 2 in pos:
        arr[pos[0], pos[2]] = arr[pos[2], pos[0]] = d1
    if 1 in pos and 2 in pos:
        arr[pos[1], pos[2]] = arr[pos[2], pos[1]] = d1
    for j in range(1, n):
        pivot = arr[j, j]
        if not pivot > 0.0:
            raise SingularObservation(
                f"refinement description {j + 1} is fully determined by the "
                f"earlier ones (pivot {float(pivot):.3e})"
            )
        col = arr[:, j].copy()
        # Zeroes row and column j as a side effect, removing it from all
        # later pivots.
        arr -= np.outer(col, col) / pivot
    return float(arr[0, 0])


def mc_estimate_mse(joint: CovarianceMatrix, target_index: int,
                    observed_indices: Sequence[int], samples: int,
                    seed: int) -> tuple[float, float]:
    """Monte Carlo estimate of the conditional MSE, with its standard error.

    Draws ``samples`` vectors from N(0, joint) through an eigendecomposition
    factorization (eigenvalues clamped at zero), applies the analytic MMSE
    coefficients, and returns the empirical mean squared error together with
    the standard error of that mean.
    """
    if samples < 1000:
        raise ValueError(f"need at least 1000 samples for a stable error bar, got {samples}")
    est = conditional_mmse(joint, target_index, observed_indices)
    w, v = np.linalg.eigh(joint.entries)
    w = np.clip(w, 0.0, None)
    factor = v * np.sqrt(w)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((samples, joint.dim))
    draws = z @ factor.T
    if est.observed_indices:
        predicted = draws[:, list(est.observed_indices)] @ est.coefficients
    else:
        predicted = 0.0
    sq = (draws[:, target_index] - predicted) ** 2
    estimate = float(sq.mean())
    std_error = float(sq.std(ddof=1) / math.sqrt(samples))
    return estimate, std_error


def assemble_msr_covariance(source: "GaussianSource",
                            channel: "TestChannel") -> CovarianceMatrix:
    """Joint covariance of (X, X', U1, U2, U3, U4) under a forward channel.

    ``X' = X - E[X|U1]`` is the first-layer residual, ``U1 = X + N1`` and
    ``Ui = X' + Ni`` for i in {2, 3, 4}, with ``cov(N2, N3) = rho s2 s3`` and
    all other noise pairs independent.  An infinite noise variance encodes a
    zero-rate description; its row is replaced by an independent unit-variance
    pure-noise variable so the matrix stays 6x6 and every conditional MMSE is
    unaffected.
    """
    sx2 = source.variance
    s1, s2, s3, s4 = (channel.sigma1_sq, channel.sigma2_sq,
                      channel.sigma3_sq, channel.sigma4_sq)
    rho = channel.rho
    for name, s in (("sigma1_sq", s1), ("sigma2_sq", s2),
                    ("sigma3_sq", s3), ("sigma4_sq", s4)):
        if not (s > 0.0):  # admits math.inf
            raise InvalidChannel(f"{name} must be positive, got {s}")
    if not -1.0 <= rho <= 1.0:
        raise InvalidChannel(f"rho must lie in [-1, 1], got {rho}")

    d1 = sx2 if math.isinf(s1) else sx2 * s1 / (sx2 + s1)
    c23 = 0.0 if (math.isinf(s2) or math.isinf(s3)) else rho * math.sqrt(s2 * s3)

    m = np.zeros((6, 6))
    m[IDX_X, IDX_X] = sx2
    m[IDX_XPRIME, IDX_XPRIME] = d1
    m[IDX_X, IDX_XPRIME] = d1

    if math.isinf(s1):
        m[IDX_U1, IDX_U1] = 1.0
    else:
        m[IDX_U1, IDX_U1] = sx2 + s1
        m[IDX_X, IDX_U1] = sx2
        # cov(X', U1) = 0 by orthogonality of the residual.

    for idx, s in ((IDX_U2, s2), (IDX_U3, s3), (IDX_U4, s4)):
        if math.isinf(s):
            m[idx, idx] = 1.0
        else:
            m[idx, idx] = d1 + s
            m[IDX_X, idx] = d1
            m[IDX_XPRIME, idx] = d1

    def _finite(*vals: float) -> bool:
        return all(not math.isinf(v) for v in vals)

    if _finite(s2, s3):
        m[IDX_U2, IDX_U3] = d1 + c23
    if _finite(s2, s4):
        m[IDX_U2, IDX_U4] = d1
    if _finite(s3, s4):
        m[IDX_U3, IDX_U4] = d1

    m = m + np.triu(m, 1).T
    return CovarianceMatrix(m)
