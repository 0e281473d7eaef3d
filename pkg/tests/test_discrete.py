"""Unit tests for the finite-alphabet achievable region and time-sharing."""

from __future__ import annotations

import itertools
import json
import math

import numpy as np
import pytest

from gaussrd import (
    AlphabetMismatch,
    DecoderMaps,
    DimensionMismatch,
    InvalidPmf,
    JointPmf,
    eval_distortions,
    eval_region_bounds,
    load_configuration,
    random_pmf,
    timeshare,
)

from conftest import make_rng


# ---------------------------------------------------------------------------
# Entropy-combination oracle, implemented independently of the library.
# ---------------------------------------------------------------------------

def _entropy(axes_kept: tuple[int, ...], p: np.ndarray) -> float:
    """Joint entropy (nats) of the variables on the kept axes."""
    drop = tuple(i for i in range(5) if i not in axes_kept)
    marg = p.sum(axis=drop) if drop else p
    flat = marg.reshape(-1)
    flat = flat[flat > 0.0]
    return float(-np.sum(flat * np.log(flat)))


def _oracle_bounds(pmf: JointPmf) -> tuple[float, float, float, float, float]:
    """The five bounds written purely as sums and differences of entropies."""
    p = pmf.probabilities
    H = lambda *axes: _entropy(tuple(axes), p)  # noqa: E731
    b1 = H(0) + H(1) - H(0, 1)
    b12 = H(0) + H(1, 2) - H(0, 1, 2)
    b13 = H(0) + H(1, 3) - H(0, 1, 3)
    # b123 = I(X; U1 U2 U3) + I(U2; U3 | U1); the conditional term expands to
    # H(U1 U2) + H(U1 U3) - H(U1) - H(U1 U2 U3).
    b123 = H(0) + H(1, 2) + H(1, 3) - H(1) - H(0, 1, 2, 3)
    b1234 = (H(0) + H(1, 2, 3, 4) - H(0, 1, 2, 3, 4)
             + H(1, 2) + H(1, 3) - H(1) - H(1, 2, 3))
    return b1, b12, b13, b123, b1234


def _brute_force_distortions(pmf: JointPmf, dec: DecoderMaps):
    """Expected distortions by explicit enumeration of all letter tuples."""
    p = pmf.probabilities
    dm = dec.distortion_matrix
    totals = [0.0, 0.0, 0.0, 0.0]
    for idx in itertools.product(*(range(n) for n in pmf.alphabet_sizes)):
        prob = p[idx]
        if prob == 0.0:
            continue
        x, u1, u2, u3, u4 = idx
        totals[0] += prob * dm[x, dec.g1[u1]]
        totals[1] += prob * dm[x, dec.g2[u1, u2]]
        totals[2] += prob * dm[x, dec.g3[u1, u3]]
        totals[3] += prob * dm[x, dec.g4[u1, u2, u3, u4]]
    return tuple(totals)


# ---------------------------------------------------------------------------
# JointPmf validation and serialization
# ---------------------------------------------------------------------------

def test_pmf_rejects_malformed_tensors():
    with pytest.raises(InvalidPmf):
        JointPmf(np.full((2, 2, 2, 2), 1.0 / 16))  # only 4 axes
    with pytest.raises(InvalidPmf):
        JointPmf(np.full((9, 1, 1, 1, 1), 1.0 / 9))  # alphabet too large
    bad_sum = np.zeros((2, 1, 1, 1, 1))
    bad_sum[0] = 0.7
    with pytest.raises(InvalidPmf):
        JointPmf(bad_sum)
    negative = np.zeros((2, 1, 1, 1, 1))
    negative[0] = 1.2
    negative[1] = -0.2
    with pytest.raises(InvalidPmf):
        JointPmf(negative)


def test_pmf_dict_round_trip():
    rng = make_rng(301)
    pmf = random_pmf(rng, (2, 3, 2, 2, 2))
    clone = JointPmf.from_dict(pmf.to_dict())
    assert clone.alphabet_sizes == pmf.alphabet_sizes
    assert np.array_equal(clone.probabilities, pmf.probabilities)


def test_pmf_from_dict_validates_flat_length():
    with pytest.raises(DimensionMismatch):
        JointPmf.from_dict({"alphabet_sizes": [2, 2, 2, 2, 2],
                            "probabilities": [1.0] * 7})
    with pytest.raises(InvalidPmf):
        JointPmf.from_dict({"alphabet_sizes": [2, 2, 2, 2],
                            "probabilities": [1.0 / 16] * 16})


# ---------------------------------------------------------------------------
# Rate bounds
# ---------------------------------------------------------------------------

def test_bounds_vanish_for_independent_auxiliaries():
    # X independent of (U1..U4) that are independent among themselves.
    marginals = [np.array([0.5, 0.5]), np.array([0.25, 0.75]),
                 np.array([0.6, 0.4]), np.array([0.3, 0.7]),
                 np.array([0.9, 0.1])]
    joint = marginals[0]
    for m in marginals[1:]:
        joint = np.multiply.outer(joint, m)
    bounds = eval_region_bounds(JointPmf(joint))
    for value in (bounds.b1, bounds.b12, bounds.b13, bounds.b123, bounds.b1234):
        assert abs(value) <= 1e-14


def test_bounds_for_noiseless_copy_description():
    # U1 = X uniform binary, the rest constant: every bound is one bit.
    joint = np.zeros((2, 2, 1, 1, 1))
    joint[0, 0] = joint[1, 1] = 0.5
    bounds = eval_region_bounds(JointPmf(joint))
    for value in (bounds.b1, bounds.b12, bounds.b13, bounds.b123, bounds.b1234):
        assert value == pytest.approx(math.log(2.0), abs=1e-14)


def test_bounds_count_redundant_side_descriptions_twice():
    # U2 = U3 = X adds I(U2; U3 | U1) = 1 bit on top of I(X; everything).
    joint = np.zeros((2, 1, 2, 2, 1))
    joint[0, 0, 0, 0] = joint[1, 0, 1, 1] = 0.5
    bounds = eval_region_bounds(JointPmf(joint))
    assert bounds.b1 == pytest.approx(0.0, abs=1e-14)
    assert bounds.b12 == pytest.approx(math.log(2.0), abs=1e-14)
    assert bounds.b13 == pytest.approx(math.log(2.0), abs=1e-14)
    assert bounds.b123 == pytest.approx(2.0 * math.log(2.0), abs=1e-14)
    assert bounds.b1234 == pytest.approx(2.0 * math.log(2.0), abs=1e-14)


def test_bounds_match_entropy_combination_oracle():
    rng = make_rng(307)
    for trial in range(25):
        sizes = tuple(int(n) for n in rng.integers(1, 4, size=5))
        pmf = random_pmf(rng, sizes, concentration=0.7)
        bounds = eval_region_bounds(pmf)
        oracle = _oracle_bounds(pmf)
        for got, want in zip(
                (bounds.b1, bounds.b12, bounds.b13, bounds.b123, bounds.b1234),
                oracle):
            assert abs(got - want) <= 1e-12, f"trial {trial}: {got} vs {want}"


def test_bounds_obey_monotone_chain():
    rng = make_rng(311)
    for _ in range(25):
        pmf = random_pmf(rng, (2, 2, 2, 2, 2), concentration=0.5)
        b = eval_region_bounds(pmf)
        slack = 1e-12
        assert 0.0 <= b.b1 + slack
        assert b.b1 <= b.b12 + slack
        assert b.b1 <= b.b13 + slack
        assert b.b12 <= b.b123 + slack
        assert b.b13 <= b.b123 + slack
        assert b.b123 <= b.b1234 + slack


# ---------------------------------------------------------------------------
# Decoders and distortions
# ---------------------------------------------------------------------------

def _hamming_copy_configuration():
    """U1 = X uniform binary; identity decoders under Hamming distortion."""
    joint = np.zeros((2, 2, 1, 1, 1))
    joint[0, 0] = joint[1, 1] = 0.5
    pmf = JointPmf(joint)
    hamming = 1.0 - np.eye(2)
    dec = DecoderMaps(
        g1=np.array([0, 1]),
        g2=np.array([[0], [1]]),
        g3=np.array([[0], [1]]),
        g4=np.array([[[[0]]], [[[1]]]]),
        distortion_matrix=hamming,
    )
    return pmf, dec


def test_distortions_zero_for_perfect_copy():
    pmf, dec = _hamming_copy_configuration()
    assert eval_distortions(pmf, dec) == (0.0, 0.0, 0.0, 0.0)


def test_distortions_half_for_blind_decoder():
    # Constant decoders guess letter 0; uniform X gives Hamming loss 1/2.
    pmf, dec = _hamming_copy_configuration()
    blind = DecoderMaps(
        g1=np.zeros(2, dtype=int), g2=np.zeros((2, 1), dtype=int),
        g3=np.zeros((2, 1), dtype=int), g4=np.zeros((2, 1, 1, 1), dtype=int),
        distortion_matrix=dec.distortion_matrix,
    )
    assert eval_distortions(pmf, blind) == (0.5, 0.5, 0.5, 0.5)


def test_distortions_match_brute_force_oracle():
    rng = make_rng(313)
    for _ in range(10):
        sizes = (3, 2, 2, 2, 2)
        pmf = random_pmf(rng, sizes, concentration=0.8)
        n_hat = 3
        dec = DecoderMaps(
            g1=rng.integers(0, n_hat, size=(2,)),
            g2=rng.integers(0, n_hat, size=(2, 2)),
            g3=rng.integers(0, n_hat, size=(2, 2)),
            g4=rng.integers(0, n_hat, size=(2, 2, 2, 2)),
            distortion_matrix=rng.random((3, n_hat)),
        )
        got = eval_distortions(pmf, dec)
        want = _brute_force_distortions(pmf, dec)
        for g, w in zip(got, want):
            assert abs(g - w) <= 1e-12


def test_decoder_shape_and_range_validation():
    pmf, dec = _hamming_copy_configuration()
    wrong_shape = DecoderMaps(
        g1=np.array([0, 1, 0]), g2=dec.g2, g3=dec.g3, g4=dec.g4,
        distortion_matrix=dec.distortion_matrix,
    )
    with pytest.raises(AlphabetMismatch):
        wrong_shape.check_shapes(pmf)
    with pytest.raises(DimensionMismatch):
        DecoderMaps(
            g1=np.array([0, 5]),  # 5 is not a reconstruction letter
            g2=dec.g2, g3=dec.g3, g4=dec.g4,
            distortion_matrix=dec.distortion_matrix,
        )
    with pytest.raises(ValueError):
        DecoderMaps(
            g1=dec.g1, g2=dec.g2, g3=dec.g3, g4=dec.g4,
            distortion_matrix=np.array([[0.0, -1.0], [1.0, 0.0]]),
        )


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------

def test_load_configuration_round_trip_with_decoders():
    pmf, dec = _hamming_copy_configuration()
    payload = pmf.to_dict()
    payload["decoders"] = {
        "g1": dec.g1.tolist(), "g2": dec.g2.tolist(),
        "g3": dec.g3.tolist(), "g4": dec.g4.tolist(),
    }
    payload["distortion_matrix"] = dec.distortion_matrix.tolist()
    loaded_pmf, loaded_dec = load_configuration(json.dumps(payload))
    assert np.array_equal(loaded_pmf.probabilities, pmf.probabilities)
    assert loaded_dec is not None
    assert eval_distortions(loaded_pmf, loaded_dec) == (0.0, 0.0, 0.0, 0.0)


def test_load_configuration_without_decoders():
    pmf, _ = _hamming_copy_configuration()
    loaded_pmf, loaded_dec = load_configuration(json.dumps(pmf.to_dict()))
    assert loaded_dec is None
    assert np.array_equal(loaded_pmf.probabilities, pmf.probabilities)


def test_load_configuration_rejects_decoders_without_matrix():
    pmf, dec = _hamming_copy_configuration()
    payload = pmf.to_dict()
    payload["decoders"] = {
        "g1": dec.g1.tolist(), "g2": dec.g2.tolist(),
        "g3": dec.g3.tolist(), "g4": dec.g4.tolist(),
    }
    with pytest.raises(InvalidPmf):
        load_configuration(json.dumps(payload))


# ---------------------------------------------------------------------------
# Time-sharing
# ---------------------------------------------------------------------------

def _timeshare_pair(rng):
    x_marginal = rng.dirichlet(np.ones(2))
    x_marginal = x_marginal / x_marginal.sum()
    pmf_a = random_pmf(rng, (2, 2, 2, 2, 2), x_marginal=x_marginal)
    pmf_b = random_pmf(rng, (2, 2, 2, 2, 2), x_marginal=x_marginal)
    return pmf_a, pmf_b


def test_timeshare_endpoints_reproduce_inputs():
    rng = make_rng(317)
    pmf_a, pmf_b = _timeshare_pair(rng)
    for lam, reference in ((1.0, pmf_a), (0.0, pmf_b)):
        mixed = timeshare(pmf_a, pmf_b, lam)
        got = eval_region_bounds(mixed)
        want = eval_region_bounds(reference)
        for g, w in zip((got.b1, got.b12, got.b13, got.b123, got.b1234),
                        (want.b1, want.b12, want.b13, want.b123, want.b1234)):
            assert abs(g - w) <= 1e-12


def test_timeshare_bounds_affine_with_shared_source_marginal():
    rng = make_rng(331)
    pmf_a, pmf_b = _timeshare_pair(rng)
    at_a = eval_region_bounds(pmf_a)
    at_b = eval_region_bounds(pmf_b)
    ends_a = (at_a.b1, at_a.b12, at_a.b13, at_a.b123, at_a.b1234)
    ends_b = (at_b.b1, at_b.b12, at_b.b13, at_b.b123, at_b.b1234)
    for lam in (0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0):
        got = eval_region_bounds(timeshare(pmf_a, pmf_b, lam))
        for g, ea, eb in zip((got.b1, got.b12, got.b13, got.b123, got.b1234),
                             ends_a, ends_b):
            assert abs(g - (lam * ea + (1.0 - lam) * eb)) <= 1e-12


def test_timeshare_mixture_weights_are_exact():
    rng = make_rng(337)
    pmf_a, pmf_b = _timeshare_pair(rng)
    lam = 0.3
    mixed = timeshare(pmf_a, pmf_b, lam)
    assert mixed.alphabet_sizes == (2, 4, 4, 4, 4)
    block_a = mixed.probabilities[:, :2, :2, :2, :2]
    block_b = mixed.probabilities[:, 2:, 2:, 2:, 2:]
    assert np.allclose(block_a, lam * pmf_a.probabilities, atol=1e-15)
    assert np.allclose(block_b, (1.0 - lam) * pmf_b.probabilities, atol=1e-15)
    assert mixed.probabilities.sum() == pytest.approx(1.0, abs=1e-12)


def test_timeshare_validates_inputs():
    rng = make_rng(347)
    pmf_a, pmf_b = _timeshare_pair(rng)
    with pytest.raises(ValueError):
        timeshare(pmf_a, pmf_b, 1.5)
    mismatched = random_pmf(rng, (3, 2, 2, 2, 2))
    with pytest.raises(AlphabetMismatch):
        timeshare(pmf_a, mismatched, 0.5)
    big = random_pmf(rng, (2, 5, 2, 2, 2))
    with pytest.raises(InvalidPmf):
        timeshare(big, big, 0.5)


# ---------------------------------------------------------------------------
# Random configuration generator
# ---------------------------------------------------------------------------

def test_random_pmf_exact_x_marginal():
    rng = make_rng(349)
    x_marginal = np.array([0.2, 0.3, 0.5])
    pmf = random_pmf(rng, (3, 2, 2, 2, 2), x_marginal=x_marginal)
    got = pmf.probabilities.sum(axis=(1, 2, 3, 4))
    assert np.allclose(got, x_marginal, atol=1e-15)


def test_random_pmf_is_seed_deterministic():
    first = random_pmf(make_rng(353), (2, 2, 2, 2, 2))
    second = random_pmf(make_rng(353), (2, 2, 2, 2, 2))
    assert np.array_equal(first.probabilities, second.probabilities)


def test_random_pmf_validates_sizes():
    rng = make_rng(359)
    with pytest.raises(InvalidPmf):
        random_pmf(rng, (2, 2, 2, 2))
    with pytest.raises(DimensionMismatch):
        random_pmf(rng, (3, 2, 2, 2, 2), x_marginal=[0.5, 0.5])
