"""Surprisal and Renyi entropy operations: reference values, aggregation to
words, and the effort identity."""

import math

import numpy as np
import numpy.testing as npt
import pytest

from entroread.errors import ConfigError, ContractError, DomainError, InfiniteSurprisalError
from entroread.infotheory import (
    DEFAULT_ALPHA_GRID,
    compute_word_infos,
    format_alpha,
    parse_alpha,
    preprocessing_effort_total,
    renyi_entropy,
    renyi_entropy_limit,
    summarize_positions,
    surprisal,
    word_entropy,
    word_surprisal,
)
from entroread.lm import SubwordPosition

REF_DIST = [0.5, 0.25, 0.25]


def full_position(logprobs, realized=0, text_id=0, word_index=0, subword_index=0):
    return SubwordPosition(
        text_id=text_id,
        word_index=word_index,
        subword_index=subword_index,
        realized_id=realized,
        logprobs=np.asarray(logprobs, dtype=np.float64),
    )


def summary_position(surprisal_bits, renyi_bits, text_id=0, word_index=0, subword_index=0):
    return SubwordPosition(
        text_id=text_id,
        word_index=word_index,
        subword_index=subword_index,
        surprisal_bits=surprisal_bits,
        renyi_bits=renyi_bits,
    )


def test_renyi_reference_values():
    assert abs(renyi_entropy(REF_DIST, 1.0) - 1.5) < 1e-12
    assert abs(renyi_entropy(REF_DIST, 0.5) - 1.5431066063272239) < 1e-12
    assert abs(renyi_entropy(REF_DIST, 2.0) - 1.415037499278844) < 1e-12
    assert abs(renyi_entropy(REF_DIST, 0.0) - 1.584962500721156) < 1e-12
    assert abs(renyi_entropy(REF_DIST, math.inf) - 1.0) < 1e-12


def test_renyi_uniform_and_degenerate():
    for alpha in (0.0, 0.5, 1.0, 2.0, math.inf):
        assert abs(renyi_entropy([0.25] * 4, alpha) - 2.0) < 1e-12
        assert abs(renyi_entropy([1.0, 0.0, 0.0], alpha)) < 1e-12


def test_renyi_rejects_bad_input():
    with pytest.raises(DomainError):
        renyi_entropy([0.7, 0.2], 1.0)  # sums to 0.9
    with pytest.raises(DomainError):
        renyi_entropy([1.2, -0.2], 1.0)
    with pytest.raises(DomainError):
        renyi_entropy(REF_DIST, -0.5)
    with pytest.raises(DomainError):
        renyi_entropy([], 1.0)


def test_direct_form_matches_limit_oracle():
    rng = np.random.default_rng(10)
    for _ in range(50):
        dist = rng.dirichlet(np.ones(int(rng.integers(2, 40))))
        for alpha in (0.25, 0.5, 2.0, 4.0):
            direct = renyi_entropy(dist, alpha)
            limit = renyi_entropy_limit(dist, alpha)
            assert abs(direct - limit) < 1e-6
        # At the Shannon point the limit form brackets the removable
        # singularity.
        assert abs(renyi_entropy(dist, 1.0) - renyi_entropy_limit(dist, 1.0)) < 1e-6


def test_surprisal_values():
    assert surprisal([0.25, 0.75], 0) == 2.0
    assert surprisal([1.0], 0) == 0.0
    assert abs(surprisal([0.1, 0.9], 0) - 3.321928094887362) < 1e-12


def test_surprisal_errors():
    with pytest.raises(InfiniteSurprisalError):
        surprisal([1.0, 0.0], 1)
    with pytest.raises(DomainError):
        surprisal([0.5, 0.5], 2)


def test_word_surprisal_sums_subwords():
    positions = [
        summary_position(1.5, {}, subword_index=0),
        summary_position(0.5, {}, subword_index=1),
    ]
    assert word_surprisal(positions) == 2.0
    assert word_surprisal([summary_position(3.1, {})]) == 3.1
    triple = [summary_position(2.0, {}, subword_index=i) for i in range(3)]
    assert word_surprisal(triple) == 6.0
    with pytest.raises(ContractError):
        word_surprisal([])


def test_word_entropy_full_and_summary_forms():
    pos = full_position(np.log(REF_DIST))
    assert abs(word_entropy(pos, 1.0) - 1.5) < 1e-12
    summ = summary_position(1.0, {1.0: 1.5, 0.5: 1.6})
    assert word_entropy(summ, 0.5) == 1.6
    with pytest.raises(ConfigError):
        word_entropy(summ, 2.0)


def test_word_entropy_requires_word_initial_position():
    pos = full_position(np.log(REF_DIST), subword_index=1)
    with pytest.raises(ContractError):
        word_entropy(pos, 1.0)


def test_first_subword_entropy_bounds_word_entropy():
    # Word lexicon {aa: 0.25, ab: 0.25, b: 0.5}: word-level Shannon entropy is
    # 1.5 bits, the first-subword distribution is [a: 0.5, b: 0.5].
    word_level = renyi_entropy([0.25, 0.25, 0.5], 1.0)
    first_subword = word_entropy(full_position(np.log([0.5, 0.5])), 1.0)
    assert abs(word_level - 1.5) < 1e-12
    assert abs(first_subword - 1.0) < 1e-12
    assert first_subword <= word_level


def test_min_entropy_never_exceeds_realized_surprisal():
    rng = np.random.default_rng(11)
    for _ in range(100):
        dist = rng.dirichlet(np.ones(12))
        outcome = int(rng.integers(12))
        assert renyi_entropy(dist, math.inf) <= surprisal(dist, outcome) + 1e-12


def test_effort_reference_values():
    assert abs(preprocessing_effort_total(REF_DIST, 2.0) - 1.0) < 1e-12
    assert abs(preprocessing_effort_total(REF_DIST, 10.0) - 1.0) < 1e-12
    assert abs(preprocessing_effort_total([1.0 / 7] * 7, math.e**2) - 1.0) < 1e-12


def test_effort_identity_random_pairs():
    rng = np.random.default_rng(12)
    for _ in range(100):
        dist = rng.dirichlet(np.ones(int(rng.integers(2, 100))))
        k = float(1.0 + rng.uniform(1e-3, 50.0))
        assert abs(preprocessing_effort_total(dist, k) - 1.0) < 1e-9


def test_effort_ignores_zero_probability_words():
    assert abs(preprocessing_effort_total([0.5, 0.5, 0.0], 3.0) - 1.0) < 1e-12


def test_effort_rejects_bad_scale():
    with pytest.raises(DomainError):
        preprocessing_effort_total(REF_DIST, 1.0)
    with pytest.raises(DomainError):
        preprocessing_effort_total(REF_DIST, 0.5)


def test_alpha_formatting():
    assert format_alpha(0.5) == "0.5"
    assert format_alpha(1.0) == "1"
    assert format_alpha(0.0) == "0"
    assert format_alpha(math.inf) == "inf"
    assert format_alpha(0.25) == "0.25"
    assert parse_alpha("inf") == math.inf
    assert parse_alpha("Infinity") == math.inf
    assert parse_alpha("0.75") == 0.75
    for alpha in DEFAULT_ALPHA_GRID:
        assert parse_alpha(format_alpha(alpha)) == alpha
    with pytest.raises(DomainError):
        parse_alpha("-1")
    with pytest.raises(DomainError):
        parse_alpha("nan")


def make_two_word_positions():
    # Text 0: word 0 has two subwords, word 1 has one; text 1: one word.
    lp_a = np.log([0.5, 0.25, 0.25])
    lp_b = np.log([0.125, 0.125, 0.75])
    return [
        full_position(lp_a, realized=0, text_id=0, word_index=0, subword_index=0),
        full_position(lp_b, realized=2, text_id=0, word_index=0, subword_index=1),
        full_position(lp_b, realized=0, text_id=0, word_index=1, subword_index=0),
        full_position(lp_a, realized=1, text_id=1, word_index=0, subword_index=0),
    ]


def test_compute_word_infos_aggregation():
    infos = compute_word_infos(make_two_word_positions(), (0.5, 1.0))
    assert set(infos) == {(0, 0), (0, 1), (1, 0)}
    # Word surprisal sums subword surprisals: -log2 0.5 + -log2 0.75.
    expected = 1.0 + -math.log2(0.75)
    assert abs(infos[(0, 0)].surprisal_bits - expected) < 1e-12
    assert abs(infos[(1, 0)].surprisal_bits - 2.0) < 1e-12
    # Entropy comes from the word-initial subword only.
    assert abs(infos[(0, 0)].entropy_bits[1.0] - 1.5) < 1e-12
    ent_b = renyi_entropy([0.125, 0.125, 0.75], 1.0)
    assert abs(infos[(0, 1)].entropy_bits[1.0] - ent_b) < 1e-12
    # Successor entropies point at the next word within the same text.
    assert infos[(0, 0)].successor_entropy_bits == infos[(0, 1)].entropy_bits
    assert infos[(0, 1)].successor_entropy_bits is None
    assert infos[(1, 0)].successor_entropy_bits is None


def test_compute_word_infos_zero_probability_realization():
    with np.errstate(divide="ignore"):
        lp = np.log([1.0, 0.0])
    infos = compute_word_infos([full_position(lp, realized=1)], (1.0,))
    assert math.isinf(infos[(0, 0)].surprisal_bits)


def test_compute_word_infos_rejects_gaps():
    positions = [
        full_position(np.log(REF_DIST), subword_index=0),
        full_position(np.log(REF_DIST), subword_index=2),
    ]
    with pytest.raises(ContractError):
        compute_word_infos(positions, (1.0,))


def test_compute_word_infos_summary_needs_all_orders():
    pos = summary_position(1.0, {1.0: 1.5})
    with pytest.raises(ConfigError):
        compute_word_infos([pos], (1.0, 0.5))


def test_summarize_positions_mixed_forms():
    full = full_position(np.log(REF_DIST), realized=1, text_id=3, word_index=4)
    summ = summary_position(2.5, {0.5: 1.25, 1.0: 1.0}, text_id=3, word_index=5)
    out = summarize_positions([full, summ], (0.5, 1.0))
    coords, h, renyi = out[0]
    assert coords == (3, 4, 0)
    assert abs(h - 2.0) < 1e-12
    assert abs(renyi[1.0] - 1.5) < 1e-12
    coords, h, renyi = out[1]
    assert coords == (3, 5, 0)
    assert h == 2.5
    assert renyi == {0.5: 1.25, 1.0: 1.0}
    with pytest.raises(ConfigError):
        summarize_positions([summ], (2.0,))


def test_summarize_positions_infinite_surprisal_passthrough():
    with np.errstate(divide="ignore"):
        lp = np.log([1.0, 0.0])
    out = summarize_positions([full_position(lp, realized=1)], (1.0,))
    assert math.isinf(out[0][1])
