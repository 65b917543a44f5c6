"""Predictor terms, design-matrix assembly, and experiment enumerations."""

import math

import numpy as np
import pytest

from entroread.corpus import WordObservation
from entroread.errors import ConfigError, ContractError, DomainError
from entroread.infotheory import WordInfo
from entroread.predictors import (
    EXPERIMENT_IDS,
    Term,
    budget_terms,
    build_matrix,
    build_pair_matrices,
    common_terms,
    experiment_pairs,
    surprisal_terms,
    term_value,
)


def test_term_names():
    assert Term("intercept").name == "intercept"
    assert Term("length", lag=2).name == "length_lag2"
    assert Term("unigram").name == "unigram_lag0"
    assert Term("surprisal", lag=3).name == "surprisal_lag3"
    assert Term("entropy", lag=0, alpha=0.5).name == "entropy_a0.5_lag0"
    assert Term("entropy", lag=1, alpha=math.inf).name == "entropy_ainf_lag1"
    assert Term("successor_entropy", alpha=1.0).name == "successor_entropy_a1_lag0"
    assert Term("delta_budget", lag=2, alpha=0.5).name == "delta_budget_a0.5_lag2"


def test_term_validation():
    with pytest.raises(ConfigError):
        Term("banana")
    with pytest.raises(ConfigError):
        Term("surprisal", lag=4)
    with pytest.raises(ConfigError):
        Term("entropy", lag=0)  # entropy order required
    with pytest.raises(ConfigError):
        Term("length", alpha=0.5)  # no entropy order on plain terms
    with pytest.raises(ConfigError):
        Term("delta_budget", lag=0, alpha=0.5)  # budgets start at lag 1
    with pytest.raises(ConfigError):
        Term("intercept", lag=1)
    with pytest.raises(ConfigError):
        Term("successor_entropy", lag=1, alpha=0.5)


def test_common_and_surprisal_term_lists():
    cmn = common_terms()
    assert [t.name for t in cmn] == [
        "length_lag0", "unigram_lag0",
        "length_lag1", "unigram_lag1",
        "length_lag2", "unigram_lag2",
        "length_lag3", "unigram_lag3",
    ]
    assert [t.name for t in surprisal_terms()] == [
        "surprisal_lag0", "surprisal_lag1", "surprisal_lag2", "surprisal_lag3",
    ]
    assert [t.lag for t in surprisal_terms(exclude_lag=2)] == [0, 1, 3]


def test_budget_values():
    assert budget_terms(3.0, 2.0) == {"delta": 1.0, "under": 1.0, "over": 0.0, "abs": 1.0}
    assert budget_terms(1.0, 2.5) == {"delta": -1.5, "under": 0.0, "over": 1.5, "abs": 1.5}
    assert budget_terms(4.2, 4.2) == {"delta": 0.0, "under": 0.0, "over": 0.0, "abs": 0.0}


def test_budget_identities():
    rng = np.random.default_rng(40)
    for _ in range(100):
        h, ent = rng.uniform(0, 20, size=2)
        vals = budget_terms(float(h), float(ent))
        assert vals["under"] * vals["over"] == 0.0
        assert vals["under"] + vals["over"] == vals["abs"]
        assert vals["delta"] == h - ent


def test_budget_rejects_bad_inputs():
    with pytest.raises(DomainError):
        budget_terms(math.inf, 1.0)
    with pytest.raises(DomainError):
        budget_terms(1.0, -0.5)


def make_corpus(n_words=10, text_id=0):
    text = []
    infos = {}
    for i in range(n_words):
        obs = WordObservation(text_id, i, "w" * (i % 4 + 1))
        obs.mean_rt_ms = 200.0 + i
        obs.skip_ratio = (i % 3) / 4.0
        obs.unigram_logprob = -float(i + 1)
        text.append(obs)
        infos[(text_id, i)] = WordInfo(
            surprisal_bits=float(i + 2),
            entropy_bits={0.5: float(i + 1), 1.0: float(i) + 0.5},
        )
    for i in range(n_words - 1):
        infos[(text_id, i)].successor_entropy_bits = infos[(text_id, i + 1)].entropy_bits
    return [text], infos


def test_term_value_lookups():
    (text,), infos = make_corpus()
    assert term_value(Term("intercept"), text, infos, 5) == 1.0
    assert term_value(Term("length", lag=0), text, infos, 5) == 2.0  # "ww"
    assert term_value(Term("unigram", lag=1), text, infos, 5) == -5.0
    assert term_value(Term("surprisal", lag=2), text, infos, 5) == 5.0
    assert term_value(Term("entropy", lag=0, alpha=0.5), text, infos, 5) == 6.0
    assert term_value(Term("successor_entropy", alpha=1.0), text, infos, 5) == 6.5
    assert term_value(Term("delta_budget", lag=1, alpha=0.5), text, infos, 5) == 1.0
    # Lags reaching before the text start are undefined, not zero.
    assert term_value(Term("surprisal", lag=3), text, infos, 2) is None
    # The last word has no successor.
    assert term_value(Term("successor_entropy", alpha=1.0), text, infos, 9) is None


def test_term_value_missing_alpha_is_config_error():
    (text,), infos = make_corpus()
    with pytest.raises(ConfigError, match="0.25"):
        term_value(Term("entropy", lag=0, alpha=0.25), text, infos, 5)


def test_build_matrix_row_and_column_counts():
    corpus, infos = make_corpus(10)
    terms = common_terms() + surprisal_terms()
    m = build_matrix(corpus, infos, terms, "rt")
    assert m.values.shape == (7, 13)  # intercept + 8 common + 4 surprisal
    assert m.terms[0].kind == "intercept"
    assert np.all(m.values[:, 0] == 1.0)
    assert m.provenance == tuple((0, i) for i in range(3, 10))
    assert m.dropped_rows == 0
    assert m.response_kind == "rt"
    assert list(m.response) == [203.0 + i for i in range(7)]


def test_build_matrix_drops_last_word_for_successor_terms():
    corpus, infos = make_corpus(10)
    terms = common_terms() + surprisal_terms() + [Term("successor_entropy", alpha=1.0)]
    m = build_matrix(corpus, infos, terms, "rt")
    assert m.values.shape[0] == 6
    assert m.provenance == tuple((0, i) for i in range(3, 9))


def test_build_matrix_empty_corpus_keeps_columns():
    corpus, infos = make_corpus(3)  # too short for any row
    m = build_matrix(corpus, infos, common_terms(), "rt")
    assert m.values.shape == (0, 9)
    assert m.dropped_rows == 0


def test_build_matrix_counts_dropped_rows():
    corpus, infos = make_corpus(10)
    infos[(0, 5)].surprisal_bits = math.inf
    corpus[0][7].mean_rt_ms = None
    m = build_matrix(corpus, infos, common_terms() + surprisal_terms(), "rt")
    # Infinite surprisal at word 5 kills rows 5..8 (lags); missing rt kills 7.
    assert m.dropped_rows == 4
    assert m.provenance == tuple((0, i) for i in (3, 4, 9))


def test_build_matrix_skip_response():
    corpus, infos = make_corpus(10)
    m = build_matrix(corpus, infos, common_terms(), "skip_ratio")
    assert list(m.response) == [corpus[0][i].skip_ratio for i in range(3, 10)]
    with pytest.raises(ConfigError):
        build_matrix(corpus, infos, common_terms(), "saccade")


def test_build_matrix_filter_must_cover_terms():
    corpus, infos = make_corpus(10)
    with pytest.raises(ContractError):
        build_matrix(corpus, infos, surprisal_terms(), "rt", filter_terms=common_terms())


def test_pair_matrices_share_provenance():
    corpus, infos = make_corpus(12)
    target = common_terms() + surprisal_terms() + [Term("successor_entropy", alpha=1.0)]
    baseline = common_terms() + surprisal_terms()
    tm, bm = build_pair_matrices(corpus, infos, target, baseline, "rt")
    assert tm.provenance == bm.provenance
    # The successor term in the pair union also trims the baseline's rows.
    assert tm.values.shape[0] == bm.values.shape[0] == 8
    assert tm.values.shape[1] == bm.values.shape[1] + 1


def test_matrix_tsv_serialization(tmp_path):
    corpus, infos = make_corpus(6)
    m = build_matrix(corpus, infos, surprisal_terms(), "rt")
    path = tmp_path / "m.tsv"
    m.to_tsv(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("#{")
    assert "surprisal_lag0" in lines[0] and '"response": "rt"' in lines[0]
    assert lines[1].split("\t")[:3] == ["text_id", "word_index", "response"]
    assert len(lines) == 2 + m.values.shape[0]


def test_exp1_pairs():
    pairs = experiment_pairs("exp1")
    assert [p.label for p in pairs] == [
        "surprisal_lag0", "surprisal_lag1", "surprisal_lag2", "surprisal_lag3",
    ]
    for lag, pair in enumerate(pairs):
        assert pair.response == "rt"
        assert len(pair.target) == 12 and len(pair.baseline) == 11
        dropped = set(pair.target) - set(pair.baseline)
        assert dropped == {Term("surprisal", lag=lag)}


def test_exp2_pairs():
    add = experiment_pairs("exp2-add", alpha=0.5)
    assert [p.label for p in add] == [f"entropy_lag{i}" for i in range(4)]
    for lag, pair in enumerate(add):
        assert set(pair.target) - set(pair.baseline) == {Term("entropy", lag=lag, alpha=0.5)}
        assert len(pair.target) == 13 and len(pair.baseline) == 12

    repl = experiment_pairs("exp2-replace", alpha=0.5)
    for lag, pair in enumerate(repl):
        assert Term("surprisal", lag=lag) not in pair.target
        assert Term("entropy", lag=lag, alpha=0.5) in pair.target
        assert len(pair.target) == len(pair.baseline) == 12
    with pytest.raises(ConfigError):
        experiment_pairs("exp2-add")


def test_exp3_is_the_half_order_alias():
    assert experiment_pairs("exp3-add") == experiment_pairs("exp2-add", alpha=0.5)
    assert experiment_pairs("exp3-replace") == experiment_pairs("exp2-replace", alpha=0.5)
    with pytest.raises(ConfigError):
        experiment_pairs("exp3-add", alpha=0.25)


def test_exp4_triangle():
    pairs = experiment_pairs("exp4", alpha=0.5)
    assert [p.label for p in pairs] == [
        "surprisal_vs_none", "entropy_vs_none", "both_vs_none",
        "entropy_vs_surprisal", "both_vs_surprisal", "both_vs_entropy",
    ]
    assert all(p.response == "skip_ratio" for p in pairs)
    base = set(common_terms() + surprisal_terms(exclude_lag=0))
    none_target = next(p for p in pairs if p.label == "surprisal_vs_none")
    assert set(none_target.baseline) == base
    both = next(p for p in pairs if p.label == "both_vs_entropy")
    assert set(both.target) - set(both.baseline) == {Term("surprisal", lag=0)}


def test_exp5_budget_grid():
    pairs = experiment_pairs("exp5", alpha=0.5)
    assert len(pairs) == 12
    assert [p.label for p in pairs][:4] == [
        "delta_budget_lag1", "delta_budget_lag2", "delta_budget_lag3", "under_budget_lag1",
    ]
    for pair in pairs:
        extra = set(pair.target) - set(pair.baseline)
        assert len(extra) == 1
        (term,) = extra
        assert term.kind.endswith("_budget") and term.lag >= 1 and term.alpha == 0.5
        assert Term("entropy", lag=0, alpha=0.5) in pair.baseline


def test_exp6_successor_structure():
    pairs = {p.label: p for p in experiment_pairs("exp6", alpha=0.5)}
    assert set(pairs) == {
        "entropy_vs_plain", "entropy_over_successor",
        "successor_vs_plain", "successor_over_entropy",
    }
    ent = Term("entropy", lag=0, alpha=0.5)
    succ = Term("successor_entropy", alpha=0.5)
    assert set(pairs["entropy_vs_plain"].target) - set(pairs["entropy_vs_plain"].baseline) == {ent}
    assert set(pairs["successor_over_entropy"].target) - set(
        pairs["successor_over_entropy"].baseline
    ) == {succ}
    assert succ in pairs["entropy_over_successor"].baseline


def test_unknown_experiment_id():
    with pytest.raises(ConfigError):
        experiment_pairs("exp9")
    assert "exp1" in EXPERIMENT_IDS and "exp6" in EXPERIMENT_IDS
