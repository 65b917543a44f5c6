"""Predictor terms and design-matrix assembly.

A Term names one regressor column (quantity kind, spillover lag, entropy
order); experiment definitions enumerate the target/baseline term lists each
comparison needs, and build_pair_matrices realizes both over an identical row
set so held-out likelihoods stay paired.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ContractError, DomainError
from .infotheory import format_alpha

MAX_LAG = 3

TERM_KINDS = (
    "intercept",
    "length",
    "unigram",
    "surprisal",
    "entropy",
    "successor_entropy",
    "delta_budget",
    "under_budget",
    "over_budget",
    "abs_budget",
)
BUDGET_KINDS = ("delta_budget", "under_budget", "over_budget", "abs_budget")
ALPHA_KINDS = ("entropy", "successor_entropy") + BUDGET_KINDS


@dataclass(frozen=True)
class Term:
    kind: str
    lag: int = 0
    alpha: float | None = None

    def __post_init__(self):
        if self.kind not in TERM_KINDS:
            raise ConfigError(f"unknown term kind {self.kind!r}")
        if not 0 <= self.lag <= MAX_LAG:
            raise ConfigError(f"lag must be in 0..{MAX_LAG}, got {self.lag}")
        if self.kind in ALPHA_KINDS:
            if self.alpha is None or self.alpha < 0:
                raise ConfigError(f"{self.kind} term needs an entropy order >= 0")
        elif self.alpha is not None:
            raise ConfigError(f"{self.kind} term takes no entropy order")
        if self.kind in BUDGET_KINDS and self.lag < 1:
            raise ConfigError("budgeting terms are defined for lags >= 1")
        if self.kind in ("intercept", "successor_entropy") and self.lag != 0:
            raise ConfigError(f"{self.kind} term has lag 0 only")

    @property
    def name(self):
        if self.kind == "intercept":
            return "intercept"
        parts = [self.kind]
        if self.alpha is not None:
            parts.append(f"a{format_alpha(self.alpha)}")
        parts.append(f"lag{self.lag}")
        return "_".join(parts)


def common_terms():
    """Length and unigram log-probability at lags 0..3."""
    return [Term(kind, lag=lag) for lag in range(MAX_LAG + 1) for kind in ("length", "unigram")]


def surprisal_terms(exclude_lag=None):
    """Surprisal at lags 0..3, optionally with one lag removed."""
    return [Term("surprisal", lag=lag) for lag in range(MAX_LAG + 1) if lag != exclude_lag]


def budget_terms(surprisal_bits, entropy_bits):
    """The four budgeting quantities from one (surprisal, entropy) pair."""
    for v, what in ((surprisal_bits, "surprisal"), (entropy_bits, "entropy")):
        if not math.isfinite(v) or v < 0:
            raise DomainError(f"budgeting needs finite non-negative {what}, got {v}")
    delta = surprisal_bits - entropy_bits
    return {
        "delta": delta,
        "under": max(0.0, delta),
        "over": max(0.0, -delta),
        "abs": abs(delta),
    }


@dataclass
class FeatureMatrix:
    terms: tuple
    values: np.ndarray
    response: np.ndarray
    provenance: tuple
    response_kind: str
    dropped_rows: int

    def to_tsv(self, path):
        """TSV with a JSON first line naming the columns."""
        meta = {
            "terms": [t.name for t in self.terms],
            "response": self.response_kind,
            "dropped_rows": self.dropped_rows,
        }
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("#" + json.dumps(meta, sort_keys=True) + "\n")
            fh.write(
                "\t".join(["text_id", "word_index", "response"] + [t.name for t in self.terms])
                + "\n"
            )
            for i, (text_id, word_index) in enumerate(self.provenance):
                row = [str(text_id), str(word_index), repr(float(self.response[i]))]
                row += [repr(float(v)) for v in self.values[i]]
                fh.write("\t".join(row) + "\n")


def term_value(term, text, infos, t):
    """Value of one term for word position t of a text, or None if undefined."""
    if term.kind == "intercept":
        return 1.0
    if term.lag > t:
        return None
    obs = text[t - term.lag]
    if term.kind == "length":
        return float(obs.length_chars)
    if term.kind == "unigram":
        if obs.unigram_logprob is None:
            raise ContractError(f"unigram log-probability missing for {obs.surface!r}")
        return float(obs.unigram_logprob)
    info = infos.get((obs.text_id, obs.word_index))
    if info is None:
        return None
    if term.kind == "surprisal":
        return info.surprisal_bits
    if term.kind == "entropy":
        return _entropy_value(info.entropy_bits, term.alpha)
    if term.kind == "successor_entropy":
        if info.successor_entropy_bits is None:
            return None
        return _entropy_value(info.successor_entropy_bits, term.alpha)
    h = info.surprisal_bits
    ent = _entropy_value(info.entropy_bits, term.alpha)
    if not (math.isfinite(h) and math.isfinite(ent)):
        return math.inf
    key = term.kind.removesuffix("_budget")
    return budget_terms(h, ent)[key]


def _entropy_value(table, alpha):
    try:
        return table[alpha]
    except KeyError:
        raise ConfigError(
            f"entropy order {format_alpha(alpha)} was not computed; "
            f"available: {sorted(table)}"
        ) from None


def _with_intercept(terms):
    terms = list(terms)
    if not terms:
        raise ConfigError("empty term list")
    if not any(t.kind == "intercept" for t in terms):
        terms = [Term("intercept")] + terms
    return tuple(terms)


def build_matrix(corpus, word_infos, terms, response, filter_terms=None):
    """Realize a term list into a design matrix over corpus words.

    The first 3 words of each text are excluded (spillover lags undefined),
    the last word is excluded when ``filter_terms`` (defaults to ``terms``)
    contains any successor term, and rows where any filter term or the
    response is missing or non-finite are dropped and counted.

    ``response`` is 'rt' (mean reading time, ms) or 'skip_ratio'.
    """
    if response not in ("rt", "skip_ratio"):
        raise ConfigError(f"unknown response {response!r}")
    terms = _with_intercept(terms)
    filter_terms = terms if filter_terms is None else _with_intercept(filter_terms)
    if not set(terms) <= set(filter_terms):
        raise ContractError("filter terms must cover the realized terms")
    drop_last = any(t.kind == "successor_entropy" for t in filter_terms)

    rows, responses, provenance = [], [], []
    dropped = 0
    for text in corpus:
        last = len(text) - 1 if drop_last else len(text)
        for t in range(MAX_LAG, last):
            obs = text[t]
            y = obs.mean_rt_ms if response == "rt" else obs.skip_ratio
            vals = {}
            ok = y is not None and math.isfinite(y)
            if ok:
                for term in filter_terms:
                    v = term_value(term, text, word_infos, t)
                    if v is None or not math.isfinite(v):
                        ok = False
                        break
                    vals[term] = v
            if not ok:
                dropped += 1
                continue
            rows.append([vals[term] for term in terms])
            responses.append(float(y))
            provenance.append((obs.text_id, obs.word_index))

    values = np.array(rows, dtype=np.float64).reshape(len(rows), len(terms))
    return FeatureMatrix(
        terms=terms,
        values=values,
        response=np.array(responses, dtype=np.float64),
        provenance=tuple(provenance),
        response_kind=response,
        dropped_rows=dropped,
    )


def build_pair_matrices(corpus, word_infos, target_terms, baseline_terms, response):
    """Target and baseline matrices over an identical row set.

    Rows are filtered by the union of both term lists, so the two matrices
    share provenance exactly.
    """
    union = list(dict.fromkeys(list(target_terms) + list(baseline_terms)))
    target = build_matrix(corpus, word_infos, target_terms, response, filter_terms=union)
    baseline = build_matrix(corpus, word_infos, baseline_terms, response, filter_terms=union)
    if target.provenance != baseline.provenance:
        raise ContractError("pair matrices disagree on row provenance")
    return target, baseline


@dataclass(frozen=True)
class ExperimentPair:
    label: str
    target: tuple
    baseline: tuple
    response: str


def _pair(label, target, baseline, response="rt"):
    return ExperimentPair(label, tuple(target), tuple(baseline), response)


def experiment_pairs(experiment_id, alpha=None):
    """Enumerate (target, baseline) term lists for one experiment.

    Recognized ids: exp1; exp2-add / exp2-replace (entropy order required);
    exp3-add / exp3-replace (order fixed at 1/2); exp4 (logistic skip
    comparisons); exp5 (budgeting); exp6 (successor entropy).
    """
    cmn = common_terms()
    surp = surprisal_terms()
    base = cmn + surp

    if experiment_id == "exp1":
        return [
            _pair(f"surprisal_lag{lag}", base, cmn + surprisal_terms(exclude_lag=lag))
            for lag in range(MAX_LAG + 1)
        ]

    if experiment_id.startswith("exp3"):
        suffix = experiment_id[len("exp3") :]
        if alpha is not None and alpha != 0.5:
            raise ConfigError("exp3 is the order-1/2 analysis; leave the order unset")
        return experiment_pairs("exp2" + suffix, alpha=0.5)

    if experiment_id in ("exp2-add", "exp2-replace"):
        a = _require_alpha(alpha, experiment_id)
        pairs = []
        for lag in range(MAX_LAG + 1):
            ent = Term("entropy", lag=lag, alpha=a)
            if experiment_id == "exp2-add":
                target = base + [ent]
            else:
                target = cmn + surprisal_terms(exclude_lag=lag) + [ent]
            pairs.append(_pair(f"entropy_lag{lag}", target, base))
        return pairs

    if experiment_id == "exp4":
        a = _require_alpha(alpha, experiment_id)
        x0 = cmn + surprisal_terms(exclude_lag=0)
        h = [Term("surprisal", lag=0)]
        ent = [Term("entropy", lag=0, alpha=a)]
        variants = {"none": [], "surprisal": h, "entropy": ent, "both": h + ent}
        order = ("none", "surprisal", "entropy", "both")
        pairs = []
        for i, base_name in enumerate(order):
            for target_name in order[i + 1 :]:
                pairs.append(
                    _pair(
                        f"{target_name}_vs_{base_name}",
                        x0 + variants[target_name],
                        x0 + variants[base_name],
                        response="skip_ratio",
                    )
                )
        return pairs

    if experiment_id == "exp5":
        a = _require_alpha(alpha, experiment_id)
        budget_base = base + [Term("entropy", lag=0, alpha=a)]
        return [
            _pair(f"{kind}_lag{lag}", budget_base + [Term(kind, lag=lag, alpha=a)], budget_base)
            for kind in BUDGET_KINDS
            for lag in range(1, MAX_LAG + 1)
        ]

    if experiment_id == "exp6":
        a = _require_alpha(alpha, experiment_id)
        ent = Term("entropy", lag=0, alpha=a)
        succ = Term("successor_entropy", alpha=a)
        return [
            _pair("entropy_vs_plain", base + [ent], base),
            _pair("entropy_over_successor", base + [succ, ent], base + [succ]),
            _pair("successor_vs_plain", base + [succ], base),
            _pair("successor_over_entropy", base + [ent, succ], base + [ent]),
        ]

    raise ConfigError(f"unknown experiment id {experiment_id!r}")


def _require_alpha(alpha, experiment_id):
    if alpha is None:
        raise ConfigError(f"{experiment_id} needs an entropy order")
    return float(alpha)


EXPERIMENT_IDS = (
    "exp1",
    "exp2-add",
    "exp2-replace",
    "exp3-add",
    "exp3-replace",
    "exp4",
    "exp5",
    "exp6",
)
