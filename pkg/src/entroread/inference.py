"""Model-comparison statistics.

Delta held-out log-likelihood between a target and a baseline regressor,
paired sign-flip permutation tests on the per-item differences,
Benjamini-Hochberg adjustment across a table of comparisons, and Spearman
rank correlation.
"""

from dataclasses import dataclass

import numpy as np
from numpy.random import PCG64, Generator, SeedSequence
from scipy.stats import rankdata

from .errors import ContractError, DomainError

DEFAULT_PERMUTATIONS = 10_000
# Sample sizes up to this use exhaustive sign enumeration.
EXHAUSTIVE_LIMIT = 20
_CHUNK = 1_000

STAR_THRESHOLDS = ((0.001, "***"), (0.01, "**"), (0.05, "*"))


def paired_diffs(target, baseline):
    """Per-item held-out llh differences, checking row pairing.

    Inputs are FitResults (provenance compared when both carry it) or plain
    vectors of equal length.
    """
    t = np.asarray(getattr(target, "per_item_heldout_llh", target), dtype=np.float64)
    b = np.asarray(getattr(baseline, "per_item_heldout_llh", baseline), dtype=np.float64)
    if t.shape != b.shape:
        raise ContractError(f"unpaired comparison: {t.shape} vs {b.shape} items")
    prov_t = getattr(target, "provenance", None)
    prov_b = getattr(baseline, "provenance", None)
    if prov_t is not None and prov_b is not None and prov_t != prov_b:
        raise ContractError("unpaired comparison: row provenance differs")
    return t - b


def delta_llh(target, baseline):
    """Mean per-item difference in held-out llh (nats), target minus baseline."""
    return float(np.mean(paired_diffs(target, baseline)))


def _exhaustive_p(diffs):
    n = diffs.shape[0]
    observed = abs(float(np.mean(diffs)))
    total = 1 << n
    count = 0
    bits = np.arange(n, dtype=np.int64)
    for start in range(0, total, 65536):
        patterns = np.arange(start, min(start + 65536, total), dtype=np.int64)
        signs = 1.0 - 2.0 * ((patterns[:, None] >> bits) & 1)
        stats = np.abs(signs @ diffs) / n
        count += int(np.sum(stats >= observed))
    return count / total


def _montecarlo_p(diffs, b, seed):
    n = diffs.shape[0]
    observed = abs(float(np.mean(diffs)))
    count = 0
    done = 0
    chunk_index = 0
    while done < b:
        take = min(_CHUNK, b - done)
        rng = Generator(PCG64(SeedSequence((seed, chunk_index))))
        signs = rng.integers(0, 2, size=(take, n)) * 2.0 - 1.0
        stats = np.abs(signs @ diffs) / n
        count += int(np.sum(stats >= observed))
        done += take
        chunk_index += 1
    return (1 + count) / (1 + b)


def paired_permutation_test(diffs, permutations=DEFAULT_PERMUTATIONS, seed=0):
    """Two-sided sign-flip test on the mean difference.

    Exhaustive over all 2^N sign assignments for N <= 20 (exact count /
    2^N); Monte Carlo with add-one smoothing otherwise.  Resamples are drawn
    in fixed-size chunks with per-chunk RNG streams, so the p-value depends
    only on (diffs, permutations, seed).
    """
    diffs = np.asarray(diffs, dtype=np.float64)
    if diffs.ndim != 1 or diffs.shape[0] < 2:
        raise DomainError("need at least 2 paired differences")
    if not np.all(np.isfinite(diffs)):
        raise DomainError("non-finite differences")
    if np.all(diffs == 0.0):
        return 1.0
    if diffs.shape[0] <= EXHAUSTIVE_LIMIT:
        return _exhaustive_p(diffs)
    if permutations < 1:
        raise DomainError("need at least 1 resample")
    return _montecarlo_p(diffs, permutations, seed)


def bh_adjust(p_values, q=0.05):
    """Benjamini-Hochberg step-up: adjusted p-values and the rejection set.

    Adjusted p_(k) = min over j >= k of (m p_(j) / j), clipped at 1;
    hypotheses with adjusted p <= q are rejected.
    """
    p = np.asarray(p_values, dtype=np.float64)
    if p.size == 0:
        return np.array([]), np.array([], dtype=bool)
    if np.any(p <= 0) or np.any(p > 1):
        raise DomainError("p-values must lie in (0, 1]")
    m = p.size
    order = np.argsort(p, kind="stable")
    scaled = p[order] * m / np.arange(1, m + 1)
    adjusted_sorted = np.minimum(np.minimum.accumulate(scaled[::-1])[::-1], 1.0)
    adjusted = np.empty(m)
    adjusted[order] = adjusted_sorted
    return adjusted, adjusted <= q


def spearman(x, y):
    """Spearman rank correlation: Pearson on average-ranked values."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.shape[0] < 2:
        raise DomainError("need two equal-length vectors of size >= 2")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise DomainError("correlation undefined for a constant vector")
    rx = rankdata(x)
    ry = rankdata(y)
    return float(np.corrcoef(rx, ry)[0, 1])


def stars_for(p_adjusted):
    for threshold, stars in STAR_THRESHOLDS:
        if p_adjusted < threshold:
            return stars
    return ""


def classify(delta, p_adjusted, q=0.05):
    """Color tag: green for significantly positive delta, red for
    significantly negative, ns otherwise."""
    if p_adjusted <= q and delta > 0:
        return "green"
    if p_adjusted <= q and delta < 0:
        return "red"
    return "ns"


@dataclass
class ComparisonReport:
    """One target-vs-baseline cell of a results table."""

    label: str
    target_spec: str
    baseline_spec: str
    n_items: int
    delta_llh: float
    p_value: float
    p_adjusted: float | None = None
    significance: str = "ns"
    stars: str = ""

    def finalize(self, p_adjusted, q=0.05):
        self.p_adjusted = float(p_adjusted)
        self.significance = classify(self.delta_llh, self.p_adjusted, q=q)
        self.stars = stars_for(self.p_adjusted)
        return self


def compare(label, target_fit, baseline_fit, permutations=DEFAULT_PERMUTATIONS, seed=0,
            target_spec="", baseline_spec=""):
    """Build an (unadjusted) ComparisonReport from two cross-validated fits."""
    diffs = paired_diffs(target_fit, baseline_fit)
    return ComparisonReport(
        label=label,
        target_spec=target_spec,
        baseline_spec=baseline_spec,
        n_items=int(diffs.shape[0]),
        delta_llh=float(np.mean(diffs)),
        p_value=paired_permutation_test(diffs, permutations=permutations, seed=seed),
    )


def adjust_reports(reports, q=0.05):
    """Apply BH across one table of reports (a single hypothesis family)."""
    reports = list(reports)
    if not reports:
        return reports
    adjusted, _ = bh_adjust([r.p_value for r in reports], q=q)
    for report, adj in zip(reports, adjusted):
        report.finalize(adj, q=q)
    return reports
