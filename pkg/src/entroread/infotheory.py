"""Surprisal and the contextual Renyi entropy family.

Subword-level kernels plus the aggregation from subword positions to
word-level quantities.  Entropy orders are plain floats; ``math.inf`` selects
the min-surprisal order and 0 the support-size order.  All results are bits.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError, ContractError, DomainError, InfiniteSurprisalError

LN2 = math.log(2.0)

# Normalization slack accepted on probability vectors.
NORM_TOL = 1e-4

# Probabilities above this count as support for the order-0 entropy; softmax
# outputs are never exactly zero, so a hard cutoff keeps the count meaningful.
SUPPORT_EPS = 1e-12
SUPPORT_LOGEPS = math.log(SUPPORT_EPS)

DEFAULT_ALPHA_GRID = (0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 4.0, math.inf)


def format_alpha(alpha):
    """Canonical string for an entropy order: '0.5', '1', 'inf'."""
    if math.isinf(alpha):
        return "inf"
    if alpha == int(alpha):
        return str(int(alpha))
    return repr(float(alpha))


def parse_alpha(text):
    value = math.inf if text.strip().lower() in ("inf", "infinity") else float(text)
    if value < 0 or math.isnan(value):
        raise DomainError(f"entropy order must be >= 0, got {text!r}")
    return value


def _validated_logprobs(dist):
    """Check a probability vector and return its natural-log form."""
    p = np.asarray(dist, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise DomainError("distribution must be a non-empty 1-d vector")
    if np.any(p < 0):
        raise DomainError("distribution has negative entries")
    total = float(p.sum())
    if abs(total - 1.0) > NORM_TOL:
        raise DomainError(f"distribution sums to {total:.6g}, outside 1 +/- {NORM_TOL}")
    with np.errstate(divide="ignore"):
        return np.log(p)


def renyi_entropy(dist, alpha):
    """Renyi entropy of order ``alpha`` in bits.

    Order 1 is Shannon entropy, order 0 the log support size, order inf the
    surprisal of the most likely outcome; other orders use the closed form
    evaluated in the log domain.
    """
    if alpha < 0:
        raise DomainError("entropy order must be >= 0")
    lp = _validated_logprobs(dist)
    return float(kernels.renyi_grid(lp[None, :], np.array([alpha]), SUPPORT_LOGEPS)[0, 0])


def renyi_entropy_limit(dist, alpha, delta=1e-6):
    """Limit-definition oracle: evaluate the closed form at orders
    ``alpha +/- delta`` and average.

    Independent of the production path (no special-casing, no log-domain
    trick); kept for tests only.
    """
    p = np.asarray(dist, dtype=np.float64)
    lo, hi = alpha - delta, alpha + delta
    vals = []
    for b in (lo, hi):
        if b <= 0 or b == 1.0:
            continue
        vals.append(math.log2(float(np.sum(p**b))) / (1.0 - b))
    if not vals:
        raise DomainError("no valid evaluation points around alpha")
    return float(np.mean(vals))


def surprisal(dist, outcome):
    """Negative log2 probability of ``outcome`` under ``dist``."""
    lp = _validated_logprobs(dist)
    if not 0 <= outcome < lp.shape[0]:
        raise DomainError(f"outcome {outcome} out of range for size {lp.shape[0]}")
    if np.isinf(lp[outcome]):
        raise InfiniteSurprisalError(f"outcome {outcome} has zero probability")
    return float(-lp[outcome] / LN2)


def position_surprisal(position):
    """Surprisal (bits) of the realized token at one prediction step."""
    if position.logprobs is not None:
        lp = position.logprobs[position.realized_id]
        if np.isinf(lp):
            raise InfiniteSurprisalError(
                f"zero probability for realized token at text {position.text_id}, "
                f"word {position.word_index}, subword {position.subword_index}"
            )
        return float(-lp / LN2)
    return position.surprisal_bits


def word_surprisal(positions):
    """Word surprisal: sum of the subword surprisals along the word's
    canonical tokenization."""
    if not positions:
        raise ContractError("word has no subword positions")
    return float(sum(position_surprisal(p) for p in positions))


def word_entropy(first_position, alpha):
    """Word-level entropy estimate: the entropy at the word-initial subword
    step, a lower bound on the exact word entropy."""
    if first_position.subword_index != 0:
        raise ContractError(
            f"word entropy requires the word-initial position, got subword index "
            f"{first_position.subword_index}"
        )
    if first_position.logprobs is not None:
        grid = kernels.renyi_grid(
            first_position.logprobs[None, :], np.array([float(alpha)]), SUPPORT_LOGEPS
        )
        return float(grid[0, 0])
    try:
        return first_position.renyi_bits[alpha]
    except KeyError:
        raise ConfigError(
            f"summary position lacks entropy order {format_alpha(alpha)}"
        ) from None


def preprocessing_effort_total(dist, k):
    """Total effort to preprocess every possible next word, under surprisal-
    proportional time allocation with scale parameter ``k``.

    Evaluated literally: per-word time is surprisal over log2 k, per-word
    effort is k to the minus that time, and the result is the sum.  The sum
    is provably 1 for every distribution and every k > 1.
    """
    if k <= 1:
        raise DomainError("scale parameter must be > 1")
    lp = _validated_logprobs(dist)
    support = lp > -np.inf
    h_bits = -lp[support] / LN2
    y = h_bits / math.log2(k)
    return float(np.sum(np.power(k, -y)))


def summarize_positions(positions, alphas):
    """Per-position surprisal and entropies, as (coords, surprisal, {order: bits}).

    Full-form positions are evaluated with the kernel; summary-form positions
    pass their stored values through (all requested orders must be present).
    Zero-probability realizations yield infinite surprisal.
    """
    alphas = [float(a) for a in alphas]
    alpha_arr = np.array(alphas, dtype=np.float64)
    out = []
    full_idx = [i for i, p in enumerate(positions) if p.logprobs is not None]
    grids = {}
    chunk = 1024
    for start in range(0, len(full_idx), chunk):
        idx = full_idx[start : start + chunk]
        block = np.stack([positions[i].logprobs for i in idx])
        grid = kernels.renyi_grid(block, alpha_arr, SUPPORT_LOGEPS)
        for row, i in enumerate(idx):
            grids[i] = {a: float(grid[row, j]) for j, a in enumerate(alphas)}
    for i, pos in enumerate(positions):
        if pos.logprobs is not None:
            try:
                h = position_surprisal(pos)
            except InfiniteSurprisalError:
                h = math.inf
            renyi = grids[i]
        else:
            missing = [a for a in alphas if a not in pos.renyi_bits]
            if missing:
                raise ConfigError(
                    "summary position lacks entropy orders: "
                    + ", ".join(format_alpha(a) for a in missing)
                )
            h = pos.surprisal_bits
            renyi = {a: pos.renyi_bits[a] for a in alphas}
        out.append(((pos.text_id, pos.word_index, pos.subword_index), h, renyi))
    return out


@dataclass
class WordInfo:
    """Word-level information quantities joined onto corpus words."""

    surprisal_bits: float
    entropy_bits: dict
    successor_entropy_bits: dict | None = None


def compute_word_infos(positions, alphas):
    """Aggregate subword positions into per-word quantities.

    Parameters
    ----------
    positions : sequence of SubwordPosition
        All prediction steps, grouped by word in file order with subword
        indices 0..m-1 inside each word.
    alphas : iterable of float
        Entropy orders to evaluate.

    Returns
    -------
    dict mapping (text_id, word_index) -> WordInfo.  Words whose realized
    token has zero probability get infinite surprisal (rows are dropped,
    and counted, when matrices are built).
    """
    alphas = [float(a) for a in alphas]
    groups: dict[tuple[int, int], list] = {}
    order: list[tuple[int, int]] = []
    for pos in positions:
        key = (pos.text_id, pos.word_index)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(pos)

    for key, group in groups.items():
        seen = [p.subword_index for p in group]
        if seen != list(range(len(group))):
            raise ContractError(f"word {key} has non-contiguous subword indices {seen}")

    alpha_arr = np.array(alphas, dtype=np.float64)
    entropy_maps: dict[tuple[int, int], dict] = {}
    full_keys = [k for k in order if groups[k][0].logprobs is not None]
    if full_keys:
        chunk = 1024
        for start in range(0, len(full_keys), chunk):
            keys = full_keys[start : start + chunk]
            block = np.stack([groups[k][0].logprobs for k in keys])
            grid = kernels.renyi_grid(block, alpha_arr, SUPPORT_LOGEPS)
            for row, key in enumerate(keys):
                entropy_maps[key] = {a: float(grid[row, j]) for j, a in enumerate(alphas)}
    for key in order:
        if key in entropy_maps:
            continue
        first = groups[key][0]
        missing = [a for a in alphas if a not in first.renyi_bits]
        if missing:
            raise ConfigError(
                "summary file lacks entropy orders: "
                + ", ".join(format_alpha(a) for a in missing)
            )
        entropy_maps[key] = {a: first.renyi_bits[a] for a in alphas}

    infos: dict[tuple[int, int], WordInfo] = {}
    for key in order:
        try:
            h = word_surprisal(groups[key])
        except InfiniteSurprisalError:
            h = math.inf
        infos[key] = WordInfo(surprisal_bits=h, entropy_bits=entropy_maps[key])

    for text_id, word_index in order:
        nxt = (text_id, word_index + 1)
        if nxt in infos:
            infos[(text_id, word_index)].successor_entropy_bits = infos[nxt].entropy_bits
    return infos
