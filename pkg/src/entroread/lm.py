"""Next-subword distribution sources.

Two file formats carry language-model predictions: FULLDIST (binary, one
float32 natural-log probability vector per prediction step) and SUMMARY (TSV
of precomputed surprisal and entropy values).  A small interpolated add-one
n-gram model over character subwords serves as a self-contained source so
end-to-end runs need no external model.
"""

import json
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DistributionFormatError, DomainError
from .infotheory import format_alpha, parse_alpha

FULLDIST_MAGIC = b"RTD1"
# Header: magic, u32 vocab_size, u32 position_count, u32 eos_id.
_HEADER = struct.Struct("<4sIII")
# Per position: u32 text_id, u32 word_index, u16 subword_index, u32 realized_id.
_RECORD_HEAD = struct.Struct("<IIHI")

# Normalization slack: file ingestion tolerates float32 rounding; the built-in
# model must normalize essentially exactly.
FILE_NORM_TOL = 1e-4
MODEL_NORM_TOL = 1e-12

WORD_INITIAL_MARKER = "▁"
EOS_TOKEN = "</s>"


@dataclass
class SubwordPosition:
    """One LM prediction step, in full or summary form."""

    text_id: int
    word_index: int
    subword_index: int
    realized_id: int | None = None
    logprobs: np.ndarray | None = None
    surprisal_bits: float | None = None
    renyi_bits: dict | None = None

    def coords(self):
        return (self.text_id, self.word_index, self.subword_index)


class Vocabulary:
    """Subword inventory with a word-initial marker convention and EOS."""

    def __init__(self, tokens, eos_id, word_initial_marker=WORD_INITIAL_MARKER):
        self.tokens = tuple(tokens)
        if not 0 <= eos_id < len(self.tokens):
            raise DomainError(f"eos_id {eos_id} out of range for size {len(self.tokens)}")
        self.eos_id = eos_id
        self.word_initial_marker = word_initial_marker
        self._index = {t: i for i, t in enumerate(self.tokens)}
        if len(self._index) != len(self.tokens):
            raise DomainError("duplicate tokens in vocabulary")

    @property
    def size(self):
        return len(self.tokens)

    def id_of(self, token):
        return self._index[token]

    def is_word_initial(self, token_id):
        return self.tokens[token_id].startswith(self.word_initial_marker)

    @classmethod
    def from_words(cls, words, word_initial_marker=WORD_INITIAL_MARKER):
        """Character-subword vocabulary covering ``words``, plus EOS."""
        seen = set()
        for w in words:
            if not w:
                raise DomainError("empty word in vocabulary source")
            seen.add(word_initial_marker + w[0])
            seen.update(w[1:])
        tokens = sorted(seen) + [EOS_TOKEN]
        return cls(tokens, eos_id=len(tokens) - 1, word_initial_marker=word_initial_marker)

    def encode_word(self, word):
        """Token ids of a word's canonical character tokenization."""
        subwords = [self.word_initial_marker + word[0]] + list(word[1:])
        try:
            return [self._index[s] for s in subwords]
        except KeyError as exc:
            raise DomainError(f"word {word!r} uses unknown subword {exc.args[0]!r}") from None


def write_fulldist(path, positions, vocab_size, eos_id, manifest=None):
    """Write positions to the binary full-distribution format.

    Log-probabilities are stored as float32; a JSON manifest (vocabulary,
    marker convention, model name) goes to ``path + '.json'`` when given.
    """
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(FULLDIST_MAGIC, vocab_size, len(positions), eos_id))
        for pos in positions:
            lp = np.asarray(pos.logprobs, dtype=np.float32)
            if lp.shape != (vocab_size,):
                raise DistributionFormatError(
                    f"position {pos.coords()}: vector length {lp.shape} != vocab {vocab_size}"
                )
            if not 0 <= pos.realized_id < vocab_size:
                raise DistributionFormatError(
                    f"position {pos.coords()}: realized_id {pos.realized_id} out of range"
                )
            fh.write(
                _RECORD_HEAD.pack(pos.text_id, pos.word_index, pos.subword_index, pos.realized_id)
            )
            fh.write(lp.tobytes())
    if manifest is not None:
        with open(str(path) + ".json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=1, sort_keys=True, ensure_ascii=False)
            fh.write("\n")


def _logsumexp(lp):
    m = np.max(lp)
    if np.isinf(m):
        return m
    return float(m + np.log(np.sum(np.exp(lp - m))))


def iter_fulldist(path, validate=True):
    """Yield SubwordPosition records from a full-distribution file.

    Each vector is checked to sum to 1 within the file tolerance; violations
    name the offending position.
    """
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise DistributionFormatError(f"{path}: truncated header")
        magic, vocab_size, position_count, eos_id = _HEADER.unpack(head)
        if magic != FULLDIST_MAGIC:
            raise DistributionFormatError(f"{path}: bad magic {magic!r}")
        if eos_id >= vocab_size:
            raise DistributionFormatError(f"{path}: eos_id {eos_id} >= vocab {vocab_size}")
        record_bytes = _RECORD_HEAD.size + 4 * vocab_size
        for i in range(position_count):
            payload = fh.read(record_bytes)
            if len(payload) < record_bytes:
                raise DistributionFormatError(
                    f"{path}: truncated at position {i} of {position_count}"
                )
            text_id, word_index, subword_index, realized_id = _RECORD_HEAD.unpack_from(payload)
            lp = np.frombuffer(payload, dtype="<f4", offset=_RECORD_HEAD.size).astype(np.float64)
            if realized_id >= vocab_size:
                raise DistributionFormatError(
                    f"{path}: position {i} ({text_id}, {word_index}, {subword_index}): "
                    f"realized_id {realized_id} out of range"
                )
            if validate:
                lse = _logsumexp(lp)
                if not abs(lse) <= FILE_NORM_TOL:
                    raise DistributionFormatError(
                        f"{path}: position {i} ({text_id}, {word_index}, {subword_index}) "
                        f"not normalized: logsumexp = {lse:.6g}"
                    )
            yield SubwordPosition(
                text_id=text_id,
                word_index=word_index,
                subword_index=subword_index,
                realized_id=realized_id,
                logprobs=lp,
            )
        if fh.read(1):
            raise DistributionFormatError(f"{path}: trailing bytes after {position_count} positions")


def read_fulldist(path, validate=True):
    """Read a full-distribution file and its sidecar vocabulary.

    Returns (positions, Vocabulary).  Without a sidecar manifest the
    vocabulary uses placeholder token strings.
    """
    positions = list(iter_fulldist(path, validate=validate))
    with open(path, "rb") as fh:
        _, vocab_size, _, eos_id = _HEADER.unpack(fh.read(_HEADER.size))
    manifest_path = str(path) + ".json"
    tokens = None
    marker = WORD_INITIAL_MARKER
    try:
        with open(manifest_path, encoding="utf-8") as fh:
            manifest = json.load(fh)
        tokens = manifest.get("vocabulary")
        marker = manifest.get("word_initial_marker", marker)
    except FileNotFoundError:
        pass
    if tokens is None:
        tokens = [f"<{i}>" for i in range(vocab_size)]
    if len(tokens) != vocab_size:
        raise DistributionFormatError(
            f"{manifest_path}: vocabulary length {len(tokens)} != header vocab {vocab_size}"
        )
    return positions, Vocabulary(tokens, eos_id=eos_id, word_initial_marker=marker)


SUMMARY_FIXED_COLUMNS = ("text_id", "word_index", "subword_index", "surprisal_bits")


def write_summary(path, rows, alphas):
    """Write precomputed per-position quantities as a SUMMARY TSV.

    ``rows`` are SubwordPosition items carrying surprisal_bits and renyi_bits
    for every order in ``alphas``.
    """
    alphas = [float(a) for a in alphas]
    header = list(SUMMARY_FIXED_COLUMNS) + [f"renyi_{format_alpha(a)}_bits" for a in alphas]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(header) + "\n")
        for pos in rows:
            vals = [repr(float(pos.renyi_bits[a])) for a in alphas]
            fh.write(
                f"{pos.text_id}\t{pos.word_index}\t{pos.subword_index}\t"
                f"{repr(float(pos.surprisal_bits))}\t" + "\t".join(vals) + "\n"
            )


def read_summary(path):
    """Read a SUMMARY TSV into summary-form SubwordPosition records."""
    positions = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if tuple(header[: len(SUMMARY_FIXED_COLUMNS)]) != SUMMARY_FIXED_COLUMNS:
            raise DistributionFormatError(f"{path}: bad summary header {header}")
        alphas = []
        for col in header[len(SUMMARY_FIXED_COLUMNS) :]:
            if not (col.startswith("renyi_") and col.endswith("_bits")):
                raise DistributionFormatError(f"{path}: unrecognized column {col!r}")
            alphas.append(parse_alpha(col[len("renyi_") : -len("_bits")]))
        for line_no, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            fields = line.rstrip("\n").split("\t")
            if len(fields) != len(header):
                raise DistributionFormatError(f"{path}: line {line_no}: wrong field count")
            try:
                text_id, word_index, subword_index = (int(f) for f in fields[:3])
                surprisal_bits = float(fields[3])
                values = [float(f) for f in fields[4:]]
            except ValueError:
                raise DistributionFormatError(f"{path}: line {line_no}: bad number") from None
            if surprisal_bits < 0 or any(v < 0 for v in values):
                raise DistributionFormatError(f"{path}: line {line_no}: negative quantity")
            by_alpha = dict(zip(alphas, values))
            ordered = sorted(by_alpha)
            for lo, hi in zip(ordered, ordered[1:]):
                if by_alpha[hi] > by_alpha[lo] + 1e-6:
                    raise DistributionFormatError(
                        f"{path}: line {line_no}: entropy increases from order "
                        f"{format_alpha(lo)} to {format_alpha(hi)}"
                    )
            positions.append(
                SubwordPosition(
                    text_id=text_id,
                    word_index=word_index,
                    subword_index=subword_index,
                    surprisal_bits=surprisal_bits,
                    renyi_bits=by_alpha,
                )
            )
    return positions


@dataclass
class NgramLM:
    """Interpolated add-one n-gram model over subword ids.

    Each component of order j estimates p(x | last j-1 tokens) with add-one
    smoothing over the full vocabulary; a component whose context was never
    seen falls back to the next shorter component, so querying after unseen
    context reduces exactly to the shorter-order distribution.  The final
    distribution mixes components with the given weights.
    """

    vocab: Vocabulary
    order: int
    weights: tuple
    _counts: list = field(default_factory=list, repr=False)
    _totals: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.order < 1:
            raise ConfigError("n-gram order must be >= 1")
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (self.order,) or np.any(w < 0) or abs(float(w.sum()) - 1.0) > 1e-12:
            raise ConfigError("interpolation weights must be non-negative and sum to 1")
        self.weights = tuple(float(x) for x in w)
        # _counts[j] maps a length-j context tuple to a count vector over the
        # vocabulary; _totals[j] holds the context totals.
        self._counts = [{} for _ in range(self.order)]
        self._totals = [{} for _ in range(self.order)]
        # Distributions depend on the context only through its last order-1
        # tokens, so they cache by that suffix.
        self._pcache = {}
        self._lcache = {}

    def train(self, sequences, repeat=1):
        """Accumulate counts from token-id sequences (one per text).

        ``repeat`` scales all counts afterwards, exactly as if the sequence
        set had been presented that many times; large values let empirical
        conditionals dominate the add-one smoothing.
        """
        trained = False
        for seq in sequences:
            for t, tok in enumerate(seq):
                trained = True
                for j in range(self.order):
                    if t < j:
                        continue
                    ctx = tuple(seq[t - j : t])
                    table = self._counts[j]
                    vec = table.get(ctx)
                    if vec is None:
                        vec = table[ctx] = np.zeros(self.vocab.size, dtype=np.int64)
                    vec[tok] += 1
                    self._totals[j][ctx] = self._totals[j].get(ctx, 0) + 1
        if not trained:
            raise ConfigError("n-gram training text is empty")
        if repeat < 1:
            raise ConfigError("repeat must be >= 1")
        if repeat > 1:
            for j in range(self.order):
                for ctx in self._counts[j]:
                    self._counts[j][ctx] *= repeat
                    self._totals[j][ctx] *= repeat
        self._pcache.clear()
        self._lcache.clear()
        return self

    def _component_probs(self, j, context):
        """Order-(j+1) add-one distribution, backing off on unseen context."""
        if j > len(context):
            return self._component_probs(j - 1, context)
        ctx = tuple(context[len(context) - j :])
        if ctx not in self._counts[j]:
            return self._component_probs(j - 1, context)
        counts = self._counts[j][ctx]
        return (counts + 1.0) / (self._totals[j][ctx] + self.vocab.size)

    def _suffix_key(self, context):
        k = self.order - 1
        return tuple(context[-k:]) if k > 0 else ()

    def probs(self, context):
        """Next-token probability vector given preceding token ids.

        Returned arrays are cached and read-only; copy before mutating.
        """
        key = self._suffix_key(context)
        p = self._pcache.get(key)
        if p is None:
            p = np.zeros(self.vocab.size, dtype=np.float64)
            for j, w in enumerate(self.weights):
                if w:
                    p += w * self._component_probs(j, list(key))
            p.flags.writeable = False
            self._pcache[key] = p
        return p

    def logprobs(self, context):
        key = self._suffix_key(context)
        lp = self._lcache.get(key)
        if lp is None:
            lp = np.log(self.probs(context))
            lp.flags.writeable = False
            self._lcache[key] = lp
        return lp


def ngram_positions_for_corpus(texts, order=2, weights=None):
    """Train the built-in model on a corpus and dump its own positions.

    ``texts`` are lists of objects with text_id / surface attributes (one
    list per text).  Returns (positions, vocabulary, model).
    """
    if weights is None:
        weights = (0.3, 0.7) if order == 2 else tuple([1.0 / order] * order)
    surfaces = [obs.surface for text in texts for obs in text]
    vocab = Vocabulary.from_words(surfaces)
    token_texts = {
        text[0].text_id: [vocab.encode_word(obs.surface) for obs in text] for text in texts
    }
    model = NgramLM(vocab=vocab, order=order, weights=tuple(weights))
    model.train([[t for w in token_texts[tid] for t in w] for tid in sorted(token_texts)])
    return ngram_distributions(token_texts, model), vocab, model


def ngram_distributions(texts, lm):
    """Run the n-gram model over tokenized texts.

    ``texts`` maps text_id to a list of words, each a list of token ids in
    canonical order.  Context accumulates within a text and resets between
    texts.  Returns full-form SubwordPosition records in corpus order.
    """
    positions = []
    for text_id in sorted(texts):
        context: list[int] = []
        for word_index, word in enumerate(texts[text_id]):
            for subword_index, tok in enumerate(word):
                positions.append(
                    SubwordPosition(
                        text_id=text_id,
                        word_index=word_index,
                        subword_index=subword_index,
                        realized_id=tok,
                        logprobs=lm.logprobs(context),
                    )
                )
                context.append(tok)
    return positions
