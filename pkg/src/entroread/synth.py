"""Synthetic corpus generation with known ground-truth coefficients.

Word sequences are sampled from the built-in n-gram model; reading times are
a linear function of the configured terms plus Gaussian noise truncated at
zero, and skip indicators (when a skip model is given) follow a per-reader
logistic draw.  Outputs use the standard corpus TSV and full-distribution
formats, and are fully determined by the seed.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .corpus import (
    ReaderMeasure,
    SkipPolicy,
    WordObservation,
    _aggregate,
    attach_unigrams,
    unigram_logprobs,
    write_corpus,
)
from .errors import ConfigError
from .infotheory import compute_word_infos
from .lm import EOS_TOKEN, NgramLM, Vocabulary, ngram_distributions, write_fulldist
from .predictors import MAX_LAG, Term, term_value

# Training text for the default generation source; lowercase letters only so
# sampled surfaces stay printable.
_SEED_TEXT = (
    "the old reader held the small book near the window and read the long story "
    "again while the rain fell on the quiet street and the lamp made a warm light "
    "over the page so the words were easy to see and the evening passed slowly "
    "with tea and bread and a small dog slept by the door as the clock ticked "
    "and the reader turned each page with care thinking about the people in the "
    "story and how their town grew from a few houses by the river into a busy "
    "place full of voices and carts and markets where everyone knew the baker "
    "and the smith and the teacher who kept a shelf of worn books for anyone "
    "to borrow on a cold day"
)


def default_source(order=2, weights=None, repeat=500):
    """Deterministic (vocabulary, trained n-gram model, name) triple.

    Counts are scaled by ``repeat`` so the conditionals stay close to the
    seed text's empirical ones instead of being flattened by smoothing;
    without this, contextual entropies are nearly constant and carry no
    usable signal.
    """
    words = _SEED_TEXT.split()
    vocab = Vocabulary.from_words(words)
    if weights is None:
        weights = (0.05, 0.95) if order == 2 else tuple([1.0 / order] * order)
    lm = NgramLM(vocab=vocab, order=order, weights=weights)
    lm.train([[tid for w in words for tid in vocab.encode_word(w)]], repeat=repeat)
    return vocab, lm, f"builtin-ngram-{order}"


@dataclass(frozen=True)
class GeneratorConfig:
    true_phi: tuple
    noise_sigma: float
    n_texts: int
    words_per_text: int
    seed: int
    skip_model: tuple | None = None
    n_readers: int = 1
    max_word_subwords: int = 8

    def __post_init__(self):
        if self.noise_sigma <= 0:
            raise ConfigError("noise_sigma must be positive")
        if self.n_texts < 1 or self.words_per_text < 1 or self.n_readers < 1:
            raise ConfigError("counts must be positive")
        for term, _ in self.phi_items():
            if term.lag > MAX_LAG:
                raise ConfigError(f"term {term.name} exceeds max lag {MAX_LAG}")
        if self.skip_model is not None and self.n_readers < 2:
            raise ConfigError("skip generation needs several readers for a meaningful ratio")

    def phi_items(self):
        return tuple(self.true_phi) + (tuple(self.skip_model) if self.skip_model else ())


def phi(*pairs):
    """Convenience: ((Term, coef), ...) from (kind, value[, lag, alpha]) specs."""
    out = []
    for kind, value, *rest in pairs:
        lag = rest[0] if rest else 0
        alpha = rest[1] if len(rest) > 1 else None
        out.append((Term(kind, lag=lag, alpha=alpha), float(value)))
    return tuple(out)


@dataclass
class SynthResult:
    texts: list
    positions: list
    vocab: Vocabulary
    word_infos: dict = field(repr=False, default_factory=dict)


def _sample_word(rng, lm, vocab, context, max_subwords):
    """Sample one word's token ids given the running context."""
    p = lm.probs(context)
    initial = np.array([vocab.is_word_initial(i) for i in range(vocab.size)])
    p0 = np.where(initial, p, 0.0)
    p0 /= p0.sum()
    tokens = [int(rng.choice(vocab.size, p=p0))]
    while len(tokens) < max_subwords:
        p = lm.probs(context + tokens)
        tok = int(rng.choice(vocab.size, p=p))
        if tok == vocab.eos_id or vocab.is_word_initial(tok):
            break
        tokens.append(tok)
    return tokens


def _surface(vocab, tokens):
    first = vocab.tokens[tokens[0]]
    return first[len(vocab.word_initial_marker) :] + "".join(vocab.tokens[t] for t in tokens[1:])


def generate(config, source=None, corpus_path=None, fulldist_path=None):
    """Sample a corpus and its full-distribution dump.

    Returns a SynthResult; writes the corpus TSV and FULLDIST file (with
    manifest) when paths are given.
    """
    vocab, lm, model_name = source if source is not None else default_source()
    rng = np.random.default_rng(config.seed)

    token_texts = {}
    word_texts = []
    for text_id in range(config.n_texts):
        context = []
        words = []
        for _ in range(config.words_per_text):
            tokens = _sample_word(rng, lm, vocab, context, config.max_word_subwords)
            words.append(tokens)
            context.extend(tokens)
        token_texts[text_id] = words
        word_texts.append([_surface(vocab, t) for t in words])

    positions = ngram_distributions(token_texts, lm)
    alphas = sorted({t.alpha for t, _ in config.phi_items() if t.alpha is not None})
    infos = compute_word_infos(positions, alphas)

    texts = [
        [WordObservation(text_id, i, w) for i, w in enumerate(words)]
        for text_id, words in enumerate(word_texts)
    ]
    attach_unigrams(texts, unigram_logprobs(texts))

    skip_terms = tuple(config.skip_model) if config.skip_model else ()
    for text in texts:
        for t, obs in enumerate(text):
            base_rt = 0.0
            for term, coef in config.true_phi:
                v = term_value(term, text, infos, t)
                if v is not None and math.isfinite(v):
                    base_rt += coef * v
            skip_prob = None
            if skip_terms:
                logit = 0.0
                for term, coef in skip_terms:
                    v = term_value(term, text, infos, t)
                    if v is not None and math.isfinite(v):
                        logit += coef * v
                skip_prob = 1.0 / (1.0 + math.exp(-logit))
            for r in range(config.n_readers):
                if skip_prob is not None and rng.random() < skip_prob:
                    obs.measures.append(ReaderMeasure(f"r{r}", None, True))
                    continue
                rt = max(0.0, base_rt + rng.normal(0.0, config.noise_sigma))
                skipped = False if skip_prob is not None else None
                obs.measures.append(ReaderMeasure(f"r{r}", rt, skipped))

    # Aggregate in place so the returned texts are usable directly, matching
    # what re-ingesting the written file would produce.
    policy = SkipPolicy.INCLUDE_AS_ZERO if skip_terms else SkipPolicy.NOT_APPLICABLE
    for text in texts:
        for obs in text:
            _aggregate(obs, policy)

    if corpus_path is not None:
        write_corpus(corpus_path, texts)
    if fulldist_path is not None:
        manifest = {
            "model": model_name,
            "vocabulary": list(vocab.tokens),
            "word_initial_marker": vocab.word_initial_marker,
            "eos_token": EOS_TOKEN,
        }
        write_fulldist(
            fulldist_path, positions, vocab_size=vocab.size, eos_id=vocab.eos_id, manifest=manifest
        )
    return SynthResult(texts=texts, positions=positions, vocab=vocab, word_infos=infos)
