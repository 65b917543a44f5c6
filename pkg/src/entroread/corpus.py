"""Reading-measure ingestion and cross-reader aggregation.

Corpus files are per-reader TSV rows; ingestion groups them into one
observation per word token, averages reading times across readers under the
active skipped-word policy, and attaches unigram log-probabilities.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import ConfigError, CorpusError

CORPUS_COLUMNS = ("text_id", "word_index", "surface", "reader_id", "rt_ms", "skipped")

# Unigram probability assigned to words missing from an external frequency
# list; -log2 of this is ~26.6 bits.
UNIGRAM_FLOOR = 1e-8


class SkipPolicy(Enum):
    """How skipped words enter the reading-time average."""

    INCLUDE_AS_ZERO = "zero"
    EXCLUDE = "exclude"
    NOT_APPLICABLE = "not_applicable"


@dataclass(frozen=True)
class ReaderMeasure:
    reader_id: str
    rt_ms: float | None
    skipped: bool | None

    def __post_init__(self):
        if self.rt_ms is not None and self.rt_ms < 0:
            raise CorpusError(f"negative reading time {self.rt_ms} for reader {self.reader_id}")
        if self.skipped and self.rt_ms not in (None, 0.0):
            raise CorpusError(
                f"reader {self.reader_id} skipped but has nonzero rt {self.rt_ms}"
            )


@dataclass
class WordObservation:
    text_id: int
    word_index: int
    surface: str
    measures: list[ReaderMeasure] = field(default_factory=list)
    mean_rt_ms: float | None = None
    skip_ratio: float = 0.0
    unigram_logprob: float | None = None

    @property
    def length_chars(self):
        return len(self.surface)


def _aggregate(obs, policy):
    annotated = [m for m in obs.measures if m.skipped is not None]
    n_skipped = sum(1 for m in annotated if m.skipped)
    obs.skip_ratio = n_skipped / len(annotated) if annotated else 0.0

    if policy is SkipPolicy.INCLUDE_AS_ZERO:
        rts = [0.0 if m.skipped else m.rt_ms for m in obs.measures if m.skipped or m.rt_ms is not None]
    else:
        rts = [m.rt_ms for m in obs.measures if not m.skipped and m.rt_ms is not None]
    obs.mean_rt_ms = sum(rts) / len(rts) if rts else None


def _parse_row(fields, line_no):
    if len(fields) != len(CORPUS_COLUMNS):
        raise CorpusError(f"line {line_no}: expected {len(CORPUS_COLUMNS)} fields, got {len(fields)}")
    try:
        text_id = int(fields[0])
        word_index = int(fields[1])
    except ValueError:
        raise CorpusError(f"line {line_no}: non-integer text_id or word_index") from None
    surface = fields[2]
    if not surface:
        raise CorpusError(f"line {line_no}: empty surface form")
    reader_id = fields[3]
    try:
        rt = float(fields[4]) if fields[4] != "" else None
    except ValueError:
        raise CorpusError(f"line {line_no}: bad rt_ms {fields[4]!r}") from None
    if fields[5] == "":
        skipped = None
    elif fields[5] in ("0", "1"):
        skipped = fields[5] == "1"
    else:
        raise CorpusError(f"line {line_no}: skipped must be 0, 1, or empty, got {fields[5]!r}")
    if rt is not None and rt < 0:
        raise CorpusError(f"line {line_no}: negative rt_ms {rt}")
    if skipped and rt not in (None, 0.0):
        raise CorpusError(f"line {line_no}: skipped word with nonzero rt_ms {rt}")
    return text_id, word_index, surface, reader_id, rt, skipped


def ingest_corpus(path, format_tag, policy):
    """Read a per-reader TSV and return observations grouped by text.

    ``format_tag`` is 'selfpaced' or 'eyetracking'.  Self-paced corpora carry
    no skip annotations and require the NOT_APPLICABLE policy; eye-tracking
    corpora require a real policy.
    """
    if format_tag not in ("selfpaced", "eyetracking"):
        raise ConfigError(f"unknown corpus format {format_tag!r}")
    if format_tag == "selfpaced" and policy is not SkipPolicy.NOT_APPLICABLE:
        raise ConfigError("self-paced corpora do not allow word skipping; use NOT_APPLICABLE")
    if format_tag == "eyetracking" and policy is SkipPolicy.NOT_APPLICABLE:
        raise ConfigError("eye-tracking corpora need a skip policy (zero or exclude)")

    words: dict[tuple[int, int], WordObservation] = {}
    seen: set[tuple[int, int, str]] = set()
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if header != list(CORPUS_COLUMNS):
            raise CorpusError(f"line 1: bad header {header}")
        for line_no, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            text_id, word_index, surface, reader_id, rt, skipped = _parse_row(
                line.rstrip("\n").split("\t"), line_no
            )
            if format_tag == "selfpaced" and skipped is not None:
                raise CorpusError(f"line {line_no}: skip annotation in a self-paced corpus")
            triple = (text_id, word_index, reader_id)
            if triple in seen:
                raise CorpusError(f"line {line_no}: duplicate (text, word, reader) {triple}")
            seen.add(triple)
            key = (text_id, word_index)
            obs = words.get(key)
            if obs is None:
                obs = words[key] = WordObservation(text_id, word_index, surface)
            elif obs.surface != surface:
                raise CorpusError(
                    f"line {line_no}: surface {surface!r} disagrees with {obs.surface!r} "
                    f"for word {key}"
                )
            obs.measures.append(ReaderMeasure(reader_id, rt, skipped))

    if not words:
        raise CorpusError(f"{path}: no data rows")

    texts: dict[int, list[WordObservation]] = {}
    for key in sorted(words):
        obs = words[key]
        _aggregate(obs, policy)
        texts.setdefault(obs.text_id, []).append(obs)
    for text_id, obs_list in texts.items():
        indices = [o.word_index for o in obs_list]
        if indices != list(range(len(obs_list))):
            raise CorpusError(f"text {text_id}: word indices not contiguous from 0: {indices}")
    return [texts[t] for t in sorted(texts)]


def write_corpus(path, texts):
    """Serialize observations back to the per-reader TSV schema."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(CORPUS_COLUMNS) + "\n")
        for text in texts:
            for obs in text:
                for m in obs.measures:
                    rt = "" if m.rt_ms is None else repr(float(m.rt_ms))
                    skipped = "" if m.skipped is None else str(int(m.skipped))
                    fh.write(
                        f"{obs.text_id}\t{obs.word_index}\t{obs.surface}\t"
                        f"{m.reader_id}\t{rt}\t{skipped}\n"
                    )


def read_frequency_file(path):
    """Read a `surface<TAB>count` file into a dict."""
    counts: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            fields = line.rstrip("\n").split("\t")
            if len(fields) != 2:
                raise CorpusError(f"line {line_no}: expected `surface<TAB>count`")
            try:
                count = int(fields[1])
            except ValueError:
                raise CorpusError(f"line {line_no}: bad count {fields[1]!r}") from None
            if count <= 0:
                raise CorpusError(f"line {line_no}: count must be positive")
            counts[fields[0]] = counts.get(fields[0], 0) + count
    if not counts:
        raise CorpusError(f"{path}: empty frequency file")
    return counts


def unigram_logprobs(texts, external=None, floor=UNIGRAM_FLOOR):
    """Unigram log2-probability for every surface in the corpus.

    With an external count table, u = log2(count/total); corpus words absent
    from the table get log2(floor).  Without one, probabilities are estimated
    from the corpus itself with add-one smoothing.
    """
    surfaces = [obs.surface for text in texts for obs in text]
    if not surfaces and external is None:
        raise CorpusError("empty corpus and no external frequency file")
    if external is not None:
        total = sum(external.values())
        return {
            s: math.log2(external[s] / total) if s in external else math.log2(floor)
            for s in set(surfaces)
        }
    counts: dict[str, int] = {}
    for s in surfaces:
        counts[s] = counts.get(s, 0) + 1
    total = len(surfaces)
    vocab = len(counts)
    return {s: math.log2((c + 1) / (total + vocab)) for s, c in counts.items()}


def attach_unigrams(texts, table):
    """Fill unigram_logprob on every observation from a surface -> bits map."""
    for text in texts:
        for obs in text:
            try:
                obs.unigram_logprob = table[obs.surface]
            except KeyError:
                raise CorpusError(f"no unigram probability for surface {obs.surface!r}") from None
