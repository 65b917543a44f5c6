"""Quantify the predictive power of surprisal and contextual Renyi entropy
on reading behavior: ingestion of per-token LM distributions and per-word
reading measures, design-matrix assembly, cross-validated regression, and
paired model-comparison statistics."""

from .corpus import (
    ReaderMeasure,
    SkipPolicy,
    WordObservation,
    attach_unigrams,
    ingest_corpus,
    read_frequency_file,
    unigram_logprobs,
    write_corpus,
)
from .errors import (
    ConfigError,
    ContractError,
    CorpusError,
    DistributionFormatError,
    DomainError,
    EntroreadError,
    InfiniteSurprisalError,
)
from .inference import (
    ComparisonReport,
    adjust_reports,
    bh_adjust,
    compare,
    delta_llh,
    paired_permutation_test,
    spearman,
)
from .infotheory import (
    DEFAULT_ALPHA_GRID,
    WordInfo,
    compute_word_infos,
    format_alpha,
    parse_alpha,
    preprocessing_effort_total,
    renyi_entropy,
    surprisal,
    word_entropy,
    word_surprisal,
)
from .kernels import HAVE_EXTENSION, KERNEL_IMPL
from .lm import (
    NgramLM,
    SubwordPosition,
    Vocabulary,
    iter_fulldist,
    ngram_distributions,
    read_fulldist,
    read_summary,
    write_fulldist,
    write_summary,
)
from .pipeline import PipelineConfig, run_pipeline
from .predictors import (
    FeatureMatrix,
    Term,
    budget_terms,
    build_matrix,
    build_pair_matrices,
    common_terms,
    experiment_pairs,
    surprisal_terms,
)
from .regression import (
    FitResult,
    FoldPlan,
    cross_validate,
    fit_linear,
    fit_logistic,
    gaussian_llh,
    make_fold_plan,
)
from .synth import GeneratorConfig, default_source, generate

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
