"""Command-line interface.

Subcommands: ingest (validate and aggregate a corpus), entropy (compute
surprisal/entropy tables from a distribution source), run (full experiment
pipeline), synth (generate a synthetic corpus with known coefficients),
sweep (delta-llh vs entropy order only).

Exit codes: 0 success, 2 validation/configuration error, 1 runtime error.
"""

import argparse
import json
import math
import os
import sys

from . import corpus as corpus_mod
from . import lm as lm_mod
from .errors import (
    ConfigError,
    CorpusError,
    DistributionFormatError,
    DomainError,
    EntroreadError,
)
from .infotheory import (
    DEFAULT_ALPHA_GRID,
    compute_word_infos,
    format_alpha,
    parse_alpha,
    summarize_positions,
)
from .pipeline import PipelineConfig, run_pipeline
from .synth import GeneratorConfig, generate, phi

# Missing input files count as validation errors (exit 2); other OS-level
# failures fall through to the runtime-error path (exit 1).
_VALIDATION_ERRORS = (
    ConfigError,
    CorpusError,
    DistributionFormatError,
    DomainError,
    FileNotFoundError,
)


def _policy(tag):
    return {
        "zero": corpus_mod.SkipPolicy.INCLUDE_AS_ZERO,
        "exclude": corpus_mod.SkipPolicy.EXCLUDE,
        "none": corpus_mod.SkipPolicy.NOT_APPLICABLE,
    }[tag]


def _fmt(x):
    return repr(float(x))


def _add_alpha_flag(parser):
    parser.add_argument(
        "--alpha",
        nargs="+",
        metavar="ORDER",
        help="entropy orders (numbers or 'inf'); default "
        + " ".join(format_alpha(a) for a in DEFAULT_ALPHA_GRID),
    )


def _parse_alphas(values):
    if not values:
        return DEFAULT_ALPHA_GRID
    return tuple(parse_alpha(v) for v in values)


def cmd_ingest(args):
    texts = corpus_mod.ingest_corpus(args.corpus, args.format, _policy(args.skip_policy))
    external = corpus_mod.read_frequency_file(args.freq) if args.freq else None
    corpus_mod.attach_unigrams(texts, corpus_mod.unigram_logprobs(texts, external=external))
    lines = ["\t".join(["text_id", "word_index", "surface", "length_chars", "unigram_logprob",
                        "n_readers", "mean_rt_ms", "skip_ratio"])]
    for text in texts:
        for obs in text:
            lines.append(
                "\t".join(
                    [
                        str(obs.text_id),
                        str(obs.word_index),
                        obs.surface,
                        str(obs.length_chars),
                        _fmt(obs.unigram_logprob),
                        str(len(obs.measures)),
                        "" if obs.mean_rt_ms is None else _fmt(obs.mean_rt_ms),
                        _fmt(obs.skip_ratio),
                    ]
                )
            )
    out = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return 0


def _entropy_positions(args):
    if args.dist:
        return list(lm_mod.iter_fulldist(args.dist))
    if args.summary:
        return lm_mod.read_summary(args.summary)
    texts = corpus_mod.ingest_corpus(args.corpus, args.format, _policy(args.skip_policy))
    positions, _, _ = lm_mod.ngram_positions_for_corpus(texts, order=args.ngram_order)
    return positions


def cmd_entropy(args):
    alphas = _parse_alphas(args.alpha)
    positions = _entropy_positions(args)
    if args.per_position:
        rows = []
        for (text_id, word_index, subword_index), h, renyi in summarize_positions(
            positions, alphas
        ):
            rows.append(
                lm_mod.SubwordPosition(
                    text_id=text_id,
                    word_index=word_index,
                    subword_index=subword_index,
                    surprisal_bits=h,
                    renyi_bits=renyi,
                )
            )
        lm_mod.write_summary(args.out, rows, alphas)
        return 0
    infos = compute_word_infos(positions, alphas)
    header = ["text_id", "word_index", "surprisal_bits"]
    header += [f"renyi_{format_alpha(a)}_bits" for a in alphas]
    header += [f"successor_renyi_{format_alpha(a)}_bits" for a in alphas]
    lines = ["\t".join(header)]
    for (text_id, word_index), info in infos.items():
        row = [str(text_id), str(word_index), _fmt(info.surprisal_bits)]
        row += [_fmt(info.entropy_bits[a]) for a in alphas]
        succ = info.successor_entropy_bits
        row += ["" if succ is None else _fmt(succ[a]) for a in alphas]
        lines.append("\t".join(row))
    out = "\n".join(lines) + "\n"
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(out)
    return 0


def _load_run_config(args, force=None):
    config = PipelineConfig.from_file(args.config)
    if args.out:
        config.output_dir = args.out
    if args.seed is not None:
        config.fold_seed = args.seed
        config.permutation_seed = args.seed
    if args.permutations is not None:
        config.permutations = args.permutations
    if args.alpha:
        config.alpha_grid = _parse_alphas(args.alpha)
    if args.skip_policy is not None:
        for spec in config.corpora:
            if spec.format_tag == "eyetracking":
                spec.skip_policy = _policy(args.skip_policy)
    if force is not None:
        config.experiments = force.get("experiments", config.experiments)
        config.run_effects = force.get("effects", config.run_effects)
        config.run_spearman = force.get("spearman", config.run_spearman)
        config.run_sweep = force.get("sweep", config.run_sweep)
    return config


def cmd_run(args):
    config = _load_run_config(args)
    _, written = run_pipeline(config)
    for path in written:
        print(path)
    return 0


def cmd_sweep(args):
    config = _load_run_config(
        args, force={"experiments": [], "effects": False, "spearman": False, "sweep": True}
    )
    _, written = run_pipeline(config)
    for path in written:
        print(path)
    return 0


def cmd_synth(args):
    os.makedirs(args.out, exist_ok=True)
    entropy_alpha = 0.5
    true_phi = phi(
        ("intercept", args.intercept),
        ("length", args.length_effect),
        ("surprisal", args.surprisal_effect),
        ("entropy", args.entropy_effect, 0, entropy_alpha),
    )
    skip_model = None
    fmt = "selfpaced"
    policy = "not_applicable"
    readers = args.readers
    if args.eyetracking:
        fmt = "eyetracking"
        policy = "zero"
        readers = max(readers, 10)
        skip_model = phi(("intercept", -1.0), ("entropy", -0.4, 0, entropy_alpha))
    config = GeneratorConfig(
        true_phi=true_phi,
        noise_sigma=args.noise,
        n_texts=args.n_texts,
        words_per_text=args.words_per_text,
        seed=args.seed if args.seed is not None else 0,
        skip_model=skip_model,
        n_readers=readers,
    )
    corpus_path = os.path.join(args.out, "corpus.tsv")
    dist_path = os.path.join(args.out, "dists.fulldist")
    generate(config, corpus_path=corpus_path, fulldist_path=dist_path)

    truth = {
        "phi": {t.name: c for t, c in true_phi},
        "skip_model": None if skip_model is None else {t.name: c for t, c in skip_model},
        "noise_sigma": config.noise_sigma,
        "seed": config.seed,
        "n_texts": config.n_texts,
        "words_per_text": config.words_per_text,
        "n_readers": config.n_readers,
    }
    with open(os.path.join(args.out, "truth.json"), "w", encoding="utf-8") as fh:
        json.dump(truth, fh, indent=1, sort_keys=True)
        fh.write("\n")

    experiments = [{"id": "exp1"}, {"id": "exp2-add", "alpha": "0.5"}]
    if args.eyetracking:
        experiments.append({"id": "exp4", "alpha": "0.5"})
    run_config = {
        "corpora": [
            {
                "name": "synth",
                "path": "corpus.tsv",
                "format": fmt,
                "skip_policy": policy,
                "distributions": {"kind": "fulldist", "path": "dists.fulldist"},
            }
        ],
        "alpha_grid": [format_alpha(a) if math.isinf(a) else a for a in DEFAULT_ALPHA_GRID],
        "experiments": experiments,
        "fold_seed": 0,
        "permutations": args.permutations if args.permutations is not None else 2000,
        "effect_alpha": 0.5,
        "output_dir": "reports",
    }
    config_path = os.path.join(args.out, "config.json")
    with open(config_path, "w", encoding="utf-8") as fh:
        json.dump(run_config, fh, indent=1, sort_keys=True)
        fh.write("\n")
    print(config_path)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="entroread",
        description="Predictive power of surprisal and contextual entropy on reading behavior.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a corpus file and print aggregates")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", choices=("selfpaced", "eyetracking"), default="selfpaced")
    p.add_argument("--skip-policy", choices=("zero", "exclude", "none"), default="none")
    p.add_argument("--freq", help="external frequency file (surface<TAB>count)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("entropy", help="compute surprisal/entropy tables")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--dist", help="full-distribution dump")
    src.add_argument("--summary", help="per-position summary TSV")
    src.add_argument("--corpus", help="corpus file for the built-in n-gram model")
    p.add_argument("--format", choices=("selfpaced", "eyetracking"), default="selfpaced")
    p.add_argument("--skip-policy", choices=("zero", "exclude", "none"), default="none")
    p.add_argument("--ngram-order", type=int, default=2)
    p.add_argument("--per-position", action="store_true",
                   help="emit the per-position summary format instead of word level")
    _add_alpha_flag(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_entropy)

    for name, func, help_text in (
        ("run", cmd_run, "run configured experiments and emit report tables"),
        ("sweep", cmd_sweep, "emit only the delta-llh vs entropy-order table"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True)
        p.add_argument("--out")
        p.add_argument("--seed", type=int)
        p.add_argument("--permutations", type=int)
        p.add_argument("--skip-policy", choices=("zero", "exclude"))
        _add_alpha_flag(p)
        p.set_defaults(func=func)

    p = sub.add_parser("synth", help="generate a synthetic corpus with known coefficients")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-texts", type=int, default=250)
    p.add_argument("--words-per-text", type=int, default=20)
    p.add_argument("--readers", type=int, default=1)
    p.add_argument("--noise", type=float, default=30.0)
    p.add_argument("--intercept", type=float, default=200.0)
    p.add_argument("--length-effect", type=float, default=2.0)
    p.add_argument("--surprisal-effect", type=float, default=3.0)
    p.add_argument("--entropy-effect", type=float, default=5.0)
    p.add_argument("--eyetracking", action="store_true",
                   help="generate skip annotations from a logistic skip model")
    p.add_argument("--permutations", type=int)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EntroreadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - map unexpected failures to exit 1
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
