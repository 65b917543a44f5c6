"""End-to-end pipeline: ingest corpora, attach information quantities, run
experiment comparisons, and emit report tables.

All tables are built in memory and written in one pass at the end, so a
failing stage leaves no partial outputs; identical configurations produce
byte-identical files.
"""

import json
import math
import os
import zlib
from contextlib import contextmanager
from dataclasses import dataclass, field

from . import corpus as corpus_mod
from . import lm as lm_mod
from .errors import ConfigError, DomainError, EntroreadError
from .infotheory import DEFAULT_ALPHA_GRID, compute_word_infos, format_alpha, parse_alpha
from .inference import DEFAULT_PERMUTATIONS, adjust_reports, compare, spearman
from .predictors import (
    Term,
    build_matrix,
    build_pair_matrices,
    common_terms,
    experiment_pairs,
    surprisal_terms,
)
from .regression import cross_validate, make_fold_plan

SWEEP_VARIANTS = ("surprisal", "entropy", "both")


@contextmanager
def _stage(name):
    """Attach the pipeline stage name to any propagating error."""
    try:
        yield
    except EntroreadError as exc:
        raise type(exc)(f"[{name}] {exc}") from exc
    except Exception as exc:
        raise RuntimeError(f"pipeline stage {name!r} failed: {exc}") from exc


@dataclass
class CorpusSpec:
    name: str
    path: str
    format_tag: str
    skip_policy: corpus_mod.SkipPolicy
    distributions: dict
    frequency_path: str | None = None


@dataclass
class PipelineConfig:
    corpora: list
    experiments: list
    alpha_grid: tuple = DEFAULT_ALPHA_GRID
    output_dir: str = "reports"
    fold_seed: int = 0
    folds: int = 10
    grouped_folds: bool = False
    permutations: int = DEFAULT_PERMUTATIONS
    permutation_seed: int = 0
    q: float = 0.05
    effect_alpha: float | None = 0.5
    run_effects: bool = True
    run_spearman: bool = True
    run_sweep: bool = True

    @classmethod
    def from_json_dict(cls, data, base_dir="."):
        def resolve(p):
            return p if p is None or os.path.isabs(p) else os.path.join(base_dir, p)

        corpora = []
        for entry in data.get("corpora", []):
            dist = dict(entry.get("distributions", {}))
            if "path" in dist:
                dist["path"] = resolve(dist["path"])
            corpora.append(
                CorpusSpec(
                    name=entry["name"],
                    path=resolve(entry["path"]),
                    format_tag=entry.get("format", "selfpaced"),
                    skip_policy=corpus_mod.SkipPolicy(entry.get("skip_policy", "not_applicable")),
                    distributions=dist,
                    frequency_path=resolve(entry.get("frequency_path")),
                )
            )
        experiments = [
            (e["id"], parse_alpha(str(e["alpha"])) if "alpha" in e else None)
            for e in data.get("experiments", [])
        ]
        grid = tuple(parse_alpha(str(a)) for a in data.get("alpha_grid", [])) or DEFAULT_ALPHA_GRID
        effect_alpha = data.get("effect_alpha", 0.5)
        if effect_alpha is not None:
            effect_alpha = parse_alpha(str(effect_alpha))
        return cls(
            corpora=corpora,
            experiments=experiments,
            alpha_grid=grid,
            output_dir=resolve(data.get("output_dir", "reports")),
            fold_seed=int(data.get("fold_seed", 0)),
            folds=int(data.get("folds", 10)),
            grouped_folds=bool(data.get("grouped_folds", False)),
            permutations=int(data.get("permutations", DEFAULT_PERMUTATIONS)),
            permutation_seed=int(data.get("permutation_seed", 0)),
            q=float(data.get("q", 0.05)),
            effect_alpha=effect_alpha,
            run_effects=bool(data.get("effects", True)),
            run_spearman=bool(data.get("spearman", True)),
            run_sweep=bool(data.get("sweep", True)),
        )

    @classmethod
    def from_file(cls, path):
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
        return cls.from_json_dict(data, base_dir=os.path.dirname(os.path.abspath(path)))

    def validate(self):
        if not self.corpora:
            raise ConfigError("no corpora configured")
        if not self.experiments and not (self.run_sweep or self.run_spearman or self.run_effects):
            raise ConfigError("nothing to run")
        for spec in self.corpora:
            if not os.path.exists(spec.path):
                raise ConfigError(f"corpus file not found: {spec.path}")
            kind = spec.distributions.get("kind")
            if kind not in ("fulldist", "summary", "ngram"):
                raise ConfigError(f"corpus {spec.name}: unknown distribution kind {kind!r}")
            if kind in ("fulldist", "summary"):
                path = spec.distributions.get("path")
                if not path or not os.path.exists(path):
                    raise ConfigError(f"corpus {spec.name}: distribution file not found: {path}")
            if spec.frequency_path and not os.path.exists(spec.frequency_path):
                raise ConfigError(f"corpus {spec.name}: frequency file not found")
        for exp_id, alpha in self.experiments:
            needs_alpha = exp_id not in ("exp1",)
            if exp_id.startswith("exp3"):
                if 0.5 not in self.alpha_grid:
                    raise ConfigError(f"{exp_id} needs order 1/2 in the alpha grid")
            elif needs_alpha:
                if alpha is None:
                    raise ConfigError(f"experiment {exp_id} needs an entropy order")
                if alpha not in self.alpha_grid:
                    raise ConfigError(
                        f"experiment {exp_id} order {format_alpha(alpha)} missing from the grid"
                    )
            experiment_pairs(exp_id, alpha if not exp_id.startswith("exp3") else None)
        if self.effect_alpha is not None and self.effect_alpha not in self.alpha_grid:
            raise ConfigError("effect_alpha missing from the alpha grid")
        if self.folds < 2:
            raise ConfigError("need at least 2 folds")
        return self


@dataclass
class LoadedCorpus:
    spec: CorpusSpec
    texts: list
    infos: dict
    dropped_positions: int = 0


def load_corpus_data(spec, alpha_grid):
    """Ingest one corpus and compute its word-level information quantities."""
    with _stage(f"ingest:{spec.name}"):
        texts = corpus_mod.ingest_corpus(spec.path, spec.format_tag, spec.skip_policy)
        external = (
            corpus_mod.read_frequency_file(spec.frequency_path) if spec.frequency_path else None
        )
        corpus_mod.attach_unigrams(texts, corpus_mod.unigram_logprobs(texts, external=external))
    with _stage(f"distributions:{spec.name}"):
        kind = spec.distributions["kind"]
        if kind == "fulldist":
            positions = list(lm_mod.iter_fulldist(spec.distributions["path"]))
        elif kind == "summary":
            positions = lm_mod.read_summary(spec.distributions["path"])
        else:
            order = int(spec.distributions.get("order", 2))
            weights = spec.distributions.get("weights")
            positions, _, _ = lm_mod.ngram_positions_for_corpus(
                texts, order=order, weights=tuple(weights) if weights else None
            )
    with _stage(f"word_infos:{spec.name}"):
        infos = compute_word_infos(positions, alpha_grid)
    return LoadedCorpus(spec=spec, texts=texts, infos=infos)


def _fmt(value):
    if value is None:
        return ""
    return repr(float(value))


def _comparison_seed(base_seed, experiment_id, corpus_name, label):
    tag = zlib.crc32(f"{experiment_id}/{corpus_name}/{label}".encode("utf-8"))
    return (int(base_seed) << 32) + tag


def _spec_label(terms):
    return "+".join(t.name for t in terms)


@dataclass
class PipelineResult:
    tables: dict = field(default_factory=dict)
    json_docs: dict = field(default_factory=dict)

    def write(self, output_dir):
        os.makedirs(output_dir, exist_ok=True)
        written = []
        try:
            for name in sorted(self.tables):
                path = os.path.join(output_dir, name)
                with open(path, "w", encoding="utf-8") as fh:
                    fh.write(self.tables[name])
                written.append(path)
            for name in sorted(self.json_docs):
                path = os.path.join(output_dir, name)
                with open(path, "w", encoding="utf-8") as fh:
                    json.dump(self.json_docs[name], fh, indent=1, sort_keys=True)
                    fh.write("\n")
                written.append(path)
        except BaseException:
            for path in written:
                try:
                    os.unlink(path)
                except OSError:
                    pass
            raise
        return written


def _run_experiment(config, exp_id, alpha, loaded):
    pairs = experiment_pairs(exp_id, alpha)
    rows = []
    for data in loaded:
        if exp_id == "exp4" and data.spec.format_tag != "eyetracking":
            continue
        for pair in pairs:
            with _stage(f"{exp_id}:{data.spec.name}:{pair.label}"):
                target_m, baseline_m = build_pair_matrices(
                    data.texts, data.infos, pair.target, pair.baseline, pair.response
                )
                groups = (
                    [p[0] for p in target_m.provenance] if config.grouped_folds else None
                )
                plan = make_fold_plan(
                    target_m.values.shape[0], k=config.folds, seed=config.fold_seed, groups=groups
                )
                model = "logistic" if pair.response == "skip_ratio" else "linear"
                target_fit = cross_validate(target_m, model, plan)
                baseline_fit = cross_validate(baseline_m, model, plan)
                report = compare(
                    pair.label,
                    target_fit,
                    baseline_fit,
                    permutations=config.permutations,
                    seed=_comparison_seed(
                        config.permutation_seed, exp_id, data.spec.name, pair.label
                    ),
                    target_spec=_spec_label(target_m.terms),
                    baseline_spec=_spec_label(baseline_m.terms),
                )
            rows.append((data.spec.name, report, target_m.dropped_rows))
    adjust_reports([r for _, r, _ in rows], q=config.q)
    return rows


def _experiment_table(rows):
    header = [
        "corpus",
        "label",
        "n_items",
        "dropped_rows",
        "delta_llh_x100_nats",
        "delta_llh_nats",
        "p_value",
        "p_adjusted",
        "stars",
        "color",
        "target",
        "baseline",
    ]
    lines = ["\t".join(header)]
    for corpus_name, r, dropped in rows:
        lines.append(
            "\t".join(
                [
                    corpus_name,
                    r.label,
                    str(r.n_items),
                    str(dropped),
                    _fmt(r.delta_llh * 100.0),
                    _fmt(r.delta_llh),
                    _fmt(r.p_value),
                    _fmt(r.p_adjusted),
                    r.stars,
                    r.significance,
                    r.target_spec,
                    r.baseline_spec,
                ]
            )
        )
    return "\n".join(lines) + "\n"


def _experiment_json(exp_id, alpha, rows):
    return {
        "experiment": exp_id,
        "alpha": None if alpha is None else format_alpha(alpha),
        "rows": [
            {
                "corpus": corpus_name,
                "label": r.label,
                "n_items": r.n_items,
                "dropped_rows": dropped,
                "delta_llh_nats": r.delta_llh,
                "p_value": r.p_value,
                "p_adjusted": r.p_adjusted,
                "stars": r.stars,
                "color": r.significance,
                "target": r.target_spec,
                "baseline": r.baseline_spec,
            }
            for corpus_name, r, dropped in rows
        ],
    }


def _effect_table(config, loaded):
    alpha = config.effect_alpha
    terms = common_terms() + surprisal_terms() + [Term("entropy", lag=0, alpha=alpha)]
    lines = ["\t".join(["corpus", "term", "coefficient", "fold_mean", "fold_std"])]
    doc = {}
    for data in loaded:
        with _stage(f"effects:{data.spec.name}"):
            matrix = build_matrix(data.texts, data.infos, terms, "rt")
            groups = [p[0] for p in matrix.provenance] if config.grouped_folds else None
            plan = make_fold_plan(
                matrix.values.shape[0], k=config.folds, seed=config.fold_seed, groups=groups
            )
            fit = cross_validate(matrix, "linear", plan)
            doc[data.spec.name] = fit.to_json_dict(matrix.terms)
            for j, term in enumerate(matrix.terms):
                lines.append(
                    "\t".join(
                        [
                            data.spec.name,
                            term.name,
                            _fmt(fit.coefficients[j]),
                            _fmt(fit.fold_coefficients[:, j].mean()),
                            _fmt(fit.fold_coefficients[:, j].std()),
                        ]
                    )
                )
    return "\n".join(lines) + "\n", doc


def _spearman_table(config, loaded):
    lines = ["\t".join(["corpus", "alpha", "rho", "n_words"])]
    for data in loaded:
        with _stage(f"spearman:{data.spec.name}"):
            infos = [
                data.infos[(obs.text_id, obs.word_index)]
                for text in data.texts
                for obs in text
                if (obs.text_id, obs.word_index) in data.infos
            ]
            for alpha in config.alpha_grid:
                surp, ent = [], []
                for info in infos:
                    h = info.surprisal_bits
                    e = info.entropy_bits.get(alpha)
                    if e is not None and math.isfinite(h) and math.isfinite(e):
                        surp.append(h)
                        ent.append(e)
                try:
                    rho = _fmt(spearman(surp, ent))
                except DomainError:
                    # Constant entropy column (e.g. order 0 under a smoothed
                    # model with full support): correlation undefined.
                    rho = ""
                lines.append(
                    "\t".join([data.spec.name, format_alpha(alpha), rho, str(len(surp))])
                )
    return "\n".join(lines) + "\n"


def _sweep_table(config, loaded):
    base = common_terms() + surprisal_terms(exclude_lag=0)
    lines = ["\t".join(["corpus", "alpha", "variant", "delta_llh_x100_nats", "delta_llh_nats", "n_items"])]
    for data in loaded:
        for alpha in config.alpha_grid:
            ent = Term("entropy", lag=0, alpha=alpha)
            surp0 = Term("surprisal", lag=0)
            variants = {
                "surprisal": base + [surp0],
                "entropy": base + [ent],
                "both": base + [surp0, ent],
            }
            for variant in SWEEP_VARIANTS:
                with _stage(f"sweep:{data.spec.name}:{format_alpha(alpha)}:{variant}"):
                    target_m, base_m = build_pair_matrices(
                        data.texts, data.infos, variants[variant], base, "rt"
                    )
                    groups = (
                        [p[0] for p in target_m.provenance] if config.grouped_folds else None
                    )
                    plan = make_fold_plan(
                        target_m.values.shape[0],
                        k=config.folds,
                        seed=config.fold_seed,
                        groups=groups,
                    )
                    delta = (
                        cross_validate(target_m, "linear", plan).heldout_llh
                        - cross_validate(base_m, "linear", plan).heldout_llh
                    )
                lines.append(
                    "\t".join(
                        [
                            data.spec.name,
                            format_alpha(alpha),
                            variant,
                            _fmt(delta * 100.0),
                            _fmt(delta),
                            str(target_m.values.shape[0]),
                        ]
                    )
                )
    return "\n".join(lines) + "\n"


def run_pipeline(config, write=True):
    """Run every configured stage; returns (PipelineResult, written paths)."""
    config.validate()
    loaded = [load_corpus_data(spec, config.alpha_grid) for spec in config.corpora]
    result = PipelineResult()

    for exp_id, alpha in config.experiments:
        rows = _run_experiment(config, exp_id, alpha, loaded)
        result.tables[f"{exp_id}_comparisons.tsv"] = _experiment_table(rows)
        result.json_docs[f"{exp_id}_comparisons.json"] = _experiment_json(exp_id, alpha, rows)

    if config.run_effects and config.effect_alpha is not None:
        table, doc = _effect_table(config, loaded)
        result.tables["effect_sizes.tsv"] = table
        result.json_docs["effect_sizes.json"] = doc
    if config.run_spearman:
        result.tables["spearman.tsv"] = _spearman_table(config, loaded)
    if config.run_sweep:
        result.tables["alpha_sweep.tsv"] = _sweep_table(config, loaded)

    written = result.write(config.output_dir) if write else []
    return result, written
