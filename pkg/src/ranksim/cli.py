"""Command-line interface.

Subcommands:
  measure     score two explanation TSV files against each other
  explain     print the explanation of a document as TSV
  attack      run one greedy attack and print its outcome
  experiment  run a measure x threshold grid and write CSVs

Exit codes: 0 success, 1 the attack itself failed, 2 usage or
configuration error.

Configuration is a flat JSON object with a strict key set; relative
paths are resolved against the config file's directory and command-line
flags override file values.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

from . import harness
from .attack import AttackConfig, greedy_attack, load_embeddings, load_synonym_table
from .core import ParseError, load_corpus, load_explanation, load_stopwords, serialize_explanation
from .explain import SurrogateConfig, explain, load_lexicon
from .measures import MeasureSpec, similarity

EXIT_OK = 0
EXIT_ATTACK_FAILED = 1
EXIT_USAGE = 2

CONFIG_KEYS = frozenset(
    {
        "measure",
        "rbo_p",
        "penalty",
        "normalization",
        "tau",
        "max_perturb_frac",
        "n_neighbors",
        "min_embedding_sim",
        "n_samples",
        "kernel_width",
        "ridge_lambda",
        "seed",
        "corpus",
        "lexicon",
        "synonyms",
        "embeddings",
        "stopwords",
        "output_dir",
    }
)

_PATH_KEYS = ("corpus", "lexicon", "synonyms", "embeddings", "stopwords")


class ConfigError(ValueError):
    pass


@dataclass
class CliConfig:
    """Validated contents of a config file."""

    measure: list[str] | None = None
    rbo_p: list[float] = field(default_factory=lambda: [0.5, 0.7, 0.9])
    penalty: float | None = None
    normalization: str = "reversal"
    tau: list[float] = field(default_factory=lambda: [0.3, 0.4, 0.5, 0.6])
    max_perturb_frac: float = 0.2
    n_neighbors: int = 20
    min_embedding_sim: float = 0.5
    n_samples: int = 500
    kernel_width: float = 25.0
    ridge_lambda: float = 1.0
    seed: int = 0
    corpus: str | None = None
    lexicon: str | None = None
    synonyms: str | None = None
    embeddings: str | None = None
    stopwords: str | None = None
    output_dir: str | None = None


def _as_list(value, coerce):
    if isinstance(value, list):
        return [coerce(v) for v in value]
    return [coerce(value)]


def load_config(path: str) -> CliConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")

    cfg = CliConfig()
    base = os.path.dirname(os.path.abspath(path))
    try:
        if "measure" in raw:
            cfg.measure = _as_list(raw["measure"], str)
        if "rbo_p" in raw:
            cfg.rbo_p = _as_list(raw["rbo_p"], float)
        if "penalty" in raw and raw["penalty"] is not None:
            cfg.penalty = float(raw["penalty"])
        if "normalization" in raw:
            cfg.normalization = str(raw["normalization"])
        if "tau" in raw:
            cfg.tau = _as_list(raw["tau"], float)
        for key in ("max_perturb_frac", "min_embedding_sim", "kernel_width", "ridge_lambda"):
            if key in raw:
                setattr(cfg, key, float(raw[key]))
        for key in ("n_neighbors", "n_samples", "seed"):
            if key in raw:
                setattr(cfg, key, int(raw[key]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from None

    for key in _PATH_KEYS:
        if key in raw and raw[key] is not None:
            resolved = raw[key] if os.path.isabs(raw[key]) else os.path.join(base, raw[key])
            if not os.path.exists(resolved):
                raise ConfigError(f"{key} path does not exist: {resolved}")
            setattr(cfg, key, resolved)
    if "output_dir" in raw and raw["output_dir"] is not None:
        out = raw["output_dir"]
        cfg.output_dir = out if os.path.isabs(out) else os.path.join(base, out)
    return cfg


def _measure_spec(name: str, cfg: CliConfig, rbo_p: float | None = None) -> MeasureSpec:
    if name == "rbo":
        p = rbo_p if rbo_p is not None else cfg.rbo_p[0]
        return MeasureSpec("rbo", persistence=p)
    return MeasureSpec(name, penalty=cfg.penalty, normalization=cfg.normalization)


def _build_grid(cfg: CliConfig) -> tuple[MeasureSpec, ...]:
    if cfg.measure is None:
        base = harness.default_grid(tuple(cfg.rbo_p))
        if cfg.penalty is not None or cfg.normalization != "reversal":
            base = tuple(
                MeasureSpec(s.kind, persistence=s.persistence, penalty=cfg.penalty, normalization=cfg.normalization)
                if s.kind.startswith("spearman")
                else s
                for s in base
            )
        return base
    specs = []
    for name in cfg.measure:
        if name == "rbo":
            specs.extend(MeasureSpec("rbo", persistence=p) for p in cfg.rbo_p)
        else:
            specs.append(_measure_spec(name, cfg))
    return tuple(specs)


def _provider(cfg: CliConfig):
    if cfg.synonyms is not None and cfg.embeddings is not None:
        raise ConfigError("give either synonyms or embeddings, not both")
    if cfg.synonyms is not None:
        return load_synonym_table(cfg.synonyms)
    if cfg.embeddings is not None:
        return load_embeddings(cfg.embeddings)
    raise ConfigError("a synonyms table or an embeddings file is required")


def _require(cfg: CliConfig, *keys: str) -> None:
    for key in keys:
        if getattr(cfg, key) is None:
            raise ConfigError(f"config key {key!r} is required for this command")


def cmd_measure(args) -> int:
    a = load_explanation(args.a)
    b = load_explanation(args.b)
    spec_kwargs = {}
    if args.measure == "rbo":
        spec_kwargs["persistence"] = args.p if args.p is not None else 0.5
    elif args.p is not None:
        print("--p only applies to rbo", file=sys.stderr)
        return EXIT_USAGE
    if args.penalty is not None:
        if not args.measure.startswith("spearman"):
            print("--penalty only applies to spearman measures", file=sys.stderr)
            return EXIT_USAGE
        spec_kwargs["penalty"] = args.penalty
    spec = MeasureSpec(args.measure, **spec_kwargs)
    print(f"{similarity(spec, a, b):.6f}")
    return EXIT_OK


def _document_from_args(args, cfg: CliConfig):
    if args.text is not None:
        from .core import Document

        return Document.from_raw(args.text)
    _require(cfg, "corpus")
    corpus = load_corpus(cfg.corpus)
    if not (0 <= args.doc_id < len(corpus)):
        raise ConfigError(f"doc-id {args.doc_id} outside corpus of {len(corpus)} documents")
    return corpus[args.doc_id][1]


def cmd_explain(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    _require(cfg, "lexicon")
    model = load_lexicon(cfg.lexicon)
    doc = _document_from_args(args, cfg)
    surrogate = SurrogateConfig(
        n_samples=cfg.n_samples,
        kernel_width=cfg.kernel_width,
        ridge_lambda=cfg.ridge_lambda,
        seed=cfg.seed,
    )
    sys.stdout.write(serialize_explanation(explain(doc, model, surrogate)))
    return EXIT_OK


def cmd_attack(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.tau is not None:
        cfg.tau = [args.tau]
    if args.measure is not None:
        cfg.measure = [args.measure]
    _require(cfg, "lexicon", "corpus")
    if cfg.measure is None or len(cfg.measure) != 1:
        raise ConfigError("attack needs exactly one measure")
    if len(cfg.tau) != 1:
        raise ConfigError("attack needs exactly one tau")
    model = load_lexicon(cfg.lexicon)
    provider = _provider(cfg)
    corpus = load_corpus(cfg.corpus)
    if not (0 <= args.doc_id < len(corpus)):
        raise ConfigError(f"doc-id {args.doc_id} outside corpus of {len(corpus)} documents")
    doc = corpus[args.doc_id][1]
    stopwords = load_stopwords(cfg.stopwords) if cfg.stopwords else frozenset()
    surrogate = SurrogateConfig(
        n_samples=cfg.n_samples,
        kernel_width=cfg.kernel_width,
        ridge_lambda=cfg.ridge_lambda,
        seed=cfg.seed,
    )
    attack_cfg = AttackConfig(
        measure=_measure_spec(cfg.measure[0], cfg),
        tau=cfg.tau[0],
        max_perturb_frac=cfg.max_perturb_frac,
        n_neighbors=cfg.n_neighbors,
        min_embedding_sim=cfg.min_embedding_sim,
        stopwords=stopwords,
        seed=cfg.seed,
    )
    result = greedy_attack(doc, model, surrogate, attack_cfg, provider)
    print(f"success: {str(result.success).lower()}")
    print(f"final_similarity: {result.final_similarity:.6f}")
    print(f"n_perturbed: {len(result.perturbations)}")
    print(f"n_queries: {result.n_queries}")
    print(f"trace: {' '.join(f'{s:.6f}' for s in result.trace)}")
    for p in result.perturbations:
        print(f"perturbation: {p.token_index} {p.original} {p.replacement}")
    print(f"perturbed_text: {result.perturbed_doc.raw}")
    return EXIT_OK if result.success else EXIT_ATTACK_FAILED


def cmd_experiment(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.output_dir is not None:
        cfg.output_dir = args.output_dir
    _require(cfg, "lexicon", "corpus")
    if cfg.output_dir is None:
        raise ConfigError("output_dir is required for experiment (config key or --output-dir)")
    provider = _provider(cfg)
    exp = harness.ExperimentConfig(
        corpus_path=cfg.corpus,
        lexicon_path=cfg.lexicon,
        provider=provider,
        surrogate=SurrogateConfig(
            n_samples=cfg.n_samples,
            kernel_width=cfg.kernel_width,
            ridge_lambda=cfg.ridge_lambda,
            seed=cfg.seed,
        ),
        grid=_build_grid(cfg),
        taus=tuple(cfg.tau),
        base_seed=cfg.seed,
        parallelism=args.parallelism,
        max_perturb_frac=cfg.max_perturb_frac,
        n_neighbors=cfg.n_neighbors,
        min_embedding_sim=cfg.min_embedding_sim,
        stopwords_path=cfg.stopwords,
    )
    os.makedirs(cfg.output_dir, exist_ok=True)
    records = harness.run_grid(exp, log=sys.stderr)
    harness.write_run_records(records, os.path.join(cfg.output_dir, "runrecords.csv"))
    harness.write_aggregates(harness.aggregate(records), os.path.join(cfg.output_dir, "aggregate.csv"))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ranksim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_measure = sub.add_parser("measure", help="score two explanation files")
    p_measure.add_argument("--a", required=True, help="original explanation TSV")
    p_measure.add_argument("--b", required=True, help="perturbed explanation TSV")
    p_measure.add_argument("--measure", required=True, help="measure name, e.g. rbo or kendall")
    p_measure.add_argument("--p", type=float, default=None, help="rbo persistence")
    p_measure.add_argument("--penalty", type=float, default=None, help="footrule penalty")
    p_measure.set_defaults(func=cmd_measure)

    p_explain = sub.add_parser("explain", help="explain one document")
    p_explain.add_argument("--config", required=True)
    group = p_explain.add_mutually_exclusive_group(required=True)
    group.add_argument("--text", default=None, help="explain this text")
    group.add_argument("--doc-id", type=int, default=None, help="explain corpus document N")
    p_explain.add_argument("--seed", type=int, default=None)
    p_explain.set_defaults(func=cmd_explain)

    p_attack = sub.add_parser("attack", help="attack one corpus document")
    p_attack.add_argument("--config", required=True)
    p_attack.add_argument("--doc-id", type=int, required=True)
    p_attack.add_argument("--seed", type=int, default=None)
    p_attack.add_argument("--tau", type=float, default=None)
    p_attack.add_argument("--measure", default=None)
    p_attack.set_defaults(func=cmd_attack)

    p_exp = sub.add_parser("experiment", help="run the full grid and write CSVs")
    p_exp.add_argument("--config", required=True)
    p_exp.add_argument("--seed", type=int, default=None)
    p_exp.add_argument("--output-dir", default=None)
    p_exp.add_argument("--parallelism", type=int, default=None)
    p_exp.set_defaults(func=cmd_experiment)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParseError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
