"""Ranked-list similarity measures, a local surrogate text explainer,
and greedy attacks on explanation stability."""

from .attack import (
    AttackConfig,
    AttackResult,
    EmbeddingSynonymProvider,
    Perturbation,
    SynonymProvider,
    TableSynonymProvider,
    greedy_attack,
    importance_order,
    load_embeddings,
    load_synonym_table,
)
from .core import (
    Document,
    LabelDistribution,
    ParseError,
    RankedExplanation,
    load_corpus,
    load_explanation,
    load_stopwords,
    normalize_weights,
    parse_explanation,
    save_explanation,
    serialize_explanation,
)
from .explain import (
    Classifier,
    InstabilityResult,
    LexiconClassifier,
    SurrogateConfig,
    explain,
    inherent_instability,
    load_lexicon,
)
from .harness import (
    AggregateRow,
    ExperimentConfig,
    RunRecord,
    aggregate,
    default_grid,
    instability_baseline,
    mix_seed,
    quality_proxy,
    read_run_records,
    run_grid,
    write_aggregates,
    write_run_records,
)
from .measures import (
    MeasureSpec,
    footrule_max_bruteforce,
    footrule_max_penalized,
    jaccard,
    jaccard_weighted,
    kendall,
    kendall_weighted,
    rbo,
    similarity,
    spearman,
    spearman_footrule_distance,
    spearman_weighted,
)
from .reference import naive_reference

__version__ = "0.1.0"
