"""Batch attack runner and the CSV aggregates it reports.

Runs every (document, measure, threshold) cell of a grid, each with a
seed derived from the base seed by a fixed 64-bit mix, so serial and
parallel executions produce identical output. Aggregation operates on
values rounded to the CSV's 6-decimal precision, which makes every
aggregate row recomputable from the emitted run-record CSV alone.
"""

from __future__ import annotations

import math
import os
import statistics
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .attack import AttackConfig, SynonymProvider, greedy_attack
from .core import Document, ParseError, load_corpus, load_stopwords
from .explain import Classifier, SurrogateConfig, inherent_instability, load_lexicon
from .measures import MeasureSpec

__all__ = [
    "ExperimentConfig",
    "RunRecord",
    "AggregateRow",
    "default_grid",
    "mix_seed",
    "run_grid",
    "aggregate",
    "quality_proxy",
    "instability_baseline",
    "write_run_records",
    "write_aggregates",
    "read_run_records",
    "RUN_RECORD_HEADER",
    "AGGREGATE_HEADER",
    "THREADS_ENV_VAR",
]

THREADS_ENV_VAR = "RANKSIM_THREADS"

RUN_RECORD_HEADER = (
    "doc_id,measure,tau,success,final_similarity,n_perturbed,"
    "perturb_rate,n_queries,seed,quality_score"
)
AGGREGATE_HEADER = "measure,tau,success_rate,mean_sim,median_sim,mean_perturb_rate,n_docs"

_MASK64 = (1 << 64) - 1
_MIX_GAMMA = 0x9E3779B97F4A7C15
_MIX_M1 = 0xBF58476D1CE4E5B9
_MIX_M2 = 0x94D049BB133111EB


def mix_seed(base: int, *parts: int) -> int:
    """Derive a 64-bit seed from ``base`` and integer coordinates.

    Each part is folded in with one round of the splitmix64 finalizer
    (constants 0x9E3779B97F4A7C15, 0xBF58476D1CE4E5B9,
    0x94D049BB133111EB). This function is part of the reproducibility
    contract: records store the derived seed, and reruns at any
    parallelism level regenerate the same one.
    """
    x = base & _MASK64
    for part in parts:
        x = (x + ((part + 1) * _MIX_GAMMA)) & _MASK64
        x ^= x >> 30
        x = (x * _MIX_M1) & _MASK64
        x ^= x >> 27
        x = (x * _MIX_M2) & _MASK64
        x ^= x >> 31
    return x


def default_grid(rbo_persistences=(0.5, 0.7, 0.9)) -> tuple[MeasureSpec, ...]:
    """The nine-measure grid: base and weighted variants plus RBO settings."""
    specs = [
        MeasureSpec("jaccard"),
        MeasureSpec("jaccard_weighted"),
        MeasureSpec("kendall"),
        MeasureSpec("kendall_weighted"),
        MeasureSpec("spearman"),
        MeasureSpec("spearman_weighted"),
    ]
    specs.extend(MeasureSpec("rbo", persistence=p) for p in rbo_persistences)
    return tuple(specs)


@dataclass(frozen=True)
class ExperimentConfig:
    """One grid run: corpus x measures x thresholds.

    grid=None expands to the default nine measures using
    rbo_persistences. parallelism=None uses the machine's CPU count; the
    RANKSIM_THREADS environment variable caps either choice.
    """

    corpus_path: str
    lexicon_path: str
    provider: SynonymProvider
    surrogate: SurrogateConfig = field(default_factory=SurrogateConfig)
    grid: tuple[MeasureSpec, ...] | None = None
    taus: tuple[float, ...] = (0.3, 0.4, 0.5, 0.6)
    rbo_persistences: tuple[float, ...] = (0.5, 0.7, 0.9)
    base_seed: int = 0
    parallelism: int | None = None
    max_perturb_frac: float = 0.2
    n_neighbors: int = 20
    min_embedding_sim: float = 0.5
    stopwords_path: str | None = None

    def __post_init__(self):
        if not self.taus:
            raise ValueError("taus must be non-empty")
        for t in self.taus:
            if not (0.0 < t < 1.0):
                raise ValueError(f"tau must be inside (0, 1), got {t}")
        if self.grid is not None and not self.grid:
            raise ValueError("grid must be non-empty")

    def resolved_grid(self) -> tuple[MeasureSpec, ...]:
        return self.grid if self.grid is not None else default_grid(self.rbo_persistences)


@dataclass(frozen=True)
class RunRecord:
    """One attack outcome for a (document, measure, threshold) cell."""

    doc_id: int
    measure: str
    tau: float
    success: bool
    final_similarity: float
    n_perturbed: int
    perturb_rate: float
    n_queries: int
    seed: int
    quality_score: float


@dataclass(frozen=True)
class AggregateRow:
    """Per-(measure, tau) summary; similarity fields are None when the
    cell has no successful attacks (rendered as '-' in CSV)."""

    measure: str
    tau: float
    success_rate: float
    mean_sim: float | None
    median_sim: float | None
    mean_perturb_rate: float | None
    n_docs: int


def quality_proxy(original: Document, perturbed: Document) -> float:
    """Crude text-preservation score in [0, 1].

    Cosine similarity of character-trigram count vectors of the raw
    texts. Texts too short for a trigram compare equal-or-not. This is a
    stand-in hook; swap in a real semantic scorer for serious use.
    """

    def trigrams(text: str) -> dict[str, int]:
        counts: dict[str, int] = {}
        for i in range(len(text) - 2):
            g = text[i : i + 3]
            counts[g] = counts.get(g, 0) + 1
        return counts

    ca, cb = trigrams(original.raw), trigrams(perturbed.raw)
    if not ca or not cb:
        return 1.0 if original.raw == perturbed.raw else 0.0
    if ca == cb:
        return 1.0
    dot = sum(v * cb.get(g, 0) for g, v in ca.items())
    na = math.sqrt(sum(v * v for v in ca.values()))
    nb = math.sqrt(sum(v * v for v in cb.values()))
    return dot / (na * nb)


def _resolve_parallelism(requested: int | None) -> int:
    n = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.environ.get(THREADS_ENV_VAR)
    if cap:
        try:
            n = min(n, int(cap))
        except ValueError:
            raise ValueError(f"{THREADS_ENV_VAR} must be an integer, got {cap!r}") from None
    return max(1, n)


@dataclass(frozen=True)
class _CellTask:
    doc_id: int
    doc: Document
    measure_index: int
    spec: MeasureSpec
    tau: float
    attack_seed: int
    surrogate_seed: int


def _run_cell(args) -> RunRecord:
    task, model, provider, cfg, stopwords = args
    surrogate = SurrogateConfig(
        n_samples=cfg.surrogate.n_samples,
        kernel_width=cfg.surrogate.kernel_width,
        ridge_lambda=cfg.surrogate.ridge_lambda,
        seed=task.surrogate_seed,
    )
    attack_cfg = AttackConfig(
        measure=task.spec,
        tau=task.tau,
        max_perturb_frac=cfg.max_perturb_frac,
        n_neighbors=cfg.n_neighbors,
        min_embedding_sim=cfg.min_embedding_sim,
        stopwords=stopwords,
        seed=task.attack_seed,
    )
    result = greedy_attack(task.doc, model, surrogate, attack_cfg, provider)
    n_tokens = len(task.doc.tokens)
    return RunRecord(
        doc_id=task.doc_id,
        measure=task.spec.label,
        tau=task.tau,
        success=result.success,
        final_similarity=result.final_similarity,
        n_perturbed=len(result.perturbations),
        perturb_rate=len(result.perturbations) / n_tokens,
        n_queries=result.n_queries,
        seed=task.attack_seed,
        quality_score=quality_proxy(task.doc, result.perturbed_doc),
    )


def run_grid(cfg: ExperimentConfig, *, log=None) -> list[RunRecord]:
    """Attack every (document, measure, tau) cell of the grid.

    Each cell's attack seed is mix_seed(base_seed, doc_id, measure_index, 0)
    and its surrogate seed mix_seed(base_seed, doc_id, measure_index, 1).
    The threshold is deliberately left out of the mix: the greedy search
    path is threshold-independent up to early stopping, so sharing seeds
    across thresholds makes success exactly monotone in tau.
    """
    corpus = load_corpus(cfg.corpus_path)
    model = load_lexicon(cfg.lexicon_path)
    grid = cfg.resolved_grid()
    tasks = []
    for doc_id, (_, doc) in enumerate(corpus):
        for m_idx, spec in enumerate(grid):
            attack_seed = mix_seed(cfg.base_seed, doc_id, m_idx, 0)
            surrogate_seed = mix_seed(cfg.base_seed, doc_id, m_idx, 1)
            for tau in cfg.taus:
                tasks.append(
                    _CellTask(
                        doc_id=doc_id,
                        doc=doc,
                        measure_index=m_idx,
                        spec=spec,
                        tau=tau,
                        attack_seed=attack_seed,
                        surrogate_seed=surrogate_seed,
                    )
                )

    workers = _resolve_parallelism(cfg.parallelism)
    stopwords = (
        load_stopwords(cfg.stopwords_path) if cfg.stopwords_path is not None else frozenset()
    )
    payloads = [(task, model, cfg.provider, cfg, stopwords) for task in tasks]
    records: list[RunRecord] = []
    if workers == 1:
        for payload in payloads:
            rec = _run_cell(payload)
            if log is not None:
                _log_cell(log, rec)
            records.append(rec)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, len(payloads) // (workers * 4))
            for rec in pool.map(_run_cell, payloads, chunksize=chunk):
                if log is not None:
                    _log_cell(log, rec)
                records.append(rec)
    records.sort(key=lambda r: (r.doc_id, r.measure, r.tau))
    return records


def _log_cell(stream, rec: RunRecord) -> None:
    print(
        f"cell doc={rec.doc_id} measure={rec.measure} tau={rec.tau:g} "
        f"success={str(rec.success).lower()} sim={rec.final_similarity:.6f}",
        file=stream,
    )


def _round6(x: float) -> float:
    return round(x, 6)


def aggregate(records: list[RunRecord]) -> list[AggregateRow]:
    """Group records by (measure, tau) and summarize successful attacks.

    Inputs are rounded to 6 decimals first so the same rows come out of a
    run-record CSV round trip.
    """
    if not records:
        raise ValueError("no records to aggregate")
    groups: dict[tuple[str, float], list[RunRecord]] = {}
    for rec in records:
        groups.setdefault((rec.measure, rec.tau), []).append(rec)
    rows = []
    for (measure, tau), recs in sorted(groups.items()):
        succ = [r for r in recs if r.success]
        if succ:
            sims = [_round6(r.final_similarity) for r in succ]
            rates = [_round6(r.perturb_rate) for r in succ]
            mean_sim = math.fsum(sims) / len(sims)
            median_sim = statistics.median(sims)
            mean_rate = math.fsum(rates) / len(rates)
        else:
            mean_sim = median_sim = mean_rate = None
        rows.append(
            AggregateRow(
                measure=measure,
                tau=tau,
                success_rate=len(succ) / len(recs),
                mean_sim=mean_sim,
                median_sim=median_sim,
                mean_perturb_rate=mean_rate,
                n_docs=len(recs),
            )
        )
    return rows


def instability_baseline(
    cfg: ExperimentConfig, repeats: int
) -> dict[str, tuple[float, float]]:
    """Mean and min pairwise self-similarity per measure over the corpus.

    Context for judging attack success rates: a measure whose baseline
    is already low will report success without any perturbation doing
    real work.
    """
    corpus = load_corpus(cfg.corpus_path)
    model = load_lexicon(cfg.lexicon_path)
    out: dict[str, tuple[float, float]] = {}
    for m_idx, spec in enumerate(cfg.resolved_grid()):
        means = []
        mins = []
        for doc_id, (_, doc) in enumerate(corpus):
            seed = mix_seed(cfg.base_seed, doc_id, m_idx, 2)
            surrogate = SurrogateConfig(
                n_samples=cfg.surrogate.n_samples,
                kernel_width=cfg.surrogate.kernel_width,
                ridge_lambda=cfg.surrogate.ridge_lambda,
                seed=seed,
            )
            res = inherent_instability(doc, model, surrogate, repeats, spec)
            means.append(res.mean)
            mins.append(res.min)
        out[spec.label] = (math.fsum(means) / len(means), min(mins))
    return out


def _atomic_write(path, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def write_run_records(records: list[RunRecord], path) -> None:
    lines = [RUN_RECORD_HEADER]
    for r in sorted(records, key=lambda r: (r.doc_id, r.measure, r.tau)):
        lines.append(
            ",".join(
                [
                    str(r.doc_id),
                    r.measure,
                    _fmt(r.tau),
                    "true" if r.success else "false",
                    _fmt(r.final_similarity),
                    str(r.n_perturbed),
                    _fmt(r.perturb_rate),
                    str(r.n_queries),
                    str(r.seed),
                    _fmt(r.quality_score),
                ]
            )
        )
    _atomic_write(path, "\n".join(lines) + "\n")


def write_aggregates(rows: list[AggregateRow], path) -> None:
    lines = [AGGREGATE_HEADER]
    for row in sorted(rows, key=lambda r: (r.measure, r.tau)):
        lines.append(
            ",".join(
                [
                    row.measure,
                    _fmt(row.tau),
                    _fmt(row.success_rate),
                    _fmt(row.mean_sim) if row.mean_sim is not None else "-",
                    _fmt(row.median_sim) if row.median_sim is not None else "-",
                    _fmt(row.mean_perturb_rate) if row.mean_perturb_rate is not None else "-",
                    str(row.n_docs),
                ]
            )
        )
    _atomic_write(path, "\n".join(lines) + "\n")


def read_run_records(path) -> list[RunRecord]:
    """Parse a run-record CSV back into records."""
    records = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != RUN_RECORD_HEADER:
            raise ParseError(f"unexpected header {header!r}", path=str(path), line=1)
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 10:
                raise ParseError(f"expected 10 fields, got {len(parts)}", path=str(path), line=lineno)
            try:
                records.append(
                    RunRecord(
                        doc_id=int(parts[0]),
                        measure=parts[1],
                        tau=float(parts[2]),
                        success={"true": True, "false": False}[parts[3]],
                        final_similarity=float(parts[4]),
                        n_perturbed=int(parts[5]),
                        perturb_rate=float(parts[6]),
                        n_queries=int(parts[7]),
                        seed=int(parts[8]),
                        quality_score=float(parts[9]),
                    )
                )
            except (ValueError, KeyError):
                raise ParseError(f"malformed record {line!r}", path=str(path), line=lineno) from None
    if not records:
        raise ParseError("no records in file", path=str(path))
    return records
