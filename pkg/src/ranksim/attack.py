"""Greedy word-substitution attack on explanation stability.

Tokens are visited from least to most important to the classifier; at
each position every admissible replacement is scored by re-explaining
the substituted document and comparing against the original explanation.
The best strictly-improving replacement is kept, and the search stops as
soon as the similarity falls to the success threshold or the
perturbation budget runs out.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass, replace

import numpy as np

from .core import Document, Feature, ParseError
from .explain import Classifier, SurrogateConfig, explain
from .measures import MeasureSpec, similarity

__all__ = [
    "AttackConfig",
    "AttackResult",
    "Perturbation",
    "SynonymProvider",
    "TableSynonymProvider",
    "EmbeddingSynonymProvider",
    "importance_order",
    "filter_candidates",
    "greedy_attack",
    "load_synonym_table",
    "load_embeddings",
]


@dataclass(frozen=True)
class AttackConfig:
    """Search constraints and the success threshold.

    tau: similarity at or below which the attack counts as successful.
    max_perturb_frac: cap on substituted token positions as a fraction of
        the document length (ceil of frac * n tokens).
    n_neighbors: replacement candidates requested per word.
    min_embedding_sim: minimum provider score for a candidate.
    fresh_baseline: compare the original explanation against an
        independent re-explanation instead of itself before any
        perturbation; with it the inherent surrogate noise alone can
        cross a loose threshold.
    """

    measure: MeasureSpec
    tau: float
    max_perturb_frac: float = 0.2
    n_neighbors: int = 20
    min_embedding_sim: float = 0.5
    stopwords: frozenset[Feature] = frozenset()
    seed: int = 0
    fresh_baseline: bool = False

    def __post_init__(self):
        if not (0.0 < self.tau < 1.0):
            raise ValueError("tau must be strictly inside (0, 1)")
        if not (0.0 < self.max_perturb_frac <= 1.0):
            raise ValueError("max_perturb_frac must be in (0, 1]")
        if self.n_neighbors < 1:
            raise ValueError("n_neighbors must be >= 1")
        if not (-1.0 <= self.min_embedding_sim <= 1.0):
            raise ValueError("min_embedding_sim must be in [-1, 1]")
        object.__setattr__(self, "stopwords", frozenset(self.stopwords))


@dataclass(frozen=True)
class Perturbation:
    token_index: int
    original: Feature
    replacement: Feature


@dataclass(frozen=True)
class AttackResult:
    """Outcome of one greedy attack.

    trace holds the similarity after each accepted perturbation, in
    acceptance order (strictly decreasing); n_queries counts every call
    to the explainer, including the original explanation.
    """

    success: bool
    final_similarity: float
    perturbed_doc: Document
    perturbations: tuple[Perturbation, ...]
    n_queries: int
    trace: tuple[float, ...]


class SynonymProvider(abc.ABC):
    """Source of replacement candidates for a word.

    candidates() never includes the query word itself and returns pairs
    sorted by non-increasing score.
    """

    @abc.abstractmethod
    def candidates(self, word: Feature, n: int) -> list[tuple[Feature, float]]:
        raise NotImplementedError


@dataclass(frozen=True)
class TableSynonymProvider(SynonymProvider):
    """Static synonym lists; all scores are 1.0 and table order is kept."""

    table: dict[Feature, tuple[Feature, ...]]

    def candidates(self, word: Feature, n: int) -> list[tuple[Feature, float]]:
        entries = self.table.get(word, ())
        out = [(syn, 1.0) for syn in entries if syn != word]
        return out[:n]


class EmbeddingSynonymProvider(SynonymProvider):
    """Cosine nearest neighbors over a fixed word-embedding vocabulary."""

    def __init__(self, words: list[Feature], vectors: np.ndarray):
        if len(words) != vectors.shape[0]:
            raise ValueError("one vector per word required")
        self._words = list(words)
        self._index = {w: i for i, w in enumerate(self._words)}
        norms = np.linalg.norm(vectors, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        self._unit = vectors / norms

    def candidates(self, word: Feature, n: int) -> list[tuple[Feature, float]]:
        i = self._index.get(word)
        if i is None:
            return []
        sims = self._unit @ self._unit[i]
        order = sorted(
            (j for j in range(len(self._words)) if j != i),
            key=lambda j: (-sims[j], self._words[j]),
        )
        return [(self._words[j], float(sims[j])) for j in order[:n]]


def importance_order(
    doc: Document, model: Classifier, stopwords: frozenset[Feature] = frozenset()
) -> list[int]:
    """Non-stopword token indices, least important to the model first.

    A token's importance is the drop in the predicted class's
    probability when that single occurrence is deleted; ties keep
    document order.
    """
    base = model.predict(doc)
    label = base.argmax_class()
    p0 = base.prob(label)
    deltas = []
    for i, token in enumerate(doc.tokens):
        if token in stopwords:
            continue
        kept = doc.tokens[:i] + doc.tokens[i + 1 :]
        reduced = Document(tokens=kept, raw=" ".join(kept))
        deltas.append((p0 - model.predict(reduced).prob(label), i))
    deltas.sort(key=lambda d: (d[0], d[1]))
    return [i for _, i in deltas]


def filter_candidates(
    doc: Document,
    token_index: int,
    provider: SynonymProvider,
    cfg: AttackConfig,
    model: Classifier,
    original_label: int,
) -> list[Feature]:
    """Admissible replacements for the token at ``token_index``.

    Keeps provider candidates that clear the score threshold, differ
    from the original word, are not stopwords, and leave the predicted
    class unchanged when substituted into ``doc``.
    """
    word = doc.tokens[token_index]
    out = []
    for cand, score in provider.candidates(word, cfg.n_neighbors):
        if score < cfg.min_embedding_sim:
            continue
        if cand == word or cand in cfg.stopwords:
            continue
        substituted = doc.with_replacement(token_index, cand)
        if model.predict(substituted).argmax_class() != original_label:
            continue
        out.append(cand)
    return out


def greedy_attack(
    doc: Document,
    model: Classifier,
    surrogate_cfg: SurrogateConfig,
    attack_cfg: AttackConfig,
    provider: SynonymProvider,
) -> AttackResult:
    """Run the greedy explanation attack on one document.

    The search path does not depend on tau except through early
    stopping, and every re-explanation draws its seed from the attack
    seed plus a per-call counter, so runs are fully reproducible and a
    stricter threshold extends (never alters) a looser threshold's
    trace.
    """
    original_expl = explain(doc, model, surrogate_cfg)
    n_queries = 1
    original_label = model.predict(doc).argmax_class()
    step = 0
    current_sim = 1.0
    if attack_cfg.fresh_baseline:
        fresh = explain(doc, model, replace(surrogate_cfg, seed=attack_cfg.seed + step))
        step += 1
        n_queries += 1
        current_sim = similarity(attack_cfg.measure, original_expl, fresh)

    budget = math.ceil(attack_cfg.max_perturb_frac * len(doc.tokens))
    current_doc = doc
    perturbations: list[Perturbation] = []
    trace: list[float] = []

    if current_sim <= attack_cfg.tau:
        return AttackResult(
            success=True,
            final_similarity=current_sim,
            perturbed_doc=current_doc,
            perturbations=(),
            n_queries=n_queries,
            trace=(),
        )

    for index in importance_order(doc, model, attack_cfg.stopwords):
        if len(perturbations) >= budget:
            break
        candidates = filter_candidates(
            current_doc, index, provider, attack_cfg, model, original_label
        )
        best_sim = None
        best_cand = None
        best_doc = None
        for cand in candidates:
            cand_doc = current_doc.with_replacement(index, cand)
            cand_expl = explain(
                cand_doc, model, replace(surrogate_cfg, seed=attack_cfg.seed + step)
            )
            step += 1
            n_queries += 1
            sim = similarity(attack_cfg.measure, original_expl, cand_expl)
            if best_sim is None or sim < best_sim:
                best_sim = sim
                best_cand = cand
                best_doc = cand_doc
        if best_sim is not None and best_sim < current_sim:
            perturbations.append(
                Perturbation(
                    token_index=index,
                    original=current_doc.tokens[index],
                    replacement=best_cand,
                )
            )
            current_doc = best_doc
            current_sim = best_sim
            trace.append(current_sim)
            if current_sim <= attack_cfg.tau:
                break

    return AttackResult(
        success=current_sim <= attack_cfg.tau,
        final_similarity=current_sim,
        perturbed_doc=current_doc,
        perturbations=tuple(perturbations),
        n_queries=n_queries,
        trace=tuple(trace),
    )


def load_synonym_table(path) -> TableSynonymProvider:
    """Synonym table file: ``word<TAB>syn1,syn2,...`` lines."""
    table: dict[str, tuple[str, ...]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError("expected 'word<TAB>syn1,syn2,...'", path=str(path), line=lineno)
            word, syn_text = parts
            syns = tuple(s for s in syn_text.split(",") if s)
            if not word or any(ch.isspace() for ch in word):
                raise ParseError(f"bad word {word!r}", path=str(path), line=lineno)
            for s in syns:
                if any(ch.isspace() for ch in s):
                    raise ParseError(f"bad synonym {s!r}", path=str(path), line=lineno)
            if word in table:
                raise ParseError(f"duplicate word {word!r}", path=str(path), line=lineno)
            table[word] = syns
    return TableSynonymProvider(table=table)


def load_embeddings(path) -> EmbeddingSynonymProvider:
    """Embedding file: ``word v1 v2 ... vk`` lines with constant k."""
    words: list[str] = []
    seen: set[str] = set()
    rows: list[list[float]] = []
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            word, *values = parts
            if not values:
                raise ParseError("embedding line has no values", path=str(path), line=lineno)
            if dim is None:
                dim = len(values)
            elif len(values) != dim:
                raise ParseError(
                    f"expected {dim} values, got {len(values)}", path=str(path), line=lineno
                )
            try:
                vec = [float(v) for v in values]
            except ValueError:
                raise ParseError("non-numeric embedding value", path=str(path), line=lineno) from None
            if word in seen:
                raise ParseError(f"duplicate word {word!r}", path=str(path), line=lineno)
            seen.add(word)
            words.append(word)
            rows.append(vec)
    if not words:
        raise ParseError("embedding file is empty", path=str(path))
    return EmbeddingSynonymProvider(words, np.array(rows, dtype=np.float64))
