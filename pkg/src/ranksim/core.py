"""Core domain types: documents, ranked explanations, and label distributions.

Features are plain strings (single whitespace-free tokens). A ranked
explanation is an ordered list of unique (feature, weight) pairs kept in
canonical order: non-increasing absolute weight, ties broken by ascending
feature text.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "ParseError",
    "RankedExplanation",
    "Document",
    "LabelDistribution",
    "normalize_weights",
    "parse_explanation",
    "serialize_explanation",
    "load_explanation",
    "save_explanation",
    "load_corpus",
    "load_stopwords",
]

# A feature is a single token: non-empty text containing no whitespace.
Feature = str

# Normalized per-rank weights: non-negative, summing to 1.
WeightVector = tuple[float, ...]


class ParseError(ValueError):
    """A line-oriented input file did not match its expected format."""

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        loc = ""
        if path is not None:
            loc += f"{path}:"
        if line is not None:
            loc += f"{line}:"
        super().__init__(f"{loc} {message}" if loc else message)


def _check_feature(token: str) -> None:
    if not isinstance(token, str) or not token:
        raise ValueError("feature must be a non-empty string")
    if any(ch.isspace() for ch in token):
        raise ValueError(f"feature contains whitespace: {token!r}")


@dataclass(frozen=True)
class RankedExplanation:
    """An ordered list of unique (feature, weight) pairs.

    Entries are canonicalized on construction: sorted by descending
    absolute weight, with ties broken by ascending feature text. Rank 0
    is the most important feature.
    """

    entries: tuple[tuple[Feature, float], ...]

    def __init__(self, entries):
        items = [(f, float(w)) for f, w in entries]
        if not items:
            raise ValueError("explanation must contain at least one entry")
        for f, w in items:
            _check_feature(f)
            if not math.isfinite(w):
                raise ValueError(f"non-finite weight for feature {f!r}: {w}")
        if len({f for f, _ in items}) != len(items):
            raise ValueError("explanation features must be pairwise distinct")
        items.sort(key=lambda e: (-abs(e[1]), e[0]))
        object.__setattr__(self, "entries", tuple(items))

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def features(self) -> tuple[Feature, ...]:
        return tuple(f for f, _ in self.entries)

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(w for _, w in self.entries)

    def rank_of(self, feature: Feature) -> int | None:
        """0-based rank of ``feature``, or None if absent."""
        for i, (f, _) in enumerate(self.entries):
            if f == feature:
                return i
        return None

    def rank_index(self) -> dict[Feature, int]:
        """Feature -> 0-based rank mapping (for repeated lookups)."""
        return {f: i for i, (f, _) in enumerate(self.entries)}


def normalize_weights(expl: RankedExplanation) -> WeightVector:
    """Per-rank weights normalized by absolute value.

    Returns |w_k| / sum_j |w_j| for each rank k. An all-zero explanation
    yields the uniform vector 1/n, so weighted measures degrade to
    unweighted behaviour instead of failing.
    """
    absw = [abs(w) for w in expl.weights]
    top = max(absw)
    if top == 0.0:
        n = len(absw)
        return tuple(1.0 / n for _ in absw)
    # Scale by the largest magnitude first so huge weights cannot
    # overflow the sum.
    scaled = [w / top for w in absw]
    total = math.fsum(scaled)
    return tuple(w / total for w in scaled)


@dataclass(frozen=True)
class Document:
    """A tokenized text. ``tokens`` is always the whitespace split of ``raw``.

    Parsed (user-facing) documents are non-empty; use :meth:`from_raw`.
    Internally the explainer builds masked variants directly, which may
    be empty when every word is masked out.
    """

    tokens: tuple[Feature, ...]
    raw: str

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if list(self.tokens) != self.raw.split():
            raise ValueError("tokens must equal the whitespace split of raw")

    @classmethod
    def from_raw(cls, raw: str) -> "Document":
        tokens = raw.split()
        if not tokens:
            raise ValueError("document must contain at least one token")
        return cls(tokens=tuple(tokens), raw=raw)

    def __len__(self) -> int:
        return len(self.tokens)

    def with_replacement(self, index: int, replacement: Feature) -> "Document":
        """Copy of this document with the token at ``index`` substituted."""
        _check_feature(replacement)
        tokens = list(self.tokens)
        tokens[index] = replacement
        return Document(tokens=tuple(tokens), raw=" ".join(tokens))


@dataclass(frozen=True, eq=False)
class LabelDistribution:
    """Predicted probability per class id."""

    probabilities: dict[int, float]

    def __eq__(self, other) -> bool:
        if not isinstance(other, LabelDistribution):
            return NotImplemented
        return self.probabilities == other.probabilities

    def __post_init__(self):
        probs = dict(self.probabilities)
        if len(probs) < 2:
            raise ValueError("label distribution needs at least 2 classes")
        for c, p in probs.items():
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"probability for class {c} outside [0,1]: {p}")
        if abs(math.fsum(probs.values()) - 1.0) > 1e-9:
            raise ValueError("probabilities must sum to 1")
        object.__setattr__(self, "probabilities", probs)

    def prob(self, class_id: int) -> float:
        return self.probabilities[class_id]

    def argmax_class(self) -> int:
        """Class with the highest probability; ties go to the lowest id."""
        best = max(self.probabilities.items(), key=lambda kv: (kv[1], -kv[0]))
        return best[0]


def serialize_explanation(expl: RankedExplanation) -> str:
    """Explanation TSV: one ``feature<TAB>weight`` line per rank.

    Weights use shortest round-trip decimal text (at most 17 significant
    digits), so parse(serialize(e)) == e exactly.
    """
    return "".join(f"{f}\t{w!r}\n" for f, w in expl.entries)


def parse_explanation(text: str, *, path: str | None = None) -> RankedExplanation:
    """Parse Explanation TSV. Raises :class:`ParseError` naming the bad line."""
    entries: list[tuple[str, float]] = []
    seen: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(
                f"expected 'feature<TAB>weight', got {line!r}", path=path, line=lineno
            )
        token, weight_text = parts
        try:
            _check_feature(token)
        except ValueError as exc:
            raise ParseError(str(exc), path=path, line=lineno) from None
        try:
            weight = float(weight_text)
        except ValueError:
            raise ParseError(f"non-numeric weight {weight_text!r}", path=path, line=lineno) from None
        if not math.isfinite(weight):
            raise ParseError(f"weight must be finite, got {weight_text!r}", path=path, line=lineno)
        if token in seen:
            raise ParseError(f"duplicate feature {token!r}", path=path, line=lineno)
        seen.add(token)
        entries.append((token, weight))
    if not entries:
        raise ParseError("explanation file is empty", path=path)
    return RankedExplanation(entries)


def load_explanation(path) -> RankedExplanation:
    with open(path, encoding="utf-8") as fh:
        return parse_explanation(fh.read(), path=str(path))


def save_explanation(expl: RankedExplanation, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_explanation(expl))


def load_corpus(path) -> list[tuple[int, Document]]:
    """Corpus file: one ``label<TAB>raw text`` document per line."""
    docs: list[tuple[int, Document]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t", 1)
            if len(parts) != 2:
                raise ParseError("expected 'label<TAB>text'", path=str(path), line=lineno)
            label_text, raw = parts
            try:
                label = int(label_text)
            except ValueError:
                raise ParseError(
                    f"non-integer label {label_text!r}", path=str(path), line=lineno
                ) from None
            if not raw.split():
                raise ParseError("document text is empty", path=str(path), line=lineno)
            docs.append((label, Document.from_raw(raw)))
    if not docs:
        raise ParseError("corpus file contains no documents", path=str(path))
    return docs


def load_stopwords(path) -> frozenset[Feature]:
    """Stopword file: one token per line, blank lines ignored."""
    words: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            token = line.strip()
            if not token:
                continue
            try:
                _check_feature(token)
            except ValueError as exc:
                raise ParseError(str(exc), path=str(path), line=lineno) from None
            words.add(token)
    return frozenset(words)
