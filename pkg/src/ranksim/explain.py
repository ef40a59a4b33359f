"""Local surrogate explanations for deterministic text classifiers.

The explainer perturbs a document by deleting random subsets of its
unique words, queries the classifier on each variant, and fits a
weighted ridge regression from word-presence indicators to the predicted
probability of the originally predicted class. The fitted coefficients,
ranked by absolute value, form the explanation.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import Document, Feature, LabelDistribution, ParseError, RankedExplanation
from .measures import MeasureSpec, similarity

__all__ = [
    "Classifier",
    "LexiconClassifier",
    "SurrogateConfig",
    "sample_masks",
    "kernel_weight",
    "fit_surrogate",
    "explain",
    "inherent_instability",
    "InstabilityResult",
    "load_lexicon",
]

BIAS_TOKEN = "__bias__"


class Classifier(abc.ABC):
    """A deterministic label-distribution function over documents."""

    @abc.abstractmethod
    def predict(self, doc: Document) -> LabelDistribution:
        raise NotImplementedError

    def predict_many(self, docs: list[Document]) -> list[LabelDistribution]:
        return [self.predict(d) for d in docs]


def _softmax(scores: dict[int, float]) -> dict[int, float]:
    classes = sorted(scores)
    mx = max(scores.values())
    exps = {c: math.exp(scores[c] - mx) for c in classes}
    total = math.fsum(exps.values())
    return {c: exps[c] / total for c in classes}


@dataclass(frozen=True)
class LexiconClassifier(Classifier):
    """Analytic classifier: per-class additive word scores plus a bias.

    The score of a class on a document is its bias plus the sum of that
    class's score for every token occurrence; probabilities are the
    softmax of the class scores. Being linear in token counts, expected
    explanation rankings can be derived in closed form, which makes this
    the ground-truth model for testing the explainer and the attack.
    """

    scores: dict[int, dict[Feature, float]]
    biases: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        classes = sorted(self.scores)
        if len(classes) < 2:
            raise ValueError("lexicon classifier needs at least 2 classes")
        for c in classes:
            for word, s in self.scores[c].items():
                if not math.isfinite(s):
                    raise ValueError(f"non-finite score for class {c}, word {word!r}")
        for c, b in self.biases.items():
            if c not in self.scores:
                raise ValueError(f"bias given for unknown class {c}")
            if not math.isfinite(b):
                raise ValueError(f"non-finite bias for class {c}")

    @property
    def classes(self) -> tuple[int, ...]:
        return tuple(sorted(self.scores))

    def _raw_scores(self, tokens) -> dict[int, float]:
        out = {}
        for c in self.classes:
            table = self.scores[c]
            total = self.biases.get(c, 0.0)
            for t in tokens:
                total += table.get(t, 0.0)
            out[c] = total
        return out

    def predict(self, doc: Document) -> LabelDistribution:
        return LabelDistribution(_softmax(self._raw_scores(doc.tokens)))


@dataclass(frozen=True)
class SurrogateConfig:
    """Knobs for the surrogate sampling and fit.

    n_samples: perturbed variants drawn per explanation (the first is
        always the unperturbed document).
    kernel_width: sigma of the exponential proximity kernel.
    ridge_lambda: L2 penalty on the word coefficients (intercept free).
    seed: RNG seed; explanations are deterministic given (doc, model, seed).
    """

    n_samples: int = 500
    kernel_width: float = 25.0
    ridge_lambda: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < 2:
            raise ValueError("n_samples must be >= 2")
        if not (math.isfinite(self.kernel_width) and self.kernel_width > 0):
            raise ValueError("kernel_width must be positive and finite")
        if not (math.isfinite(self.ridge_lambda) and self.ridge_lambda > 0):
            raise ValueError("ridge_lambda must be positive and finite")


def sample_masks(m: int, cfg: SurrogateConfig, rng: np.random.Generator) -> np.ndarray:
    """Binary presence masks over ``m`` unique words, shape (n_samples, m).

    Row 0 is all ones. Every other row removes k words with k uniform on
    {1..m} and the removed positions uniform without replacement (drawn
    as the first k entries of a uniform random permutation).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    n = cfg.n_samples
    masks = np.ones((n, m), dtype=np.uint8)
    if n > 1:
        ks = rng.integers(1, m + 1, size=n - 1)
        perms = np.argsort(rng.random((n - 1, m)), axis=1)
        removed = np.arange(m)[None, :] < ks[:, None]
        rows, cols = np.nonzero(removed)
        masks[rows + 1, perms[rows, cols]] = 0
    return masks


def kernel_weight(mask: np.ndarray, kernel_width: float) -> float:
    """Proximity weight exp(-D^2 / sigma^2) of a mask to the full document.

    D is the cosine distance between the mask and the all-ones vector;
    the all-zero mask is assigned distance 1.
    """
    mask = np.asarray(mask)
    m = mask.shape[0]
    kept = int(mask.sum())
    if kept == 0:
        dist = 1.0
    else:
        dist = 1.0 - math.sqrt(kept / m)
    return math.exp(-(dist * dist) / (kernel_width * kernel_width))


def fit_surrogate(
    masks: np.ndarray,
    sample_weights: np.ndarray,
    responses: np.ndarray,
    ridge_lambda: float,
) -> tuple[np.ndarray, float]:
    """Weighted ridge fit of responses on mask indicators.

    Solves the normal equations with an unpenalized intercept; a positive
    ridge term makes the system nonsingular, so the solution is unique.
    Returns (coefficients, intercept).
    """
    x = np.asarray(masks, dtype=np.float64)
    w = np.asarray(sample_weights, dtype=np.float64)
    y = np.asarray(responses, dtype=np.float64)
    n, m = x.shape
    design = np.hstack([np.ones((n, 1)), x])
    wx = design * w[:, None]
    lhs = wx.T @ design
    lhs[1:, 1:] += ridge_lambda * np.eye(m)
    rhs = wx.T @ y
    theta = np.linalg.solve(lhs, rhs)
    return theta[1:], float(theta[0])


def _unique_words(doc: Document) -> list[Feature]:
    return list(dict.fromkeys(doc.tokens))


def _masked_document(doc: Document, word_of: dict[Feature, int], mask) -> Document:
    # Masking a word removes every occurrence of it. Tokens come from an
    # already-validated document, so skip re-validation on the hot path.
    kept = tuple(t for t in doc.tokens if mask[word_of[t]])
    out = object.__new__(Document)
    object.__setattr__(out, "tokens", kept)
    object.__setattr__(out, "raw", " ".join(kept))
    return out


def _kernel_weights(masks: np.ndarray, kernel_width: float) -> np.ndarray:
    # Vectorized kernel_weight over mask rows.
    kept = masks.sum(axis=1, dtype=np.float64)
    dist = 1.0 - np.sqrt(kept / masks.shape[1])
    dist[kept == 0] = 1.0
    return np.exp(-(dist * dist) / (kernel_width * kernel_width))


def explain(doc: Document, model: Classifier, cfg: SurrogateConfig) -> RankedExplanation:
    """Explain ``model``'s prediction on ``doc`` with a linear surrogate.

    Every unique word of the document becomes a feature; its weight is
    the fitted ridge coefficient for the word's presence indicator
    against the probability of the originally predicted class.
    """
    words = _unique_words(doc)
    word_of = {wd: i for i, wd in enumerate(words)}
    rng = np.random.default_rng(cfg.seed)
    masks = sample_masks(len(words), cfg, rng)
    target_class = model.predict(doc).argmax_class()
    variants = [_masked_document(doc, word_of, mask) for mask in masks]
    responses = np.array([d.prob(target_class) for d in model.predict_many(variants)])
    weights = _kernel_weights(masks, cfg.kernel_width)
    coefs, _ = fit_surrogate(masks, weights, responses, cfg.ridge_lambda)
    return RankedExplanation(list(zip(words, (float(c) for c in coefs))))


@dataclass(frozen=True)
class InstabilityResult:
    """Pairwise similarities of repeated explanations of one document."""

    values: tuple[float, ...]
    mean: float
    min: float


def inherent_instability(
    doc: Document,
    model: Classifier,
    cfg: SurrogateConfig,
    repeats: int,
    spec: MeasureSpec,
) -> InstabilityResult:
    """Variation among explanations of the identical document.

    Runs the explainer ``repeats`` times with seeds cfg.seed + 0 ..
    cfg.seed + repeats - 1 and scores all pairs; the first explanation of
    a pair is the weight/penalty reference.
    """
    if repeats < 2:
        raise ValueError("repeats must be >= 2")
    expls = [explain(doc, model, replace(cfg, seed=cfg.seed + i)) for i in range(repeats)]
    values = []
    for i in range(repeats):
        for j in range(i + 1, repeats):
            values.append(similarity(spec, expls[i], expls[j]))
    return InstabilityResult(
        values=tuple(values),
        mean=math.fsum(values) / len(values),
        min=min(values),
    )


def load_lexicon(path) -> LexiconClassifier:
    """Lexicon file: ``class_id<TAB>word<TAB>score`` lines.

    Lines whose word is ``__bias__`` set the class bias instead of a
    word score.
    """
    scores: dict[int, dict[str, float]] = {}
    biases: dict[int, float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ParseError(
                    "expected 'class_id<TAB>word<TAB>score'", path=str(path), line=lineno
                )
            class_text, word, score_text = parts
            try:
                class_id = int(class_text)
            except ValueError:
                raise ParseError(
                    f"non-integer class id {class_text!r}", path=str(path), line=lineno
                ) from None
            try:
                score = float(score_text)
            except ValueError:
                raise ParseError(
                    f"non-numeric score {score_text!r}", path=str(path), line=lineno
                ) from None
            if not math.isfinite(score):
                raise ParseError(f"score must be finite, got {score_text!r}", path=str(path), line=lineno)
            if word == BIAS_TOKEN:
                biases[class_id] = score
            else:
                scores.setdefault(class_id, {})[word] = score
    for class_id in biases:
        scores.setdefault(class_id, {})
    try:
        return LexiconClassifier(scores=scores, biases=biases)
    except ValueError as exc:
        raise ParseError(str(exc), path=str(path)) from None
