"""Slow, literal reimplementations of every similarity measure.

Each function here is written directly from the measure's plain-language
definition, independently of the implementations in
:mod:`ranksim.measures`, and exists so tests can cross-check the two
paths against each other. Nothing in this module is optimized; prefix
sets are rebuilt per depth and ranks are found by linear search on
purpose. Do not use these in production code paths.
"""

from __future__ import annotations

from .core import RankedExplanation
from .measures import MeasureSpec, footrule_max_bruteforce

__all__ = ["naive_reference"]


def _abs_weights(expl: RankedExplanation) -> list[float]:
    total = sum(abs(w) for w in expl.weights)
    if total == 0:
        return [1.0 / len(expl)] * len(expl)
    return [abs(w) / total for w in expl.weights]


def _naive_jaccard(a, b):
    inter = [f for f in a.features if f in b.features]
    union = list(a.features) + [f for f in b.features if f not in a.features]
    return len(inter) / len(union)


def _naive_jaccard_weighted(a, b):
    w = _abs_weights(a)
    num = 0.0
    den = 0.0
    for i, f in enumerate(a.features):
        den += w[i]
        if f in b.features:
            num += w[i]
    for j, f in enumerate(b.features):
        if f not in a.features:
            den += w[j] if j < len(w) else w[-1]
    return num / den


def _naive_kendall(a, b):
    # Pad with list-specific sentinels so every rank past the shorter
    # list's end counts as a disagreement; that is the same thing as
    # adding the length gap to the positional mismatch count.
    mx = max(len(a), len(b))
    pa = list(a.features) + [("<pad-a>", i) for i in range(mx - len(a))]
    pb = list(b.features) + [("<pad-b>", i) for i in range(mx - len(b))]
    disagreements = 0
    for x, y in zip(pa, pb):
        if x != y:
            disagreements += 1
    return 1.0 - disagreements / mx


def _naive_kendall_weighted(a, b):
    w = _abs_weights(a)
    dist = 0.0
    for i in range(len(a)):
        if i >= len(b) or a.features[i] != b.features[i]:
            dist += w[i]
    sim = 1.0 - dist
    return min(1.0, max(0.0, sim))


def _naive_footrule(a, b, phi):
    dist = 0.0
    bf = list(b.features)
    for i, f in enumerate(a.features):
        if f in bf:
            dist += abs(i - bf.index(f))
        else:
            dist += phi
    return dist


def _naive_spearman(a, b, penalty, normalization):
    n = len(a)
    phi = n / 2 if penalty is None else penalty
    dist = _naive_footrule(a, b, phi)
    if normalization == "exhaustive":
        bound = footrule_max_bruteforce(n, phi)
    else:
        bound = (n * n) // 2
    if bound == 0:
        return 1.0 if dist == 0 else 0.0
    return min(1.0, max(0.0, 1.0 - dist / bound))


def _naive_spearman_weighted(a, b, penalty):
    n = len(a)
    phi = n / 2 if penalty is None else penalty
    w = _abs_weights(a)
    bf = list(b.features)
    dist = 0.0
    for i, f in enumerate(a.features):
        if f in bf:
            dist += w[i] * abs(i - bf.index(f))
        else:
            dist += w[i] * phi
    bound = 0.0
    for i in range(n):
        bound += w[i] * max(i, n - 1 - i)
    if bound == 0:
        return 1.0 if dist == 0 else 0.0
    return min(1.0, max(0.0, 1.0 - dist / bound))


def _naive_rbo(a, b, p):
    d = max(len(a), len(b))
    acc = 0.0
    for i in range(1, d + 1):
        prefix_a = set(a.features[:i])
        prefix_b = set(b.features[:i])
        acc += p**i * len(prefix_a & prefix_b) / i
    full = len(set(a.features) & set(b.features))
    return (full / d) * p**d + (1 - p) / p * acc


def naive_reference(spec: MeasureSpec, a: RankedExplanation, b: RankedExplanation) -> float:
    """Literal prose-definition evaluation of the measure in ``spec``."""
    if spec.kind == "jaccard":
        return _naive_jaccard(a, b)
    if spec.kind == "jaccard_weighted":
        return _naive_jaccard_weighted(a, b)
    if spec.kind == "kendall":
        return _naive_kendall(a, b)
    if spec.kind == "kendall_weighted":
        return _naive_kendall_weighted(a, b)
    if spec.kind == "spearman":
        return _naive_spearman(a, b, spec.penalty, spec.normalization)
    if spec.kind == "spearman_weighted":
        return _naive_spearman_weighted(a, b, spec.penalty)
    if spec.kind == "rbo":
        return _naive_rbo(a, b, spec.persistence)
    raise ValueError(f"unknown measure kind {spec.kind!r}")
