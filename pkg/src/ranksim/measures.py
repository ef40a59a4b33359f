"""Similarity measures for ranked explanation lists.

Nine measures: Jaccard, Kendall-style positional dissonance, Spearman's
footrule with a missing-element penalty, each in unweighted and weighted
form, plus rank-biased overlap (RBO) parameterized by persistence.

Every function takes ``a`` as the original explanation and ``b`` as the
perturbed one. Weighted variants and the footrule penalty are derived
from ``a`` only, so weighted/penalized measures are intentionally
asymmetric in their arguments. All similarities are in [0, 1]; 1 means
identical ranking.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

from .core import RankedExplanation, normalize_weights

__all__ = [
    "MeasureSpec",
    "MEASURE_KINDS",
    "NORMALIZATION_MODES",
    "jaccard",
    "jaccard_weighted",
    "kendall",
    "kendall_weighted",
    "spearman",
    "spearman_weighted",
    "spearman_footrule_distance",
    "rbo",
    "footrule_max_penalized",
    "footrule_max_bruteforce",
    "similarity",
]

# A similarity is a plain float in [0, 1].
SimilarityValue = float

MEASURE_KINDS = (
    "jaccard",
    "jaccard_weighted",
    "kendall",
    "kendall_weighted",
    "spearman",
    "spearman_weighted",
    "rbo",
)

# "reversal": classic full-inversion bound floor(n^2/2).
# "exhaustive": exact penalized maximum from footrule_max_bruteforce (n <= 8).
NORMALIZATION_MODES = ("reversal", "exhaustive")

BRUTEFORCE_MAX_N = 8


@dataclass(frozen=True)
class MeasureSpec:
    """Selection of one measure plus its parameters.

    persistence: RBO persistence p in (0, 1); required iff kind == "rbo".
    penalty: footrule charge for an element of the original list missing
        from the perturbed list (Spearman variants); None means n/2,
        resolved per pair from the original list's length.
    normalization: denominator used to turn the footrule distance into a
        similarity (unweighted Spearman only).
    """

    kind: str
    persistence: float | None = None
    penalty: float | None = None
    normalization: str = "reversal"

    def __post_init__(self):
        if self.kind not in MEASURE_KINDS:
            raise ValueError(f"unknown measure kind {self.kind!r}")
        if self.kind == "rbo":
            if self.persistence is None or not (0.0 < self.persistence < 1.0):
                raise ValueError("rbo requires persistence strictly inside (0, 1)")
        elif self.persistence is not None:
            raise ValueError(f"persistence only applies to rbo, not {self.kind}")
        if self.penalty is not None:
            if not math.isfinite(self.penalty) or self.penalty < 0:
                raise ValueError("penalty must be finite and >= 0")
        if self.normalization not in NORMALIZATION_MODES:
            raise ValueError(f"unknown normalization {self.normalization!r}")

    @property
    def label(self) -> str:
        if self.kind == "rbo":
            return f"rbo_{self.persistence:g}"
        return self.kind


def _clamp(x: float) -> float:
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


def jaccard(a: RankedExplanation, b: RankedExplanation) -> float:
    sa, sb = set(a.features), set(b.features)
    return len(sa & sb) / len(sa | sb)


def jaccard_weighted(a: RankedExplanation, b: RankedExplanation) -> float:
    """Jaccard with set members weighted by the original list's rank weights.

    Numerator: weight mass of shared features, read at their rank in
    ``a``. Denominator: all of ``a``'s mass (1 by normalization) plus,
    for each feature only in ``b``, the weight of its rank in ``b``
    looked up against ``a``'s weight vector (clamped to the last rank).
    """
    w = normalize_weights(a)
    last = len(w) - 1
    b_set = set(b.features)
    num = math.fsum(w[i] for i, f in enumerate(a.features) if f in b_set)
    den_a = math.fsum(w[i] for i, f in enumerate(a.features))
    a_set = set(a.features)
    den_b = math.fsum(w[min(j, last)] for j, f in enumerate(b.features) if f not in a_set)
    return num / (den_a + den_b)


def kendall(a: RankedExplanation, b: RankedExplanation) -> float:
    """Positional dissonance: count of ranks where the lists disagree.

    The length gap between the lists is added to the count; similarity is
    1 - count / max(|a|, |b|).
    """
    fa, fb = a.features, b.features
    mn, mx = min(len(fa), len(fb)), max(len(fa), len(fb))
    dist = sum(1 for i in range(mn) if fa[i] != fb[i]) + (mx - mn)
    return 1.0 - dist / mx


def kendall_weighted(a: RankedExplanation, b: RankedExplanation) -> float:
    """Positional dissonance weighted by the original list's rank weights.

    Ranks of ``a`` beyond the shorter length count as full mismatches.
    The weights sum to 1, so the distance is its own [0, 1] bound.
    """
    w = normalize_weights(a)
    fa, fb = a.features, b.features
    mn = min(len(fa), len(fb))
    dist = math.fsum(w[i] for i in range(mn) if fa[i] != fb[i])
    dist += math.fsum(w[i] for i in range(mn, len(fa)))
    return _clamp(1.0 - dist)


def _resolve_penalty(a: RankedExplanation, penalty: float | None) -> float:
    return len(a) / 2.0 if penalty is None else penalty


def spearman_footrule_distance(
    a: RankedExplanation, b: RankedExplanation, penalty: float | None = None
) -> float:
    """Sum over ``a``'s features of |rank in a - rank in b|.

    Features of ``a`` missing from ``b`` contribute ``penalty``
    (default |a|/2) instead of a displacement.
    """
    phi = _resolve_penalty(a, penalty)
    rank_b = b.rank_index()
    total = 0.0
    for i, f in enumerate(a.features):
        j = rank_b.get(f)
        total += phi if j is None else abs(i - j)
    return total


def spearman(
    a: RankedExplanation,
    b: RankedExplanation,
    penalty: float | None = None,
    normalization: str = "reversal",
) -> float:
    """Footrule distance converted to similarity.

    Under "reversal" the denominator is floor(n^2/2), the classic
    full-inversion maximum; penalized distances can exceed it, so the
    result is clamped into [0, 1]. Under "exhaustive" the denominator is
    the exact penalized maximum (n <= 8 only). A single-feature list has
    a zero bound; it compares as 1 when the distance is 0, else 0.
    """
    n = len(a)
    phi = _resolve_penalty(a, penalty)
    dist = spearman_footrule_distance(a, b, phi)
    if normalization == "reversal":
        bound = float((n * n) // 2)
    elif normalization == "exhaustive":
        bound = footrule_max_bruteforce(n, phi)
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    if bound == 0.0:
        return 1.0 if dist == 0.0 else 0.0
    return _clamp(1.0 - dist / bound)


def spearman_weighted(
    a: RankedExplanation, b: RankedExplanation, penalty: float | None = None
) -> float:
    """Footrule with each displacement weighted by ``a``'s rank weight.

    Normalized by the per-element maximal displacement bound
    sum_i w_i * max(i, n-1-i), a guaranteed upper bound on the weighted
    distance of any permutation.
    """
    n = len(a)
    phi = _resolve_penalty(a, penalty)
    w = normalize_weights(a)
    rank_b = b.rank_index()
    terms = []
    for i, f in enumerate(a.features):
        j = rank_b.get(f)
        terms.append(w[i] * (phi if j is None else abs(i - j)))
    dist = math.fsum(terms)
    bound = math.fsum(w[i] * max(i, n - 1 - i) for i in range(n))
    if bound == 0.0:
        return 1.0 if dist == 0.0 else 0.0
    return _clamp(1.0 - dist / bound)


def rbo(a: RankedExplanation, b: RankedExplanation, p: float) -> float:
    """Rank-biased overlap at fixed depth d = max(|a|, |b|).

    Average of prefix-overlap ratios, geometrically weighted by the
    persistence p; prefixes deeper than a list's length are the whole
    list. Smaller p concentrates the score on top ranks.
    """
    if not (0.0 < p < 1.0):
        raise ValueError("persistence must be strictly inside (0, 1)")
    fa, fb = a.features, b.features
    d = max(len(fa), len(fb))
    seen_a: set[str] = set()
    seen_b: set[str] = set()
    overlap = 0
    terms = []
    p_i = 1.0
    for i in range(1, d + 1):
        if i <= len(fa):
            x = fa[i - 1]
            if x in seen_b:
                overlap += 1
            seen_a.add(x)
        if i <= len(fb):
            y = fb[i - 1]
            if y in seen_a:
                overlap += 1
            seen_b.add(y)
        p_i *= p
        terms.append(p_i * overlap / i)
    tail = (overlap / d) * p_i
    return tail + (1.0 - p) / p * math.fsum(terms)


def footrule_max_penalized(n: int, penalty: float) -> float:
    """Closed-form maximum of the penalized footrule distance.

    For penalty >= n-1 every element is best dropped, giving penalty*n.
    Below that, the bound follows the full-reversal displacement pattern
    n-1, n-3, ... with the middle block (displacements under the
    penalty) traded for penalties; the block boundary index is the
    largest one whose reversal displacement still reaches the penalty.
    Use footrule_max_bruteforce to audit this bound; it is known to fall
    short of the true maximum for some penalties below n-1.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if penalty < 0 or not math.isfinite(penalty):
        raise ValueError("penalty must be finite and >= 0")
    if penalty >= n - 1:
        return penalty * n
    best_i = max(i for i in range(1, (n + 1) // 2 + 1) if n + 1 - 2 * i >= penalty)
    mid = n - 2 * best_i
    return float((n * n) // 2) + penalty * mid - 2 * float((mid * mid) // 2)


@lru_cache(maxsize=None)
def _max_displacement_by_drops(n: int) -> tuple[float, ...]:
    """best[k] = max total |i - rank| over keeping n-k of n elements.

    Exhaustive: every subset of original ranks to keep, every injective
    assignment of kept elements to the n available ranks.
    """
    best = [0.0] * (n + 1)
    ranks = range(n)
    for k in range(n + 1):
        keep = n - k
        top = 0
        for kept in itertools.combinations(ranks, keep):
            for targets in itertools.permutations(ranks, keep):
                d = sum(abs(o - t) for o, t in zip(kept, targets))
                if d > top:
                    top = d
        best[k] = float(top)
    return tuple(best)


def footrule_max_bruteforce(n: int, penalty: float) -> float:
    """Exact maximum penalized footrule distance by exhaustive search.

    Considers every way to drop a subset of the original list's elements
    (each dropped element costs ``penalty``) and to place the kept ones
    at arbitrary distinct ranks. Factorial; limited to n <= 8.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > BRUTEFORCE_MAX_N:
        raise ValueError(f"bruteforce search is limited to n <= {BRUTEFORCE_MAX_N}, got {n}")
    if penalty < 0 or not math.isfinite(penalty):
        raise ValueError("penalty must be finite and >= 0")
    best = _max_displacement_by_drops(n)
    return max(best[k] + k * penalty for k in range(n + 1))


def similarity(spec: MeasureSpec, a: RankedExplanation, b: RankedExplanation) -> float:
    """Dispatch to the measure selected by ``spec``."""
    kind = spec.kind
    if kind == "jaccard":
        return jaccard(a, b)
    if kind == "jaccard_weighted":
        return jaccard_weighted(a, b)
    if kind == "kendall":
        return kendall(a, b)
    if kind == "kendall_weighted":
        return kendall_weighted(a, b)
    if kind == "spearman":
        return spearman(a, b, spec.penalty, spec.normalization)
    if kind == "spearman_weighted":
        return spearman_weighted(a, b, spec.penalty)
    if kind == "rbo":
        return rbo(a, b, spec.persistence)
    raise ValueError(f"unknown measure kind {kind!r}")
