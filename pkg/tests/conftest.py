import pytest

from ranksim import RankedExplanation


@pytest.fixture
def make_expl():
    """Build an explanation from (feature, weight) pairs or bare features.

    Bare feature lists get strictly decreasing weights so the given order
    is the canonical rank order.
    """

    def build(items):
        if items and isinstance(items[0], str):
            n = len(items)
            return RankedExplanation([(f, float(n - i)) for i, f in enumerate(items)])
        return RankedExplanation(items)

    return build
