import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fractions import Fraction

from wassertree import BoundaryMeasure, MetricTree


@pytest.fixture
def caterpillar():
    """Two-vertex spine of length 2; ends A,B at the base v0 and C,D at v1."""
    return MetricTree(
        vertices=["v0", "v1"],
        edges=[("v0", "v1", 2)],
        ends=[("A", "v0"), ("B", "v0"), ("C", "v1"), ("D", "v1")],
        base="v0",
    )


@pytest.fixture
def caterpillar_measures():
    minus = BoundaryMeasure({"A": Fraction(1, 2), "C": Fraction(1, 2)})
    plus = BoundaryMeasure({"B": Fraction(1, 2), "D": Fraction(1, 2)})
    return minus, plus


@pytest.fixture
def tripod():
    """Single vertex with three ends."""
    return MetricTree(
        vertices=["c"],
        edges=[],
        ends=[("A", "c"), ("B", "c"), ("C", "c")],
        base="c",
    )
