from fractions import Fraction
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fusioncert.errors import ZeroProbabilityEvent, UnknownVariable
from fusioncert.graphs import scenario
from fusioncert.scalar import ROOT2, Scalar, parse_scalar, snap
from fusioncert.tables import DataTable, HybridDataset, condition, marginalize, multi_ett_extend, project_to_hybrid, table_from_function

fracs = st.fractions(min_value=-20, max_value=20, max_denominator=50)


@given(fracs, fracs)
def test_inverse_is_exact(a, b):
    x = Scalar(a, b)
    if x == 0:
        return
    assert x * x.inverse() == 1


@given(fracs, fracs)
def test_sign_agrees_with_float(a, b):
    x = Scalar(a, b)
    f = float(a) + float(b) * math.sqrt(2)
    if abs(f) > 1e-9:
        assert x.sign() == (1 if f > 0 else -1)


@given(fracs, fracs)
def test_text_round_trip(a, b):
    x = Scalar(a, b)
    assert parse_scalar(str(x)) == x
    assert Scalar.from_json(x.to_json()) == x


def test_root2_squares_to_two():
    assert ROOT2 * ROOT2 == 2
    assert snap((1 + 1 / math.sqrt(2)) / 8) == (1 + ROOT2 / 2) / 8


def _uniform_ab():
    return table_from_function([("A", 2), ("B", 2)], lambda a, b: Fraction(1, 4))


def test_marginal_and_condition():
    t = table_from_function([("A", 2), ("B", 2)], lambda a, b: Fraction(1 + a + b, 8))
    m = marginalize(t, ["A"])
    assert m.prob({"A": 1}) == Fraction(5, 8)
    c = condition(t, {"A": 0})
    assert c.prob({"B": 1}) == Fraction(2, 3)
    with pytest.raises(UnknownVariable):
        marginalize(t, ["Z"])


def test_condition_on_zero_event():
    t = table_from_function([("A", 2), ("B", 2)], lambda a, b: Fraction(1, 2) if a == 0 else 0)
    with pytest.raises(ZeroProbabilityEvent):
        condition(t, {"A": 1})


def test_table_json_and_csv():
    t = _uniform_ab()
    assert DataTable.from_json(t.to_json()).equals(t)
    rows = t.to_csv().strip().splitlines()
    assert rows[0].startswith("A,B")
    assert len(rows) == 5


def test_float_tables_compare_with_tolerance():
    t = _uniform_ab()
    f = t.to_float()
    assert not f.exact
    assert f.equals(t.to_float(), tol=1e-12)
    assert np.isclose(float(f.entries.sum()), 1.0)


def test_hybrid_round_trip(evans_v1):
    g, h = evans_v1
    assert HybridDataset.from_json(h.to_json()).equals(h)
    assert h.targets() == ["B"]
    q = multi_ett_extend(g, h, ["B"])
    assert project_to_hybrid(None, q, ["B"]).equals(h)
