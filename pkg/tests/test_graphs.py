import pytest

from fusioncert.errors import TargetHasNoChildren, UnknownScenario
from fusioncert.graphs import ALIASES, full_swig, interrupt, is_full_swig, scenario, scenario_ids, validate


def test_registry_builds_valid_graphs():
    for sid in scenario_ids(include_aliases=True):
        g = scenario(sid)
        assert validate(g).ok, sid


def test_unknown_scenario():
    with pytest.raises(UnknownScenario):
        scenario("no-such-graph")


def test_alias_resolves():
    for alias, (target, _) in ALIASES.items():
        assert scenario(alias).observed == scenario(target).observed


def test_interrupt_adds_marks():
    g = scenario("evans-uc")
    assert g.eligible_targets() == ["B"]
    s = interrupt(g, ["B"])
    assert s.marks
    assert all("B" not in s.parents(c) for c in g.children("B") if c in s.observed)


def test_target_without_children():
    with pytest.raises(TargetHasNoChildren):
        interrupt(scenario("evans-uc"), ["A"])


def test_full_swig_is_saturated():
    for sid in ("measurement-dependence", "bilocal-chain", "triangle-chain"):
        assert is_full_swig(full_swig(scenario(sid)))


def test_cardinality_override():
    g = scenario("measurement-dependence", {"A": 3})
    assert g.card("A") == 3
