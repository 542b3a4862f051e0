from fractions import Fraction

import pytest

from fusioncert.catalog import builtin_keys, builtin_witness
from fusioncert.claims import vertex_satisfaction
from fusioncert.errors import GuardFailed, UnknownWitness
from fusioncert.scalar import ROOT2
from fusioncert.strategies import strategy_dataset
from fusioncert.witness import P, Poly, Witness, evaluate, guarded_evaluate


def test_catalog_round_trips_through_json():
    for key in builtin_keys():
        w = builtin_witness(key)
        assert str(Witness.from_json(w.to_json())) == str(w)


def test_unknown_witness():
    with pytest.raises(UnknownWitness):
        builtin_witness("nope")


def test_hardy_pullback_violated_on_chsh_tables():
    g, h = strategy_dataset("chsh-instrument")
    v = evaluate(builtin_witness("hardy-P"), h, g)
    assert not v.satisfied


def test_bonet_quantum_value():
    g, h = strategy_dataset("bonet")
    q = evaluate(builtin_witness("bonet-Q"), h, g)
    assert q.value == (3 + ROOT2) / 2
    assert not q.satisfied
    assert not evaluate(builtin_witness("bonet-P"), h, g).satisfied


def test_evans_witness_levels_agree(evans_v1):
    g, h = evans_v1
    p = evaluate(builtin_witness("evans-P"), h, g)
    q = evaluate(builtin_witness("evans-Q"), h, g)
    assert p.value == q.value
    assert not p.satisfied


def test_guards_need_zero_support(evans_v1):
    g, h = evans_v1
    nonzero = Witness("t", P(A=0), ">=", Poly(), "evans-uc", guards=(P(A=0, B=0, C=0),))
    with pytest.raises(GuardFailed):
        guarded_evaluate(nonzero, h, g)
    zero = Witness("t", P(A=0), ">=", Poly(), "evans-uc", guards=(P(A=0, B=0, C=0) - P(A=0, B=0, C=0),))
    assert guarded_evaluate(zero, h, g).satisfied


def test_verified_witnesses_hold_on_classical_vertices():
    keys = [k for k in builtin_keys() if k.startswith(("hardy", "bonet", "chsh"))]
    violations, checked, _ = vertex_satisfaction(keys)
    assert checked > 0
    assert violations == []
