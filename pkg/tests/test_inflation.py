from fractions import Fraction

import pytest

from fusioncert.claims import inflation_soundness
from fusioncert.inflation import build_inflation, solve_dataset, verify_certificate
from fusioncert.strategies import strategy_dataset
from fusioncert.witness import evaluate


def test_full_visibility_is_refuted(evans_v1):
    g, h = evans_v1
    inst, res = solve_dataset("evans-uc", h, g)
    assert not res.feasible
    cert = res.certificate
    assert cert.value > 0
    assert verify_certificate(inst, cert)


def test_certificate_renders_a_violated_witness(evans_v1):
    g, h = evans_v1
    _, res = solve_dataset("evans-uc", h, g)
    w = res.certificate.witness()
    assert w.verified
    assert not evaluate(w, h, g).satisfied


def test_low_visibility_is_feasible():
    g, h = strategy_dataset("evans-werner", {"v": Fraction(9, 10)})
    _, res = solve_dataset("evans-uc", h, g)
    assert res.feasible


def test_random_classical_models_are_feasible():
    count, bad = inflation_soundness(10, seed=3)
    assert bad == 0


def test_instances_are_symmetric():
    inst = build_inflation("bilocal-chain")
    assert inst.orbits
    assert inst.rows()
