import math

import numpy as np
import pytest

from fusioncert.bilinear import (Compatible, Incompatible, _start_points, check_feasibility, factorization_problem,
                                 minimize_mq, seesaw)
from fusioncert.classical import random_model
from fusioncert.graphs import scenario
from fusioncert.inflation import solve_dataset
from fusioncert.strategies import strategy_dataset


def _evans(v):
    g, h = strategy_dataset("evans-werner", {"v": v}, exact=False)
    return g, h, factorization_problem(g, ["Q"], h, targets=["B"])


@pytest.mark.parametrize("v", [1.0, 0.85])
def test_minimum_matches_closed_form(v):
    _, _, p = _evans(v)
    r = minimize_mq(p)
    assert r.lower <= r.upper <= r.lower + r.gap_tol
    assert abs(0.5 * (r.lower + r.upper) - (math.sqrt(2) * v - 1)) < 1e-3


def test_seesaw_trace_never_increases():
    _, _, p = _evans(1.0)
    for q0 in _start_points(p, 4, seed=1):
        q, trace = seesaw(p, q0)
        assert all(b <= a + 1e-9 for a, b in zip(trace, trace[1:]))
        assert p.residual(q) < 1e-7


def test_classical_data_factorizes():
    g = scenario("evans-uc")
    rng = np.random.default_rng(5)
    for k in range(3):
        h = random_model(g, rng, latent_card=2, deterministic=False).hybrid(g, ["B"], exact=False)
        res = check_feasibility(factorization_problem(g, ["Q"], h, targets=["B"]))
        assert isinstance(res, Compatible)
        assert res.result.lower <= 1e-9


def test_direction_agrees_with_inflation():
    for v, refuted in ((1, True), (0.5, False)):
        g, h = strategy_dataset("evans-werner", {"v": v})
        _, inf = solve_dataset("evans-uc", h, g)
        res = check_feasibility(factorization_problem(g, ["Q"], h.to_float(), targets=["B"]))
        assert inf.feasible is not refuted
        assert isinstance(res, Incompatible) is refuted


def test_gap_must_be_positive():
    _, _, p = _evans(1.0)
    with pytest.raises(ValueError):
        minimize_mq(p, gap_tol=0)
