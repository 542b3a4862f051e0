from fractions import Fraction

import numpy as np
import pytest

from fusioncert.errors import ParamOutOfRange, UnknownStrategy
from fusioncert.quantum import born_float, werner
from fusioncert.scalar import ROOT2
from fusioncert.strategies import STRATEGIES, build_strategy, strategy_dataset


@pytest.mark.parametrize("sid", sorted(STRATEGIES))
def test_tables_are_distributions(sid):
    g, h = strategy_dataset(sid, exact=False)
    for name, t in h.tables().items():
        assert not t.check(), (sid, name)


def test_evans_werner_closed_form(evans_v1):
    _, h = evans_v1
    assert h.observational.prob({"A": 0, "B": 0, "C": 0}) == (1 + ROOT2 / 2) / 8
    for b in (0, 1):
        d = h.do("B", b)
        assert d.prob({"A": 0}) == Fraction(1, 2)


def test_werner_state_is_affine():
    rho = [werner(v) for v in (0, 0.5, 1)]
    assert np.allclose(rho[1], (rho[0] + rho[2]) / 2)
    for v in (0.3, 0.8):
        assert np.isclose(np.trace(werner(v)).real, 1)


def test_tables_affine_in_visibility():
    mid = strategy_dataset("evans-werner", {"v": Fraction(1, 2)})[1]
    lo = strategy_dataset("evans-werner", {"v": 0})[1]
    hi = strategy_dataset("evans-werner", {"v": 1})[1]
    for name, t in mid.tables().items():
        want = (lo.tables()[name].to_float().entries + hi.tables()[name].to_float().entries) / 2
        assert np.allclose(t.to_float().entries, want)


def test_exact_interpolation_matches_float_route():
    g, exact = strategy_dataset("bilocal-mix", {"xi": Fraction(1, 3)})
    t = born_float(g, build_strategy("bilocal-mix", {"xi": 1 / 3}))
    assert np.allclose(exact.observational.to_float().entries, t.entries, atol=1e-10)


def test_mixture_is_entrywise_average():
    half = strategy_dataset("bilocal-mix", {"xi": Fraction(1, 2)})[1]
    swap = strategy_dataset("bilocal-swap")[1]
    fritz = strategy_dataset("bilocal-fritz")[1]
    for name, t in half.tables().items():
        want = (swap.tables()[name].to_float().entries + fritz.tables()[name].to_float().entries) / 2
        assert np.allclose(t.to_float().entries, want)


def test_unknown_and_out_of_range():
    with pytest.raises(UnknownStrategy):
        strategy_dataset("nope")
    with pytest.raises(ParamOutOfRange):
        strategy_dataset("evans-werner", {"v": Fraction(3, 2)})
