"""Registry of the quantum candidate strategies and their default scenarios."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import ParamOutOfRange, UnknownStrategy
from .graphs import CausalGraph, scenario
from .tables import DataTable, HybridDataset
from .quantum import (I2, PHI_PLUS, SX, SY, SZ, ClassicalSource, NetworkStrategy, Source,
                      deterministic, ket, observable_povm, proj, relabel_povm, werner)

R2 = np.sqrt(2.0)
P0 = proj(ket(0))
P1 = proj(ket(1))


def _z_readout() -> list[np.ndarray]:
    return [P0, P1]


def _unit(params: dict, key: str, default: float) -> float:
    v = float(params.get(key, default))
    if not 0.0 <= v <= 1.0:
        raise ParamOutOfRange(f"{key}={v} outside [0, 1]")
    return v


def chsh_instrument(params: dict) -> NetworkStrategy:
    """Bell test on the confounded chain: gamma picks B's basis, A# picks C's."""
    return NetworkStrategy(
        sources={"alpha": Source(proj(PHI_PLUS), [("B", 2), ("C", 2)])},
        classical={"gamma": ClassicalSource([0.5, 0.5], ["A", "B"])},
        responses={
            "A": lambda pv: deterministic(2, pv["gamma"]),
            "B": lambda pv: observable_povm(SZ if pv["gamma"] == 0 else SX),
            "C": lambda pv: observable_povm((SZ + (-1) ** pv["A"] * SX) / R2),
        })


def chsh_two_marks(params: dict) -> NetworkStrategy:
    """B's basis set by A, C's basis set by B; A reads a uniform bit shared with C."""
    return NetworkStrategy(
        sources={"alpha": Source(proj(PHI_PLUS), [("B", 2), ("C", 2)])},
        classical={"beta": ClassicalSource([0.5, 0.5], ["A", "C"])},
        responses={
            "A": lambda pv: deterministic(2, pv["beta"]),
            "B": lambda pv: observable_povm(SX if pv["A"] == 0 else SZ),
            "C": lambda pv: observable_povm((SX + (-1) ** pv["B"] * SZ) / R2),
        })


def chain_triangle(params: dict) -> NetworkStrategy:
    return NetworkStrategy(
        sources={"alpha": Source(proj(PHI_PLUS), [("B", 2), ("C", 2)])},
        classical={"gamma": ClassicalSource([0.5, 0.5], ["A"]),
                   "beta": ClassicalSource([0.5, 0.5], ["A"])},
        responses={
            "A": lambda pv: deterministic(2, pv["gamma"] ^ pv["beta"]),
            "B": lambda pv: observable_povm(SX if pv["A"] == 0 else SZ),
            "C": lambda pv: observable_povm((SX + (-1) ** pv["B"] * SZ) / R2),
        })


def bonet(params: dict) -> NetworkStrategy:
    """Three effective inputs (a, a#) in {(0,1), (1,0), (1,1)} for B on a maximally entangled pair."""
    def b_obs(a, ash):
        if (a, ash) == (1, 0):
            return SZ
        if (a, ash) == (1, 1):
            return -(SX + SZ) / R2
        return SX
    return NetworkStrategy(
        sources={"alpha": Source(proj(PHI_PLUS), [("B", 2), ("C", 2)])},
        classical={"gamma": ClassicalSource([0.5, 0.5], ["A", "B"])},
        responses={
            "A": lambda pv: deterministic(2, pv["gamma"]),
            "B": lambda pv: observable_povm(b_obs(pv["gamma"], pv["A"])),
            "C": lambda pv: observable_povm((SX + (-1) ** pv["B"] * SZ) / R2),
        })


def evans_werner(params: dict) -> NetworkStrategy:
    v = _unit(params, "v", 1.0)
    return NetworkStrategy(
        sources={"gamma": Source(werner(v), [("A", 2), ("B", 2)])},
        classical={"alpha": ClassicalSource([0.5, 0.5], ["B", "C"])},
        responses={
            "A": lambda pv: observable_povm(SX if pv["B"] == 0 else SZ),
            "B": lambda pv: observable_povm((SX + (-1) ** pv["alpha"] * SZ) / R2),
            "C": lambda pv: deterministic(2, pv["alpha"]),
        },
        params={"v": v})


def md_pure_state(params: dict) -> NetworkStrategy:
    psi_m = (ket(0, 1) - ket(1, 0)) / R2
    theta_p = (ket(0, 1) + 1j * ket(1, 0)) / R2
    psi = (np.exp(-1j * np.pi / 8) * np.kron(ket(0), psi_m)
           + np.exp(1j * np.pi / 8) * np.kron(ket(1), theta_p)) / R2
    return NetworkStrategy(
        sources={"lambda": Source(proj(psi), [("A", 2), ("B", 2), ("C", 2)])},
        responses={
            "A": lambda pv: observable_povm(SX),
            "B": lambda pv: observable_povm((SX + (-1) ** pv["A"] * SY) / R2),
            "C": lambda pv: observable_povm((SX + (-1) ** pv["B"] * SY) / R2),
        })


def _bell_projector_povm() -> list[np.ndarray]:
    f = proj(PHI_PLUS)
    return [f, np.eye(4) - f]


def bilocal_swap(params: dict) -> NetworkStrategy:
    # A's local space: alpha qubit (shared with C) then gamma qubit (shared with B)
    return NetworkStrategy(
        sources={"alpha": Source(proj(PHI_PLUS), [("A", 2), ("C", 2)]),
                 "gamma": Source(proj(PHI_PLUS), [("A", 2), ("B", 2)])},
        responses={
            "A": lambda pv: _bell_projector_povm(),
            "B": lambda pv: observable_povm(SX if pv["A"] == 0 else SZ),
            "C": lambda pv: observable_povm((SZ + (-1) ** pv["B"] * SX) / R2),
        })


def bilocal_fritz(params: dict) -> NetworkStrategy:
    return NetworkStrategy(
        sources={"gamma": Source(proj(PHI_PLUS), [("A", 2), ("B", 2)])},
        classical={"alpha": ClassicalSource([0.5, 0.5], ["A", "C"])},
        responses={
            "A": lambda pv: observable_povm((SX + (-1) ** pv["alpha"] * SZ) / R2),
            "B": lambda pv: observable_povm(SX if pv["A"] == 0 else SZ),
            "C": lambda pv: deterministic(2, pv["alpha"]),
        })


def bilocal_mix(params: dict) -> NetworkStrategy:
    """Swap protocol with probability xi, Fritz-like protocol otherwise, switched by a shared bit."""
    xi = _unit(params, "xi", 0.5)
    # alpha parts in order: (A, switch), (C, switch), (A, qubit), (C, qubit)
    classical_pair = (proj(ket(0, 0)) + proj(ket(1, 1))) / 2
    state = xi * np.kron(proj(ket(0, 0)), proj(PHI_PLUS)) + (1 - xi) * np.kron(proj(ket(1, 1)), classical_pair)
    swap = _bell_projector_povm()

    def a_resp(pv):
        # local order: switch, alpha qubit, gamma qubit
        out = []
        for a in range(2):
            fritz = sum(np.kron(P0 if beta == 0 else P1,
                                observable_povm((SX + (-1) ** beta * SZ) / R2)[a]) for beta in range(2))
            out.append(np.kron(P0, swap[a]) + np.kron(P1, fritz))
        return out

    def c_resp(pv):
        chsh = observable_povm((SZ + (-1) ** pv["B"] * SX) / R2)
        return [np.kron(P0, chsh[c]) + np.kron(P1, P0 if c == 0 else P1) for c in range(2)]

    return NetworkStrategy(
        sources={"alpha": Source(state, [("A", 2), ("C", 2), ("A", 2), ("C", 2)]),
                 "gamma": Source(proj(PHI_PLUS), [("A", 2), ("B", 2)])},
        responses={
            "A": a_resp,
            "B": lambda pv: observable_povm(SX if pv["A"] == 0 else SZ),
            "C": c_resp,
        },
        params={"xi": xi})


def triangle_fritz(params: dict) -> NetworkStrategy:
    """C reports the pair (c', y) encoded as 2*y + c'."""
    v = _unit(params, "v", 1.0)

    def c_resp(pv):
        y = pv["beta"]
        base = observable_povm((SZ + (-1) ** y * SX) / R2)
        zero = np.zeros((2, 2), dtype=complex)
        return [base[k - 2 * y] if k // 2 == y else zero for k in range(4)]

    return NetworkStrategy(
        sources={"alpha": Source(werner(v), [("B", 2), ("C", 2)])},
        classical={"beta": ClassicalSource([0.5, 0.5], ["A", "C"])},
        responses={
            "A": lambda pv: deterministic(2, pv["beta"]),
            "B": lambda pv: observable_povm(SZ if pv["A"] == 0 else SX),
            "C": c_resp,
        },
        params={"v": v})


def coarse_fritz(params: dict) -> NetworkStrategy:
    """Outputs a = x*y, b = x*(b'+1), c = y*(c'+1); B ignores the intervened A."""
    v = _unit(params, "v", 1.0)

    def b_resp(pv):
        x = pv["gamma"]
        base = observable_povm(SZ if x == 0 else SX)
        return relabel_povm(base, 3, lambda k: x * (k + 1))

    def c_resp(pv):
        y = pv["beta"]
        base = observable_povm((SZ + (-1) ** y * SX) / R2)
        return relabel_povm(base, 3, lambda k: y * (k + 1))

    return NetworkStrategy(
        sources={"alpha": Source(werner(v), [("B", 2), ("C", 2)])},
        classical={"beta": ClassicalSource([0.5, 0.5], ["A", "C"]),
                   "gamma": ClassicalSource([0.5, 0.5], ["A", "B"])},
        responses={
            "A": lambda pv: deterministic(2, pv["gamma"] * pv["beta"]),
            "B": b_resp,
            "C": c_resp,
        },
        params={"v": v})


@dataclass(frozen=True)
class StrategyEntry:
    builder: Callable[[dict], NetworkStrategy]
    scenario: str
    targets: tuple[str, ...]
    cards: tuple[tuple[str, int], ...] = ()
    note: str = ""
    # parameter the source state depends on affinely (tables are then affine in it too)
    affine: str | None = None

    def graph(self) -> CausalGraph:
        return scenario(self.scenario, dict(self.cards) or None)


STRATEGIES: dict[str, StrategyEntry] = {
    "chsh-instrument": StrategyEntry(chsh_instrument, "two-sources-AC", ("A",), note="Bell test with A# as C's input"),
    "chsh-two-marks": StrategyEntry(chsh_two_marks, "two-sources-chain", ("A", "B")),
    "bonet": StrategyEntry(bonet, "instrumental-two-sources", ("A",), note="three effective inputs reach (3+sqrt2)/2"),
    "evans-werner": StrategyEntry(evans_werner, "evans-uc", ("B",), note="param v in [0,1]", affine="v"),
    "evans-werner-extra-edge": StrategyEntry(evans_werner, "evans-extra-edge", ("A", "B"), affine="v"),
    "md-pure-state": StrategyEntry(md_pure_state, "measurement-dependence", ("A", "B")),
    "bilocal-swap": StrategyEntry(bilocal_swap, "bilocal-chain", ("A", "B")),
    "bilocal-fritz": StrategyEntry(bilocal_fritz, "bilocal-chain", ("A", "B")),
    "bilocal-mix": StrategyEntry(bilocal_mix, "bilocal-chain", ("A", "B"), note="param xi in [0,1]",
                                 affine="xi"),
    "triangle-fritz": StrategyEntry(triangle_fritz, "triangle-AB", ("A",), (("C", 4),),
                                    note="C outputs 2*y + c'", affine="v"),
    "coarse-fritz": StrategyEntry(coarse_fritz, "triangle-AB", ("A",), (("B", 3), ("C", 3)), affine="v"),
    "chain-triangle": StrategyEntry(chain_triangle, "triangle-chain", ("A", "B")),
}


def build_strategy(sid: str, params: dict | None = None) -> NetworkStrategy:
    if sid not in STRATEGIES:
        raise UnknownStrategy(sid)
    s = STRATEGIES[sid].builder(dict(params or {}))
    s.name = sid
    return s


def strategy_dataset(sid: str, params: dict | None = None, exact: bool = True):
    """(graph, hybrid dataset) generated by a registered strategy."""
    from .quantum import hybrid_from_strategy
    entry = STRATEGIES.get(sid)
    if entry is None:
        raise UnknownStrategy(sid)
    g = entry.graph()
    params = dict(params or {})
    key = entry.affine
    if exact and key is not None and key in params and Fraction(str(params[key])) not in (0, 1):
        # exact tables at a rational parameter: interpolate the two exact endpoint tables
        t = Fraction(str(params[key]))
        if not 0 <= t <= 1:
            raise ParamOutOfRange(f"{key}={params[key]} outside [0, 1]")
        lo = hybrid_from_strategy(g, build_strategy(sid, {**params, key: 0}), entry.targets, True)
        hi = hybrid_from_strategy(g, build_strategy(sid, {**params, key: 1}), entry.targets, True)
        mix = lambda a, b: DataTable(a.variables, (1 - t) * a.entries + t * b.entries, a.given)
        return g, HybridDataset(mix(lo.observational, hi.observational),
                                {k: mix(lo.interventions[k], hi.interventions[k]) for k in lo.interventions})
    return g, hybrid_from_strategy(g, build_strategy(sid, params), entry.targets, exact)
