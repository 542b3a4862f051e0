"""Explicit classical causal models evaluated by enumeration."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np

from .graphs import LATENT, MARK, OBSERVED, CausalGraph, base_name, interrupt
from .scalar import ONE, ZERO, Scalar
from .tables import DataTable, HybridDataset, dokey, table_from_function

# a response maps the values of a node's parents (keyed by base name) to an
# outcome distribution, or to a single outcome for deterministic nodes
Response = Callable[[Mapping[str, int]], "int | list"]


@dataclass
class ClassicalModel:
    latent_dists: dict[str, list]
    responses: dict[str, Response]

    def _dist(self, node: str, pv: Mapping[str, int], card: int, exact: bool):
        r = self.responses[node](pv)
        if isinstance(r, (int, np.integer)):
            one, zero = (ONE, ZERO) if exact else (1.0, 0.0)
            return [one if k == r else zero for k in range(card)]
        return list(r) if exact else [float(x) for x in r]

    def table(self, graph: CausalGraph, exact: bool = True) -> DataTable:
        """Distribution over the graph's observed nodes given its # nodes."""
        obs = graph.observed
        marks = graph.marks
        order = _topological(graph, obs)
        lat = graph.latents
        lat_vals = [range(len(self.latent_dists[l])) for l in lat]
        variables = tuple((n, graph.card(n)) for n in obs) + tuple((m, graph.card(m)) for m in marks)
        shape = tuple(c for _, c in variables)
        zero = ZERO if exact else 0.0
        arr = np.empty(shape, dtype=object if exact else float)
        arr.fill(zero)
        for mv in itertools.product(*(range(graph.card(m)) for m in marks)):
            mdict = dict(zip(marks, mv))
            for lv in itertools.product(*lat_vals):
                w = ONE if exact else 1.0
                for l, v in zip(lat, lv):
                    x = self.latent_dists[l][v]
                    w = w * (x if exact else float(x))
                if w == 0:
                    continue
                env = dict(zip(lat, lv))
                env.update(mdict)
                self._accumulate(graph, order, 0, env, w, arr, obs, marks, exact)
        return DataTable(variables, arr, tuple(marks))

    def _accumulate(self, graph, order, i, env, w, arr, obs, marks, exact):
        if i == len(order):
            idx = tuple(env[n] for n in obs) + tuple(env[m] for m in marks)
            arr[idx] = arr[idx] + w
            return
        node = order[i]
        pv = {base_name(p): env[p] for p in graph.parents(node)}
        for k, pk in enumerate(self._dist(node, pv, graph.card(node), exact)):
            if pk == 0:
                continue
            env[node] = k
            self._accumulate(graph, order, i + 1, env, w * pk, arr, obs, marks, exact)
        env.pop(node, None)

    def hybrid(self, graph: CausalGraph, targets=None, exact: bool = True) -> HybridDataset:
        targets = graph.eligible_targets() if targets is None else targets
        obs = self.table(graph, exact)
        iv = {}
        for t in targets:
            swig = interrupt(graph, [t])
            q = self.table(swig, exact)
            m = t + "#"
            rest = [n for n in graph.observed if n != t]
            for x in range(graph.card(t)):
                iv[dokey({t: x})] = table_from_function(
                    tuple((n, graph.card(n)) for n in rest),
                    lambda *o, x=x, rest=rest, m=m: q.prob({**dict(zip(rest, o)), m: x}), exact=exact)
        return HybridDataset(obs, iv)


def _topological(graph: CausalGraph, obs: list[str]) -> list[str]:
    done: list[str] = []
    pending = list(obs)
    while pending:
        for n in pending:
            if all(p in done or graph.node(p).kind != OBSERVED for p in graph.parents(n)):
                done.append(n)
                pending.remove(n)
                break
        else:
            raise ValueError("cycle among observed nodes")
    return done


def random_model(graph: CausalGraph, rng: np.random.Generator, latent_card: int = 3,
                 deterministic: bool = True, denom: int = 12) -> ClassicalModel:
    """Random exact model: rational latent weights and response tables."""
    def rand_dist(k):
        w = rng.integers(1, denom, size=k)
        s = int(w.sum())
        return [Scalar(Fraction(int(x), s)) for x in w]

    lat = {l: rand_dist(latent_card) for l in graph.latents}
    responses = {}
    for n in graph.observed:
        parents = sorted({base_name(p) for p in graph.parents(n)})
        card = graph.card(n)
        cache: dict = {}

        def resp(pv, parents=parents, card=card, cache=cache):
            key = tuple(pv.get(p, 0) for p in parents)
            if key not in cache:
                cache[key] = int(rng.integers(card)) if deterministic else rand_dist(card)
            return cache[key]
        responses[n] = resp
    model = ClassicalModel(lat, responses)
    # freeze the lazily drawn responses so repeated evaluation is consistent
    full = interrupt(graph, graph.eligible_targets()) if graph.eligible_targets() else graph
    model.table(graph)
    model.table(full)
    return model


def evans_explicit_model() -> ClassicalModel:
    """Two-bit sources with A = gamma_B, C = alpha_B and a stochastic B that reproduce
    the observational Werner-protocol table at full visibility."""
    s = lambda a, b=0: Scalar(Fraction(a), Fraction(b))
    # index k of a two-bit source encodes (bit0, bit1) = (k & 1, k >> 1): [00], [10], [01], [11]
    gamma = [s(6, 5) / 32, s(6, -3) / 16, s(14, 1) / 32, s(0)]
    alpha = [s(-11, 8) / 14, s(90, -33) / (7 * s(14, 1)), s(1, 0) / 2, s(4, -2) / s(14, 1)]
    b0 = {
        ((0, 0), (0, 0)): s(1), ((0, 1), (0, 0)): s(1), ((0, 1), (0, 1)): s(1), ((1, 0), (0, 0)): s(1),
        ((0, 0), (0, 1)): s(0), ((0, 0), (1, 1)): s(0), ((0, 1), (1, 1)): s(0), ((1, 0), (1, 1)): s(0),
        ((1, 0), (1, 0)): s(2) / 3,
        ((0, 0), (1, 0)): s(29, -16) / 7,
        ((0, 1), (1, 0)): s(6, -3) / s(14, 1),
        ((1, 0), (0, 1)): s(610, -289) / (18 * s(30, -11)),
    }
    bits = lambda k: (k & 1, k >> 1)

    def resp_b(pv):
        g, a = bits(pv["gamma"]), bits(pv["alpha"])
        p0 = b0.get((g, a), s(0))      # gamma = [11] has weight zero
        return [p0, 1 - p0]

    return ClassicalModel({"gamma": gamma, "alpha": alpha},
                          {"A": lambda pv: bits(pv["gamma"])[pv["B"]],
                           "C": lambda pv: bits(pv["alpha"])[pv["B"]],
                           "B": resp_b})
