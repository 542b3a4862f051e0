"""Registered reproduction claims: each runs a pipeline end to end and compares with an expectation."""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import DivisorZero, UnknownClaim
from .scalar import Scalar

STATED, DERIVED, TRIVIAL = "STATED", "DERIVED", "TRIVIAL"


@dataclass
class Check:
    name: str
    expected: str
    computed: str
    ok: bool
    provenance: str = STATED

    def to_json(self) -> dict:
        return dict(self.__dict__)


@dataclass
class ReproductionReport:
    claim: str
    criterion: int
    title: str
    checks: list[Check] = field(default_factory=list)
    seconds: float = 0.0
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and bool(self.checks) and all(c.ok for c in self.checks)

    def to_json(self) -> dict:
        return {"claim": self.claim, "criterion": self.criterion, "title": self.title, "passed": self.passed,
                "seconds": round(self.seconds, 3), "error": self.error,
                "checks": [c.to_json() for c in self.checks]}

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        failed = [c.name for c in self.checks if not c.ok]
        extra = f" (failed: {', '.join(failed)})" if failed else ""
        if self.error:
            extra = f" (error: {self.error})"
        return f"[{status}] criterion {self.criterion:>2} {self.claim}: {self.title}{extra} [{self.seconds:.1f}s]"


def _s(a, b=0) -> Scalar:
    return Scalar(Fraction(a), Fraction(b))


def _exact(name, expected: Scalar, computed, prov=STATED) -> Check:
    return Check(name, str(expected), str(computed), computed == expected, prov)


def _close(name, expected: float, computed: float, tol: float, prov=STATED) -> Check:
    return Check(name, f"{expected:.6g} +/- {tol:g}", f"{computed:.9g}", abs(computed - expected) <= tol, prov)


def _flag(name, expected: str, computed: str, ok: bool, prov=STATED) -> Check:
    return Check(name, expected, computed, bool(ok), prov)


# ------------------------------------------------------------ claims

def hardy_gap(r: ReproductionReport):
    from .catalog import builtin_witness
    from .strategies import strategy_dataset
    from .witness import evaluate
    g, h = strategy_dataset("chsh-instrument")
    v = evaluate(builtin_witness("hardy-P"), h, g)
    r2 = _s(0, 1)
    r.checks += [_exact("lhs", (2 - r2 / 2) / 4, v.value), _exact("rhs", (1 + r2 / 2) / 4, v.bound),
                 _flag("violated", "lhs < rhs", f"{float(v.value):.5f} < {float(v.bound):.5f}", not v.satisfied)]


def bonet_value(r: ReproductionReport):
    from .catalog import builtin_witness
    from .strategies import strategy_dataset
    from .witness import evaluate
    g, h = strategy_dataset("bonet")
    v = evaluate(builtin_witness("bonet-Q"), h, g)
    r.checks.append(_exact("value", _s(Fraction(3, 2), Fraction(1, 2)), v.value))


def evans_beta(r: ReproductionReport):
    from .catalog import builtin_witness
    from .strategies import strategy_dataset
    from .witness import evaluate
    g, h = strategy_dataset("evans-werner", {"v": 1})
    v = evaluate(builtin_witness("evans-P"), h, g)
    r.checks += [_exact("beta", _s(Fraction(-53, 128), Fraction(38, 128)), v.value),
                 _exact("I", _s(Fraction(18, 16), Fraction(7, 16)), v.parts["I"]),
                 _exact("J", _s(Fraction(-1, 2), Fraction(1, 2)), v.parts["J"]),
                 _exact("E", _s(Fraction(51, 128), Fraction(2, 128)), v.parts["E"])]


def inflation_threshold(r: ReproductionReport):
    from .inflation import solve_dataset, verify_certificate
    from .strategies import strategy_dataset
    for v, want in (("1", False), ("0.97", False), ("0.95", True)):
        g, h = strategy_dataset("evans-werner", {"v": Fraction(v)})
        inst, res = solve_dataset("evans-uc", h)
        got = "feasible" if res.feasible else "infeasible"
        ok = res.feasible == want
        if not res.feasible:
            ok = ok and verify_certificate(inst, res.certificate)
            got += f" (certificate value {res.certificate.value})"
        r.checks.append(_flag(f"v={v}", "feasible" if want else "infeasible", got, ok))


def mq_law(r: ReproductionReport):
    from .bilinear import factorization_problem, minimize_mq
    from .strategies import strategy_dataset
    for v in (0.75, 0.85, 1.0):
        g, h = strategy_dataset("evans-werner", {"v": v})
        p = factorization_problem(g, ["Q"], h, targets=["B"])
        res = minimize_mq(p)
        want = math.sqrt(2) * v - 1
        mid = 0.5 * (res.lower + res.upper)
        ok = res.lower - 1e-3 <= want <= res.upper + 1e-3 and abs(mid - want) <= 1e-3
        r.checks.append(_flag(f"v={v}", f"{want:.6f} +/- 1e-3", f"[{res.lower:.6f}, {res.upper:.6f}]", ok))


def explicit_classical_model(r: ReproductionReport):
    from .classical import evans_explicit_model
    from .graphs import scenario
    from .strategies import strategy_dataset
    g = scenario("evans-uc")
    t = evans_explicit_model().table(g)
    _, h = strategy_dataset("evans-werner", {"v": 1})
    bad = [(a, b, c) for a, b, c in itertools.product((0, 1), repeat=3)
           if t.prob(dict(A=a, B=b, C=c)) != h.observational.prob(dict(A=a, B=b, C=c))]
    r.checks.append(_flag("entrywise", "8 of 8 entries equal", f"{8 - len(bad)} of 8 equal", not bad))


def md_pure_state_claim(r: ReproductionReport):
    from .catalog import builtin_witness
    from .geometry import lp_membership, point_of, unpack, vertices
    from .strategies import strategy_dataset
    from .witness import evaluate
    g, h = strategy_dataset("md-pure-state")
    v = evaluate(builtin_witness("sliwa-P"), h, g)
    r2 = _s(0, 1)
    want = 1 + (2 - r2) / (16 * r2)
    r.checks.append(_exact("sliwa value", want, v.value))
    for q in (["P", "do(A)"], ["P", "do(B)"], ["do(A)", "do(B)"]):
        poly = vertices(unpack(g, q))
        cert = lp_membership(point_of(h, poly.coords, g), poly)
        ok = cert.feasible and cert.verify(point_of(h, poly.coords, g), poly)
        r.checks.append(_flag("member " + "+".join(q), "feasible", "feasible" if cert.feasible else "infeasible", ok))


def geometry_classes(r: ReproductionReport):
    from . import geometry as geo
    from .graphs import scenario
    g = scenario("measurement-dependence")
    binary = geo.facets(geo.vertices(geo.unpack(g, ["P", "do(A)"])))
    grp = md_group(binary.coords, 2)
    names = sorted({c.name for c in geo.classify(binary, grp, md_trivial(binary.coords))})
    r.checks.append(_flag("binary classes", "domination, positivity + 1 non-trivial", ", ".join(names),
                          names == ["class-1", "domination", "positivity"]))
    ns, coords = geo.no_signalling_system(g, ["P", "do(A)"])
    out = geo.fourier_motzkin(ns, [c for c in ns.columns if isinstance(c, tuple)])
    nsp = geo.system_to_polyhedron(out, coords)
    same = sorted(nsp.ineqs) == sorted(binary.ineqs)
    r.checks.append(_flag("classical = no-signalling", "same facets", "same" if same else "differ", same))
    g3 = scenario("measurement-dependence", {"A": 3})
    ternary = geo.facets(geo.vertices(geo.unpack(g3, ["P", "do(A)"])))
    cl = geo.classify(ternary, md_group(ternary.coords, 3), md_trivial(ternary.coords))
    n = sum(1 for c in cl if c.name.startswith("class"))
    r.checks.append(_flag("ternary non-trivial classes", "15", str(n), n == 15))


def bilocal_fusion_claim(r: ReproductionReport):
    from .bilinear import Compatible, check_feasibility, factorization_problem
    from .catalog import builtin_witness
    from .strategies import strategy_dataset
    from .witness import evaluate
    g, h = strategy_dataset("bilocal-mix", {"xi": Fraction(1, 2)})
    v = evaluate(builtin_witness("bilocal-fusion"), h, g)
    r.checks.append(_exact("delta", _s(Fraction(14, 64), Fraction(-10, 64)), v.value))
    for q in (["P", "do(A)"], ["P", "do(B)"], ["do(A)", "do(B)"]):
        res = check_feasibility(factorization_problem(g, q, h))
        r.checks.append(_flag("pair " + "+".join(q), "compatible", type(res).__name__.lower(),
                              isinstance(res, Compatible)))
    for sid, q, want in (("bilocal-fritz", ["P", "do(A)"], 0.367295), ("bilocal-swap", ["P", "do(B)"], 0.103545)):
        g2, h2 = strategy_dataset(sid)
        res = check_feasibility(factorization_problem(g2, q, h2))
        lo, hi = res.result.lower, res.result.upper
        ok = not isinstance(res, Compatible) and lo - 1e-3 <= want <= hi + 1e-3
        r.checks.append(_flag(f"{sid} minimum", f"{want} +/- 1e-3", f"[{lo:.6f}, {hi:.6f}]", ok))


def triangle_chain(r: ReproductionReport):
    from .catalog import builtin_witness
    from .strategies import strategy_dataset
    from .witness import evaluate
    g, h = strategy_dataset("chain-triangle")
    quarter = _s(Fraction(1, 4))
    uniform = all(h.do("B", b).prob(dict(A=a, C=c)) == quarter for a, b, c in itertools.product((0, 1), repeat=3))
    r.checks.append(_flag("P_AC|do(B) uniform", "1/4 everywhere", "yes" if uniform else "no", uniform))
    v = evaluate(builtin_witness("chain-triangle-hardy-P"), h, g)
    r.checks.append(_flag("hardy pullback violated", "violated", f"slack {v.slack}", not v.satisfied))


def recycled_guards(r: ReproductionReport):
    from .catalog import builtin_witness
    from .strategies import strategy_dataset
    from .witness import Resolver, value_of
    g, h = strategy_dataset("coarse-fritz", {"v": 1})
    w = builtin_witness("triangle-recycled-P")
    res = Resolver(h, g)
    nonzero = [str(p) for p in w.guards if value_of(p, res, True) != 0]
    r.checks.append(_flag("zero guards", "9 of 9 zero", f"{9 - len(nonzero)} of 9 zero", not nonzero))
    val = float(value_of(w.lhs - w.rhs, res, True))
    r.checks.append(_flag("violation", "value < 0 (tol 1e-9)", f"{val:.9g}", val < -1e-9))


def property_suites(r: ReproductionReport, seed: int = 0):
    n, bad = ett_round_trip(200, seed)
    r.checks.append(_flag("ETT round trip", "200 identical", f"{n - bad} of {n} identical", bad == 0, DERIVED))
    viol, checked, skipped = vertex_satisfaction()
    r.checks.append(_flag("witnesses on vertices", "no violation", f"{len(viol)} violations over {checked} checks "
                          f"({skipped} skipped)", not viol, DERIVED))
    n, bad = inflation_soundness(50, seed)
    r.checks.append(_flag("inflation soundness", "50 feasible", f"{n - bad} of {n} feasible", bad == 0, DERIVED))
    agree = dd_fm_agreement()
    r.checks.append(_flag("DD = FM", "all instances agree", ", ".join(f"{k}:{'ok' if v else 'differ'}"
                                                                   for k, v in agree.items()),
                          all(agree.values()), DERIVED))


# ------------------------------------------------------------ shared pieces

def md_group(coords, a_card: int):
    """Outcome relabelings of A (all permutations), B, and C conditioned on B."""
    from .geometry import relabeling_group
    s2 = [[0, 1], [1, 0]]
    sa = [list(p) for p in itertools.permutations(range(a_card))]
    return relabeling_group(coords, {"A": sa, "B": s2, "C": s2}, {"C": ("B", s2)})


def md_trivial(coords) -> dict:
    from .witness import DO, OBS, Atom
    o = Atom(OBS, (("A", 0), ("B", 0), ("C", 0)))
    d = Atom(DO, (("B", 0), ("C", 0)), "A", 0)

    def row(pos=(), neg=()):
        out = [Fraction(0)] * (1 + len(coords))
        for a in pos:
            out[1 + coords.index(a)] += 1
        for a in neg:
            out[1 + coords.index(a)] -= 1
        return tuple(out)
    return {"positivity": [row([o])], "domination": [row([d], [o])]}


def ett_round_trip(count: int, seed: int = 0) -> tuple[int, int]:
    """Extend random classical hybrid datasets to the full SWIG and project back."""
    from .classical import random_model
    from .graphs import scenario
    from .tables import multi_ett_extend, project_to_hybrid
    rng = np.random.default_rng(seed)
    pool = ["two-sources-AC", "two-sources-chain", "evans-uc", "measurement-dependence", "bilocal-chain", "instrumental",
            "triangle-chain"]
    bad = 0
    for k in range(count):
        g = scenario(pool[k % len(pool)])
        targets = g.eligible_targets()
        m = random_model(g, rng, latent_card=2, deterministic=(k % 3 == 0))
        h = m.hybrid(g, targets)
        q = multi_ett_extend(g, h, targets)
        back = project_to_hybrid(None, q, targets)
        bad += not back.equals(h)
    return count, bad


def deterministic_datasets(graph, targets):
    """Hybrid data of every deterministic unpacked assignment (the classical vertices)."""
    from .classical import ClassicalModel
    from .geometry import unpack
    from .graphs import base_name
    spec = unpack(graph, ["do(%s)" % t for t in targets] or ["P"], shared_ok=True)
    idx = {(cf.node, tuple((base_name(p), v) for p, v in cf.parents)): k for k, cf in enumerate(spec.counterfactuals)}
    swig = spec.graph
    ops = {n: [base_name(p) for p in swig.parents(n) if swig.node(p).kind != "latent"] for n in swig.observed}
    for det in spec.joint_assignments():
        resp = {n: (lambda pv, n=n, det=det: det[idx[(n, tuple((p, pv[p]) for p in ops[n]))]])
                for n in swig.observed}
        model = ClassicalModel({l: [Scalar(1)] for l in graph.latents}, resp)
        yield model.hybrid(graph, list(targets))


def vertex_satisfaction(keys=None) -> tuple[list[str], int, int]:
    """Every verified builtin witness on every deterministic point of its scenario."""
    from .catalog import builtin_keys, builtin_witness
    from .witness import guarded_evaluate
    from .errors import GuardFailed
    violations, checked, skipped = [], 0, 0
    cache: dict = {}
    for key in keys or builtin_keys():
        w = builtin_witness(key)
        if not w.verified:
            continue
        g = w.graph()
        tkey = (w.scenario, w.cards, tuple(sorted(g.eligible_targets())))
        if tkey not in cache:
            cache[tkey] = list(deterministic_datasets(g, sorted(g.eligible_targets())))
        for h in cache[tkey]:
            try:
                v = guarded_evaluate(w, h, g)
            except (DivisorZero, GuardFailed):
                skipped += 1
                continue
            checked += 1
            if not v.satisfied:
                violations.append(key)
                break
    return violations, checked, skipped


def inflation_soundness(count: int, seed: int = 0) -> tuple[int, int]:
    from .classical import random_model
    from .graphs import interrupt, scenario
    from .inflation import build_inflation, solve
    rng = np.random.default_rng(seed)
    cases = [("evans-uc", "evans-uc-swig", ["B"]), ("bilocal-chain", "bilocal-swig", ["A", "B"])]
    insts = {name: build_inflation(name) for _, name, _ in cases}
    bad = 0
    for k in range(count):
        sid, name, targets = cases[k % 2]
        g = scenario(sid)
        m = random_model(g, rng, latent_card=2 + k % 2, deterministic=(k % 4 < 2))
        q = m.table(interrupt(g, targets))
        bad += not solve(insts[name], q).feasible
    return count, bad


def dd_fm_agreement() -> dict[str, bool]:
    from . import geometry as geo
    from .graphs import scenario
    g = scenario("measurement-dependence")
    out = {}
    for q in (["P", "do(A)"], ["do(A)", "do(B)"], ["P", "do(A)", "do(B)"]):
        spec = geo.unpack(g, q)
        dd = geo.facets(geo.vertices(spec))
        cs = geo.classical_system(spec)
        fm = geo.system_to_polyhedron(geo.fourier_motzkin(cs, [c for c in cs.columns if isinstance(c, tuple)]),
                                      spec.coords)
        same = sorted(fm.ineqs) == sorted(dd.ineqs) and geo.EqualityReducer(fm.eqs, fm.dim).same_span(
            geo.EqualityReducer(dd.eqs, dd.dim))
        out["+".join(q)] = same
    return out


# ------------------------------------------------------------ registry

CLAIMS: dict[str, tuple[int, str, Callable]] = {
    "hardy-gap": (1, "Hardy pullback sides on the CHSH tables", hardy_gap),
    "bonet-value": (2, "Bonet inequality on the quantum extended table", bonet_value),
    "evans-beta": (3, "Evans witness and its I, J, E terms at v=1", evans_beta),
    "inflation-threshold": (4, "Evans inflation LP at v = 1, 0.97, 0.95", inflation_threshold),
    "mq-law": (5, "M_q = sqrt2 v - 1 at v = 0.75, 0.85, 1", mq_law),
    "explicit-classical-model": (6, "explicit classical model for P_ABC at v=1", explicit_classical_model),
    "md-pure-state": (7, "Sliwa pullback value and pairwise memberships", md_pure_state_claim),
    "geometry-classes": (8, "facet classes of the measurement-dependence pairs", geometry_classes),
    "bilocal-fusion": (9, "bilocal witness value, pairwise checks, M_q minima", bilocal_fusion_claim),
    "triangle-chain": (10, "chain triangle do-tables and Hardy pullback", triangle_chain),
    "recycled-guards": (11, "coarse-Fritz guards and recycled inequality", recycled_guards),
    "property-suites": (12, "ETT round trip, vertex, soundness and DD/FM suites", property_suites),
}


def claim_ids() -> list[str]:
    return sorted(CLAIMS, key=lambda k: CLAIMS[k][0])


def reproduce(claim: str) -> ReproductionReport:
    if claim not in CLAIMS:
        raise UnknownClaim(claim)
    crit, title, fn = CLAIMS[claim]
    rep = ReproductionReport(claim, crit, title)
    t = time.time()
    try:
        fn(rep)
    except Exception as e:  # a pipeline error is a failed claim, not a crash
        rep.error = f"{type(e).__name__}: {e}"
    rep.seconds = time.time() - t
    return rep
