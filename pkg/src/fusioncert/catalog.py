"""Built-in inequalities, keyed by stable strings."""
from __future__ import annotations

from typing import Callable

from .errors import UnknownWitness
from .scalar import ROOT2, Scalar
from .witness import (EXT, OBS, Atom, P, Poly, Q, Witness, differ, do, equal, pullback, total)

_BUILDERS: dict[str, Callable[[], Witness]] = {}


def _register(key):
    def deco(fn):
        _BUILDERS[key] = fn
        return fn
    return deco


def builtin_keys() -> list[str]:
    return sorted(_BUILDERS)


def builtin_witness(key: str) -> Witness:
    try:
        return _BUILDERS[key]()
    except KeyError:
        raise UnknownWitness(key) from None


# ------------------------------------------------------------ instrumental family

def _cond_q(marks: dict, given: dict, **kw) -> Poly:
    """Q(kw | given, marks) = Q(kw, given | marks) / Q(given | marks)."""
    return Q(marks, **kw, **given) / Q(marks, **given)


@_register("hardy-Q")
def _hardy_q():
    def q(b, c, a, ax):
        return _cond_q({"A": ax}, {"A": a}, B=b, C=c)
    return Witness("hardy-Q", q(1, 0, 1, 0) + q(0, 1, 0, 1) + q(0, 0, 1, 1), ">=", q(0, 0, 0, 0),
                   "two-sources-AC", "Q", ("A",),
                   note="Hardy form of CHSH on Q(B,C|A,A#); B's input is A, C's input is A#")


@_register("hardy-P")
def _hardy_p():
    pa0 = P(A=0)
    lhs = do("A", 0, B=1, C=0) + ((1 - pa0) / pa0) * do("A", 1, B=0, C=1)
    rhs = (P(A=0, B=1, C=0) - P(A=1, B=0, C=0) - P(A=0, B=0, C=0) - P(A=1, B=0, C=1)
           + (P(A=0, B=0, C=0) + P(A=1, B=0, C=1)) / pa0)
    return Witness("hardy-P", lhs, ">=", rhs, "two-sources-AC", "P", ("A",),
                   note="bound on do(A) conditionals with ratio coefficient (1-P_A(0))/P_A(0)")


@_register("chsh-two-marks")
def _chsh_1b():
    lhs = (total(lambda B, C: do("A", 0, B=B, C=C), "BC", differ) + do("B", 0, C=0) - do("A", 1, C=0))
    return Witness("chsh-two-marks", lhs, ">=", Poly(), "two-sources-chain", "P", ("A", "B"),
                   note="uses do(A) and do(B) together")


@_register("collider-inputs-Q")
def _collider_q():
    # Q(a,b | c, a#) as a conditional on the extended table over A#, C#; C# matched to c
    def q(a, b, c, ax):
        return _cond_q({"A": ax, "C": c}, {"C": c}, A=a, B=b)
    return Witness("collider-inputs-Q", q(1, 0, 1, 0) + q(0, 1, 0, 1) + q(0, 0, 1, 1), ">=", q(0, 0, 0, 0),
                   "two-sources-collider", "Q", ("A", "C"), verified=False,
                   note="Bell test A,B | C, A#; encoded as printed")


@_register("collider-inputs-P")
def _collider_p():
    r01 = P(C=0) / P(C=1)
    r10 = P(C=1) / P(C=0)
    lhs = r01 * do("C", 0, B=0) + r10 * do("C", 1, A=1, B=1) - do("A", 0, B=0) - do("C", 1, A=0, B=0)
    rhs = (r01 * P(B=0, C=0) + r10 * (P(A=1, B=1, C=1) + P(A=0, B=0, C=1))
           - P(A=0, B=0) - P(A=1, B=1, C=0) - P(A=1, B=0, C=1))
    return Witness("collider-inputs-P", lhs, "<=", rhs, "two-sources-collider", "P", ("A", "C"), verified=False,
                   note="ratio coefficients P_C(c)/P_C(1-c); encoded as printed, unverified")


@_register("direct-instrument-Q")
def _direct_instrument_q():
    def q(b, c, a, bx, ax):
        return _cond_q({"A": ax, "B": bx}, {"A": a}, B=b, C=c)
    return Witness("direct-instrument-Q", q(1, 0, 1, 0, 0) + q(0, 1, 0, 1, 0) + q(0, 0, 1, 1, 0), ">=",
                   q(0, 0, 0, 0, 0), "two-sources-full", "Q", ("A", "B"), verified=False,
                   note="Bell test B,C | A, B# at A#=0")


@_register("direct-instrument-P")
def _direct_instrument_p():
    pa0, pa1 = P(A=0), P(A=1)
    lhs = (do("B", 0, A=0, C=0) + do("B", 1, A=0)) / pa0 - do("A", 0, C=0) / pa1
    rhs = -P(A=0, C=0) / pa1 + (P(A=0, B=0, C=0) + P(A=0, B=1, C=1)) / pa0
    return Witness("direct-instrument-P", lhs, ">=", rhs, "two-sources-full", "P", ("A", "B"), verified=False,
                   note="mixes P_BC|A conditionals with do atoms; encoded as printed, unverified")


def _bonet_terms(q):
    t1 = total(lambda B, C: q(B, C, 1, 0), "BC", equal)
    t2 = total(lambda B: q(B, 0, 0, 1), "B")
    t3 = q(0, 1, 1, 1)
    return t1 + t2 + t3


@_register("bonet-Q")
def _bonet_q():
    def q(b, c, ax, a):
        return _cond_q({"A": ax}, {"A": a}, B=b, C=c)
    return Witness("bonet-Q", _bonet_terms(q), "<=", Poly.const(2), "instrumental-two-sources", "Q", ("A",),
                   note="instrumental inequality with three effective settings (a#, a)")


@_register("bonet-P")
def _bonet_p():
    f = total(lambda B, C: do("A", 1, B=B, C=C) - P(A=1, B=B, C=C), "BC", equal)
    g = do("A", 0, C=0) - P(A=0, C=0)
    lhs = P(A=1) * f + P(A=0) * g + P(A=1, B=0, C=1) * P(A=0)
    rhs = 2 * P(A=0) * P(A=1)
    return Witness("bonet-P", lhs, "<=", rhs, "instrumental-two-sources", "P", ("A",), parts=(("F", f), ("G", g)))


# ------------------------------------------------------------ Evans scenario

def _evans_parts():
    i = (2 * P(A=0, B=0) + P(B=1) + P(B=1, C=0) + P(A=0, B=1, C=1) - 2 * P(A=0, B=1, C=0))
    j = P(A=0, B=0) - 2 * P(A=1, B=0) - 2 * P(A=0, B=1, C=0)
    e = (2 * P(A=0, B=1) * P(B=1, C=0) + P(A=0, B=0) * P(A=1, B=0) - P(A=0, B=1, C=0) ** 2
         + (P(A=1, B=0) + P(B=0)) * (P(B=1, C=0) + P(A=0, B=1, C=1)))
    return i, j, e


def _evans_from_parts(key, x, i, j, e, scen, level, targets, note=""):
    lhs = x ** 2 - x * i + e + j
    return Witness(key, lhs, "<=", Poly(), scen, level, targets,
                   parts=(("I", i), ("J", j), ("E", e), ("x", x)), note=note)


@_register("evans-P")
def _evans_p():
    i, j, e = _evans_parts()
    return _evans_from_parts("evans-P", do("B", 0, A=0), i, j, e, "evans-uc", "P", ("B",),
                             note="quadratic in P_A(0|do(B=0)); sub-expressions I, J, E")


def _matched(a: Atom) -> Poly:
    """Observational atom -> extended atom with B# equal to the observed B."""
    d = dict(a.assign)
    return Q({"B": d["B"]}, **d)


def _evans_q_atom(a: Atom) -> Poly:
    if a.kind == OBS:
        return _matched(a)
    return Q({"B": a.value}, **dict(a.assign))


@_register("evans-Q")
def _evans_q():
    w = _evans_p()
    m = lambda p: p.map_atoms(_evans_q_atom)
    i, j, e = (m(p) for _, p in w.parts[:3])
    return _evans_from_parts("evans-Q", m(w.parts[3][1]), i, j, e, "evans-uc", "Q", ("B",),
                             note="same witness on Q(A,B,C|B#) entries")


def _extra_edge_atom(a: Atom) -> Poly:
    # Q(a,b,c | A#=0, B#=b) of the extra-edge scenario in hybrid terms
    d = dict(a.assign)
    d.pop("B#", None)
    if "A" not in d:
        return do("A", 0, **d)
    if d["A"] == 0:
        return P(**d)
    rest = {k: v for k, v in d.items() if k != "A"}
    return do("A", 0, **rest) - P(A=0, **rest)


@_register("evans-extra-edge-P")
def _evans_extra():
    w = _evans_q()

    def sub(a: Atom) -> Poly:
        d = dict(a.assign)
        if set(d) == {"A", "B#"}:
            # Q_A(a | A#=0, B#) does not see A#
            return do("B", d["B#"], A=d["A"])
        return _extra_edge_atom(a)

    m = lambda p: p.map_atoms(sub)
    i, j, e, x = (m(p) for _, p in w.parts)
    return _evans_from_parts("evans-extra-edge-P", x, i, j, e, "evans-extra-edge", "P", ("A", "B"),
                             note="witness read on the A#=0 slice of the extended table")


# ------------------------------------------------------------ measurement dependence

@_register("sliwa-P")
def _sliwa():
    lhs = (P(A=1, B=0, C=0) + P(A=1, B=1, C=1) - P(A=0, C=0) + do("B", 0, A=0, C=0)
           + total(lambda B, C: do("A", 1, B=B, C=C), "BC", differ))
    return Witness("sliwa-P", lhs, "<=", Poly.const(1), "measurement-dependence", "P", ("A", "B"),
                   note="three tables: P_ABC, P_AC|do(B), P_BC|do(A)")


@_register("md-observational-do-A")
def _md_ns_class():
    lhs = P(A=0, B=0, C=0) + P(A=0, B=0, C=1) + P(A=0, B=1, C=0) + P(A=1, B=1, C=0)
    return Witness("md-observational-do-A", lhs, ">=", do("A", 1, B=1, C=0),
                   "measurement-dependence", "P", ("A",),
                   note="only non-trivial class for the pair P_ABC, P_BC|do(A); classical = no-signalling")


@_register("md-do-pair-family-1")
def _md_fam1(a=0, c=0):
    lhs = (total(lambda B, C: do("A", a, B=B, C=C), "BC", differ)
           + total(lambda b: (-1) ** b * do("B", b, A=a, C=c), "b"))
    return Witness("md-do-pair-family-1", lhs, "<=", Poly.const(1), "measurement-dependence", "P", ("A", "B"),
                   note="no-signalling facet for P_AC|do(B), P_BC|do(A); a=c=0 member")


@_register("md-do-pair-family-2")
def _md_fam2(a=1, c=0):
    # the do(A) value differs from the A value seen under do(B); equal values give family 1
    lhs = do("A", 1 - a, C=c) + do("B", 0, A=a, C=1 - c) - do("B", 1, A=a, C=c)
    return Witness("md-do-pair-family-2", lhs, "<=", Poly.const(1), "measurement-dependence", "P",
                   ("A", "B"), note="no-signalling facet for P_AC|do(B), P_BC|do(A); a=1, c=0 member")


@_register("md-do-pair-family-2-printed")
def _md_fam2_printed(a=0, b=0, c=0):
    lhs = total(lambda x: (-1) ** (x + c) * do("B", b, A=a, C=x), "x")
    return Witness("md-do-pair-family-2-printed", lhs, "<=", do("A", a, C=c), "measurement-dependence", "P",
                   ("A", "B"), verified=False,
                   note="second family as commonly quoted; violated by deterministic models, kept for reference")


@_register("md-do-pair-chsh")
def _md_chsh():
    lhs = (total(lambda B, C: do("A", 1, B=B, C=C), "BC", equal) + do("B", 0, C=1) - do("A", 0, C=1))
    return Witness("md-do-pair-chsh", lhs, ">=", Poly(), "measurement-dependence", "P", ("A", "B"),
                   note="classical-only facet for P_AC|do(B), P_BC|do(A); a relabeling of chsh-two-marks")


# ------------------------------------------------------------ bilocal chain

def bilocal_fusion_parts():
    """R, S, T of the bilocal three-table witness. R is the affine part with the smallest value
    on the xi=1/2 mixture among those certified by the bilocal inflation dual."""
    r = (-P(A=0, B=0, C=0) - P(A=1, B=0, C=1) - do("B", 0, A=0, C=1) + do("B", 1, A=0, C=1)
         - do("B", 0, A=1, C=0) + do("B", 1, A=1, C=1) + do("A", 1, B=0, C=1) + do("A", 0, B=1, C=0))
    s = 1 - (do("A", 1, B=1, C=1) + P(A=1, B=0) + P(B=1, C=0))
    t = do("A", 0, B=0, C=0) - P(A=0, B=0, C=0) - do("A", 1, B=0, C=0) + P(A=1, B=0, C=0)
    return r, s, t


@_register("bilocal-fusion")
def _bilocal_fusion():
    r, s, t = bilocal_fusion_parts()
    lhs = do("B", 0, C=0) * (r + s) + do("B", 1, C=0) * s + t
    return Witness("bilocal-fusion", lhs, ">=", Poly(), "bilocal", "P", ("A", "B"),
                   parts=(("R", r), ("S", s), ("T", t)),
                   note="three tables: P_ABC, P_BC|do(A), P_AC|do(B); certified by the bilocal inflation")


# ternary-A classes on P_ABC, P_BC|do(A)

def _ne(a):
    return total(lambda B, C: P(A=a, B=B, C=C), "BC", differ)


def _eq(a):
    return total(lambda B, C: P(A=a, B=B, C=C), "BC", equal)


def _dne(a):
    return total(lambda B, C: do("A", a, B=B, C=C), "BC", differ)


def _deq(a):
    return total(lambda B, C: do("A", a, B=B, C=C), "BC", equal)


def _ternary_classes() -> dict[str, tuple[Poly, Poly]]:
    d = lambda a, **kw: do("A", a, **kw)
    c = {}
    c["1"] = (total(lambda a: d(a, B=1, C=1) + _ne(a) - P(A=a, B=1, C=1), "a")
              + d(2, C=0) - P(A=2, C=0), 2)
    c["2"] = (d(0, B=1, C=1) - d(0, C=0) - _dne(1) + d(2, C=0) + P(A=0, C=0) + _ne(1) - _eq(1)
              + total(lambda b: (-1) ** b * (P(A=0, B=b, C=1) - P(A=2, B=b, C=0)), "b"), 1)
    c["3"] = (d(0, B=1, C=1) - d(0, C=0) - _dne(1) + d(2, C=0) + _ne(1) - 2 * _eq(1)
              + P(A=0, B=0, C=1) - 2 * P(A=0, B=1, C=1) - 2 * P(A=2, B=0, C=0) + P(A=2, B=1, C=0), 1)
    c["4"] = (d(1, B=1, C=1) + d(2, C=0) + _dne(0) + d(0, B=1, C=0) - P(A=1, B=0) - P(B=1, C=0)
              - P(A=2, B=0, C=0), 2)
    c["5"] = (_dne(0) - _dne(1) + d(0, B=0, C=1) + d(2, B=0, C=0) + d(2, C=0) - P(A=0, B=1, C=0)
              - P(A=1, B=0, C=0) - P(A=2, B=0, C=0), 2)
    c["6"] = (d(1, B=1, C=1) + d(2, C=0) + d(0, B=0, C=1) - total(lambda k: P(A=k, B=k), "k")
              - _eq(2) - P(A=0, B=1, C=1) - P(A=1, B=0, C=1) - P(A=2, B=1, C=0), 1)
    c["7"] = (d(1, B=1, C=1) - _dne(0) + d(2, C=0) + _ne(0) - _eq(0) - P(A=1, B=1, C=1)
              + P(A=1, B=0, C=1) - P(A=2, B=0, C=0), 1)
    c["8"] = (d(1, B=1, C=1) - _dne(0) + d(2, B=1, C=0) + _ne(0) + P(A=1, B=0, C=1), 1)
    c["9"] = (d(1, B=1, C=1) + d(2, C=0) - _eq(0) - P(A=1, B=1, C=1) - P(A=2, B=0, C=0), 1)
    c["10"] = (d(1, B=1, C=1) + d(2, C=0) - _eq(0) - P(A=0, C=0) - P(A=2, B=1) - P(A=1)
               - P(A=1, B=1, C=1) - 2 * P(A=2, B=0, C=0), 1)
    base11 = (d(0, C=0) + d(2, C=0) - _dne(1) - P(C=0) - P(A=0, C=0) - P(A=2, C=0) - P(A=1, B=1))
    # the operator before P_BC(1,1) is missing; "-" is used (neither sign gives a valid bound)
    c["11"] = (base11 - P(B=1, C=1) - P(A=1, B=0, C=0), 0)
    c["12"] = (d(1, B=1, C=1) + d(2, C=0) - d(0, B=0, C=0) - P(A=0, B=1, C=1) - P(A=2, B=0, C=0)
               - _eq(1), 1)
    c["13"] = (_dne(0) + d(2, C=0) - _ne(0) - _ne(1) - P(A=2, C=0), 1)
    c["14"] = (d(0, B=0, C=0) + d(1, B=0, C=1), 1)
    c["15"] = (_deq(0) + d(1, C=0) + d(2, B=0, C=1), 2)
    return {k: (lhs, Poly.const(b)) for k, (lhs, b) in c.items()}


# outcome of checking the quoted list against the enumerated ternary polytope
TERNARY_INVALID = ("6", "11", "13")
TERNARY_NOT_FACETS = ("1", "3", "10", "12")


def _make_ternary(k):
    def build():
        lhs, rhs = _ternary_classes()[k]
        notes = {"14": "Pearl inequality on P_BC|do(A)", "15": "Bonet inequality on P_BC|do(A)",
                 "11": "missing operator before P_BC(1,1) read as a minus sign; violated by a vertex",
                 "6": "violated by a vertex", "13": "violated by a vertex"}
        for j in TERNARY_NOT_FACETS:
            notes[j] = "valid but not a facet of the ternary polytope"
        return Witness(f"ternary-class-{k}", lhs, "<=", rhs, "measurement-dependence", "P", ("A",),
                       (("A", 3),), verified=k not in TERNARY_INVALID,
                       note=notes.get(k, "ternary-A facet class"))
    return build


for _k in ["1", "2", "3", "4", "5", "6", "7", "8", "9", "10", "11", "12", "13", "14", "15"]:
    _BUILDERS[f"ternary-class-{_k}"] = _make_ternary(_k)


# ------------------------------------------------------------ triangle family

@_register("chain-triangle-hardy-P")
def _chain_hardy():
    lhs = total(lambda B, C: do("A", 0, B=B, C=C), "BC", differ) + do("B", 0, C=0)
    return Witness("chain-triangle-hardy-P", lhs, ">=", do("A", 1, C=0), "triangle-chain", "P", ("A", "B"))


_RECYCLED_ZERO = [(1, 0, 1), (1, 1, 1), (1, 0, 2), (0, 2, 2), (1, 0, 0), (0, 1, 0), (1, 2, 0), (0, 0, 1), (1, 2, 1)]


def _recycled_q_poly():
    def q(a, b, c):
        return Q({"A": 0}, A=a, B=b, C=c)
    return (q(0, 0, 0) * (q(0, 2, 0) + q(0, 2, 1) + q(1, 1, 2)) + q(0, 1, 1) * q(0, 2, 1)
            - q(0, 0, 1) * q(1, 2, 2) + q(0, 2, 1) * (q(0, 0, 2) + q(0, 1, 2)))


_TRI_CARDS = (("B", 3), ("C", 3))


@_register("triangle-recycled-Q")
def _recycled_q():
    guards = tuple(Q({"A": 0}, A=a, B=b, C=c) for a, b, c in _RECYCLED_ZERO)
    return Witness("triangle-recycled-Q", _recycled_q_poly(), ">=", Poly(), "triangle-AB", "Q", ("A",),
                   _TRI_CARDS, guards=guards, note="quadratic certificate on the A#=0 slice; valid under the zero guards")


@_register("triangle-recycled-P")
def _recycled_p():
    lhs = (P(A=0, B=0, C=0) * (P(A=0, B=2, C=0) + P(A=0, B=2, C=1) + do("A", 0, B=1, C=2) - P(A=0, B=1, C=2))
           + P(A=0, B=1, C=1) * P(A=0, B=2, C=1)
           - P(A=0, B=0, C=1) * (do("A", 0, B=2, C=2) - P(A=0, B=2, C=2))
           + P(A=0, B=2, C=1) * (P(A=0, B=0, C=2) + P(A=0, B=1, C=2)))
    guards = (P(A=0, B=2, C=2), P(A=0, B=1, C=0), P(A=0, B=0, C=1))
    for b, c in [(0, 1), (1, 1), (0, 2), (0, 0), (2, 0), (2, 1)]:
        guards += (do("A", 0, B=b, C=c) - P(A=0, B=b, C=c),)
    return Witness("triangle-recycled-P", lhs, ">=", Poly(), "triangle-AB", "P", ("A",), _TRI_CARDS,
                   guards=guards, note="hybrid-table form; nine support guards")
