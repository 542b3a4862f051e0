from fractions import Fraction

import pytest

from fusioncert import geometry as geo
from fusioncert.claims import md_group, md_trivial
from fusioncert.errors import MultipleLatentComponents
from fusioncert.exactlp import feasible_convex
from fusioncert.graphs import scenario
from fusioncert.strategies import strategy_dataset


@pytest.fixture(scope="module")
def md_pair(md_graph):
    spec = geo.unpack(md_graph, ["P", "do(A)"])
    return spec, geo.facets(geo.vertices(spec))


def test_pair_polytope_size(md_pair):
    _, poly = md_pair
    assert len(poly.ineqs) == 24
    assert len(poly.eqs) == 3


def test_vertices_satisfy_every_facet(md_pair):
    spec, poly = md_pair
    for v in geo.vertices(spec).vertices:
        for r in poly.ineqs:
            assert r[0] + sum(c * x for c, x in zip(r[1:], v)) >= 0


def test_fm_projection_matches_dd(md_pair):
    spec, poly = md_pair
    cs = geo.classical_system(spec)
    fm = geo.system_to_polyhedron(geo.fourier_motzkin(cs, [c for c in cs.columns if isinstance(c, tuple)]),
                                  spec.coords)
    assert sorted(fm.ineqs) == sorted(poly.ineqs)


def test_classes_name_trivial_orbits(md_pair):
    _, poly = md_pair
    classes = geo.classify(poly, md_group(poly.coords, 2), md_trivial(poly.coords))
    assert sum(c.size for c in classes) == len(poly.ineqs)
    assert {"domination", "positivity"} <= {c.name for c in classes}


def test_membership_certificates_verify(md_graph):
    _, h = strategy_dataset("md-pure-state")
    for q, inside in ((["P", "do(A)"], True), (["P", "do(A)", "do(B)"], False)):
        poly = geo.vertices(geo.unpack(md_graph, q))
        pt = geo.point_of(h, poly.coords, md_graph)
        cert = geo.lp_membership(pt, poly)
        assert cert.feasible is inside
        assert cert.verify(pt, poly)


def test_two_sources_need_the_flag():
    g = scenario("evans-uc")
    with pytest.raises(MultipleLatentComponents):
        geo.unpack(g, ["P", "do(B)"])
    assert geo.unpack(g, ["P", "do(B)"], shared_ok=True).coords


def test_exact_lp_farkas_ray():
    square = [[0, 0], [1, 0], [0, 1], [1, 1]]
    inside = feasible_convex(square, [Fraction(1, 2), Fraction(1, 3)])
    assert inside.status == "optimal"
    assert sum(inside.x) == 1
    outside = feasible_convex(square, [2, 0])
    assert outside.status != "optimal"
    y = outside.farkas
    assert all(y[-1] + sum(a * b for a, b in zip(y[:-1], p)) <= 0 for p in square)
    assert y[-1] + 2 * y[0] > 0
