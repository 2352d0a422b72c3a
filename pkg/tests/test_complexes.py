import json

import numpy as np
import pytest

from uniequiv.complexes import (
    Point,
    SimplicialComplex,
    boundary_data,
    boundary_matrix,
    build_builtin,
    circle,
    fundamental_cycle,
    icosphere,
    interval,
    load_complex,
    mapping_torus_antipodal,
    parse_complex_spec,
    product_circle_sphere,
    save_complex,
    spanning_tree,
    subdivide,
)
from uniequiv.errors import ChartDomainError, Disconnected, InvalidComplex, InvalidParams, UnknownBuiltin
from uniequiv.fields import evaluate, twisted_A, twisted_B

SMALL = [
    interval(5),
    circle(3),
    circle(12),
    icosphere(0),
    icosphere(1),
    product_circle_sphere(3, 0),
    mapping_torus_antipodal(0),
]


def test_circle_counts():
    c = circle(12)
    assert (c.count(0), c.count(1), c.euler_characteristic()) == (12, 12, 0)


def test_icosphere_counts():
    c = icosphere(0)
    assert [c.count(k) for k in range(3)] == [12, 30, 20]
    assert c.euler_characteristic() == 2


def test_mapping_torus_euler():
    m = mapping_torus_antipodal(0)
    assert m.euler_characteristic() == 0
    assert m.dim == 3


@pytest.mark.parametrize(
    "name,params",
    [("circle", {"m": 2}), ("icosphere", {"level": 5}), ("interval", {"m": 0}), ("icosphere", {"size": 1})],
)
def test_invalid_params(name, params):
    with pytest.raises(InvalidParams):
        build_builtin(name, **params)


def test_boundary_circle3():
    d1 = boundary_matrix(circle(3), 1)
    for col in d1.T:
        assert sorted(col.tolist()) == [-1, 0, 1]
    # the full cycle 01 + 12 - 02
    c = circle(3)
    cyc = np.zeros(3, dtype=np.int64)
    cyc[c.index((0, 1))], cyc[c.index((1, 2))], cyc[c.index((0, 2))] = 1, 1, -1
    assert not np.any(d1 @ cyc)


def test_icosphere_d2_rank():
    d2 = boundary_matrix(icosphere(0), 2)
    assert np.linalg.matrix_rank(d2.astype(float)) == 19


@pytest.mark.parametrize("c", SMALL + [subdivide(mapping_torus_antipodal(0)), subdivide(circle(5))], ids=lambda c: c.name)
def test_boundary_squared_zero(c):
    b = boundary_data(c)
    # entries are tiny, so the float product is exact and uses BLAS
    assert not np.any(b.d1.astype(float) @ b.d2)
    assert not np.any(b.d2.astype(float) @ b.d3)


@pytest.mark.parametrize("c", SMALL, ids=lambda c: c.name)
def test_boundary_loops_match_d2(c):
    b = boundary_data(c)
    for j, loop in enumerate(b.loops):
        chain = np.zeros(c.count(1), dtype=np.int64)
        for e, s in loop:
            chain[e] += s
        assert np.array_equal(chain, b.d2[:, j])


def test_spanning_tree_circle():
    for m in (3, 7, 12):
        t = spanning_tree(circle(m))
        assert len(t.tree_edges) == m - 1 and len(t.non_tree_edges) == 1


def test_spanning_tree_icosphere():
    t = spanning_tree(icosphere(0))
    assert (len(t.tree_edges), len(t.non_tree_edges)) == (11, 19)


def test_spanning_tree_deterministic():
    assert spanning_tree(icosphere(1)).order == spanning_tree(icosphere(1)).order


def test_disconnected_rejected():
    with pytest.raises(Disconnected):
        c = interval(4)
        SimplicialComplex(5, ((), ((0, 1), (3, 4)), (), ()), c.chart, 0, "bad")


def test_missing_face_rejected():
    c = icosphere(0)
    with pytest.raises(InvalidComplex):
        SimplicialComplex(c.n_vertices, ((), c.edges[1:], c.triangles, ()), c.chart, 0, "bad")


def test_subdivide_circle_combinatorics():
    s = subdivide(circle(6))
    assert (s.count(0), s.count(1)) == (12, 12)


@pytest.mark.parametrize("level", [0, 1, 2])
def test_subdivide_icosphere_counts(level):
    s = subdivide(icosphere(level))
    v = 10 * 4 ** (level + 1) + 2
    assert [s.count(k) for k in range(3)] == [v, 3 * (v - 2), 2 * (v - 2)]


@pytest.mark.parametrize("c", SMALL, ids=lambda c: c.name)
def test_subdivision_preserves_euler(c):
    assert subdivide(c).euler_characteristic() == c.euler_characteristic()


@pytest.mark.parametrize("c", SMALL, ids=lambda c: c.name)
def test_subdivision_keeps_chart_at_parent_vertices(c):
    s = subdivide(c)
    for v in range(c.n_vertices):
        a, b = c.chart.vertex_model(v), s.chart.vertex_model(v)
        if isinstance(a, tuple):
            for x, y in zip(a, b):
                np.testing.assert_allclose(x, y, atol=1e-12)
        else:
            np.testing.assert_allclose(a, b, atol=1e-12)


def test_subdivided_sphere_vertices_on_sphere():
    h = subdivide(icosphere(1)).chart.home
    np.testing.assert_allclose(np.linalg.norm(h, axis=1), 1.0, atol=1e-12)


@pytest.mark.parametrize("field", [twisted_A(), twisted_B()], ids=["A", "B"])
def test_mapping_torus_gluing(field):
    # every simplex corner reproduces the field value at that vertex, also across the seam
    m = mapping_torus_antipodal(0)
    seam = 0
    for tet in m.tetrahedra:
        t = m.chart.home[list(tet), 0]
        seam += t.max() > 0.5 and t.min() == 0.0
        for i, v in enumerate(tet):
            bary = np.zeros(4)
            bary[i] = 1.0
            np.testing.assert_allclose(
                evaluate(field, m, Point(tet, tuple(bary))), evaluate(field, m, Point((v,), (1.0,))), atol=1e-12
            )
    assert seam > 0


def test_point_validation():
    with pytest.raises(ChartDomainError):
        Point((0, 1), (0.7, 0.7))
    with pytest.raises(ChartDomainError):
        Point((0, 1), (1.0,))


def test_fundamental_cycle():
    c = icosphere(1)
    eps = fundamental_cycle(c)
    assert eps is not None and not np.any(boundary_matrix(c, 2) @ eps)
    assert fundamental_cycle(circle(5)) is None
    assert fundamental_cycle(mapping_torus_antipodal(0)) is None


def test_fundamental_cycle_outward():
    c = icosphere(0)
    eps = fundamental_cycle(c)
    for j, tri in enumerate(c.triangles):
        p = c.chart.home[list(tri)]
        assert np.sign(np.linalg.det(p)) == eps[j]


@pytest.mark.parametrize("c", SMALL, ids=lambda c: c.name)
def test_json_round_trip(c, tmp_path):
    path = tmp_path / "c.json"
    save_complex(c, path)
    back = load_complex(path)
    assert back.simplices == c.simplices and back.fingerprint == c.fingerprint
    assert json.loads(path.read_text())["vertices"] == c.n_vertices


def test_load_rejects_tampered(tmp_path):
    data = icosphere(0).to_json()
    data["simplices"]["2"] = data["simplices"]["2"][1:]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    with pytest.raises(InvalidComplex):
        load_complex(path)


def test_parse_spec():
    assert parse_complex_spec("icosphere:level=1").count(0) == 42
    assert parse_complex_spec("builtin:circle:m=5").count(1) == 5
    with pytest.raises(UnknownBuiltin):
        parse_complex_spec("torus:m=3")
    with pytest.raises(InvalidParams):
        parse_complex_spec("circle:m")
