import json

import numpy as np
import pytest

from uniequiv import twisted_cohomology as tc
from uniequiv.complexes import circle, icosphere, mapping_torus_antipodal
from uniequiv.errors import Inadmissible, NoPrimitive, NotSplit, RefinementExceeded
from uniequiv.fields import (
    conjugated,
    cp1_projection,
    diag_const,
    fiber_inclusion,
    pullback,
    root_swap_circle,
    sphere_power_map,
    twisted_A,
    twisted_B,
)
from uniequiv.monodromy import transport_edge
from uniequiv.obstruction import (
    chern_numbers,
    choose_gauge,
    field_bundle,
    link_phases,
    obstruction_class,
    obstruction_cochain,
    rebase,
    regauged_cochain,
    synthesize_intertwiner,
    verify_relations,
)

D = diag_const(0, 1)


@pytest.fixture(scope="module")
def sphere():
    return icosphere(1)


def test_constant_gauge_is_standard_basis():
    c = icosphere(0)
    g = choose_gauge(field_bundle(D, c), field_bundle(D, c))
    for v in range(c.n_vertices):
        np.testing.assert_allclose(np.abs(g.a_vectors[v]), np.eye(2), atol=1e-14)


def test_gauge_vectors_are_eigenvectors(sphere):
    b = field_bundle(cp1_projection(2), sphere)
    for v in range(sphere.n_vertices):
        s = b.spectra[v]
        for i in range(2):
            vec = s.vectors[:, i]
            assert np.linalg.norm(s.source @ vec - s.eigenvalues[i] * vec) <= 1e-8


def test_constant_links_are_one():
    c = icosphere(0)
    links = link_phases(field_bundle(D, c), field_bundle(D, c))
    np.testing.assert_allclose(links.alpha, 1.0, atol=1e-14)
    np.testing.assert_allclose(links.eta, 1.0, atol=1e-14)


def test_reverse_edge_conjugate_links(sphere):
    f = cp1_projection(1)
    for e in sphere.edges[:40]:
        fw = transport_edge(f, sphere, e)
        bw = transport_edge(f, sphere, (e[1], e[0]))
        for i in range(2):
            assert bw.alpha[fw.permutation[i]] == pytest.approx(np.conj(fw.alpha[i]), abs=1e-12)


def test_identical_fields_eta_one(sphere):
    b = field_bundle(cp1_projection(1), sphere)
    links = link_phases(b, b)
    assert np.max(np.abs(np.angle(links.alpha))) > 0.01
    np.testing.assert_allclose(links.eta, 1.0, atol=1e-14)


@pytest.mark.parametrize("f", [D, cp1_projection(1), cp1_projection(-2)], ids=lambda f: f.label)
def test_self_pair_zero(f, sphere):
    assert not np.any(obstruction_cochain(f, f, sphere).values)


def test_d_p1_pairs_to_one_minus_one(sphere):
    r = obstruction_class(D, cp1_projection(1), sphere, certify=False)
    assert r.rebased_class == [1, -1]
    assert r.rebased_kind == "pairing"
    assert not r.vanishing and r.primitive is None


def test_conjugated_constant_vanishes_with_certificate(sphere):
    r = obstruction_class(D, conjugated(D, 3), sphere)
    assert r.vanishing and r.rebased_class == [0, 0]
    assert r.certificate["passed"] and r.certificate["max_vertex_defect"] <= 1e-6
    d1 = tc.coboundary_matrix(r.complex, r.system, 1)
    assert np.array_equal(d1 @ r.primitive, r.cochain.vector)


def test_self_pair_intertwiner_diagonal_phases(sphere):
    f = cp1_projection(1)
    r = obstruction_class(f, f, sphere)
    out = synthesize_intertwiner(r)
    assert out["certificate"]["max_vertex_defect"] <= 1e-10
    for v, u in enumerate(out["unitaries"]):
        vec = field_bundle(f, sphere).vectors(v)
        inner = vec.conj().T @ u @ vec
        np.testing.assert_allclose(np.abs(np.diag(inner)), 1.0, atol=1e-10)


def test_circle_pair_vanishes():
    r = obstruction_class(root_swap_circle(), conjugated(root_swap_circle(), 1), circle(12))
    assert r.h2.is_zero and r.vanishing
    assert r.certificate["passed"]
    assert not r.to_json()["monodromy"]["split"]


def test_no_primitive_for_nonvanishing(sphere):
    r = obstruction_class(D, cp1_projection(1), sphere, certify=False)
    with pytest.raises(NoPrimitive):
        synthesize_intertwiner(r)


def test_char_poly_mismatch_inadmissible(sphere):
    with pytest.raises(Inadmissible) as ei:
        obstruction_class(diag_const(0, 2), cp1_projection(1), sphere)
    assert ei.value.report["same_char_poly"] is False


def test_chern_numbers(sphere):
    assert chern_numbers(D, sphere) == [0, 0]
    for k in (-2, -1, 1, 2):
        ch = chern_numbers(cp1_projection(k), sphere)
        assert ch == [k, -k] and sum(ch) == 0


def test_chern_requires_split():
    with pytest.raises(NotSplit):
        chern_numbers(root_swap_circle(), circle(12))


def test_negation(sphere):
    assert obstruction_class(cp1_projection(1), D, sphere, certify=False).rebased_class == [-1, 1]


def test_rebase_order(sphere):
    r = obstruction_class(D, cp1_projection(2), sphere, certify=False)
    assert rebase(r) == [2, -2] and rebase(r, order=[1, 0]) == [-2, 2]


def test_relations_sphere(sphere):
    rel = verify_relations(D, cp1_projection(1), cp1_projection(2), sphere)
    assert rel.ok
    assert rel.classes["ab"] == [1, -1] and rel.classes["bc"] == [1, -1] and rel.classes["ac"] == [2, -2]


def test_degree_two_pullback(sphere):
    f = sphere_power_map(2)
    r = obstruction_class(pullback(D, f, "sphere"), pullback(cp1_projection(1), f, "sphere"), sphere, certify=False)
    assert r.rebased_class == [2, -2]


def test_regauge_changes_links_not_class(sphere, rng):
    ob = obstruction_cochain(D, cp1_projection(1), sphere)
    for _ in range(5):
        other = regauged_cochain(ob, rng)
        assert tc.classes_equal(ob.vector, other.vector, sphere, ob.system)


def test_mapping_torus_report():
    m = mapping_torus_antipodal(0)
    r = obstruction_class(twisted_A(), twisted_B(), m, certify=False)
    assert not r.vanishing and r.rebased_kind == "cohomology"
    assert str(r.h2) == "Z"
    assert r.rebased_class in ([1], [-1])
    assert tc.is_cocycle(r.cochain.vector, m, r.system)


def test_mapping_torus_relations_with_fiber():
    m = mapping_torus_antipodal(0)
    s = icosphere(0)
    rel = verify_relations(twisted_A(), twisted_B(), conjugated(twisted_A(), 1), m, pullbacks=[(s, range(12), fiber_inclusion)])
    assert rel.ok
    assert rel.pullbacks[0]["ok"]


def test_report_json(sphere):
    r = obstruction_class(D, cp1_projection(1), sphere, certify=False)
    data = json.loads(json.dumps(r.to_json(), sort_keys=True))
    assert data["obstruction"]["rebased_class"] == [1, -1]
    assert data["monodromy"]["split"] is True and data["admissible"] is True
    assert set(data) >= {"admissible", "same_char_poly", "monodromy", "H2", "obstruction", "intertwiner_certificate"}
    assert data["H2"] == {"k": 2, "free_rank": 2, "torsion": []}


def test_retry_budget_stops_before_huge_complex():
    # coarse windings of this pair exceed the residual guard; one subdivision
    # of the mapping torus is already past the retry budget
    m = mapping_torus_antipodal(0)
    with pytest.raises(RefinementExceeded, match="budget|exceed"):
        obstruction_class(twisted_A(), conjugated(twisted_B(), 2), m, certify=False)
