"""Acceptance suite: one test per criterion, each logged as PASS/FAIL in the
pytest terminal summary."""

import time

import numpy as np
import pytest

from uniequiv import twisted_cohomology as tc
from uniequiv.complexes import (
    Chart,
    SimplicialComplex,
    circle,
    icosphere,
    mapping_torus_antipodal,
    subdivide,
)
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
from uniequiv.monodromy import LocalSystem, pi1_rep
from uniequiv.obstruction import (
    chern_numbers,
    obstruction_class,
    pairing_vector,
    regauged_cochain,
    simplicial_pullback,
    verify_relations,
)
from uniequiv.snf import smith_normal_form


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def test_c1_circle_single_class(criterion):
    with criterion("C1 circle: transposition monodromy, H2 = 0, vanishing, intertwiner defect <= 1e-6, < 1 s"):
        c = circle(12)
        for seed in range(3):
            a = root_swap_circle()
            b = conjugated(a, seed)
            r, dt = _timed(lambda: obstruction_class(a, b, c))
            assert [g.tolist() for g in r.monodromy.generators] == [[[0, 1], [1, 0]]]
            assert r.h2.is_zero
            assert r.vanishing
            assert r.certificate["max_vertex_defect"] <= 1e-6
            assert dt < 1.0, f"took {dt:.2f}s"


@pytest.mark.parametrize("level", [1, 2])
def test_c2_cp1_chern_ladder(level, criterion):
    with criterion(f"C2 CP1 Chern ladder at level {level}: class (k, -k) = Chern difference, pairwise distinct, < 10 s"):
        t0 = time.perf_counter()
        c = icosphere(level)
        d = diag_const(0, 1)
        reports = {}
        for k in range(-2, 3):
            p = cp1_projection(k)
            r = obstruction_class(d, p, c, certify=False)
            assert r.complex is c
            assert r.rebased_class == [k, -k]
            diff = [x - y for x, y in zip(chern_numbers(p, c), chern_numbers(d, c))]
            assert diff == r.rebased_class
            reports[k] = r
        ls = reports[0].system
        for k in reports:
            for j in reports:
                same = tc.classes_equal(reports[k].cochain.vector, reports[j].cochain.vector, c, ls)
                assert same == (k == j)
        dt = time.perf_counter() - t0
        assert dt < 10.0, f"took {dt:.2f}s"


def test_c3_twisted_circle_cohomology(criterion):
    with criterion("C3 sign system on the circle: H0 = 0 (delta0 factor 2), H1 = Z/2, < 0.1 s"):
        tc.clear_cache()
        c = circle(12)
        t0 = time.perf_counter()
        ls = LocalSystem.sign_system(c)
        h0 = tc.cohomology_group(c, ls, 0)
        h1 = tc.cohomology_group(c, ls, 1)
        factors = tc._snf(c, ls, 0).invariant_factors
        dt = time.perf_counter() - t0
        assert h0.is_zero
        assert (h1.free_rank, h1.torsion) == (0, (2,))
        assert factors == [1] * 11 + [2]
        assert dt < 0.1, f"took {dt:.3f}s"


def _fiber(c: SimplicialComplex):
    """The sphere over t = 0 as a complex, with its order-preserving vertex map."""
    verts = [int(v) for v in np.flatnonzero(c.chart.home[:, 0] == 0.0)]
    pos = {v: i for i, v in enumerate(verts)}
    levels = [()]
    for k in (1, 2):
        levels.append(tuple(tuple(pos[v] for v in s) for s in c.cells(k) if all(v in pos for v in s)))
    levels.append(())
    K = SimplicialComplex(len(verts), tuple(levels), Chart("sphere", c.chart.home[verts, 1:]), 0, f"fiber({c.name})")
    return K, verts


def _fiber_pairing(report):
    """Class of the cochain restricted to the t = 0 fiber, in basepoint labels."""
    c, ls = report.complex, report.system
    K, verts = _fiber(c)
    values = simplicial_pullback(report.cochain.values, K, c, verts)
    sub = LocalSystem.from_matrices([ls.matrices[c.index((verts[a], verts[b]))] for a, b in K.edges])
    return pairing_vector(values, K, pi1_rep(sub, K))


def test_c4_mapping_torus(criterion):
    with criterion("C4 mapping torus: untwisted H2 = 0, twisted class nonvanishing, fiber class (+-1) pattern, < 60 s"):
        t0 = time.perf_counter()
        m = mapping_torus_antipodal(0)
        assert tc.cohomology_group(m, LocalSystem.trivial(m, 1), 2).is_zero
        r = obstruction_class(twisted_A(), twisted_B(), m, certify=False)
        assert not r.vanishing
        assert tc.is_cocycle(r.cochain.vector, m, r.system)
        s = icosphere(0)
        fa = pullback(twisted_A(), fiber_inclusion, "sphere")
        fb = pullback(twisted_B(), fiber_inclusion, "sphere")
        fiber = obstruction_class(fa, fb, s, certify=False)
        assert not fiber.vanishing
        assert fiber.rebased_class in ([1, -1], [-1, 1])
        assert _fiber_pairing(r) == fiber.rebased_class
        dt = time.perf_counter() - t0
        assert dt < 60.0, f"took {dt:.2f}s"


def _random_triple(rng, complex_kind):
    bases = [diag_const(0, 1)] if complex_kind == "circle" else [diag_const(0, 1), cp1_projection(1)]
    out = []
    for _ in range(3):
        base = bases[int(rng.integers(len(bases)))]
        out.append(base if rng.random() < 0.3 else conjugated(base, int(rng.integers(10**6))))
    return out


def test_c5_relation_suite(criterion):
    with criterion("C5 relations over 50 random triples: antisymmetry, additivity, theta(A,A) = 0, exact"):
        rng = np.random.default_rng(20240)
        for i in range(50):
            kind = "circle" if i < 25 else "sphere"
            c = circle(12) if kind == "circle" else icosphere(1)
            a, b, cf = _random_triple(rng, kind)
            rel = verify_relations(a, b, cf, c)
            assert rel.antisymmetric and rel.additive and rel.self_zero, (a.label, b.label, cf.label)
            cl = rel.classes
            assert cl["ba"] == [-x for x in cl["ab"]]
            assert [x + y for x, y in zip(cl["ab"], cl["bc"])] == cl["ac"]
            assert not any(cl["aa"])


def test_c6_naturality(criterion):
    with criterion("C6 naturality: pullback of (D, P1) along the degree-k map has class k(1, -1), k = 1, 2, 3"):
        c = icosphere(1)
        for k in (1, 2, 3):
            f = sphere_power_map(k)
            r = obstruction_class(
                pullback(diag_const(0, 1), f, "sphere"), pullback(cp1_projection(1), f, "sphere"), c, certify=False
            )
            assert r.rebased_class == [k, -k]


def test_c7_robustness(criterion, rng):
    with criterion("C7 robustness: 100 regaugings, refinement invariance, cocycle condition, SNF on 200 random matrices"):
        # gauge invariance
        s = icosphere(1)
        r = obstruction_class(diag_const(0, 1), cp1_projection(2), s, certify=False)
        base = r.cochain
        for _ in range(100):
            other = regauged_cochain(base, rng)
            assert tc.is_cocycle(other.vector, s, base.system)
            assert tc.classes_equal(base.vector, other.vector, s, base.system)
            assert pairing_vector(other.values, s, r.monodromy) == r.rebased_class

        # refinement invariance
        cases = [
            (diag_const(0, 1), cp1_projection(1), icosphere(1)),
            (diag_const(0, 1), conjugated(cp1_projection(1), 4), icosphere(0)),
            (root_swap_circle(), conjugated(root_swap_circle(), 2), circle(12)),
        ]
        for a, b, c in cases:
            coarse = obstruction_class(a, b, c, certify=False)
            fine = obstruction_class(a, b, subdivide(c), certify=False)
            assert coarse.vanishing == fine.vanishing
            assert coarse.rebased_class == fine.rebased_class
            for rep in (coarse, fine):
                assert tc.is_cocycle(rep.cochain.vector, rep.complex, rep.system)

        # cocycle condition on a 3-complex run
        m = mapping_torus_antipodal(0)
        rm = obstruction_class(twisted_A(), twisted_B(), m, certify=False)
        assert tc.is_cocycle(rm.cochain.vector, m, rm.system)

        # SNF self-verification
        for _ in range(200):
            mat = rng.integers(-9, 10, size=(20, 20))
            smith_normal_form(mat, verify=True).verify()
