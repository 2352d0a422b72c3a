"""Obstruction cocycle for unitary equivalence of two normal matrix fields.

For a pair ``(A, B)`` with the same eigenvalues everywhere, the gauge at a
vertex is the pair of canonical eigenvector bases ``v_i`` (of ``A``) and
``w_i`` (of ``B``).  Transporting along an edge gives unit link variables
``alpha`` and ``beta``; their ratio ``eta = beta * conj(alpha)`` is the link
of the line bundle Hom(E_i(A), E_i(B)).  Around each triangle the summed
link angles of ``eta`` (following eigenvalue strands through the local
system) are close to an integer; that integer 2-cochain is the obstruction
cocycle.  Its class vanishes iff the fields are unitarily equivalent.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from . import twisted_cohomology as tc
from .complexes import SimplicialComplex, fundamental_cycle, spanning_tree, subdivide
from .errors import (
    InconsistentSystem,
    Inadmissible,
    MultiplicityCollision,
    NoPrimitive,
    NotACocycle,
    NotNormal,
    NotSplit,
    RefinementExceeded,
    ResidualTooLarge,
)
from .fields import MatrixField, check_admissible, pullback, same_char_poly
from .matrix_core import operator_norm
from .monodromy import (
    LocalSystem,
    Pi1Representation,
    is_globally_split,
    local_system_from_transports,
    pi1_rep,
    transport_all,
)
from .settings import DEFAULT, Tolerances

# Orientation of the winding integers.  Fixed so that diag(0, 1) against
# the Bloch projection (I + n.sigma)/2 on the outward-oriented sphere pairs
# to (+1, -1) with eigenvalues in canonical order.
SIGN = -1

RETRYABLE = (ResidualTooLarge, InconsistentSystem, RefinementExceeded)
RETRY_TRIANGLE_BUDGET = 2000


# ----------------------------------------------------------------------
# per-field data


@dataclass(frozen=True, eq=False)
class FieldBundle:
    """Vertex spectra and edge transports of one field on one complex."""

    field: MatrixField
    complex: SimplicialComplex
    spectra: tuple
    transports: tuple

    @functools.cached_property
    def system(self) -> LocalSystem:
        return local_system_from_transports(self.transports)

    @functools.cached_property
    def alpha(self) -> np.ndarray:
        return np.array([t.alpha for t in self.transports])

    @functools.cached_property
    def perms(self) -> np.ndarray:
        return np.array([t.permutation for t in self.transports], dtype=np.int64)

    def eigenvalues(self, v: int) -> np.ndarray:
        return self.spectra[v].eigenvalues

    def vectors(self, v: int) -> np.ndarray:
        return self.spectra[v].vectors


@functools.lru_cache(maxsize=128)
def field_bundle(f: MatrixField, c: SimplicialComplex, tol: Tolerances = DEFAULT, jobs: int | None = None) -> FieldBundle:
    try:
        home, tr = transport_all(f, c, tol, jobs)
    except (NotNormal, MultiplicityCollision) as exc:
        raise Inadmissible(f"{f.label}: {exc}") from exc
    return FieldBundle(f, c, tuple(home), tuple(tr))


# ----------------------------------------------------------------------
# gauge and links


@dataclass(frozen=True, eq=False)
class Gauge:
    """Unit eigenvectors per vertex for both fields (columns in canonical
    eigenvalue order) and the basepoint eigenvalue order."""

    a_vectors: tuple
    b_vectors: tuple
    basepoint_eigenvalues: np.ndarray


@dataclass(frozen=True, eq=False)
class LinkData:
    alpha: np.ndarray  # (edges, n)
    beta: np.ndarray
    eta: np.ndarray


def choose_gauge(ba: FieldBundle, bb: FieldBundle) -> Gauge:
    c = ba.complex
    return Gauge(
        tuple(ba.vectors(v) for v in range(c.n_vertices)),
        tuple(bb.vectors(v) for v in range(c.n_vertices)),
        ba.eigenvalues(c.basepoint),
    )


def link_phases(ba: FieldBundle, bb: FieldBundle) -> LinkData:
    alpha, beta = ba.alpha, bb.alpha
    return LinkData(alpha, beta, beta * alpha.conj())


def regauge(links: LinkData, c: SimplicialComplex, perms: np.ndarray, phi_a: np.ndarray, phi_b: np.ndarray) -> LinkData:
    """Links after multiplying gauge vector ``i`` at ``v`` by ``exp(i phi[v, i])``."""
    u = np.array([e[0] for e in c.edges])
    v = np.array([e[1] for e in c.edges])
    rows = np.arange(len(u))[:, None]

    def shift(phi):
        return np.exp(1j * (phi[u] - phi[v][rows, perms]))

    alpha = links.alpha * shift(phi_a)
    beta = links.beta * shift(phi_b)
    return LinkData(alpha, beta, beta * alpha.conj())


def regauged_cochain(ob: "ObstructionCochain", rng, tol: Tolerances = DEFAULT) -> "ObstructionCochain":
    """Recompute the cochain after random per-vertex phase changes of both gauges."""
    c, n = ob.complex, ob.system.n
    phi_a = rng.uniform(-np.pi, np.pi, size=(c.n_vertices, n))
    phi_b = rng.uniform(-np.pi, np.pi, size=(c.n_vertices, n))
    links = regauge(ob.links, c, ob.perms, phi_a, phi_b)
    return cochain_from_links(links, c, ob.system, ob.perms, tol)


# ----------------------------------------------------------------------
# windings


def triangle_windings(links: np.ndarray, c: SimplicialComplex, perms: np.ndarray) -> np.ndarray:
    """Real windings ``(F, n)`` of unit links around every triangle.

    Strand ``i`` starts at the triangle's minimal vertex and follows the
    local system along its boundary loop; each link contributes its
    principal angle, backwards edges with a minus sign.
    """
    tris = np.array(c.triangles, dtype=np.int64).reshape(-1, 3)
    n = perms.shape[1] if perms.size else 0
    if len(tris) == 0:
        return np.zeros((0, n))
    ab = np.array([c.index((t[0], t[1])) for t in tris])
    bd = np.array([c.index((t[1], t[2])) for t in tris])
    ad = np.array([c.index((t[0], t[2])) for t in tris])
    ang = np.angle(links)
    rows = np.arange(len(tris))[:, None]
    j = perms[ab]
    if not np.array_equal(perms[bd][rows, j], perms[ad]):
        bad = np.flatnonzero(np.any(perms[bd][rows, j] != perms[ad], axis=1))[0]
        raise InconsistentSystem(f"strands do not close around triangle {tuple(tris[bad])}")
    return (ang[ab] + ang[bd][rows, j] - ang[ad]) / (2 * np.pi)


def round_windings(w: np.ndarray, tol: Tolerances = DEFAULT) -> tuple[np.ndarray, np.ndarray]:
    r = np.rint(w)
    res = np.abs(w - r)
    if res.size and res.max() >= tol.residual_max:
        raise ResidualTooLarge(f"winding residual {res.max():.3f} >= {tol.residual_max}")
    return r.astype(np.int64), res


@dataclass(frozen=True, eq=False)
class ObstructionCochain:
    complex: SimplicialComplex
    system: LocalSystem
    values: np.ndarray  # (triangles, n) integers
    residuals: np.ndarray  # (triangles, n)
    links: LinkData
    perms: np.ndarray

    @property
    def vector(self) -> np.ndarray:
        return self.values.reshape(-1)

    @property
    def residual_max(self) -> float:
        return float(self.residuals.max()) if self.residuals.size else 0.0


def cochain_from_links(links: LinkData, c: SimplicialComplex, ls: LocalSystem, perms, tol: Tolerances = DEFAULT) -> ObstructionCochain:
    w = triangle_windings(links.eta, c, perms)
    vals, res = round_windings(w, tol)
    vals = SIGN * vals
    if not tc.is_cocycle(vals.reshape(-1), c, ls, 2):
        raise NotACocycle("obstruction cochain fails the cocycle condition")
    return ObstructionCochain(c, ls, vals, res, links, perms)


def pair_system(ba: FieldBundle, bb: FieldBundle) -> LocalSystem:
    """Local system of the pair, cross-checked between the two fields."""
    ls = ba.system
    if not ls.same_as(bb.system):
        raise InconsistentSystem(f"eigenvalue transport of {ba.field.label} and {bb.field.label} disagree")
    ls.validate(ba.complex)
    return ls


def _check_spectra(ba: FieldBundle, bb: FieldBundle, tol: Tolerances) -> None:
    for v, (sa, sb) in enumerate(zip(ba.spectra, bb.spectra)):
        if np.max(np.abs(sa.eigenvalues - sb.eigenvalues)) > 1e3 * tol.proj_tol:
            raise Inadmissible(f"spectra of {ba.field.label} and {bb.field.label} differ at vertex {v}")


def obstruction_cochain(
    a: MatrixField, b: MatrixField, c: SimplicialComplex, tol: Tolerances = DEFAULT, jobs: int | None = None
) -> ObstructionCochain:
    """Single attempt on ``c`` (no subdivision retries)."""
    ba = field_bundle(a, c, tol, jobs)
    bb = field_bundle(b, c, tol, jobs)
    _check_spectra(ba, bb, tol)
    ls = pair_system(ba, bb)
    return cochain_from_links(link_phases(ba, bb), c, ls, ba.perms, tol)


def with_retries(fn, c: SimplicialComplex, tol: Tolerances = DEFAULT):
    """Call ``fn(c)``, subdividing ``c`` on retryable failures.

    Each subdivision quadruples the triangles (octuples the tetrahedra), and
    the dense integer coboundaries grow with them; retries stop before the
    complex exceeds :data:`RETRY_TRIANGLE_BUDGET`.
    """
    for attempt in range(tol.max_retries + 1):
        try:
            return fn(c)
        except RETRYABLE as exc:
            if attempt == tol.max_retries:
                raise
            finer = 4 * c.count(2) + 8 * c.count(3)
            if finer > RETRY_TRIANGLE_BUDGET:
                raise RefinementExceeded(f"{exc}; subdividing {c.name} would exceed {RETRY_TRIANGLE_BUDGET} triangles") from exc
            c = subdivide(c)


# ----------------------------------------------------------------------
# class-level data


def pairing_vector(values: np.ndarray, c: SimplicialComplex, rep: Pi1Representation) -> list[int] | None:
    """Pairing of a split 2-cocycle with the fundamental class, written in
    basepoint eigenvalue labels; ``None`` if not a closed oriented surface."""
    eps = fundamental_cycle(c)
    if eps is None or not is_globally_split(rep):
        return None
    total = np.zeros(values.shape[1], dtype=np.int64)
    for s, tri, val in zip(eps, c.triangles, values):
        total += s * (rep.labels[tri[0]].T @ val)
    return [int(x) for x in total]


@dataclass
class ObstructionReport:
    cochain: ObstructionCochain
    vanishing: bool
    primitive: np.ndarray | None
    h2: tc.CohomologyGroup
    monodromy: Pi1Representation
    rebased_class: list
    rebased_kind: str
    admissibility: dict = field(default_factory=dict)
    same_char_poly: bool = True
    certificate: dict | None = None
    bundles: tuple = ()

    @property
    def complex(self) -> SimplicialComplex:
        return self.cochain.complex

    @property
    def system(self) -> LocalSystem:
        return self.cochain.system

    def to_json(self) -> dict:
        eig = self.monodromy.basepoint_eigenvalues
        gens = [
            {"edge": list(e), "permutation": list(p) if p is not None else None}
            for e, p in zip(self.monodromy.edges, self.monodromy.permutations)
            if p is None or list(p) != sorted(p)
        ]
        return {
            "admissible": all(r.get("passed", True) for r in self.admissibility.values()) if self.admissibility else True,
            "admissibility": self.admissibility,
            "same_char_poly": self.same_char_poly,
            "complex": {"name": self.complex.name, "cells": [self.complex.count(k) for k in range(4)]},
            "basepoint": {"vertex": self.complex.basepoint, "eigenvalues": [[round(z.real, 12), round(z.imag, 12)] for z in eig]},
            "monodromy": {
                "split": is_globally_split(self.monodromy),
                "n_generators": len(self.monodromy.edges),
                "generators": gens,
            },
            "H2": self.h2.to_json(2),
            "obstruction": {
                "cocycle": self.cochain.values.tolist(),
                "vanishing": self.vanishing,
                "rebased_class": list(self.rebased_class),
                "rebased_kind": self.rebased_kind,
                "residual_max": round(self.cochain.residual_max, 12),
            },
            "intertwiner_certificate": self.certificate,
        }


def rebase(report: ObstructionReport, order=None) -> list[int]:
    """Class coordinates against the canonical basepoint order.

    For split systems on closed oriented surfaces this is the pairing with
    the fundamental class, indexed by basepoint eigenvalue; ``order`` (a
    permutation of the labels) reorders it.  Otherwise the coordinates of
    the class in H^2 are returned (see
    :func:`uniequiv.twisted_cohomology.class_coordinates`).
    """
    pv = pairing_vector(report.cochain.values, report.complex, report.monodromy)
    if pv is None:
        return tc.class_coordinates(report.cochain.vector, report.complex, report.system)
    if order is not None:
        pv = [pv[i] for i in order]
    return pv


def obstruction_class(
    a: MatrixField,
    b: MatrixField,
    c: SimplicialComplex,
    tol: Tolerances = DEFAULT,
    jobs: int | None = None,
    samples: int = 4,
    certify: bool = True,
) -> ObstructionReport:
    """Full pipeline: admissibility, local system, cocycle, cohomology,
    vanishing decision, rebased class and (when vanishing) an intertwiner."""
    adm = {}
    for name, f in (("A", a), ("B", b)):
        r = check_admissible(f, c, samples, tol)
        adm[name] = r.to_json()
        if not r.passed:
            raise Inadmissible(f"{f.label} is not admissible on {c.name}", {"admissibility": adm})
    if not same_char_poly(a, b, c, samples):
        raise Inadmissible("characteristic polynomials differ", {"admissibility": adm, "same_char_poly": False})

    cochain = with_retries(lambda cc: obstruction_cochain(a, b, cc, tol, jobs), c, tol)
    cc = cochain.complex
    ba = field_bundle(a, cc, tol, jobs)
    bb = field_bundle(b, cc, tol, jobs)
    rep = pi1_rep(cochain.system, cc, spanning_tree(cc), ba.eigenvalues(cc.basepoint))
    h2 = tc.cohomology_group(cc, cochain.system, 2)
    prim = tc.is_coboundary(cochain.vector, cc, cochain.system)
    report = ObstructionReport(
        cochain=cochain,
        vanishing=prim is not None,
        primitive=prim,
        h2=h2,
        monodromy=rep,
        rebased_class=[],
        rebased_kind="pairing",
        admissibility=adm,
        bundles=(ba, bb),
    )
    pv = pairing_vector(cochain.values, cc, rep)
    if pv is None:
        report.rebased_class = tc.class_coordinates(cochain.vector, cc, cochain.system)
        report.rebased_kind = "cohomology"
    else:
        report.rebased_class = pv
    if certify and report.vanishing:
        report.certificate = synthesize_intertwiner(report)["certificate"]
    return report


# ----------------------------------------------------------------------
# Chern numbers


def chern_numbers(f: MatrixField, c: SimplicialComplex, tol: Tolerances = DEFAULT, jobs: int | None = None) -> list[int]:
    """Lattice Chern numbers of the eigenline bundles of a split field on a
    closed oriented surface, indexed by basepoint eigenvalue order."""
    bf = field_bundle(f, c, tol, jobs)
    ls = bf.system
    ls.validate(c)
    rep = pi1_rep(ls, c)
    if not is_globally_split(rep):
        raise NotSplit(f"{f.label} has nontrivial eigenvalue monodromy")
    eps = fundamental_cycle(c)
    if eps is None:
        raise ValueError(f"{c.name} is not a closed oriented surface")
    vals, _ = round_windings(triangle_windings(bf.alpha, c, bf.perms), tol)
    return pairing_vector(SIGN * vals, c, rep)


# ----------------------------------------------------------------------
# intertwiner synthesis


def synthesize_intertwiner(report: ObstructionReport) -> dict:
    """Per-vertex unitaries ``U(v) = sum_i exp(2 pi i phi_i) w_i v_i*`` with
    ``U A U* = B`` at every vertex.

    The phases ``phi`` solve, in the least-squares sense, the real
    coboundary equation that makes the Hom links trivial once the integer
    primitive has been removed from their angles.
    """
    if not report.vanishing or report.primitive is None:
        raise NoPrimitive("obstruction class does not vanish")
    ba, bb = report.bundles
    c, ls = report.complex, report.system
    n = ls.n
    eta = report.cochain.links.eta
    g = np.asarray(report.primitive, dtype=float).reshape(-1, n)
    target = -(np.angle(eta) / (2 * np.pi) - SIGN * g)
    d0 = tc.coboundary_matrix(c, ls, 0).astype(float)
    phi, *_ = np.linalg.lstsq(d0, target.reshape(-1), rcond=None)
    phi = phi.reshape(-1, n)
    eta_corr = eta * np.exp(2j * np.pi * (d0 @ phi.reshape(-1)).reshape(-1, n))
    unitaries = []
    vertex_defect = 0.0
    for v in range(c.n_vertices):
        va, wb = ba.vectors(v), bb.vectors(v)
        u = (wb * np.exp(2j * np.pi * phi[v])) @ va.conj().T
        a_mat = ba.spectra[v].source
        b_mat = bb.spectra[v].source
        vertex_defect = max(vertex_defect, operator_norm(u @ a_mat @ u.conj().T - b_mat))
        unitaries.append(u)
    edge_defect = float(np.max(np.abs(1 - eta_corr))) if eta_corr.size else 0.0
    cert = {
        "max_vertex_defect": float(vertex_defect),
        "max_edge_defect": edge_defect,
        "passed": bool(vertex_defect <= 1e-6),
    }
    return {"unitaries": unitaries, "certificate": cert}


# ----------------------------------------------------------------------
# relations


def simplicial_pullback(values: np.ndarray, K: SimplicialComplex, L: SimplicialComplex, vmap) -> np.ndarray:
    """Pull a 2-cochain on ``L`` back along an order-preserving injective
    simplicial vertex map ``vmap`` from ``K``."""
    vmap = list(vmap)
    out = []
    for tri in K.triangles:
        img = tuple(vmap[v] for v in tri)
        if list(img) != sorted(img) or len(set(img)) != 3:
            raise ValueError("vertex map must be injective and order preserving on every triangle")
        out.append(values[L.index(img)])
    return np.array(out, dtype=np.int64).reshape(len(K.triangles), -1)


@dataclass
class RelationReport:
    antisymmetric: bool
    additive: bool
    self_zero: bool
    pullbacks: list = field(default_factory=list)
    classes: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.antisymmetric and self.additive and self.self_zero and all(p["ok"] for p in self.pullbacks)


def verify_relations(
    a: MatrixField,
    b: MatrixField,
    cf: MatrixField,
    c: SimplicialComplex,
    pullbacks=(),
    tol: Tolerances = DEFAULT,
    jobs: int | None = None,
) -> RelationReport:
    """Check antisymmetry, additivity, vanishing on the diagonal and
    compatibility with simplicial pullbacks.

    ``pullbacks`` is a sequence of ``(K, vmap, precompose)``: the complex
    ``K``, an order-preserving vertex map into ``c``, and the matching map of
    model coordinates used to pull the fields back.
    """

    def run(cc):
        return {
            key: obstruction_cochain(x, y, cc, tol, jobs)
            for key, (x, y) in {"ab": (a, b), "ba": (b, a), "bc": (b, cf), "ac": (a, cf), "aa": (a, a)}.items()
        }

    th = with_retries(run, c, tol)
    cc = th["ab"].complex
    ls = th["ab"].system
    anti = bool(np.array_equal(th["ba"].values, -th["ab"].values)) and tc.classes_equal(
        th["ba"].vector, -th["ab"].vector, cc, ls
    )
    additive = tc.classes_equal(th["ab"].vector + th["bc"].vector, th["ac"].vector, cc, ls)
    self_zero = not np.any(th["aa"].values)
    rep = pi1_rep(ls, cc)
    classes = {}
    for key, ob in th.items():
        pv = pairing_vector(ob.values, cc, rep)
        classes[key] = pv if pv is not None else tc.class_coordinates(ob.vector, cc, ls)
    out = RelationReport(anti, additive, self_zero, [], classes)
    for K, vmap, pre in pullbacks:
        if cc is not c:
            raise RefinementExceeded("pullback checks need the unrefined complex")
        pa = pullback(a, pre, K.chart.kind)
        pb = pullback(b, pre, K.chart.kind)
        direct = obstruction_cochain(pa, pb, K, tol, jobs)
        pulled = simplicial_pullback(th["ab"].values, K, c, vmap)
        ok = tc.classes_equal(pulled.reshape(-1), direct.vector, K, direct.system)
        out.pullbacks.append({"complex": K.name, "ok": bool(ok), "exact": bool(np.array_equal(pulled, direct.values))})
    return out
