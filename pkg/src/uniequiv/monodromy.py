"""Eigenvalue transport along edges and the resulting integer local system.

At every vertex the eigenvalues of a field are indexed in canonical order.
Transporting along an edge ``u < v`` by projection matching yields a
permutation ``pi`` (index ``i`` at ``u`` continues as index ``pi[i]`` at
``v``).  The local system stores, per edge, the integer matrix carrying
coefficient vectors at ``u`` to coefficient vectors at ``v``; for
eigenvalue systems it is the permutation matrix with ``M[pi[i], i] = 1``.
General invertible integer matrices are allowed so that rank-one sign
systems can be expressed too.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .complexes import Point, SimplicialComplex, SpanningTree, spanning_tree
from .errors import DegenerateOverlap, InconsistentSystem, InvalidSystem, RefinementExceeded
from .fields import MatrixField, evaluate
from .matrix_core import SpectralData, line_distance_matrix, spectral_decompose
from .settings import DEFAULT, Tolerances


@dataclass(frozen=True, eq=False)
class EdgeTransport:
    """Transport of a field's eigenlines along one edge ``(u, v)``, ``u < v``.

    ``alpha[i]`` is the unit overlap between the transported tail vector of
    strand ``i`` and the head's gauge vector of index ``permutation[i]``.
    """

    edge: tuple
    permutation: tuple
    steps: int
    max_step_distance: float
    alpha: np.ndarray


def vertex_spectra(f: MatrixField, c: SimplicialComplex, tol: Tolerances = DEFAULT) -> list[SpectralData]:
    return [spectral_decompose(evaluate(f, c, Point((v,), (1.0,))), tol.norm_tol, tol.gap_tol) for v in range(c.n_vertices)]


def _nearest_eigenvalues(la: np.ndarray, lb: np.ndarray, t: np.ndarray) -> bool:
    """True iff every ``la[i]`` is strictly closest to its matched ``lb[t[i]]``.

    A coarse step can pair eigenlines that have rotated past each other;
    the eigenvalues, which move continuously with them, expose that.
    """
    d = np.abs(la[:, None] - lb[None, :])
    return bool(np.all(d.argmin(axis=1) == t))


def transport_edge(
    f: MatrixField,
    c: SimplicialComplex,
    e: tuple,
    tol: Tolerances = DEFAULT,
    home: list | None = None,
) -> EdgeTransport:
    """Follow the eigenlines of ``f`` from ``e[0]`` to ``e[1]``.

    The edge is cut into ``2**m`` steps with ``m`` the smallest value for
    which every consecutive pair of spectral frames is within
    ``tol.match_threshold``; matchings below 1/2 are unique, so the
    composite permutation is well defined.  Each step must also pair every
    eigenvalue with its nearest successor, which rejects coarse steps that
    alias a large rotation.  A descending ``e`` walks the stored edge
    backwards.
    """
    u, v = e
    simplex = (min(u, v), max(u, v))

    def point(s):
        return Point(simplex, (1.0 - s, s) if u < v else (s, 1.0 - s))

    if home is not None:
        su, sv = home[u], home[v]
    else:
        su = spectral_decompose(evaluate(f, c, Point((u,), (1.0,))), tol.norm_tol, tol.gap_tol)
        sv = spectral_decompose(evaluate(f, c, Point((v,), (1.0,))), tol.norm_tol, tol.gap_tol)
    cache = {0.0: su, 1.0: sv}

    def spectrum(s):
        if s not in cache:
            cache[s] = spectral_decompose(evaluate(f, c, point(s)), tol.norm_tol, tol.gap_tol)
        return cache[s]

    n = su.n
    for m in range(tol.max_subdiv + 1):
        steps = 2**m
        spectra = [spectrum(j / steps) for j in range(steps + 1)]
        frames = [sd.vectors for sd in spectra]
        dists = [line_distance_matrix(a, b) for a, b in zip(frames, frames[1:])]
        matches = [d.argmin(axis=1) for d in dists]
        worst = max(float(d[np.arange(n), t].max()) for d, t in zip(dists, matches))
        if (
            worst < tol.match_threshold
            and all(len(set(t)) == n for t in matches)
            and all(_nearest_eigenvalues(a.eigenvalues, b.eigenvalues, t) for a, b, t in zip(spectra, spectra[1:], matches))
        ):
            break
    else:
        raise RefinementExceeded(f"edge {e}: no matching below {tol.match_threshold} with {2**tol.max_subdiv} steps")

    idx = np.arange(n)
    phase = np.ones(n, dtype=complex)
    for a, b, t in zip(frames, frames[1:], matches):
        ov = np.einsum("ij,ij->j", b[:, t[idx]].conj(), a[:, idx])
        if np.min(np.abs(ov)) < tol.overlap_min:
            raise DegenerateOverlap(f"edge {e}: overlap {np.min(np.abs(ov)):.3f}")
        phase = phase * ov / np.abs(ov)
        idx = t[idx]
    return EdgeTransport(tuple(e), tuple(int(i) for i in idx), steps, worst, phase)


def transport_all(f: MatrixField, c: SimplicialComplex, tol: Tolerances = DEFAULT, jobs: int | None = None, home=None):
    """Vertex spectra and transports of every edge, in edge order."""
    home = home if home is not None else vertex_spectra(f, c, tol)
    work = lambda e: transport_edge(f, c, e, tol, home)
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            out = list(pool.map(work, c.edges))
    else:
        out = [work(e) for e in c.edges]
    return home, out


# ----------------------------------------------------------------------
# local systems


def permutation_matrix(perm) -> np.ndarray:
    n = len(perm)
    m = np.zeros((n, n), dtype=np.int64)
    m[list(perm), np.arange(n)] = 1
    return m


def matrix_to_permutation(m: np.ndarray):
    n = m.shape[0]
    if not (np.all((m == 0) | (m == 1)) and np.all(m.sum(axis=0) == 1) and np.all(m.sum(axis=1) == 1)):
        return None
    return tuple(int(np.flatnonzero(m[:, i])[0]) for i in range(n))


def _int_inverse(m: np.ndarray) -> np.ndarray:
    p = matrix_to_permutation(m)
    if p is not None:
        return m.T.copy()
    inv = np.rint(np.linalg.inv(m)).astype(np.int64)
    if not np.array_equal(m @ inv, np.eye(len(m), dtype=np.int64)):
        raise InvalidSystem("edge matrix is not invertible over the integers")
    return inv


@dataclass(frozen=True, eq=False)
class LocalSystem:
    """Integer coefficient system: ``matrices[k]`` carries Z^n at the lower
    vertex of edge ``k`` to Z^n at its upper vertex."""

    n: int
    matrices: tuple
    inverses: tuple

    @classmethod
    def from_matrices(cls, mats) -> "LocalSystem":
        mats = tuple(np.asarray(m, dtype=np.int64) for m in mats)
        if not mats:
            raise InvalidSystem("empty system")
        n = mats[0].shape[0]
        if any(m.shape != (n, n) for m in mats):
            raise InvalidSystem("edge matrices of different shapes")
        return cls(n, mats, tuple(_int_inverse(m) for m in mats))

    @classmethod
    def from_permutations(cls, perms) -> "LocalSystem":
        return cls.from_matrices([permutation_matrix(p) for p in perms])

    @classmethod
    def trivial(cls, c: SimplicialComplex, n: int) -> "LocalSystem":
        return cls.from_matrices([np.eye(n, dtype=np.int64)] * c.count(1))

    @classmethod
    def sign_system(cls, c: SimplicialComplex, edges=None) -> "LocalSystem":
        """Rank-one system with -1 on ``edges`` (default: the non-tree edges)."""
        flip = set(spanning_tree(c).non_tree_edges if edges is None else edges)
        return cls.from_matrices([[[-1 if k in flip else 1]] for k in range(c.count(1))])

    @property
    def permutations(self):
        """Per-edge permutations, or ``None`` if some matrix is not one."""
        perms = [matrix_to_permutation(m) for m in self.matrices]
        return None if any(p is None for p in perms) else perms

    @property
    def fingerprint(self) -> str:
        h = hashlib.sha1()
        for m in self.matrices:
            h.update(m.tobytes())
        return f"{self.n}:{h.hexdigest()}"

    def same_as(self, other: "LocalSystem") -> bool:
        return self.n == other.n and all(np.array_equal(a, b) for a, b in zip(self.matrices, other.matrices))

    def validate(self, c: SimplicialComplex) -> None:
        """Flatness: transport around every triangle boundary is the identity."""
        if len(self.matrices) != c.count(1):
            raise InvalidSystem("system does not cover every edge")
        eye = np.eye(self.n, dtype=np.int64)
        for t, (a, b, d) in enumerate(c.triangles):
            ab, bd, ad = c.index((a, b)), c.index((b, d)), c.index((a, d))
            loop = self.inverses[ad] @ self.matrices[bd] @ self.matrices[ab]
            if not np.array_equal(loop, eye):
                raise InconsistentSystem(f"holonomy around triangle {(a, b, d)} is not trivial")


def local_system_from_transports(transports) -> LocalSystem:
    return LocalSystem.from_permutations([t.permutation for t in transports])


def build_local_system(f: MatrixField, c: SimplicialComplex, tol: Tolerances = DEFAULT, jobs: int | None = None) -> LocalSystem:
    _, tr = transport_all(f, c, tol, jobs)
    ls = local_system_from_transports(tr)
    ls.validate(c)
    return ls


# ----------------------------------------------------------------------
# fundamental group


@dataclass(frozen=True)
class Pi1Representation:
    """One integer matrix per non-tree edge, written in basepoint labels.

    ``labels[v]`` carries basepoint coefficients to coefficients at ``v``
    along the tree.
    """

    edges: tuple
    generators: tuple
    labels: tuple
    basepoint_eigenvalues: tuple = ()

    @property
    def permutations(self):
        return [matrix_to_permutation(g) for g in self.generators]


def tree_labels(ls: LocalSystem, c: SimplicialComplex, tree: SpanningTree) -> list[np.ndarray]:
    labels = [None] * c.n_vertices
    labels[tree.root] = np.eye(ls.n, dtype=np.int64)
    for v in tree.order[1:]:
        p, e = tree.parent[v]
        step = ls.matrices[e] if p < v else ls.inverses[e]
        labels[v] = step @ labels[p]
    return labels


def pi1_rep(ls: LocalSystem, c: SimplicialComplex, tree: SpanningTree | None = None, eigenvalues=()) -> Pi1Representation:
    tree = tree or spanning_tree(c)
    labels = tree_labels(ls, c, tree)
    inv = [_int_inverse(m) for m in labels]
    gens = []
    for k in tree.non_tree_edges:
        u, v = c.edges[k]
        gens.append(inv[v] @ ls.matrices[k] @ labels[u])
    return Pi1Representation(
        tuple(c.edges[k] for k in tree.non_tree_edges), tuple(gens), tuple(labels), tuple(eigenvalues)
    )


def is_globally_split(rep: Pi1Representation) -> bool:
    return all(np.array_equal(g, np.eye(len(g), dtype=np.int64)) for g in rep.generators)

