"""Simplicial cochains with coefficients in a local system, and their cohomology.

A k-cochain assigns a vector in Z^n to every k-simplex, read in the
coefficients at the simplex's minimal vertex.  Basis index of component
``i`` on cell ``j`` is ``j * n + i``.

The coboundary of a k-cochain on a (k+1)-simplex ``[v0, ..., v_{k+1}]`` is

    -(-1)^k * sum_j (-1)^j f(face_j)

where every face value is read at ``v0``; only ``face_0`` has a different
minimal vertex (``v1``) and is carried back along the edge ``v0 v1``.  In
degree 0 this gives ``(d f)(e) = f(v0) - M_e^{-1} f(v1)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .complexes import SimplicialComplex
from .errors import InvalidSystem, NotACocycle
from .monodromy import LocalSystem
from .snf import SNFResult, _matmul, smith_normal_form


@dataclass(frozen=True)
class CohomologyGroup:
    free_rank: int
    torsion: tuple = ()

    @property
    def is_zero(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def order(self):
        """Cardinality, ``None`` when infinite."""
        if self.free_rank:
            return None
        out = 1
        for t in self.torsion:
            out *= t
        return out

    def to_json(self, k=None) -> dict:
        d = {"free_rank": self.free_rank, "torsion": list(self.torsion)}
        if k is not None:
            d = {"k": k, **d}
        return d

    def __str__(self):
        parts = (["Z"] if self.free_rank == 1 else [f"Z^{self.free_rank}"] if self.free_rank else [])
        parts += [f"Z/{t}" for t in self.torsion]
        return " + ".join(parts) or "0"


def coboundary_matrix(c: SimplicialComplex, ls: LocalSystem, k: int) -> np.ndarray:
    """Integer matrix of the twisted coboundary from k- to (k+1)-cochains."""
    if len(ls.matrices) != c.count(1):
        raise InvalidSystem("local system does not match the complex")
    n = ls.n
    rows, cols = c.count(k + 1), c.count(k)
    d = np.zeros((rows * n, cols * n), dtype=np.int64)
    eye = np.eye(n, dtype=np.int64)
    overall = -((-1) ** k)
    for r, s in enumerate(c.cells(k + 1)):
        for j in range(len(s)):
            face = s[:j] + s[j + 1:]
            col = c.index(face)
            block = ls.inverses[c.index(s[:2])] if j == 0 else eye
            d[r * n:(r + 1) * n, col * n:(col + 1) * n] += overall * (-1) ** j * block
    return d


def coboundary_matrices(c: SimplicialComplex, ls: LocalSystem):
    return tuple(coboundary_matrix(c, ls, k) for k in range(3))


_SNF_CACHE: dict = {}


def _snf(c: SimplicialComplex, ls: LocalSystem, k: int) -> SNFResult:
    """Cached SNF of the degree-k coboundary (k = -1 is the zero map into C^0)."""
    key = (c.fingerprint, ls.fingerprint, k)
    if key not in _SNF_CACHE:
        if k < 0:
            m = np.zeros((c.count(0) * ls.n, 0), dtype=np.int64)
        else:
            m = coboundary_matrix(c, ls, k)
        _SNF_CACHE[key] = smith_normal_form(m)
    return _SNF_CACHE[key]


def clear_cache() -> None:
    _SNF_CACHE.clear()


def cohomology_group(c: SimplicialComplex, ls: LocalSystem, k: int) -> CohomologyGroup:
    """ker d_k / im d_{k-1}, as free rank plus invariant factors."""
    if not 0 <= k <= 3:
        raise ValueError("degree must be in 0..3")
    dim = c.count(k) * ls.n
    r_k = _snf(c, ls, k).rank if k < 3 else 0
    prev = _snf(c, ls, k - 1)
    return CohomologyGroup(dim - r_k - prev.rank, tuple(prev.torsion))


def _as_vector(theta, c, ls, k) -> np.ndarray:
    v = np.asarray(theta, dtype=np.int64).reshape(-1)
    if v.size != c.count(k) * ls.n:
        raise ValueError(f"expected a {k}-cochain with {c.count(k) * ls.n} entries, got {v.size}")
    return v


def is_cocycle(theta, c: SimplicialComplex, ls: LocalSystem, k: int = 2) -> bool:
    v = _as_vector(theta, c, ls, k)
    return not np.any(coboundary_matrix(c, ls, k) @ v)


def solve_coboundary(theta, c: SimplicialComplex, ls: LocalSystem, k: int = 2):
    """An integer (k-1)-cochain ``g`` with ``d g = theta``, or ``None``."""
    v = _as_vector(theta, c, ls, k)
    if not is_cocycle(v, c, ls, k):
        raise NotACocycle(f"d theta != 0 in degree {k}")
    snf = _snf(c, ls, k - 1)
    y = _matmul(snf.U, v[:, None])[:, 0]
    diag = snf.diagonal
    r = snf.rank
    h = np.zeros(snf.M.shape[1], dtype=object)
    for i in range(r):
        if int(y[i]) % diag[i]:
            return None
        h[i] = int(y[i]) // diag[i]
    if any(int(x) for x in y[r:]):
        return None
    g = np.dot(snf.V.astype(object), h)
    if not np.array_equal(np.dot(snf.M.astype(object), g), v.astype(object)):
        raise AssertionError("primitive failed verification")
    return g if any(abs(x) >= 2**62 for x in g) else g.astype(np.int64)


def is_coboundary(theta, c: SimplicialComplex, ls: LocalSystem):
    """Primitive of a 2-cocycle, or ``None`` when its class is nonzero."""
    return solve_coboundary(theta, c, ls, 2)


def classes_equal(theta1, theta2, c: SimplicialComplex, ls: LocalSystem) -> bool:
    d = _as_vector(theta1, c, ls, 2) - _as_vector(theta2, c, ls, 2)
    return is_coboundary(d, c, ls) is not None


def _class_basis(c: SimplicialComplex, ls: LocalSystem, k: int):
    """SNFs needed to write degree-k classes in coordinates of H^k.

    With ``U d_{k-1} V = D`` of rank ``r``, a cochain ``x`` has ``y = U x``;
    the tail ``y[r:]`` is a cocycle coordinate vector exactly when it lies
    in the kernel of ``K = d_k U^{-1}[:, r:]``, whose saturated kernel has
    an integer basis read off from the SNF of ``K``.
    """
    key = (c.fingerprint, ls.fingerprint, "basis", k)
    if key not in _SNF_CACHE:
        prev = _snf(c, ls, k - 1)
        r = prev.rank
        dk = coboundary_matrix(c, ls, k) if k < 3 else np.zeros((0, c.count(k) * ls.n), dtype=np.int64)
        K = _matmul(dk, prev.U_inv[:, r:])
        _SNF_CACHE[key] = (prev, smith_normal_form(K))
    return _SNF_CACHE[key]


def class_coordinates(theta, c: SimplicialComplex, ls: LocalSystem, k: int = 2) -> list[int]:
    """Coordinates of ``[theta]`` in H^k ~ (+) Z/t_i (+) Z^free.

    Torsion coordinates come first, reduced mod ``t_i``, followed by the
    free coordinates.  The basis is a deterministic function of the complex
    and the system, so classes over the same system compare directly.
    """
    v = _as_vector(theta, c, ls, k)
    if not is_cocycle(v, c, ls, k):
        raise NotACocycle(f"d theta != 0 in degree {k}")
    prev, sk = _class_basis(c, ls, k)
    y = _matmul(prev.U, v[:, None])[:, 0]
    diag = prev.diagonal
    r = prev.rank
    out = [int(y[i]) % diag[i] for i in range(r) if diag[i] > 1]
    z = _matmul(sk.V_inv, np.asarray(y[r:], dtype=np.int64)[:, None])[:, 0] if len(y) > r else np.zeros(0)
    out += [int(x) for x in z[sk.rank:]]
    return out
