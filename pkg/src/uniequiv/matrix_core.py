"""Spectral data of normal matrices and the geometry of projection frames.

Matrices are plain ``numpy`` complex arrays.  A *projection frame* is a pair
of unordered sets of mutually orthogonal rank-one projections together with
a bijection between them; an *intertwiner* over a frame is a unitary that
conjugates each projection of the first set to its partner.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DimensionTooLarge,
    FrameMismatch,
    MultiplicityCollision,
    NoUniqueMatch,
    NotNormal,
)
from .settings import DEFAULT

# Real parts closer than this are treated as tied when ordering eigenvalues.
ORDER_TIE_TOL = 1e-9
MAX_BRUTE_N = 8


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def operator_norm(m) -> float:
    """Largest singular value."""
    m = np.asarray(m, dtype=complex)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def normality_defect(a) -> float:
    """||AA* - A*A|| / max(1, ||A||^2)."""
    a = as_matrix(a)
    ah = a.conj().T
    return operator_norm(a @ ah - ah @ a) / max(1.0, operator_norm(a) ** 2)


def is_normal(a, tol: float = DEFAULT.norm_tol) -> bool:
    return normality_defect(a) <= tol


def canonical_order(eigenvalues: Sequence[complex]) -> list[int]:
    """Indices sorting eigenvalues lexicographically by (Re, Im).

    Real parts are grouped by single linkage at ``ORDER_TIE_TOL`` first, so
    values like +-1j whose real parts are both rounding noise still order by
    imaginary part.
    """
    lam = np.asarray(eigenvalues, dtype=complex)
    by_re = sorted(range(len(lam)), key=lambda i: (lam[i].real, lam[i].imag))
    order: list[int] = []
    group = [by_re[0]] if by_re else []
    for prev, cur in zip(by_re, by_re[1:]):
        if lam[cur].real - lam[prev].real <= ORDER_TIE_TOL:
            group.append(cur)
        else:
            order.extend(sorted(group, key=lambda i: lam[i].imag))
            group = [cur]
    order.extend(sorted(group, key=lambda i: lam[i].imag))
    return order


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Eigenvalues in canonical order with unit eigenvectors (columns)."""

    eigenvalues: np.ndarray
    vectors: np.ndarray
    source: np.ndarray

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    @property
    def projections(self) -> list[np.ndarray]:
        return [np.outer(v, v.conj()) for v in self.vectors.T]

    def min_gap(self) -> float:
        return min_gap(self.eigenvalues)

    def check(self, tol: float = DEFAULT.proj_tol) -> None:
        """Assert the projection invariants (idempotent, self-adjoint, orthogonal,
        complete) and reconstruction of the source."""
        ps = self.projections
        n = self.n
        for p in ps:
            assert operator_norm(p @ p - p) <= tol
            assert operator_norm(p.conj().T - p) <= tol
        for i, j in itertools.combinations(range(n), 2):
            assert operator_norm(ps[i] @ ps[j]) <= tol
        assert operator_norm(sum(ps) - np.eye(n)) <= tol
        recon = sum(lam * p for lam, p in zip(self.eigenvalues, ps))
        assert operator_norm(recon - self.source) <= tol * max(1.0, operator_norm(self.source))


def min_gap(eigenvalues) -> float:
    lam = np.asarray(eigenvalues, dtype=complex)
    if len(lam) < 2:
        return float("inf")
    d = np.abs(lam[:, None] - lam[None, :])
    d[np.diag_indices(len(lam))] = np.inf
    return float(d.min())


def phase_fix(v: np.ndarray, tiny: float = 1e-8) -> np.ndarray:
    """Rotate ``v`` so its first coordinate of modulus > ``tiny`` is positive real."""
    for c in v:
        if abs(c) > tiny:
            return v * (abs(c) / c)
    return v


def _joint_eigh(h1: np.ndarray, h2: np.ndarray, cluster_tol: float) -> np.ndarray:
    w, q = np.linalg.eigh(h1)
    cols = []
    start = 0
    for stop in range(1, len(w) + 1):
        if stop == len(w) or w[stop] - w[stop - 1] > cluster_tol:
            block = q[:, start:stop]
            if stop - start > 1:
                _, r = np.linalg.eigh(block.conj().T @ h2 @ block)
                block = block @ r
            cols.append(block)
            start = stop
    return np.hstack(cols)


def spectral_decompose(a, tol: float = DEFAULT.norm_tol, gap_tol: float = DEFAULT.gap_tol) -> SpectralData:
    """Eigen-decomposition of a normal matrix with distinct eigenvalues.

    The commuting Hermitian parts ``(A + A*)/2`` and ``(A - A*)/2i`` are
    diagonalized jointly: eigenvectors of the first, refined inside clusters
    of nearly equal eigenvalues by the second.  This keeps eigenvectors
    orthonormal without a general non-Hermitian solver.
    """
    a = as_matrix(a)
    if not is_normal(a, tol):
        raise NotNormal(f"normality defect {normality_defect(a):.3e} exceeds {tol:.1e}")
    ah = a.conj().T
    h1 = (a + ah) / 2
    h2 = (a - ah) / 2j
    q = _joint_eigh(h1, h2, cluster_tol=gap_tol / 10)
    lam = np.einsum("ji,jk,ki->i", q.conj(), a, q)
    if min_gap(lam) < gap_tol:
        raise MultiplicityCollision(f"eigenvalue gap {min_gap(lam):.3e} below {gap_tol:.1e}")
    order = canonical_order(lam)
    vecs = np.column_stack([phase_fix(q[:, i]) for i in order])
    return SpectralData(eigenvalues=lam[order], vectors=vecs, source=a)


# --------------------------------------------------------------------------
# projection frames


def _line_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Operator-norm distance between the rank-one projections onto unit u, v."""
    c = abs(np.vdot(u, v))
    return float(np.sqrt(max(0.0, 1.0 - c * c)))


def line_distance_matrix(us: np.ndarray, vs: np.ndarray) -> np.ndarray:
    """Pairwise projection distances between columns of ``us`` and ``vs``."""
    c = np.abs(us.conj().T @ vs)
    return np.sqrt(np.clip(1.0 - c * c, 0.0, None))


def _bottleneck(dist: np.ndarray) -> tuple[tuple[int, ...], float]:
    n = dist.shape[0]
    # fast path: nearest neighbours form a bijection below 1/2
    nearest = tuple(int(j) for j in dist.argmin(axis=1))
    best = max(dist[i, j] for i, j in enumerate(nearest))
    if best < 0.5 and len(set(nearest)) == n:
        return nearest, float(best)
    if n > MAX_BRUTE_N:
        raise DimensionTooLarge(f"n={n} > {MAX_BRUTE_N}")
    best_perm, best_val = None, np.inf
    for perm in itertools.permutations(range(n)):
        val = max(dist[i, perm[i]] for i in range(n))
        if val < best_val:
            best_perm, best_val = perm, val
    return tuple(best_perm), float(best_val)


def match_projections(p: Sequence[np.ndarray], q: Sequence[np.ndarray]) -> tuple[tuple[int, ...], float]:
    """Bijection ``tau`` (as a tuple, ``tau[i]`` indexes ``q``) minimizing the
    largest distance ``||p[i] - q[tau[i]]||``.

    Raises :class:`NoUniqueMatch` when the optimum is >= 1/2, where the
    minimizer is no longer guaranteed unique.
    """
    if len(p) != len(q):
        raise ValueError("projection lists differ in length")
    dist = np.array([[operator_norm(pi - qj) for qj in q] for pi in p])
    perm, val = _bottleneck(dist)
    if val >= 0.5:
        raise NoUniqueMatch(f"best matching distance {val:.3f} >= 1/2")
    return perm, val


@dataclass(frozen=True, eq=False)
class ProjectionFrame:
    """Two complete sets of rank-one projections and a bijection ``sigma``
    (``qset[sigma[i]]`` is the partner of ``pset[i]``)."""

    pset: tuple
    qset: tuple
    sigma: tuple

    @property
    def n(self) -> int:
        return len(self.pset)

    def check(self, tol: float = DEFAULT.proj_tol) -> None:
        n = self.n
        assert len(self.qset) == n and sorted(self.sigma) == list(range(n))
        for s in (self.pset, self.qset):
            assert operator_norm(sum(s) - np.eye(n)) <= tol
            for i, j in itertools.combinations(range(n), 2):
                assert operator_norm(s[i] @ s[j]) <= tol

    @classmethod
    def from_spectra(cls, a: SpectralData, b: SpectralData) -> "ProjectionFrame":
        """Frame pairing equal eigenvalues of two matrices with one spectrum."""
        return cls(tuple(a.projections), tuple(b.projections), tuple(range(a.n)))


def _pair_norm(a: np.ndarray, b: np.ndarray) -> float:
    """``||a - b||`` evaluated in an argument-independent order, so it is exactly symmetric."""
    if a.tobytes() > b.tobytes():
        a, b = b, a
    return operator_norm(a - b)


def bn_distance(f1: ProjectionFrame, f2: ProjectionFrame) -> float:
    """Bottleneck distance between frames, brute force over all bijections."""
    n = f1.n
    if f2.n != n:
        raise ValueError("frames of different size")
    if n > MAX_BRUTE_N:
        raise DimensionTooLarge(f"n={n} > {MAX_BRUTE_N}")
    dp = np.array([[_pair_norm(a, b) for b in f2.pset] for a in f1.pset])
    q1 = [f1.qset[f1.sigma[i]] for i in range(n)]
    q2 = [f2.qset[f2.sigma[j]] for j in range(n)]
    dq = np.array([[_pair_norm(a, b) for b in q2] for a in q1])
    d = np.maximum(dp, dq)
    return float(min(max(d[i, t[i]] for i in range(n)) for t in itertools.permutations(range(n))))


@dataclass(frozen=True, eq=False)
class IntertwinerPoint:
    frame: ProjectionFrame
    u: np.ndarray

    def check(self, tol: float = DEFAULT.proj_tol) -> None:
        n = self.frame.n
        assert operator_norm(self.u @ self.u.conj().T - np.eye(n)) <= tol
        for i, p in enumerate(self.frame.pset):
            q = self.frame.qset[self.frame.sigma[i]]
            assert operator_norm(self.u @ p @ self.u.conj().T - q) <= tol


def _same_frame(f1: ProjectionFrame, f2: ProjectionFrame, tol: float) -> bool:
    if f1.n != f2.n or tuple(f1.sigma) != tuple(f2.sigma):
        return False
    pairs = itertools.chain(zip(f1.pset, f2.pset), zip(f1.qset, f2.qset))
    return all(operator_norm(a - b) <= tol for a, b in pairs)


def _unit_in_range(p: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((p + p.conj().T) / 2)
    return v[:, -1]


def apply_phases(base: IntertwinerPoint, z: Sequence[complex]) -> IntertwinerPoint:
    """The intertwiner ``sum_i z_i Q_sigma(i) U P_i`` over the same frame."""
    f = base.frame
    u = sum(zi * f.qset[f.sigma[i]] @ base.u @ f.pset[i] for i, zi in enumerate(z))
    return IntertwinerPoint(f, u)


def torus_coordinates(base: IntertwinerPoint, other: IntertwinerPoint, tol: float = DEFAULT.proj_tol) -> np.ndarray:
    """Unit phases ``z`` with ``other.u = sum_i z_i Q_sigma(i) base.u P_i``."""
    if not _same_frame(base.frame, other.frame, tol):
        raise FrameMismatch("intertwiners lie over different frames")
    f = base.frame
    z = np.empty(f.n, dtype=complex)
    for i, p in enumerate(f.pset):
        v = _unit_in_range(p)
        z[i] = np.vdot(base.u @ v, other.u @ v)
    if np.max(np.abs(np.abs(z) - 1.0)) > tol:
        raise FrameMismatch("phases off the unit circle; other.u does not intertwine the frame")
    recon = apply_phases(base, z).u
    if operator_norm(recon - other.u) > tol:
        raise FrameMismatch("reconstruction failed")
    return z
