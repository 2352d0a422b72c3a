"""Exact Smith normal form over the integers.

Work happens in ``int64`` while every entry stays below ``2**20`` (so that
row-times-column sums cannot overflow); past that bound all arrays are promoted
to Python integers (``dtype=object``) and elimination continues exactly.
The transforms ``U``, ``V`` are tracked together with their inverses, which
certifies unimodularity without computing determinants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_SAFE = 2**20


@dataclass(frozen=True, eq=False)
class SNFResult:
    """``U @ M @ V == D`` with ``D`` diagonal, ``d_1 | d_2 | ...``."""

    M: np.ndarray
    U: np.ndarray
    V: np.ndarray
    U_inv: np.ndarray
    V_inv: np.ndarray
    D: np.ndarray

    @property
    def diagonal(self) -> list[int]:
        k = min(self.D.shape)
        return [int(self.D[i, i]) for i in range(k)]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)

    @property
    def invariant_factors(self) -> list[int]:
        return [d for d in self.diagonal if d != 0]

    @property
    def torsion(self) -> list[int]:
        return [d for d in self.diagonal if d > 1]

    def verify(self) -> None:
        m, n = self.M.shape
        if not _exact_equal(_matmul(_matmul(self.U, self.M), self.V), self.D):
            raise AssertionError("U M V != D")
        if not _exact_equal(_matmul(self.U, self.U_inv), np.eye(m, dtype=np.int64)):
            raise AssertionError("U is not unimodular")
        if not _exact_equal(_matmul(self.V, self.V_inv), np.eye(n, dtype=np.int64)):
            raise AssertionError("V is not unimodular")
        d = self.diagonal
        off = self.D.copy()
        k = min(m, n)
        off[np.arange(k), np.arange(k)] = 0
        if np.any(off != 0):
            raise AssertionError("D is not diagonal")
        if any(x < 0 for x in d):
            raise AssertionError("negative invariant factor")
        nz = [x for x in d if x != 0]
        if d[: len(nz)] != nz:
            raise AssertionError("zeros interleaved with invariant factors")
        if any(b % a for a, b in zip(nz, nz[1:])):
            raise AssertionError("divisibility chain broken")


def _maxabs(a: np.ndarray) -> int:
    return int(np.max(np.abs(a))) if a.size else 0


def _matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact integer product; float BLAS when the result is provably exact."""
    if a.size == 0 or b.size == 0:
        return np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    bound = _maxabs(a) * _maxabs(b) * a.shape[1]
    if bound < 2**52 and a.dtype != object and b.dtype != object:
        return np.rint(a.astype(float) @ b.astype(float)).astype(np.int64)
    return np.dot(a.astype(object), b.astype(object))


def _exact_equal(a, b) -> bool:
    return a.shape == b.shape and bool(np.all(a.astype(object) == b.astype(object)))


class _State:
    def __init__(self, m: np.ndarray):
        rows, cols = m.shape
        dt = object if m.dtype == object or _maxabs(m) >= _SAFE else np.int64
        self.A = m.astype(dt).copy()
        self.U = np.eye(rows, dtype=np.int64).astype(dt)
        self.Ui = self.U.copy()
        self.V = np.eye(cols, dtype=np.int64).astype(dt)
        self.Vi = self.V.copy()

    def arrays(self):
        return self.A, self.U, self.Ui, self.V, self.Vi

    def guard(self, *touched):
        """Promote to exact integers once any touched entry reaches the bound."""
        if self.A.dtype == object:
            return
        if max(_maxabs(x) for x in touched) >= _SAFE:
            self.A, self.U, self.Ui, self.V, self.Vi = (x.astype(object) for x in self.arrays())

    # elementary operations, each applied to the transform and its inverse
    def swap_rows(self, i, j):
        if i != j:
            self.A[[i, j]] = self.A[[j, i]]
            self.U[[i, j]] = self.U[[j, i]]
            self.Ui[:, [i, j]] = self.Ui[:, [j, i]]

    def swap_cols(self, i, j):
        if i != j:
            self.A[:, [i, j]] = self.A[:, [j, i]]
            self.V[:, [i, j]] = self.V[:, [j, i]]
            self.Vi[[i, j]] = self.Vi[[j, i]]

    def negate_row(self, i):
        self.A[i] = -self.A[i]
        self.U[i] = -self.U[i]
        self.Ui[:, i] = -self.Ui[:, i]

    def reduce_rows(self, t, rows, q):
        """row r -= q_r * row t for r in ``rows``."""
        self.A[rows] -= np.outer(q, self.A[t])
        self.U[rows] -= np.outer(q, self.U[t])
        self.Ui[:, t] += self.Ui[:, rows] @ q
        self.guard(self.A[rows], self.U[rows], self.Ui[:, t])

    def reduce_cols(self, t, cols, q):
        """col c -= q_c * col t for c in ``cols``."""
        self.A[:, cols] -= np.outer(self.A[:, t], q)
        self.V[:, cols] -= np.outer(self.V[:, t], q)
        self.Vi[t] += q @ self.Vi[cols]
        self.guard(self.A[:, cols], self.V[:, cols], self.Vi[t])

    def mix_2x2(self, i, j, L, Li, R, Ri):
        """Apply unimodular 2x2 blocks to rows (L) and columns (R) i, j."""
        A, U, Ui, V, Vi = self.arrays()
        idx = [i, j]
        L, Li, R, Ri = (np.array(x, dtype=A.dtype) for x in (L, Li, R, Ri))
        A[idx] = L @ A[idx]
        U[idx] = L @ U[idx]
        Ui[:, idx] = Ui[:, idx] @ Li
        A[:, idx] = A[:, idx] @ R
        V[:, idx] = V[:, idx] @ R
        Vi[idx] = Ri @ Vi[idx]
        self.guard(A[idx], A[:, idx], U[idx], Ui[:, idx], V[:, idx], Vi[idx])


def _nearest_quotient(x, p):
    """Quotients leaving remainders in [-|p|/2, |p|/2), which keeps entries small."""
    if p < 0:
        x, p = -x, -p
    return (2 * x + p) // (2 * p)


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def smith_normal_form(m, verify: bool = True) -> SNFResult:
    """Smith normal form with unimodular transforms, computed exactly."""
    m = np.asarray(m)
    if m.ndim != 2:
        raise ValueError("expected a 2-d integer matrix")
    if m.dtype != object and not np.issubdtype(m.dtype, np.integer):
        if not np.all(m == np.rint(m)):
            raise ValueError("matrix has non-integer entries")
    m0 = m.astype(object) if m.dtype == object else m.astype(np.int64)
    st = _State(m0)
    rows, cols = m0.shape
    t = 0
    while t < min(rows, cols):
        sub = st.A[t:, t:]
        nz = np.argwhere(sub != 0)
        if len(nz) == 0:
            break
        vals = np.abs(sub[nz[:, 0], nz[:, 1]])
        i, j = nz[int(np.argmin(vals))]
        st.swap_rows(t, t + int(i))
        st.swap_cols(t, t + int(j))
        while True:
            p = st.A[t, t]
            col = st.A[t + 1:, t]
            rr = np.flatnonzero(col != 0)
            if len(rr):
                st.reduce_rows(t, t + 1 + rr, _nearest_quotient(col[rr], p))
            row = st.A[t, t + 1:]
            cc = np.flatnonzero(row != 0)
            if len(cc):
                st.reduce_cols(t, t + 1 + cc, _nearest_quotient(row[cc], p))
            col = st.A[t + 1:, t]
            row = st.A[t, t + 1:]
            rr = np.flatnonzero(col != 0)
            cc = np.flatnonzero(row != 0)
            if not len(rr) and not len(cc):
                break
            # a nonzero remainder is smaller than the pivot: move it in
            cand = [(abs(col[r]), 0, r) for r in rr] + [(abs(row[c]), 1, c) for c in cc]
            _, kind, k = min(cand)
            if kind == 0:
                st.swap_rows(t, t + 1 + int(k))
            else:
                st.swap_cols(t, t + 1 + int(k))
        if st.A[t, t] < 0:
            st.negate_row(t)
        t += 1
    r = t
    # enforce d_i | d_j
    for i in range(r):
        for j in range(i + 1, r):
            a, b = int(st.A[i, i]), int(st.A[j, j])
            if b % a == 0:
                continue
            g, s, u = _ext_gcd(a, b)
            L = [[s, u], [-b // g, a // g]]
            Li = [[a // g, -u], [b // g, s]]
            R = [[1, -u * b // g], [1, s * a // g]]
            Ri = [[s * a // g, u * b // g], [-1, 1]]
            st.mix_2x2(i, j, L, Li, R, Ri)
            if st.A[j, j] < 0:
                st.negate_row(j)
    res = SNFResult(m0, st.U, st.V, st.Ui, st.Vi, st.A)
    if verify:
        res.verify()
    return res


def bareiss_det(m) -> int:
    """Exact determinant by fraction-free elimination."""
    a = [[int(x) for x in row] for row in np.asarray(m)]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]
