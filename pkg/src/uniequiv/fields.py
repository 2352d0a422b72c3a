"""Matrix-valued fields over charts, the builtin registry, and admissibility.

A field is a pure function from model coordinates to an ``n x n`` complex
matrix.  Model coordinates depend on the chart kind (see
:class:`uniequiv.complexes.Chart`): a float on the interval, a unit complex
number on the circle, a unit 3-vector on the sphere, ``(z, n)`` on the
circle times sphere, and ``(t, n)`` on the mapping torus.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .complexes import Point, SimplicialComplex
from .errors import ChartDomainError, InvalidParams, UnknownBuiltin
from .settings import DEFAULT

@dataclass(frozen=True, eq=False)
class MatrixField:
    n: int
    evaluator: Callable
    label: str
    domain: str = "any"

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.evaluator(x), dtype=complex)


def evaluate(f: MatrixField, c: SimplicialComplex, p: Point) -> np.ndarray:
    if f.domain not in ("any", c.chart.kind):
        raise ChartDomainError(f"field {f.label} lives on {f.domain!r}, complex chart is {c.chart.kind!r}")
    return f(c.model_point(p))


def pullback(f: MatrixField, precompose: Callable, domain: str = "any", label: str | None = None) -> MatrixField:
    """The field ``x -> f(precompose(x))`` on charts of kind ``domain``."""
    return MatrixField(f.n, lambda x: f.evaluator(precompose(x)), label or f"pullback({f.label})", domain)


# ----------------------------------------------------------------------
# sphere helpers


def hopf_coords(nvec) -> np.ndarray:
    """Homogeneous coordinates ``[z1, z2]`` of the point of CP^1 with Bloch vector ``nvec``."""
    x, y, z = nvec
    if z >= 0:
        return np.array([1 + z, x + 1j * y])
    return np.array([x - 1j * y, 1 - z])


def bloch_vector(w) -> np.ndarray:
    """Inverse of :func:`hopf_coords` up to scaling of ``w``."""
    z1, z2 = w
    s = abs(z1) ** 2 + abs(z2) ** 2
    c = z1 * np.conj(z2)
    return np.array([2 * c.real, -2 * c.imag, abs(z1) ** 2 - abs(z2) ** 2]) / s


def _power(w, k: int) -> np.ndarray:
    if k >= 0:
        return w**k
    return np.conj(w) ** (-k)


def line_projection(w) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    return np.outer(w, w.conj()) / np.vdot(w, w).real


def cp1_projection_matrix(nvec, k: int = 1) -> np.ndarray:
    """Projection onto span(z1^k, z2^k) (conjugated coordinates for k < 0)."""
    return line_projection(_power(hopf_coords(nvec), k))


def sphere_power_map(k: int) -> Callable:
    """Self-map of the sphere induced by ``[z1, z2] -> [z1^k, z2^k]``."""
    k = int(k)
    return lambda nvec: bloch_vector(_power(hopf_coords(nvec), k))


def antipode(nvec):
    return -np.asarray(nvec, dtype=float)


def mapping_torus_projection(x) -> complex:
    """``(t, n) -> exp(2 pi i t)``, the projection of the mapping torus onto the circle."""
    t, _ = x
    return complex(np.exp(2j * np.pi * t))


def fiber_inclusion(nvec):
    """``n -> (0, n)``: the sphere as the fiber over t = 0."""
    return 0.0, np.asarray(nvec, dtype=float)


# ----------------------------------------------------------------------
# registry


def jump_interval() -> MatrixField:
    def ev(x):
        if x <= 0:
            return np.array([[x, 0], [0, 0]], dtype=complex)
        return np.array([[x, x], [x, x]], dtype=complex)

    return MatrixField(2, ev, "jump_interval", "interval")


def root_swap_circle() -> MatrixField:
    return MatrixField(2, lambda z: np.array([[0, z], [1, 0]], dtype=complex), "root_swap_circle", "circle")


def diag_const(*values) -> MatrixField:
    vals = tuple(complex(v) for v in (values or (0, 1)))
    m = np.diag(np.array(vals, dtype=complex))
    text = ",".join(_fmt(v) for v in vals)
    return MatrixField(len(vals), lambda x: m, f"diag_const:values={text}", "any")


def cp1_projection(k: int = 1) -> MatrixField:
    k = int(k)
    return MatrixField(2, lambda nvec: cp1_projection_matrix(nvec, k), f"cp1_projection:k={k}", "sphere")


def twisted_A() -> MatrixField:
    return pullback(root_swap_circle(), mapping_torus_projection, "mapping_torus", "twisted_A")


def twisted_B() -> MatrixField:
    eye = np.eye(2)

    def ev(x):
        t, nvec = x
        return np.exp(1j * np.pi * t) * (2 * cp1_projection_matrix(nvec, 1) - eye)

    return MatrixField(2, ev, "twisted_B", "mapping_torus")


def _features(x) -> tuple[str, np.ndarray]:
    """Smooth real features of a model point, invariant under the mapping-torus gluing."""
    if isinstance(x, (float, int, np.floating)):
        return "interval", np.array([float(x)])
    if isinstance(x, (complex, np.complexfloating)):
        return "circle", np.array([x.real, x.imag])
    if isinstance(x, np.ndarray):
        return "sphere", np.asarray(x, dtype=float)
    a, nvec = x
    if isinstance(a, (complex, np.complexfloating)):
        return "circle_sphere", np.concatenate([[a.real, a.imag], nvec])
    t = float(a)
    quad = np.outer(nvec, nvec)[np.triu_indices(3)]
    return "mapping_torus", np.concatenate([[np.cos(2 * np.pi * t), np.sin(2 * np.pi * t)], quad])


_N_FEATURES = {"interval": 1, "circle": 2, "sphere": 3, "circle_sphere": 5, "mapping_torus": 8}


def _random_hermitian(rng, n, scale):
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (m + m.conj().T) / 2


def conjugated(base: MatrixField, seed: int = 0, scale: float = 0.5) -> MatrixField:
    """``U(x) base(x) U(x)*`` with ``U = exp(i H(x))`` for a seeded smooth
    Hermitian path ``H``, affine in the chart features."""
    n = base.n
    rng = np.random.default_rng(int(seed))
    h0 = _random_hermitian(rng, n, 1.0)
    hs = {d: [_random_hermitian(rng, n, scale) for _ in range(k)] for d, k in _N_FEATURES.items()}

    def ev(x):
        kind, feats = _features(x)
        h = h0 + sum(f * hk for f, hk in zip(feats, hs[kind]))
        w, v = np.linalg.eigh(h)
        u = (v * np.exp(1j * w)) @ v.conj().T
        return u @ base.evaluator(x) @ u.conj().T

    return MatrixField(n, ev, f"conjugated({base.label}):seed={int(seed)}", base.domain)


REGISTRY = {
    "jump_interval": jump_interval,
    "root_swap_circle": root_swap_circle,
    "diag_const": diag_const,
    "cp1_projection": cp1_projection,
    "twisted_A": twisted_A,
    "twisted_B": twisted_B,
}


def _fmt(v: complex) -> str:
    if v.imag == 0:
        r = v.real
        return str(int(r)) if r == int(r) else repr(r)
    return repr(v).strip("()")


def _parse_params(items) -> dict:
    params = {}
    for item in items:
        k, sep, v = item.partition("=")
        if not sep:
            raise InvalidParams(f"malformed field parameter {item!r}")
        params[k] = v
    return params


def _build(name: str, params: dict, default_seed: int = 0) -> MatrixField:
    if name == "conjugated":
        params = dict(params)
        base = params.pop("base", None)
        if base is None:
            raise InvalidParams("conjugated needs base=<name>")
        try:
            seed = int(params.pop("seed", default_seed))
        except ValueError as exc:
            raise InvalidParams(str(exc)) from None
        return conjugated(_build(base, params), seed)
    if name not in REGISTRY:
        raise UnknownBuiltin(f"unknown field {name!r}; choose from {sorted(REGISTRY) + ['conjugated']}")
    try:
        if name == "diag_const":
            vals = params.pop("values", "0,1")
            if params:
                raise InvalidParams(f"unexpected parameters {sorted(params)}")
            return diag_const(*[complex(s.replace(" ", "")) for s in vals.split(",")])
        if name == "cp1_projection":
            k = int(params.pop("k", 1))
            if params:
                raise InvalidParams(f"unexpected parameters {sorted(params)}")
            return cp1_projection(k)
    except ValueError as exc:
        raise InvalidParams(str(exc)) from None
    if params:
        raise InvalidParams(f"{name} takes no parameters")
    return REGISTRY[name]()


def builtin_field(spec: str, default_seed: int = 0) -> MatrixField:
    """Resolve ``builtin:<name>[:<param>=<value>...]``.

    ``conjugated`` takes ``base=<name>``, ``seed=<int>`` and forwards any
    remaining parameters to the base, e.g.
    ``builtin:conjugated:base=cp1_projection:k=2:seed=7``.  A missing seed
    falls back to ``default_seed``.
    """
    body = spec[len("builtin:"):] if spec.startswith("builtin:") else spec
    name, *rest = body.split(":")
    return _build(name, _parse_params(rest), default_seed)


# ----------------------------------------------------------------------
# admissibility


@dataclass
class AdmissibilityReport:
    passed: bool
    max_normality_defect: float
    min_gap: float
    n_samples: int
    worst_gap_at: object = None
    worst_defect_at: object = None
    failures: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "max_normality_defect": self.max_normality_defect,
            "min_gap": self.min_gap,
            "n_samples": self.n_samples,
            "worst_gap_at": _point_json(self.worst_gap_at),
            "failures": self.failures[:10],
        }


def _point_json(p):
    if p is None:
        return None
    return {"simplex": list(p.simplex), "barycentric": [round(b, 12) for b in p.barycentric]}


def sample_points(c: SimplicialComplex, samples_per_simplex: int) -> list[Point]:
    """Vertices, ``s`` interior points per edge and the interior lattice of
    resolution ``s + 1`` in every triangle."""
    s = max(int(samples_per_simplex), 0)
    pts = [Point((v,), (1.0,)) for v in range(c.n_vertices)]
    for e in c.edges:
        for j in range(1, s + 1):
            t = j / (s + 1)
            pts.append(Point(e, (1 - t, t)))
    r = s + 1
    for tri in c.triangles:
        for i, j in itertools.product(range(1, r), repeat=2):
            k = r - i - j
            if k >= 1:
                b = (i / r, j / r, 1.0 - i / r - j / r)
                pts.append(Point(tri, b))
    return pts


@functools.lru_cache(maxsize=32)
def _sample_models(c: SimplicialComplex, samples: int) -> tuple:
    pts = sample_points(c, samples)
    return tuple(pts), tuple(c.model_point(p) for p in pts)


@functools.lru_cache(maxsize=64)
def sample_matrices(f: MatrixField, c: SimplicialComplex, samples: int) -> np.ndarray:
    """Values of ``f`` at :func:`sample_points`, stacked ``(N, n, n)``."""
    if f.domain not in ("any", c.chart.kind):
        raise ChartDomainError(f"field {f.label} lives on {f.domain!r}, complex chart is {c.chart.kind!r}")
    _, models = _sample_models(c, samples)
    out = np.array([f(x) for x in models])
    out.flags.writeable = False
    return out


def check_admissible(f: MatrixField, c: SimplicialComplex, samples_per_simplex: int = 4, tol=DEFAULT) -> AdmissibilityReport:
    pts, _ = _sample_models(c, samples_per_simplex)
    mats = sample_matrices(f, c, samples_per_simplex).copy()
    failures = []
    finite = np.all(np.isfinite(mats), axis=(1, 2))
    for i in np.flatnonzero(~finite):
        failures.append({"point": _point_json(pts[i]), "reason": "non-finite"})
    mats[~finite] = 0
    adj = np.conj(np.swapaxes(mats, 1, 2))
    comm = np.linalg.norm(mats @ adj - adj @ mats, ord=2, axis=(1, 2))
    scale = np.maximum(1.0, np.linalg.norm(mats, ord=2, axis=(1, 2)) ** 2)
    defect = np.where(finite, comm / scale, np.inf)
    lam = np.linalg.eigvals(mats)
    d = np.abs(lam[:, :, None] - lam[:, None, :])
    d[:, np.arange(f.n), np.arange(f.n)] = np.inf
    gap = np.where(finite, d.min(axis=(1, 2)), 0.0) if f.n > 1 else np.full(len(pts), np.inf)
    for i in np.flatnonzero(finite & (defect > tol.norm_tol)):
        failures.append({"point": _point_json(pts[i]), "reason": "not normal", "defect": float(defect[i])})
    for i in np.flatnonzero(finite & (gap < tol.gap_tol)):
        failures.append({"point": _point_json(pts[i]), "reason": "eigenvalue gap", "gap": float(gap[i])})
    i_def, i_gap = int(np.argmax(defect)), int(np.argmin(gap))
    return AdmissibilityReport(
        not failures, float(defect[i_def]), float(gap[i_gap]), len(pts), pts[i_gap], pts[i_def], failures
    )


def _spectrum_distance(x: np.ndarray, y: np.ndarray) -> float:
    d = np.abs(x[:, None] - y[None, :])
    n = len(x)
    if n <= 8:
        return float(min(max(d[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n))))
    # sorted comparison is an upper bound on the bottleneck distance
    key = lambda z: (round(z.real, 9), z.imag)
    return float(np.max(np.abs(np.array(sorted(x, key=key)) - np.array(sorted(y, key=key)))))


def same_char_poly(a: MatrixField, b: MatrixField, c: SimplicialComplex, samples: int = 4, tol: float = 1e-8) -> bool:
    """True iff the eigenvalue multisets of ``a`` and ``b`` agree within
    ``tol`` (bottleneck matching) at every sample point."""
    if a.n != b.n:
        return False
    la = np.linalg.eigvals(sample_matrices(a, c, samples))
    lb = np.linalg.eigvals(sample_matrices(b, c, samples))
    return all(_spectrum_distance(x, y) <= tol for x, y in zip(la, lb))
