"""Oriented simplicial complexes of dimension <= 3 with model-space charts.

Simplices are sorted vertex tuples; orientation is the one induced by the
global vertex order.  Each complex carries a :class:`Chart` recording a
"home" model coordinate per vertex, from which points inside simplices are
interpolated (angles unwrapped on circles, reprojection onto spheres, and
the antipodal gluing of the mapping torus applied per simplex).
"""

from __future__ import annotations

import hashlib
import itertools
import json
import os
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ChartDomainError, Disconnected, InvalidComplex, InvalidParams, UnknownBuiltin

MAX_LEVEL = 4
MAX_LEVEL_3D = 2
KINDS = ("interval", "circle", "sphere", "circle_sphere", "mapping_torus")


def _wrap(a):
    """Map angles into (-pi, pi]."""
    return np.pi - np.mod(np.pi - a, 2 * np.pi)


@dataclass(frozen=True)
class Point:
    simplex: tuple
    barycentric: tuple

    def __post_init__(self):
        b = np.asarray(self.barycentric, dtype=float)
        if len(b) != len(self.simplex):
            raise ChartDomainError("barycentric length does not match simplex")
        if np.any(b < -1e-12) or abs(b.sum() - 1.0) > 1e-12:
            raise ChartDomainError(f"invalid barycentric coordinates {tuple(b)}")


@dataclass(frozen=True, eq=False)
class Chart:
    """Model coordinates of the geometric realization.

    ``home`` has one row of raw coordinates per vertex:

    ============== ==================
    kind           row
    ============== ==================
    interval       x
    circle         angle
    sphere         unit vector
    circle_sphere  angle, unit vector
    mapping_torus  t, unit vector
    ============== ==================
    """

    kind: str
    home: np.ndarray

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParams(f"unknown chart kind {self.kind!r}")

    def lifted(self, simplex: Sequence[int]) -> np.ndarray:
        """Raw coordinates of the simplex's vertices in one consistent lift."""
        raw = self.home[list(simplex)].copy()
        if self.kind in ("circle", "circle_sphere"):
            raw[1:, 0] = raw[0, 0] + _wrap(raw[1:, 0] - raw[0, 0])
        elif self.kind == "mapping_torus":
            t = raw[:, 0]
            if t.max() > 0.5:
                seam = t == 0.0
                raw[seam, 0] = 1.0
                raw[seam, 1:] *= -1.0
        return raw

    def raw_point(self, simplex: Sequence[int], bary: Sequence[float]) -> np.ndarray:
        raw = np.asarray(bary, dtype=float) @ self.lifted(simplex)
        if self.kind in ("sphere", "circle_sphere", "mapping_torus"):
            s = 0 if self.kind == "sphere" else 1
            nrm = np.linalg.norm(raw[s:])
            if nrm < 1e-12:
                raise ChartDomainError("sphere interpolation degenerate (antipodal vertices in one simplex)")
            raw[s:] /= nrm
        return raw

    def canonical(self, raw: np.ndarray) -> np.ndarray:
        """Normal form of a raw coordinate used for newly created vertices."""
        raw = raw.copy()
        if self.kind in ("circle", "circle_sphere"):
            raw[0] = np.mod(raw[0], 2 * np.pi)
        elif self.kind == "mapping_torus" and raw[0] >= 1.0:
            raw[0] -= 1.0
            raw[1:] *= -1.0
        return raw

    def to_model(self, raw: np.ndarray):
        k = self.kind
        if k == "interval":
            return float(raw[0])
        if k == "circle":
            return complex(np.exp(1j * raw[0]))
        if k == "sphere":
            return np.array(raw, dtype=float)
        if k == "circle_sphere":
            return complex(np.exp(1j * raw[0])), np.array(raw[1:], dtype=float)
        return float(raw[0]), np.array(raw[1:], dtype=float)

    def model_point(self, simplex: Sequence[int], bary: Sequence[float]):
        return self.to_model(self.raw_point(simplex, bary))

    def vertex_model(self, v: int):
        return self.to_model(self.home[v])


@dataclass(frozen=True)
class SpanningTree:
    root: int
    parent: dict  # vertex -> (parent vertex, edge index)
    order: tuple  # vertices in BFS order
    tree_edges: frozenset
    non_tree_edges: tuple


@dataclass(frozen=True)
class BoundaryData:
    """Integer boundary matrices (rows = faces, columns = cells) and the
    oriented boundary loop of every 2-cell as ``(edge index, sign)`` triples
    starting at the cell's minimal vertex."""

    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray
    loops: tuple


@dataclass(frozen=True, eq=False)
class SimplicialComplex:
    n_vertices: int
    simplices: tuple  # simplices[k] = sorted tuple of sorted k-simplex tuples, k = 1..3 (index 0 unused)
    chart: Chart
    basepoint: int = 0
    name: str = ""
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        idx = [{s: i for i, s in enumerate(level)} for level in self.simplices]
        object.__setattr__(self, "_index", idx)
        self._validate()

    # -- structure ------------------------------------------------------
    @property
    def dim(self) -> int:
        return max((k for k in range(1, 4) if self.simplices[k]), default=0)

    def cells(self, k: int) -> tuple:
        if k == 0:
            return tuple((v,) for v in range(self.n_vertices))
        return self.simplices[k] if k < len(self.simplices) else ()

    def count(self, k: int) -> int:
        return len(self.cells(k))

    @property
    def edges(self) -> tuple:
        return self.simplices[1]

    @property
    def triangles(self) -> tuple:
        return self.simplices[2]

    @property
    def tetrahedra(self) -> tuple:
        return self.simplices[3]

    def index(self, simplex: Sequence[int]) -> int:
        s = tuple(simplex)
        if len(s) == 1:
            return s[0]
        try:
            return self._index[len(s) - 1][s]
        except KeyError:
            raise KeyError(f"{s} is not a simplex") from None

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * self.count(k) for k in range(4))

    @property
    def fingerprint(self) -> str:
        h = hashlib.sha1(repr((self.n_vertices, self.simplices[1:])).encode())
        return h.hexdigest()

    def point(self, simplex, bary) -> Point:
        return Point(tuple(simplex), tuple(float(b) for b in bary))

    def model_point(self, p: Point):
        if len(p.simplex) == 1:
            v = p.simplex[0]
            if not 0 <= v < self.n_vertices:
                raise ChartDomainError(f"vertex {v} out of range")
            return self.chart.vertex_model(v)
        if tuple(p.simplex) not in self._index[len(p.simplex) - 1]:
            raise ChartDomainError(f"{p.simplex} is not a simplex of this complex")
        return self.chart.model_point(p.simplex, p.barycentric)

    def neighbours(self) -> list[list[tuple[int, int]]]:
        nb = [[] for _ in range(self.n_vertices)]
        for i, (u, v) in enumerate(self.edges):
            nb[u].append((v, i))
            nb[v].append((u, i))
        for lst in nb:
            lst.sort()
        return nb

    def _validate(self):
        n = self.n_vertices
        if n < 1:
            raise InvalidComplex("no vertices")
        if len(self.simplices) != 4:
            raise InvalidComplex("simplices must list dimensions 0..3")
        if not 0 <= self.basepoint < n:
            raise InvalidComplex("basepoint out of range")
        if self.chart.home.shape[0] != n:
            raise InvalidComplex("chart does not cover every vertex")
        for k in range(1, 4):
            level = self.simplices[k]
            if len(set(level)) != len(level):
                raise InvalidComplex(f"duplicate {k}-simplices")
            for s in level:
                if len(s) != k + 1 or len(set(s)) != k + 1 or tuple(sorted(s)) != s:
                    raise InvalidComplex(f"malformed simplex {s}")
                if s[0] < 0 or s[-1] >= n:
                    raise InvalidComplex(f"simplex {s} uses unknown vertices")
                if k > 1:
                    for face in itertools.combinations(s, k):
                        if face not in self._index[k - 1]:
                            raise InvalidComplex(f"face {face} of {s} missing")
        seen = {self.basepoint}
        queue = deque([self.basepoint])
        nb = self.neighbours()
        while queue:
            u = queue.popleft()
            for v, _ in nb[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        if len(seen) != n:
            raise Disconnected(f"{n - len(seen)} vertices unreachable from the basepoint")

    # -- serialization --------------------------------------------------
    def to_json(self) -> dict:
        return {
            "vertices": self.n_vertices,
            "simplices": {str(k): [list(s) for s in self.simplices[k]] for k in (1, 2, 3)},
            "basepoint": self.basepoint,
            "chart": f"builtin:{self.name}",
        }


def _closure(n_vertices: int, tops: Sequence[Sequence[int]]) -> tuple:
    levels = [set() for _ in range(4)]
    for s in tops:
        s = tuple(sorted(s))
        for k in range(1, len(s)):
            for face in itertools.combinations(s, k + 1):
                levels[k].add(face)
    return ((),) + tuple(tuple(sorted(lv)) for lv in levels[1:])


def _make(n, tops, kind, home, name, basepoint=0) -> SimplicialComplex:
    return SimplicialComplex(
        n_vertices=n,
        simplices=_closure(n, tops),
        chart=Chart(kind, np.asarray(home, dtype=float).reshape(n, -1)),
        basepoint=basepoint,
        name=name,
    )


# ----------------------------------------------------------------------
# builtins


def interval(m: int) -> SimplicialComplex:
    """[-1, 1] cut into ``m`` edges."""
    m = int(m)
    if m < 1:
        raise InvalidParams("interval needs m >= 1")
    xs = np.linspace(-1.0, 1.0, m + 1)
    return _make(m + 1, [(i, i + 1) for i in range(m)], "interval", xs, f"interval:m={m}")


def circle(m: int) -> SimplicialComplex:
    m = int(m)
    if m < 3:
        raise InvalidParams("circle needs m >= 3")
    th = 2 * np.pi * np.arange(m) / m
    edges = [(i, (i + 1) % m) for i in range(m)]
    return _make(m, edges, "circle", th, f"circle:m={m}")


def _icosahedron() -> tuple[np.ndarray, list]:
    h = 1 / np.sqrt(5)
    r = 2 / np.sqrt(5)
    pts = [(0.0, 0.0, 1.0)]
    pts += [(r * np.cos(2 * np.pi * k / 5), r * np.sin(2 * np.pi * k / 5), h) for k in range(5)]
    pts += [(r * np.cos(2 * np.pi * k / 5 + np.pi / 5), r * np.sin(2 * np.pi * k / 5 + np.pi / 5), -h) for k in range(5)]
    pts.append((0.0, 0.0, -1.0))
    pts = np.array(pts)
    d = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
    edge_len = d[d > 1e-9].min()
    adj = np.abs(d - edge_len) < 1e-9
    tris = [t for t in itertools.combinations(range(12), 3) if adj[t[0], t[1]] and adj[t[1], t[2]] and adj[t[0], t[2]]]
    return pts, tris


def icosphere(level: int = 0) -> SimplicialComplex:
    level = int(level)
    if not 0 <= level <= MAX_LEVEL:
        raise InvalidParams(f"icosphere level must be in 0..{MAX_LEVEL}")
    pts, tris = _icosahedron()
    c = _make(12, tris, "sphere", pts, "icosphere:level=0")
    for lv in range(level):
        c = subdivide(c, name=f"icosphere:level={lv + 1}")
    return c


def antipodes(points: np.ndarray) -> np.ndarray:
    """Index of the antipode of each unit vector in ``points``."""
    j = np.argmin(np.linalg.norm(points[:, None, :] + points[None, :, :], axis=-1), axis=1)
    if np.max(np.linalg.norm(points + points[j], axis=1)) > 1e-9:
        raise InvalidComplex("vertex set is not centrally symmetric")
    return j


def _prism_tets(bottom: Sequence[int], top: Sequence[int]) -> list:
    """Staircase split of a triangular prism; ``bottom`` sorted ascending
    by the base triangle's vertex order, ``top`` the matching top vertices."""
    a, b, c = bottom
    a2, b2, c2 = top
    return [(a, b, c, c2), (a, b, b2, c2), (a, a2, b2, c2)]


def _layered(sphere: SimplicialComplex, layers: int, top_map) -> tuple[int, list]:
    """Vertices ``l*V + p``; layer ``layers`` is glued to layer 0 via ``top_map``."""
    V = sphere.n_vertices

    def vid(layer, p):
        if layer == layers:
            return int(top_map[p])
        return layer * V + p

    tets = []
    for layer in range(layers):
        for tri in sphere.triangles:
            tets += _prism_tets([vid(layer, p) for p in tri], [vid(layer + 1, p) for p in tri])
    return layers * V, tets


def product_circle_sphere(m: int = 3, level: int = 0) -> SimplicialComplex:
    m, level = int(m), int(level)
    if m < 3:
        raise InvalidParams("product_circle_sphere needs m >= 3")
    if not 0 <= level <= MAX_LEVEL_3D:
        raise InvalidParams(f"product_circle_sphere level must be in 0..{MAX_LEVEL_3D}")
    s = icosphere(level)
    n, tets = _layered(s, m, np.arange(s.n_vertices))
    home = np.vstack([np.column_stack([np.full(s.n_vertices, 2 * np.pi * l / m), s.chart.home]) for l in range(m)])
    return _make(n, tets, "circle_sphere", home, f"product_circle_sphere:m={m}:level={level}")


MT_LAYERS = 3


def mapping_torus_antipodal(level: int = 0) -> SimplicialComplex:
    """Mapping torus of the antipodal map of the icosahedral sphere.

    Layer 0 reproduces ``icosphere(0)`` vertex for vertex; the top of the
    last layer of prisms is glued to layer 0 through the antipode.
    """
    level = int(level)
    if not 0 <= level <= MAX_LEVEL_3D:
        raise InvalidParams(f"mapping_torus_antipodal level must be in 0..{MAX_LEVEL_3D}")
    s = icosphere(0)
    V = s.n_vertices
    n, tets = _layered(s, MT_LAYERS, antipodes(s.chart.home))
    home = np.vstack([np.column_stack([np.full(V, l / MT_LAYERS), s.chart.home]) for l in range(MT_LAYERS)])
    c = _make(n, tets, "mapping_torus", home, "mapping_torus_antipodal:level=0")
    for lv in range(level):
        c = subdivide(c, name=f"mapping_torus_antipodal:level={lv + 1}")
    return c


BUILTINS = {
    "interval": (interval, ("m",)),
    "circle": (circle, ("m",)),
    "icosphere": (icosphere, ("level",)),
    "product_circle_sphere": (product_circle_sphere, ("m", "level")),
    "mapping_torus_antipodal": (mapping_torus_antipodal, ("level",)),
}


def build_builtin(name: str, **params) -> SimplicialComplex:
    if name not in BUILTINS:
        raise InvalidParams(f"unknown complex {name!r}; choose from {sorted(BUILTINS)}")
    fn, allowed = BUILTINS[name]
    extra = set(params) - set(allowed)
    if extra:
        raise InvalidParams(f"{name} does not take {sorted(extra)}")
    try:
        return fn(**{k: int(v) for k, v in params.items()})
    except ValueError as exc:
        raise InvalidParams(str(exc)) from None


def parse_complex_spec(spec: str) -> SimplicialComplex:
    """``name[:k=v...]`` (optionally prefixed with ``builtin:``) or a JSON file path."""
    body = spec[len("builtin:"):] if spec.startswith("builtin:") else spec
    name, *rest = body.split(":")
    if name in BUILTINS:
        params = {}
        for item in rest:
            k, sep, v = item.partition("=")
            if not sep:
                raise InvalidParams(f"malformed parameter {item!r}")
            params[k] = v
        return build_builtin(name, **params)
    if spec.startswith("builtin:") or not os.path.exists(spec):
        raise UnknownBuiltin(f"{spec!r} is neither a builtin complex {sorted(BUILTINS)} nor a file")
    return load_complex(spec)


def load_complex(path) -> SimplicialComplex:
    with open(path) as fh:
        data = json.load(fh)
    try:
        chart = data["chart"]
        n = int(data["vertices"])
        simp = data["simplices"]
        base = int(data.get("basepoint", 0))
    except (KeyError, TypeError) as exc:
        raise InvalidComplex(f"malformed complex file: {exc}") from None
    if not chart.startswith("builtin:"):
        raise InvalidComplex("only builtin charts are supported")
    ref = parse_complex_spec(chart)
    levels = ((),) + tuple(tuple(sorted(tuple(sorted(s)) for s in simp.get(str(k), []))) for k in (1, 2, 3))
    if n != ref.n_vertices:
        raise InvalidComplex(f"file has {n} vertices, chart {chart!r} has {ref.n_vertices}")
    c = SimplicialComplex(n, levels, ref.chart, base, ref.name)
    if levels != ref.simplices:
        raise InvalidComplex(f"combinatorics do not match chart {chart!r}")
    return c


def save_complex(c: SimplicialComplex, path) -> None:
    with open(path, "w") as fh:
        json.dump(c.to_json(), fh)


# ----------------------------------------------------------------------
# chain-level data


def boundary_matrix(c: SimplicialComplex, k: int) -> np.ndarray:
    """Integer matrix of the boundary from k-cells to (k-1)-cells."""
    rows, cols = c.count(k - 1), c.count(k)
    d = np.zeros((rows, cols), dtype=np.int64)
    for j, s in enumerate(c.cells(k)):
        for pos in range(len(s)):
            face = s[:pos] + s[pos + 1:]
            d[c.index(face), j] += (-1) ** pos
    return d


def boundary_loop(c: SimplicialComplex, tri: Sequence[int]) -> list[tuple[int, int]]:
    a, b, d = tri
    return [(c.index((a, b)), 1), (c.index((b, d)), 1), (c.index((a, d)), -1)]


def boundary_data(c: SimplicialComplex) -> BoundaryData:
    loops = tuple(tuple(boundary_loop(c, t)) for t in c.triangles)
    return BoundaryData(boundary_matrix(c, 1), boundary_matrix(c, 2), boundary_matrix(c, 3), loops)


def spanning_tree(c: SimplicialComplex) -> SpanningTree:
    """Breadth-first tree from the basepoint, neighbours visited by index."""
    nb = c.neighbours()
    parent = {c.basepoint: None}
    order = [c.basepoint]
    queue = deque([c.basepoint])
    tree = set()
    while queue:
        u = queue.popleft()
        for v, e in nb[u]:
            if v not in parent:
                parent[v] = (u, e)
                tree.add(e)
                order.append(v)
                queue.append(v)
    if len(parent) != c.n_vertices:
        raise Disconnected("complex is disconnected")
    non_tree = tuple(e for e in range(c.count(1)) if e not in tree)
    return SpanningTree(c.basepoint, parent, tuple(order), frozenset(tree), non_tree)


def fundamental_cycle(c: SimplicialComplex) -> np.ndarray | None:
    """Signs ``eps`` with ``d2 @ eps == 0`` for a closed connected orientable
    surface, or ``None`` otherwise.  Sphere charts are oriented outward."""
    if c.dim != 2:
        return None
    tris = c.triangles
    if not tris:
        return None
    edge_tris = [[] for _ in range(c.count(1))]
    d2 = boundary_matrix(c, 2)
    for j in range(len(tris)):
        for e in np.flatnonzero(d2[:, j]):
            edge_tris[e].append(j)
    if any(len(t) != 2 for t in edge_tris):
        return None
    eps = np.zeros(len(tris), dtype=np.int64)
    eps[0] = 1
    queue = deque([0])
    while queue:
        j = queue.popleft()
        for e in np.flatnonzero(d2[:, j]):
            (other,) = [t for t in edge_tris[e] if t != j]
            want = -eps[j] * d2[e, j] * d2[e, other]
            if eps[other] == 0:
                eps[other] = want
                queue.append(other)
            elif eps[other] != want:
                return None
    if np.any(eps == 0) or np.any(d2 @ eps):
        return None
    if c.chart.kind == "sphere":
        p = c.chart.home[list(tris[0])]
        if np.linalg.det(p) * eps[0] < 0:
            eps = -eps
    return eps


# ----------------------------------------------------------------------
# subdivision


def _split(s: tuple, mid) -> list:
    if len(s) == 2:
        a, b = s
        return [(a, mid[a, b]), (mid[a, b], b)]
    if len(s) == 3:
        a, b, c = s
        ab, ac, bc = mid[a, b], mid[a, c], mid[b, c]
        return [(a, ab, ac), (b, ab, bc), (c, ac, bc), (ab, bc, ac)]
    a, b, c, d = s
    ab, ac, ad, bc, bd, cd = mid[a, b], mid[a, c], mid[a, d], mid[b, c], mid[b, d], mid[c, d]
    out = [(a, ab, ac, ad), (b, ab, bc, bd), (c, ac, bc, cd), (d, ad, bd, cd)]
    ring = [ac, bc, bd, ad]
    for x, y in zip(ring, ring[1:] + ring[:1]):
        out.append((ab, cd, x, y))
    return out


def subdivide(c: SimplicialComplex, name: str | None = None) -> SimplicialComplex:
    """Bisect every edge at its chart midpoint; triangles split 1->4 and
    tetrahedra 1->8.  Existing vertices keep their indices; the midpoint of
    the i-th edge (in sorted order) becomes vertex ``n_vertices + i``."""
    n0 = c.n_vertices
    mid = {}
    new_home = [c.chart.home]
    for i, e in enumerate(c.edges):
        mid[e] = n0 + i
        raw = c.chart.raw_point(e, (0.5, 0.5))
        new_home.append(c.chart.canonical(raw)[None, :])
    tops = []
    for k in (1, 2, 3):
        for s in c.simplices[k]:
            tops += _split(s, mid)
    home = np.vstack(new_home)
    label = name if name is not None else f"subdivide({c.name})"
    return _make(n0 + len(c.edges), tops, c.chart.kind, home, label, basepoint=c.basepoint)
