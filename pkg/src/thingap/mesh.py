"""Anisotropic structured triangulation of the 2-D narrow region.

The mesh is layered: tangential stations are graded so that the spacing
near the neck is proportional to the local gap width, and every station
carries the same number of vertical cells spanning the exact fiber between
the two boundary graphs.  Each quad is split into two triangles.  Vertices
sit exactly on their fiber, so refinement re-places vertices on the exact
graphs instead of interpolating the polygonal boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import GapGeometry, GeometryError


class MeshError(ValueError):
    """Raised for invalid meshing parameters or broken mesh invariants."""


TAG_INTERIOR = 0
TAG_TOP = 1
TAG_BOTTOM = 2
TAG_LATERAL_LEFT = 3
TAG_LATERAL_RIGHT = 4

TAG_NAMES = {
    TAG_INTERIOR: "interior",
    TAG_TOP: "top",
    TAG_BOTTOM: "bottom",
    TAG_LATERAL_LEFT: "lateral_left",
    TAG_LATERAL_RIGHT: "lateral_right",
}
TAG_CODES = {v: k for k, v in TAG_NAMES.items()}


@dataclass
class Mesh:
    """Structured layered triangulation.

    ``vertices`` is (N, 2), ``triangles`` (T, 3) with positive orientation,
    ``vertex_tags`` (N,) with the TAG_* codes.  ``stations`` and ``layers``
    record the generating structure: vertex ``(s, j)`` has flat index
    ``s * (layers + 1) + j``; the two triangles of cell ``(interval i,
    layer j)`` have indices ``(i * layers + j) * 2`` and ``+ 1``.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    vertex_tags: np.ndarray
    stations: np.ndarray
    layers: int
    geom: GapGeometry
    grading: dict

    def __post_init__(self):
        for a in (self.vertices, self.triangles, self.vertex_tags, self.stations):
            a.setflags(write=False)
        self._areas = None
        self._centroids = None
        self._grads = None

    # -- derived quantities --------------------------------------------------

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def num_triangles(self) -> int:
        return self.triangles.shape[0]

    def areas(self) -> np.ndarray:
        if self._areas is None:
            p = self.vertices[self.triangles]
            self._areas = 0.5 * np.abs(
                (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))
            self._areas.setflags(write=False)
        return self._areas

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        return 0.5 * ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                      - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))

    def centroids(self) -> np.ndarray:
        if self._centroids is None:
            self._centroids = self.vertices[self.triangles].mean(axis=1)
            self._centroids.setflags(write=False)
        return self._centroids

    def basis_gradients(self) -> np.ndarray:
        """Gradients of the three linear nodal functions per triangle, (T, 3, 2)."""
        if self._grads is None:
            p = self.vertices[self.triangles]
            e1 = p[:, 1] - p[:, 0]
            e2 = p[:, 2] - p[:, 0]
            det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
            g = np.empty((self.num_triangles, 3, 2))
            g[:, 1, 0] = e2[:, 1] / det
            g[:, 1, 1] = -e2[:, 0] / det
            g[:, 2, 0] = -e1[:, 1] / det
            g[:, 2, 1] = e1[:, 0] / det
            g[:, 0] = -g[:, 1] - g[:, 2]
            self._grads = g
            self._grads.setflags(write=False)
        return self._grads

    # -- point location --------------------------------------------------------

    def locate(self, x, tol: float = 1e-12) -> int:
        """Index of the lowest-index triangle containing ``x``.

        Containment uses barycentric coordinates with tolerance ``tol``;
        points on shared edges therefore resolve to the lowest triangle
        index.  Raises :class:`MeshError` for points outside the mesh.
        """
        x = np.asarray(x, dtype=float)
        s = self.stations
        if x[0] < s[0] - tol or x[0] > s[-1] + tol:
            raise MeshError(f"point {x} outside the meshed strip")
        k = int(np.searchsorted(s, x[0]))
        candidates = []
        for i in (k - 2, k - 1, k):
            if 0 <= i < s.size - 1 and s[i] - tol <= x[0] <= s[i + 1] + tol:
                start = i * self.layers * 2
                candidates.extend(range(start, start + self.layers * 2))
        if not candidates:
            raise MeshError(f"point {x} outside the meshed strip")
        cand = np.asarray(sorted(candidates), dtype=int)
        p = self.vertices[self.triangles[cand]]
        v0 = p[:, 0]
        e1 = p[:, 1] - v0
        e2 = p[:, 2] - v0
        det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        r = x[np.newaxis, :] - v0
        l1 = (r[:, 0] * e2[:, 1] - r[:, 1] * e2[:, 0]) / det
        l2 = (e1[:, 0] * r[:, 1] - e1[:, 1] * r[:, 0]) / det
        scale = tol / np.sqrt(np.abs(det))
        inside = (l1 >= -scale) & (l2 >= -scale) & (l1 + l2 <= 1.0 + scale)
        hits = cand[inside]
        if hits.size == 0:
            raise MeshError(f"point {x} not inside any candidate triangle")
        return int(hits[0])

    # -- validation -------------------------------------------------------------

    def validate(self) -> None:
        """Check orientation, closure membership, boundary placement, conformity."""
        sa = self.signed_areas()
        if np.any(sa <= 0):
            raise MeshError(f"{int(np.sum(sa <= 0))} triangles with nonpositive area")
        xp = self.vertices[:, :1]
        top = self.geom.top(xp)
        bot = self.geom.bottom(xp)
        tol = 1e-12 * max(1.0, float(np.max(np.abs(self.vertices))))
        if np.any(self.vertices[:, 1] > top + tol) or np.any(self.vertices[:, 1] < bot - tol):
            raise MeshError("vertex outside the closure of the gap region")
        on_top = self.vertex_tags == TAG_TOP
        on_bot = self.vertex_tags == TAG_BOTTOM
        if np.any(np.abs(self.vertices[on_top, 1] - top[on_top]) > 1e-12):
            raise MeshError("top-tagged vertex off the upper graph")
        if np.any(np.abs(self.vertices[on_bot, 1] - bot[on_bot]) > 1e-12):
            raise MeshError("bottom-tagged vertex off the lower graph")
        edges = np.concatenate([self.triangles[:, [0, 1]], self.triangles[:, [1, 2]],
                                self.triangles[:, [2, 0]]])
        edges = np.sort(edges, axis=1)
        uniq, counts = np.unique(edges, axis=0, return_counts=True)
        if np.any(counts > 2):
            raise MeshError("non-conforming mesh: edge shared by more than 2 triangles")
        boundary_edges = uniq[counts == 1]
        is_boundary_vertex = self.vertex_tags != TAG_INTERIOR
        if not np.all(is_boundary_vertex[boundary_edges]):
            raise MeshError("single-triangle edge with an interior endpoint")

    def quality_mapped(self, aspect: Optional[float] = None) -> np.ndarray:
        """Triangle quality 2*inradius/longest-edge in the intended-scale frame.

        Each triangle is normalized by the local intended element size
        (graded tangential spacing, fiber height / layers) before measuring,
        which removes the deliberate anisotropy.
        """
        aspect = self.grading.get("aspect", 1.0) if aspect is None else aspect
        dxmax = self.grading.get("dxmax", np.inf)
        c = self.centroids()
        w = self.geom.gap_width(c[:, :1])
        sx = np.minimum(aspect * w, dxmax)
        sy = w / self.layers
        p = self.vertices[self.triangles].copy()
        p[:, :, 0] /= sx[:, None]
        p[:, :, 1] /= sy[:, None]
        e = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 1], p[:, 0] - p[:, 2]], axis=1)
        lens = np.linalg.norm(e, axis=2)
        area = 0.5 * np.abs((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                            - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))
        perim = lens.sum(axis=1)
        inradius = 2.0 * area / perim
        return 2.0 * inradius / lens.max(axis=1)

    # -- export -------------------------------------------------------------------

    def export_text(self) -> str:
        """Plain-text form: header, vertex lines ``x y tag``, triangle lines ``i j k``."""
        lines = [f"vertices {self.num_vertices} triangles {self.num_triangles}"]
        for (x, y), tag in zip(self.vertices, self.vertex_tags):
            lines.append(f"{x:.17g} {y:.17g} {TAG_NAMES[int(tag)]}")
        for i, j, k in self.triangles:
            lines.append(f"{i} {j} {k}")
        return "\n".join(lines) + "\n"


def _build_stations(geom: GapGeometry, aspect: float, dxmax: float, xrange: float) -> np.ndarray:
    """Graded station positions, symmetric about 0, spacing min(aspect*width, dxmax)."""
    if xrange <= 0 or xrange > 1.0:
        raise MeshError(f"xrange must lie in (0, 1], got {xrange}")
    if aspect <= 0 or dxmax <= 0:
        raise MeshError("grading parameters must be positive")
    right = [0.0]
    x = 0.0
    while x < xrange:
        dx = min(aspect * float(geom.gap_width(np.array([x]))), dxmax)
        nxt = x + dx
        if nxt >= xrange - 0.25 * dx:
            right.append(xrange)
            break
        right.append(nxt)
        x = nxt
    right = np.asarray(right)
    return np.concatenate([-right[:0:-1], right])


def _build_from_stations(geom: GapGeometry, stations: np.ndarray, layers: int,
                         grading: dict) -> Mesh:
    widths = geom.gap_width(stations[:, None])
    if np.any(widths <= 0):
        raise GeometryError("degenerate geometry: nonpositive gap width at a station")
    S = stations.size
    frac = np.arange(layers + 1) / layers
    bot = geom.bottom(stations[:, None])
    verts = np.empty((S * (layers + 1), 2))
    verts[:, 0] = np.repeat(stations, layers + 1)
    verts[:, 1] = (bot[:, None] + widths[:, None] * frac[None, :]).ravel()

    tags = np.full(S * (layers + 1), TAG_INTERIOR, dtype=np.int8)
    idx = np.arange(S * (layers + 1)).reshape(S, layers + 1)
    tags[idx[:, 0]] = TAG_BOTTOM
    tags[idx[:, -1]] = TAG_TOP
    tags[idx[0, 1:-1]] = TAG_LATERAL_LEFT
    tags[idx[-1, 1:-1]] = TAG_LATERAL_RIGHT

    tris = np.empty(((S - 1) * layers * 2, 3), dtype=np.int64)
    t = 0
    for i in range(S - 1):
        a = idx[i, :-1]
        b = idx[i + 1, :-1]
        c = idx[i + 1, 1:]
        d = idx[i, 1:]
        block = np.empty((layers * 2, 3), dtype=np.int64)
        block[0::2] = np.stack([a, b, c], axis=1)
        block[1::2] = np.stack([a, c, d], axis=1)
        tris[t:t + layers * 2] = block
        t += layers * 2
    return Mesh(vertices=verts, triangles=tris, vertex_tags=tags,
                stations=stations, layers=layers, geom=geom, grading=grading)


def generate(geom: GapGeometry, layers: int, aspect: float = 2.0,
             dxmax: float = 0.02, xrange: float = 1.0) -> Mesh:
    """Layered mesh of the gap strip ``|x'| <= xrange``.

    ``layers`` vertical cells per station (>= 4); tangential spacing
    ``min(aspect * gap_width, dxmax)``.  Vertices are placed exactly on the
    fiber between the boundary graphs, so top/bottom rows sit on the graphs.
    """
    if geom.dim != 2:
        raise MeshError("meshing is implemented for n = 2 only")
    if layers < 4:
        raise MeshError(f"layers must be >= 4, got {layers}")
    stations = _build_stations(geom, aspect, dxmax, xrange)
    grading = {"aspect": aspect, "dxmax": dxmax, "xrange": xrange, "layers": layers}
    return _build_from_stations(geom, stations, layers, grading)


def _with_midpoints(values: np.ndarray) -> np.ndarray:
    out = np.empty(values.size * 2 - 1)
    out[0::2] = values
    out[1::2] = 0.5 * (values[:-1] + values[1:])
    return out


def refine(mesh: Mesh, factor: int) -> Mesh:
    """Uniform refinement: midpoint stations, doubled layers, exact fibers.

    Because vertices are re-placed on the exact fiber, refined boundary rows
    lie on the true graphs and two factor-2 refinements produce the same
    vertex set as one factor-4 refinement.
    """
    if factor == 4:
        return refine(refine(mesh, 2), 2)
    if factor != 2:
        raise MeshError(f"refinement factor must be 2 or 4, got {factor}")
    stations = _with_midpoints(mesh.stations)
    layers = mesh.layers * 2
    grading = dict(mesh.grading)
    grading["layers"] = layers
    grading["refined_from"] = mesh.grading.get("layers")
    return _build_from_stations(mesh.geom, stations, layers, grading)


def strip_area(geom: GapGeometry, xrange: float, n_quad: int = 20001) -> float:
    """Reference area of the strip, fine trapezoid quadrature of the gap width."""
    xs = np.linspace(-xrange, xrange, n_quad)[:, None]
    w = geom.gap_width(xs)
    return float(np.trapezoid(w, dx=2 * xrange / (n_quad - 1)))
