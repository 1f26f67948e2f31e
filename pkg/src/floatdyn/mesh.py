"""Watertight hull meshes: validation, exact volume integrals, file I/O.

A :class:`HullMesh` is a triangle surface in body coordinates (meters)
whose triangles wind counter-clockwise seen from outside.  Validation
enforces the invariants every downstream algorithm relies on: each edge
shared by exactly two triangles with opposite traversal, strictly
positive enclosed volume, no degenerate faces.

Volume, centroid and inertia integrals use the signed-tetrahedron
decomposition against the origin, which is exact for polyhedral
boundaries.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import EmptyMesh, InvalidMesh, NonWatertightMesh
from .polygons import triangulate_simple_polygon

#: default ray direction for point containment tests; fixed irrationalish
#: components dodge edge-aligned degeneracies on axis-aligned meshes
_RAY_DIRECTION = np.array([0.540302305868, 0.173648177667, 0.823411951498])


class HullMesh:
    """Validated, immutable watertight triangle mesh in body coordinates.

    Parameters
    ----------
    vertices : (n, 3) array_like
        Vertex positions, meters.
    triangles : (m, 3) array_like of int
        Vertex index triples, counter-clockwise seen from outside.
    symmetry_flag : bool
        Claim that the plane ``x2 = 0`` is a geometric symmetry plane;
        checked against the vertex set when set.
    area_tol : float, optional
        Minimum triangle area; defaults to ``1e-12 * diameter**2``.
    symmetry_tol : float, optional
        Mirror-matching tolerance; defaults to ``1e-9 * diameter``.
    """

    def __init__(
        self,
        vertices,
        triangles,
        symmetry_flag: bool = False,
        area_tol: float | None = None,
        symmetry_tol: float | None = None,
    ):
        vertices = np.ascontiguousarray(vertices, dtype=float)
        triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 3:
            raise InvalidMesh("vertices must be an (n, 3) array")
        if triangles.ndim != 2 or triangles.shape[1] != 3:
            raise InvalidMesh("triangles must be an (m, 3) index array")
        if len(triangles) == 0:
            raise EmptyMesh("mesh has no triangles")
        if not np.all(np.isfinite(vertices)):
            raise InvalidMesh("non-finite vertex coordinates")
        if triangles.min() < 0 or triangles.max() >= len(vertices):
            raise InvalidMesh("triangle index out of range")

        self.vertices = vertices
        self.triangles = triangles
        self.symmetry_flag = bool(symmetry_flag)
        self.vertices.setflags(write=False)
        self.triangles.setflags(write=False)

        bbox_min = vertices.min(axis=0)
        bbox_max = vertices.max(axis=0)
        self.bbox = (bbox_min, bbox_max)
        self.diameter = float(np.linalg.norm(bbox_max - bbox_min))
        self.height = float(bbox_max[2] - bbox_min[2])

        self._tri_vertices = vertices[triangles]
        self._tri_vertices.setflags(write=False)

        self._validate(area_tol, symmetry_tol)

        v6 = _signed_det(self._tri_vertices)
        self.volume = float(v6.sum() / 6.0)
        if self.volume <= 0.0:
            raise InvalidMesh(
                f"signed enclosed volume {self.volume} not positive; "
                "check triangle orientation"
            )
        s = self._tri_vertices.sum(axis=1)
        self.volume_centroid = (v6[:, None] * s).sum(axis=0) / 24.0 / self.volume
        self.volume_centroid.setflags(write=False)

    # -- construction helpers -------------------------------------------------

    def translated(self, offset) -> "HullMesh":
        """Copy of the mesh with all vertices shifted by ``offset``."""
        return HullMesh(
            self.vertices + np.asarray(offset, dtype=float),
            self.triangles,
            symmetry_flag=self.symmetry_flag,
        )

    @property
    def triangle_vertices(self) -> np.ndarray:
        """Triangle corner positions, shape (m, 3, 3)."""
        return self._tri_vertices

    # -- validation ------------------------------------------------------------

    def _validate(self, area_tol, symmetry_tol):
        tri = self.triangles
        if np.any((tri[:, 0] == tri[:, 1]) | (tri[:, 1] == tri[:, 2]) | (tri[:, 2] == tri[:, 0])):
            raise InvalidMesh("triangle with repeated vertex index")

        if area_tol is None:
            area_tol = 1e-12 * self.diameter**2
        p, q, r = (self._tri_vertices[:, k] for k in range(3))
        areas = 0.5 * np.linalg.norm(np.cross(q - p, r - p), axis=1)
        if np.any(areas <= area_tol):
            bad = int(np.argmin(areas))
            raise InvalidMesh(f"degenerate triangle {bad} with area {areas[bad]:.3e}")

        edges = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
        directed = {}
        for i, j in edges:
            key = (int(i), int(j))
            if key in directed:
                raise NonWatertightMesh(f"directed edge {key} appears twice")
            directed[key] = True
        for i, j in directed:
            if (j, i) not in directed:
                raise NonWatertightMesh(f"edge ({i}, {j}) has no opposite partner")

        if self.symmetry_flag:
            tol = symmetry_tol if symmetry_tol is not None else 1e-9 * self.diameter
            mirrored = self.vertices * np.array([1.0, -1.0, 1.0])
            from scipy.spatial import cKDTree

            tree = cKDTree(self.vertices)
            dist, _ = tree.query(mirrored, k=1)
            if dist.max() > tol:
                raise InvalidMesh(
                    "symmetry_flag set but vertex set is not mirror symmetric "
                    f"about x2=0 (max mismatch {dist.max():.3e})"
                )

    # -- integrals ---------------------------------------------------------------

    def volume_integrals(self):
        """Exact volume, first and second moments about the body origin.

        Returns ``(V, first, second)`` with ``first_i = integral of x_i``
        and ``second_ij = integral of x_i x_j`` over the enclosed solid.
        """
        return _volume_integrals(self._tri_vertices)

    def contains_points(self, points, chunk: int = 20000) -> np.ndarray:
        """Parity ray-cast containment test for a batch of points."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.empty(len(points), dtype=bool)
        for start in range(0, len(points), chunk):
            stop = min(start + chunk, len(points))
            out[start:stop] = _ray_parity(
                points[start:stop], self._tri_vertices, _RAY_DIRECTION
            )
        return out


def _signed_det(tris) -> np.ndarray:
    """6x the signed tetra volumes (origin, p, q, r) per triangle."""
    p, q, r = tris[:, 0], tris[:, 1], tris[:, 2]
    return np.einsum("ij,ij->i", p, np.cross(q, r))


def _volume_integrals(tris):
    v6 = _signed_det(tris)
    volume = v6.sum() / 6.0
    s = tris.sum(axis=1)
    first = (v6[:, None] * s).sum(axis=0) / 24.0
    # integral of x_i x_j over the tetra (0,p,q,r): V/20 (sum_v v_i v_j + s_i s_j)
    outer = np.einsum("tki,tkj->tij", tris, tris) + np.einsum("ti,tj->tij", s, s)
    second = np.einsum("t,tij->ij", v6 / 6.0, outer) / 20.0
    return float(volume), first, second


def _ray_parity(points, tris, direction):
    """Count ray-triangle crossings per point, return odd-parity mask."""
    eps = 1e-13
    e1 = tris[:, 1] - tris[:, 0]
    e2 = tris[:, 2] - tris[:, 0]
    h = np.cross(direction, e2)
    a = np.einsum("tj,tj->t", e1, h)
    ok = np.abs(a) > eps
    f = np.zeros_like(a)
    f[ok] = 1.0 / a[ok]

    s = points[:, None, :] - tris[None, :, 0, :]
    u = f[None, :] * np.einsum("ptj,tj->pt", s, h)
    qv = np.cross(s, e1[None, :, :])
    v = f[None, :] * np.einsum("ptj,j->pt", qv, direction)
    t = f[None, :] * np.einsum("ptj,tj->pt", qv, e2)
    hits = ok[None, :] & (u >= 0) & (v >= 0) & (u + v <= 1) & (t > eps)
    return hits.sum(axis=1) % 2 == 1


def inertia_from_mesh(mesh: HullMesh, density: float):
    """Mass and inertia tensor of the uniform solid bounded by the mesh.

    Returns ``(mass, inertia)`` with the inertia taken about the volume
    centroid in body axes; place G at the centroid when using it.
    """
    if density <= 0:
        raise ValueError("density must be positive")
    volume, first, second = mesh.volume_integrals()
    centroid = first / volume
    # parallel-axis shift of the raw origin moments to the centroid
    second_c = second - volume * np.outer(centroid, centroid)
    trace = np.trace(second_c)
    inertia = density * (trace * np.eye(3) - second_c)
    mass = density * volume
    return mass, inertia


# -- file ingestion ---------------------------------------------------------------


def load_mesh(path, symmetry_flag: bool = False) -> HullMesh:
    """Load an STL or OBJ file, dispatching on the extension."""
    path = Path(path)
    ext = path.suffix.lower()
    if ext == ".stl":
        return load_stl(path, symmetry_flag=symmetry_flag)
    if ext == ".obj":
        return load_obj(path, symmetry_flag=symmetry_flag)
    raise InvalidMesh(f"unsupported mesh format {ext!r} (expected .stl or .obj)")


def load_stl(path, symmetry_flag: bool = False) -> HullMesh:
    """Read a binary or ASCII STL file and weld identical vertices."""
    raw = Path(path).read_bytes()
    if len(raw) >= 84:
        (count,) = struct.unpack_from("<I", raw, 80)
        if len(raw) == 84 + 50 * count:
            return _mesh_from_soup(_parse_stl_binary(raw, count), symmetry_flag)
    return _mesh_from_soup(_parse_stl_ascii(raw.decode("ascii", "replace")), symmetry_flag)


def _parse_stl_binary(raw, count):
    data = np.frombuffer(raw[84 : 84 + 50 * count], dtype=np.uint8)
    records = data.reshape(count, 50)
    floats = records[:, :48].copy().view("<f4").reshape(count, 4, 3)
    return floats[:, 1:4, :].astype(float)


def _parse_stl_ascii(text):
    tris = []
    current = []
    for line in text.splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "vertex":
            current.append([float(x) for x in parts[1:4]])
        elif parts[0] == "endfacet":
            if len(current) != 3:
                raise InvalidMesh("ASCII STL facet without exactly 3 vertices")
            tris.append(current)
            current = []
    if not tris:
        raise EmptyMesh("no facets found in ASCII STL")
    return np.array(tris, dtype=float)


def _mesh_from_soup(tri_soup, symmetry_flag):
    """Weld a (m, 3, 3) triangle soup into an indexed mesh by exact equality."""
    flat = tri_soup.reshape(-1, 3)
    vertices, inverse = np.unique(flat, axis=0, return_inverse=True)
    triangles = inverse.reshape(-1, 3)
    return HullMesh(vertices, triangles, symmetry_flag=symmetry_flag)


def load_obj(path, symmetry_flag: bool = False) -> HullMesh:
    """Read a Wavefront OBJ file (v/f records, polygonal faces allowed)."""
    vertices = []
    faces = []
    for line in Path(path).read_text().splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            vertices.append([float(x) for x in parts[1:4]])
        elif parts[0] == "f":
            idx = []
            for token in parts[1:]:
                i = int(token.split("/")[0])
                idx.append(i - 1 if i > 0 else len(vertices) + i)
            faces.append(idx)
    if not vertices or not faces:
        raise EmptyMesh("no geometry found in OBJ file")
    vertices = np.array(vertices, dtype=float)

    triangles = []
    for face in faces:
        if len(face) < 3:
            raise InvalidMesh("OBJ face with fewer than 3 vertices")
        if len(face) == 3:
            triangles.append(face)
            continue
        ring = vertices[face]
        normal = _newell_normal(ring)
        plane = _project_to_plane(ring, normal)
        for a, b, c in triangulate_simple_polygon(plane):
            triangles.append([face[a], face[b], face[c]])
    return HullMesh(vertices, np.array(triangles, dtype=np.int64), symmetry_flag)


def _newell_normal(ring):
    nxt = np.roll(ring, -1, axis=0)
    n = np.array(
        [
            np.sum((ring[:, 1] - nxt[:, 1]) * (ring[:, 2] + nxt[:, 2])),
            np.sum((ring[:, 2] - nxt[:, 2]) * (ring[:, 0] + nxt[:, 0])),
            np.sum((ring[:, 0] - nxt[:, 0]) * (ring[:, 1] + nxt[:, 1])),
        ]
    )
    norm = np.linalg.norm(n)
    if norm == 0:
        raise InvalidMesh("degenerate polygonal face")
    return n / norm


def _project_to_plane(ring, normal):
    u = np.cross(normal, [1.0, 0.0, 0.0])
    if np.linalg.norm(u) < 1e-12:
        u = np.cross(normal, [0.0, 1.0, 0.0])
    u /= np.linalg.norm(u)
    v = np.cross(normal, u)
    return np.column_stack([ring @ u, ring @ v])


def save_stl(path, triangles, ascii_format: bool = False, name: str = "floatdyn"):
    """Write a (m, 3, 3) triangle array (or HullMesh) as an STL file.

    Zero-area triangles (cap fans over collinear waterline runs produce
    them) are dropped: they carry no geometry and upset STL viewers.
    """
    if isinstance(triangles, HullMesh):
        triangles = triangles.triangle_vertices
    triangles = np.asarray(triangles, dtype=float)
    p, q, r = triangles[:, 0], triangles[:, 1], triangles[:, 2]
    normals = np.cross(q - p, r - p)
    lengths = np.linalg.norm(normals, axis=1)
    scale = np.abs(triangles).max() if triangles.size else 1.0
    keep = lengths > 1e-14 * max(scale, 1.0) ** 2
    triangles, normals, lengths = triangles[keep], normals[keep], lengths[keep]
    normals = normals / lengths[:, None]

    path = Path(path)
    if ascii_format:
        lines = [f"solid {name}"]
        for n, tri in zip(normals, triangles):
            lines.append(f"  facet normal {n[0]:.9e} {n[1]:.9e} {n[2]:.9e}")
            lines.append("    outer loop")
            for vtx in tri:
                lines.append(f"      vertex {vtx[0]:.9e} {vtx[1]:.9e} {vtx[2]:.9e}")
            lines.append("    endloop")
            lines.append("  endfacet")
        lines.append(f"endsolid {name}")
        path.write_text("\n".join(lines) + "\n")
        return

    blob = bytearray()
    blob += name.encode("ascii")[:80].ljust(80, b"\0")
    blob += struct.pack("<I", len(triangles))
    for n, tri in zip(normals, triangles):
        blob += struct.pack("<3f", *n)
        for vtx in tri:
            blob += struct.pack("<3f", *vtx)
        blob += struct.pack("<H", 0)
    path.write_bytes(bytes(blob))
