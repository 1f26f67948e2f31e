"""Clip a hull mesh against the free-surface plane and integrate the result.

Clipping happens in body coordinates: at pose ``q`` the free surface is
the plane ``zeta + k3 . x = 0`` with ``k3`` the fixed down axis in body
components, and a point is submerged when its depth ``zeta + k3 . x`` is
positive.  Working in the body frame keeps every downstream integral
(volume, buoyancy center, waterplane moments) natively in body axes and
avoids transforming the mesh for each pose.

The clipped boundary consists of the submerged hull triangles plus one
planar cap polygon per waterline loop, so the divergence theorem applies
to the closed surface.  Multiple loops (catamaran sections) and loops of
either orientation (holes) are supported; nothing assumes convexity.

Robustness: vertex depths within ``snap_tol`` of zero are snapped to
exactly zero and triangles are then classified by their sign pattern, so
coplanar faces (flat-bottomed barges, decks awash) produce clean caps
instead of sliver geometry.  Waterline crossing points are computed once
per mesh edge in canonical index order, which makes the two triangles
sharing an edge agree bitwise and lets cap loops chain exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ClipDegenerate
from .kinematics import Pose, k3_body
from .mesh import HullMesh
from .polygons import fan_triangles, planar_moments_3d


def _cross_rows(a, b):
    """Row-wise cross product without numpy.cross axis juggling."""
    out = np.empty_like(a)
    out[:, 0] = a[:, 1] * b[:, 2] - a[:, 2] * b[:, 1]
    out[:, 1] = a[:, 2] * b[:, 0] - a[:, 0] * b[:, 2]
    out[:, 2] = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    return out

#: fraction of the mesh diameter below which a vertex depth is treated as zero
DEFAULT_SNAP_FRACTION = 1e-10

#: closure tolerance: net area vector must vanish to this times diameter^2
CLOSURE_FRACTION = 1e-9


@dataclass(frozen=True)
class SubmergedSolid:
    """Boundary of the submerged region in body coordinates.

    ``hull_triangles`` are the clipped wetted-surface triangles and
    ``cap_polygons`` the waterline loops closing them, wound so their
    outward normal is the *up* direction ``-plane_normal`` (hole loops
    wind the other way).  ``depth(x) = plane_offset + plane_normal . x``
    is positive on the submerged side.
    """

    hull_triangles: np.ndarray
    cap_polygons: list[np.ndarray] = field(default_factory=list)
    plane_normal: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    plane_offset: float = 0.0

    def __post_init__(self):
        # instances may be shared across threads; freeze the geometry
        for arr in (self.hull_triangles, self.plane_normal, *self.cap_polygons):
            if isinstance(arr, np.ndarray):
                arr.setflags(write=False)

    @property
    def is_empty(self) -> bool:
        return len(self.hull_triangles) == 0 and not self.cap_polygons

    @cached_property
    def _boundary_triangles(self) -> np.ndarray:
        parts = [self.hull_triangles.reshape(-1, 3, 3)]
        for loop in self.cap_polygons:
            parts.append(fan_triangles(loop))
        return np.concatenate(parts) if parts else np.zeros((0, 3, 3))

    def boundary_triangles(self) -> np.ndarray:
        """Hull triangles plus fanned cap triangles: the closed boundary."""
        return self._boundary_triangles

    def closure_residual(self) -> float:
        """Norm of the net area vector of the full boundary (0 if closed)."""
        if self.is_empty:
            return 0.0
        tris = self.hull_triangles
        net = np.zeros(3)
        if len(tris):
            net += 0.5 * _cross_rows(
                tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0]
            ).sum(axis=0)
        for loop in self.cap_polygons:
            net += 0.5 * _cross_rows(loop, np.roll(loop, -1, axis=0)).sum(axis=0)
        return float(np.linalg.norm(net))

    def depth_of(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return self.plane_offset + points @ self.plane_normal


def clip_by_waterplane(
    mesh: HullMesh, pose: Pose, snap_tol: float | None = None
) -> SubmergedSolid:
    """Split the hull at the free surface, keeping the submerged side.

    Parameters
    ----------
    mesh : HullMesh
        Validated watertight hull.
    pose : Pose
        Current configuration; only ``zeta``, ``theta`` and ``phi``
        enter (horizontal position and yaw do not move the plane in
        body coordinates).
    snap_tol : float, optional
        Absolute depth below which vertices snap onto the plane.
        Defaults to ``1e-10 * mesh.diameter``.

    Returns
    -------
    SubmergedSolid
        Empty when fully emerged; the whole mesh with no caps when
        strictly fully submerged.

    Raises
    ------
    ClipDegenerate
        If waterline loops fail to chain or the clipped boundary does
        not close to tolerance.
    """
    normal = k3_body(pose)
    offset = pose.zeta
    if snap_tol is None:
        snap_tol = DEFAULT_SNAP_FRACTION * mesh.diameter

    depths = offset + mesh.vertices @ normal
    depths[np.abs(depths) < snap_tol] = 0.0

    if not np.any(depths > 0.0):
        return SubmergedSolid(
            np.zeros((0, 3, 3)), [], plane_normal=normal, plane_offset=offset
        )

    tri_d = depths[mesh.triangles]
    any_neg = (tri_d < 0.0).any(axis=1)
    any_pos = (tri_d > 0.0).any(axis=1)
    n_zero = (tri_d == 0.0).sum(axis=1)

    # faces with no dry vertex are kept whole; fully coplanar faces are
    # dropped because the cap re-covers that part of the surface
    keep = ~any_neg & (n_zero < 3)
    crossed = any_neg & any_pos

    if not np.any(any_neg) and not np.any(n_zero):
        return SubmergedSolid(
            mesh.triangle_vertices.copy(), [], plane_normal=normal, plane_offset=offset
        )

    hull_parts = [mesh.triangle_vertices[keep]]
    segments: dict[tuple, tuple] = {}

    def add_segment(key_a, key_b, pt_a, pt_b):
        # opposite duplicates cancel (ridges lying exactly in the plane)
        if (key_b, key_a) in segments:
            del segments[(key_b, key_a)]
        else:
            segments[(key_a, key_b)] = (pt_a, pt_b)

    # plane-resident edges of kept faces become cap boundary pieces
    kept_two_zero = np.nonzero(keep & (n_zero == 2) & any_pos)[0]
    for ti in kept_two_zero:
        ia, ib, ic = mesh.triangles[ti]
        za, zb, zc = tri_d[ti] == 0.0
        if za and zb:
            i, j = ia, ib
        elif zb and zc:
            i, j = ib, ic
        else:
            i, j = ic, ia
        add_segment(("v", int(i)), ("v", int(j)), mesh.vertices[i], mesh.vertices[j])

    verts = mesh.vertices
    crossing_cache: dict[tuple, np.ndarray] = {}

    def crossing(i, j):
        # canonical index order makes both adjacent faces agree bitwise
        if i > j:
            i, j = j, i
        key = ("e", i, j)
        pt = crossing_cache.get(key)
        if pt is None:
            t = depths[i] / (depths[i] - depths[j])
            pt = verts[i] + t * (verts[j] - verts[i])
            crossing_cache[key] = pt
        return key, pt

    extra_tris = []
    for ti in np.nonzero(crossed)[0]:
        idx = mesh.triangles[ti]
        d = tri_d[ti]
        poly_pts, poly_keys, poly_depth = [], [], []
        for k in range(3):
            i, j = int(idx[k]), int(idx[(k + 1) % 3])
            di, dj = d[k], d[(k + 1) % 3]
            if di >= 0.0:
                poly_pts.append(verts[i])
                poly_keys.append(("v", i))
                poly_depth.append(di)
            if di * dj < 0.0:
                key, pt = crossing(i, j)
                poly_pts.append(pt)
                poly_keys.append(key)
                poly_depth.append(0.0)
        m = len(poly_pts)
        if m < 3:
            continue
        for k in range(1, m - 1):
            extra_tris.append((poly_pts[0], poly_pts[k], poly_pts[k + 1]))
        for k in range(m):
            k2 = (k + 1) % m
            if poly_depth[k] == 0.0 and poly_depth[k2] == 0.0:
                add_segment(poly_keys[k], poly_keys[k2], poly_pts[k], poly_pts[k2])

    if extra_tris:
        hull_parts.append(np.array(extra_tris))
    hull = np.concatenate(hull_parts) if hull_parts else np.zeros((0, 3, 3))

    caps = _chain_loops(segments)
    solid = SubmergedSolid(hull, caps, plane_normal=normal, plane_offset=offset)

    residual = solid.closure_residual()
    if residual > CLOSURE_FRACTION * mesh.diameter**2:
        raise ClipDegenerate(
            f"clipped boundary does not close (residual {residual:.3e})"
        )
    return solid


def _chain_loops(segments) -> list[np.ndarray]:
    """Chain directed plane segments into closed loops, cap-oriented.

    Face windings trace each waterline loop counter-clockwise around the
    *down* normal; caps must wind around the up normal, so finished
    loops are reversed.
    """
    if not segments:
        return []
    outgoing: dict[tuple, list] = {}
    for (ka, kb), (pa, pb) in segments.items():
        if ka in outgoing:
            raise ClipDegenerate(f"non-manifold waterline at {ka}")
        outgoing[ka] = (kb, pa)

    loops = []
    visited = set()
    for start in list(outgoing):
        if start in visited:
            continue
        pts = []
        key = start
        while True:
            if key not in outgoing:
                raise ClipDegenerate("open waterline chain; loop failed to close")
            nxt, pt = outgoing[key]
            visited.add(key)
            pts.append(pt)
            key = nxt
            if key == start:
                break
            if key in visited:
                raise ClipDegenerate("waterline chain re-entered a finished loop")
        if len(pts) >= 3:
            loops.append(np.array(pts)[::-1])
    return loops


def volume_and_first_moments(solid: SubmergedSolid):
    """Volume and first moments of the submerged region, body coordinates.

    Both come from the divergence theorem over the closed boundary
    (hull triangles plus caps).  Returns ``(V, M)`` with ``M_i`` the
    integral of ``x_i``; the buoyancy center is ``M / V`` for positive
    volume.  An empty solid yields exact zeros.
    """
    if solid.is_empty:
        return 0.0, np.zeros(3)
    tris = solid.boundary_triangles()
    v6 = np.einsum(
        "ij,ij->i", tris[:, 0], _cross_rows(tris[:, 1], tris[:, 2])
    )
    volume = v6.sum() / 6.0
    first = (v6[:, None] * tris.sum(axis=1)).sum(axis=0) / 24.0
    if volume < 0.0:
        # roundoff on slivers; a genuinely inverted boundary fails closure first
        volume = 0.0
    return volume, first


@dataclass(frozen=True)
class WaterplaneProperties:
    """Waterplane area, floating-center offset and second-moment tensor.

    ``centroid_offset`` is the in-plane offset of the area centroid from
    the reference point projected onto the cap plane, reported in body
    axes (first two components).  ``second_moment[i, j]`` integrates
    ``(x - ref_projected)_i (x - ref_projected)_j`` over the waterplane;
    the tensor annihilates the plane normal.
    """

    area: float
    centroid_offset: np.ndarray
    second_moment: np.ndarray

    @property
    def x_c(self) -> float:
        return float(self.centroid_offset[0])

    @property
    def y_c(self) -> float:
        return float(self.centroid_offset[1])


def cap_raw_moments(solid: SubmergedSolid):
    """Signed area, first and second moments of the caps about the origin."""
    up = -solid.plane_normal
    area = 0.0
    first = np.zeros(3)
    second = np.zeros((3, 3))
    for loop in solid.cap_polygons:
        a, f, s = planar_moments_3d(loop, up)
        area += a
        first += f
        second += s
    return area, first, second


def waterplane_properties(
    solid: SubmergedSolid, ref_point=(0.0, 0.0, 0.0)
) -> WaterplaneProperties:
    """Area, floating center and second moments of the waterplane.

    ``ref_point`` (body coordinates, typically the origin G) is
    projected orthogonally onto the cap plane; moments are taken about
    the projection.  With several cap loops the floating center is the
    area-weighted centroid over all of them.  No caps yields zeros.
    """
    if not solid.cap_polygons:
        return WaterplaneProperties(0.0, np.zeros(2), np.zeros((3, 3)))
    area, first, second = cap_raw_moments(solid)
    ref = np.asarray(ref_point, dtype=float)
    proj = ref - solid.depth_of(ref) * solid.plane_normal
    if area == 0.0:
        return WaterplaneProperties(0.0, np.zeros(2), np.zeros((3, 3)))
    offset3 = first / area - proj
    shifted = (
        second
        - np.outer(first, proj)
        - np.outer(proj, first)
        + area * np.outer(proj, proj)
    )
    return WaterplaneProperties(float(area), offset3[:2].copy(), shifted)
