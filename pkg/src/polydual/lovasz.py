"""The duality transform: face vectors from a positive CDV matrix.

Given a cone-convex embedding u of a planar 3-connected graph and a
positive CDV matrix M, every face f receives a vector phi_f such that
across each edge {i,j}, with f to the left of i->j and g to the right,

    phi_f - phi_g = M_ij (u_i x u_j).

The convex hull of the phi vectors is a convex polytope realizing the
dual graph, the map f -> phi_f being the isomorphism onto its skeleton.
Assignments are unique up to translation; with an integer embedding,
matrix and anchor the output is integral, and with the anchor at the
origin every |phi_f| stays below 2n times the largest |M_ij (u_i x u_j)|.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .cdv3d import CdvMatrix, require_cdv, require_cone_convex
from .errors import InternalConsistencyError, PreconditionError
from .exactgeom import Vec3, cross, det3
from .polygraph import PlanarGraph3c, require_valid
from .stress2d import BoundCheck, Embedding3D


@dataclass(frozen=True)
class DualRealization:
    """Face vectors forming the dual polytope, with their provenance."""

    embedding: Embedding3D
    matrix: CdvMatrix
    phi: Mapping[int, Vec3]
    anchor_face: int
    anchor_phi: Vec3

    @property
    def graph(self) -> PlanarGraph3c:
        return self.embedding.graph

    def is_integer(self) -> bool:
        return all(v.is_integer() for v in self.phi.values())

    def grid_size(self) -> Fraction:
        """Largest coordinate spread over the three axes."""
        best = Fraction(0)
        for axis in range(3):
            vals = [v.coords()[axis] for v in self.phi.values()]
            spread = max(vals) - min(vals)
            if spread > best:
                best = spread
        return best


def edge_vector(d: DualRealization, i: int, j: int) -> Vec3:
    """M_ij (u_i x u_j): the step from the right face of i->j to its left."""
    u = d.embedding.coords
    return cross(u[i], u[j]).scaled(d.matrix.entry(i, j))


def build_phi(
    u: Embedding3D,
    m: CdvMatrix,
    anchor_face: int | None = None,
    anchor_phi: Vec3 = Vec3.of(0, 0, 0),
) -> DualRealization:
    """Assign a vector to every face by walking the dual graph.

    Faces are visited breadth-first from the anchor, neighbors in
    ascending face id; every edge not used by the traversal is then
    re-checked exactly, which certifies that the assignment is
    consistent around every dual cycle.
    """
    g = u.graph
    require_valid(g)
    require_cdv(u, m)
    if not m.positive_on(g.edges):
        raise PreconditionError("matrix must be positive on every edge")
    require_cone_convex(u)
    root = min(g.faces) if anchor_face is None else anchor_face
    if root not in g.faces:
        raise PreconditionError(f"no face with id {root}")

    phi: dict[int, Vec3] = {root: anchor_phi}
    queue = deque([root])
    while queue:
        fid = queue.popleft()
        cycle = g.faces[fid]
        k = len(cycle)
        neighbors = []
        for t in range(k):
            i, j = cycle[t], cycle[(t + 1) % k]
            neighbors.append((g.right_face(i, j), i, j))
        for nid, i, j in sorted(neighbors):
            if nid in phi:
                continue
            # fid is left of i->j, nid right: phi_fid - phi_nid = M_ij (u_i x u_j).
            phi[nid] = phi[fid] - cross(u.coords[i], u.coords[j]).scaled(m.entry(i, j))
            queue.append(nid)
    if len(phi) != len(g.faces):
        raise InternalConsistencyError("dual graph traversal did not reach every face")

    d = DualRealization(u, m, phi, root, anchor_phi)
    for (i, j) in g.edges:
        fid, gid = g.edge_faces(i, j)
        if phi[fid] - phi[gid] != edge_vector(d, i, j):
            raise InternalConsistencyError(
                f"face vectors are inconsistent across edge {{{i},{j}}}"
            )
    return d


@dataclass(frozen=True)
class ConvexityReport:
    """Outcome of the exact convex-position checks on a dual realization."""

    checks: tuple[tuple[str, bool, str], ...]  # (name, passed, detail)

    @property
    def ok(self) -> bool:
        return all(passed for _, passed, _ in self.checks)

    def failures(self) -> list[str]:
        return [f"{name}: {detail}" for name, passed, detail in self.checks if not passed]


def verify_dual_polytope(u: Embedding3D, d: DualRealization) -> ConvexityReport:
    """Certify that the face vectors form a convex polytope realizing the dual.

    For every primal vertex v the vectors of its incident faces must be
    coplanar (constant <phi_f, u_v>), that plane must strictly support
    all remaining face vectors, and the polygon they trace in rotation
    order must be simple and strictly convex.  Together these exhibit
    the boundary complex of conv(phi) as a copy of the dual graph.
    """
    g = u.graph
    checks: list[tuple[str, bool, str]] = []

    values = sorted(d.phi.items())
    distinct = len({v.coords() for _, v in values}) == len(values)
    checks.append(("distinct_face_vectors", distinct, "two faces received the same vector"))

    for v in g.vertices:
        ring = g.faces_at(v)
        uv = u.coords[v]
        level = d.phi[ring[0]].dot(uv)
        coplanar = all(d.phi[f].dot(uv) == level for f in ring)
        checks.append(
            (f"vertex_{v}_coplanar", coplanar, f"<phi, u_{v}> differs among incident faces")
        )
        if not coplanar:
            continue

        outside = [d.phi[f].dot(uv) - level for f in sorted(g.faces) if f not in ring]
        strictly_below = all(x < 0 for x in outside)
        strictly_above = all(x > 0 for x in outside)
        checks.append(
            (
                f"vertex_{v}_supporting",
                strictly_below or strictly_above or not outside,
                f"plane <x, u_{v}> = {level} does not strictly support the remaining faces",
            )
        )
        normal = uv if strictly_below else -uv

        k = len(ring)
        convex = True
        if k >= 3:
            for t in range(k):
                a, b, c = d.phi[ring[t]], d.phi[ring[(t + 1) % k]], d.phi[ring[(t + 2) % k]]
                if det3(b - a, c - b, normal) <= 0:
                    convex = False
                    break
        checks.append(
            (
                f"vertex_{v}_convex_polygon",
                convex,
                f"face ring of vertex {v} is not a strictly convex polygon",
            )
        )
    return ConvexityReport(tuple(checks))


@dataclass(frozen=True)
class BoundReport:
    checks: tuple[BoundCheck, ...]
    dual_eccentricity: int
    n_vertices: int

    @property
    def ok(self) -> bool:
        return all(c.holds for c in self.checks) and self.dual_eccentricity < 2 * self.n_vertices


def bound_report(u: Embedding3D, m: CdvMatrix, d: DualRealization) -> BoundReport:
    """Exact comparison of the face vectors against the duality bound.

    The guarantee applies to the anchor-at-origin normalization, so the
    vectors are re-anchored before comparison: every |phi_f - phi_anchor|
    must stay strictly below 2n max_ij |M_ij (u_i x u_j)|.  The report
    also records the bound's combinatorial ingredient, the largest
    dual-graph distance from the anchor face (strictly below 2n).
    """
    g = u.graph
    n = len(g.vertices)
    base = d.phi[d.anchor_face]
    lhs_sq = max((v - base).norm_sq() for v in d.phi.values())
    rhs_max = max(edge_vector(d, i, j).norm_sq() for (i, j) in g.edges)
    checks = (
        BoundCheck("duality_transform_bound", lhs_sq, 4 * n * n * rhs_max, strict=True),
    )

    dist = {d.anchor_face: 0}
    queue = deque([d.anchor_face])
    while queue:
        fid = queue.popleft()
        cycle = g.faces[fid]
        for t in range(len(cycle)):
            i, j = cycle[t], cycle[(t + 1) % len(cycle)]
            nid = g.right_face(i, j)
            if nid not in dist:
                dist[nid] = dist[fid] + 1
                queue.append(nid)
    return BoundReport(checks, max(dist.values()), n)
