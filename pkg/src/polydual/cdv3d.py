"""CDV matrices: the 3d counterpart of 2d equilibrium stresses.

A CDV matrix of a spatial embedding is a symmetric matrix supported on
the graph whose rows annihilate the vertex vectors: sum_j M_ij u_j = 0.
This module provides verification, the conversions between stresses
and CDV matrices (coning, flat restriction, central projection),
projective rescaling, the canonical matrix read off a polygonal
surface via its polar face vectors, the atomic matrices of wheels,
wheel decomposition, and an all-integer positive CDV matrix for convex
simplicial polytopes with polynomially bounded entries.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import InternalConsistencyError, PreconditionError
from .exactgeom import (
    ScalarLike,
    Vec2,
    Vec3,
    bracket4,
    cross,
    det3,
    lcm_denominator,
    parallel_ratio,
    scalar,
)
from .polygraph import EdgeKey, PlanarGraph3c, Wheel, edge_key, require_valid, wheels
from .stress2d import (
    BoundCheck,
    Embedding2D,
    Embedding3D,
    SignWitness,
    Stress,
    check_equilibrium,
    maxwell_cremona_lift,
)


class CdvMatrix:
    """Sparse symmetric matrix with off-diagonal support on the edge set.

    Off-diagonal entries are keyed on unordered vertex pairs; absent
    entries are zero.  Diagonal entries are stored separately and carry
    no sign conditions anywhere in the theory.
    """

    __slots__ = ("_off", "_diag")

    def __init__(
        self,
        off: Mapping[tuple[int, int], ScalarLike] | None = None,
        diag: Mapping[int, ScalarLike] | None = None,
    ):
        self._off: dict[EdgeKey, Fraction] = {}
        if off:
            for (i, j), m in off.items():
                key = edge_key(i, j)
                if key in self._off:
                    raise PreconditionError(f"duplicate matrix entry for edge {key}")
                self._off[key] = scalar(m)
        self._diag: dict[int, Fraction] = {int(v): scalar(m) for v, m in (diag or {}).items()}

    def entry(self, i: int, j: int) -> Fraction:
        if i == j:
            return self._diag.get(i, Fraction(0))
        return self._off.get(edge_key(i, j), Fraction(0))

    def off_items(self) -> list[tuple[EdgeKey, Fraction]]:
        return sorted(self._off.items())

    def diag_items(self) -> list[tuple[int, Fraction]]:
        return sorted(self._diag.items())

    def edge_support(self) -> tuple[EdgeKey, ...]:
        return tuple(sorted(self._off))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CdvMatrix):
            return NotImplemented
        off_keys = set(self._off) | set(other._off)
        diag_keys = set(self._diag) | set(other._diag)
        return all(self._off.get(k, 0) == other._off.get(k, 0) for k in off_keys) and all(
            self._diag.get(k, 0) == other._diag.get(k, 0) for k in diag_keys
        )

    def __hash__(self):  # pragma: no cover
        raise TypeError("CdvMatrix is not hashable")

    def __add__(self, other: "CdvMatrix") -> "CdvMatrix":
        off = {k: self._off.get(k, Fraction(0)) + other._off.get(k, Fraction(0))
               for k in set(self._off) | set(other._off)}
        diag = {v: self._diag.get(v, Fraction(0)) + other._diag.get(v, Fraction(0))
                for v in set(self._diag) | set(other._diag)}
        return CdvMatrix(off, diag)

    def scaled(self, factor: ScalarLike) -> "CdvMatrix":
        f = scalar(factor)
        return CdvMatrix(
            {k: f * m for k, m in self._off.items()},
            {v: f * m for v, m in self._diag.items()},
        )

    def positive_on(self, edges: Iterable[EdgeKey]) -> bool:
        return all(self.entry(*e) > 0 for e in edges)

    def edges_integer(self) -> bool:
        return all(m.denominator == 1 for m in self._off.values())

    def is_integer(self) -> bool:
        return self.edges_integer() and all(m.denominator == 1 for m in self._diag.values())

    def max_abs_edge(self) -> Fraction:
        if not self._off:
            return Fraction(0)
        return max(abs(m) for m in self._off.values())

    def min_abs_edge_nonzero(self) -> Fraction:
        nz = [abs(m) for m in self._off.values() if m != 0]
        if not nz:
            raise PreconditionError("matrix has no nonzero edge entries")
        return min(nz)


@dataclass(frozen=True)
class CdvReport:
    residuals: Mapping[int, tuple[Fraction, ...]]
    support_ok: bool
    positive: bool

    @property
    def ok(self) -> bool:
        return self.support_ok and all(all(c == 0 for c in r) for r in self.residuals.values())

    def violating_vertices(self) -> list[int]:
        return sorted(v for v, r in self.residuals.items() if any(c != 0 for c in r))


def check_cdv(u: Embedding3D, m: CdvMatrix) -> CdvReport:
    """Verify symmetry-by-construction, edge support, and row equilibrium."""
    g = u.graph
    support_ok = all(g.has_edge(i, j) for (i, j) in m.edge_support())
    residuals = {}
    for i in g.vertices:
        total = Vec3(Fraction(0), Fraction(0), Fraction(0))
        for j in g.neighbors(i):
            total = total + u.coords[j].scaled(m.entry(i, j))
        total = total + u.coords[i].scaled(m.entry(i, i))
        residuals[i] = total.coords()
    return CdvReport(residuals, support_ok, m.positive_on(g.edges))


def require_cdv(u: Embedding3D, m: CdvMatrix) -> None:
    report = check_cdv(u, m)
    if not report.ok:
        detail = (
            f"rows fail at vertices {report.violating_vertices()}"
            if report.support_ok
            else "entries outside the edge set"
        )
        raise PreconditionError(f"not a CDV matrix for this embedding: {detail}")


def _diagonal_extension(
    coords: Mapping[int, Vec3], off: Mapping[EdgeKey, Fraction]
) -> dict[int, Fraction]:
    """Complete off-diagonal data to a CDV matrix; the diagonal is forced.

    Vertices with an all-zero row need (and get) no diagonal entry.
    """
    rows: dict[int, Vec3] = {}
    for (i, j), w in off.items():
        if w == 0:
            continue
        rows[i] = rows.get(i, Vec3(Fraction(0), Fraction(0), Fraction(0))) + coords[j].scaled(w)
        rows[j] = rows.get(j, Vec3(Fraction(0), Fraction(0), Fraction(0))) + coords[i].scaled(w)
    diag: dict[int, Fraction] = {}
    for i, total in sorted(rows.items()):
        if coords[i].is_zero():
            raise PreconditionError(f"vertex {i} sits at the origin")
        ratio = parallel_ratio(total, coords[i])
        if ratio is None:
            raise InternalConsistencyError(
                f"row sum at vertex {i} is not parallel to its position vector"
            )
        if ratio != 0:
            diag[i] = -ratio
    return diag


# -- stress <-> CDV conversions ---------------------------------------------


def cdv_from_stress(
    u: Embedding3D,
    w: Stress,
    mode: str = "plain",
    apex: int | None = None,
) -> CdvMatrix:
    """CDV matrix with the stress on the edges and forced diagonal.

    In "plain" mode w must be an equilibrium stress of u itself and the
    diagonal entry at i is -sum_k w_ik.  In "coned" mode w lives on the
    graph extended by an apex vertex placed at the origin and joined to
    every vertex; the apex weights enter only the diagonal.
    """
    g = u.graph
    if mode == "plain":
        report = check_equilibrium(u, w)
        if not report.ok:
            raise PreconditionError(
                f"stress not in equilibrium at vertices {report.violating_vertices()}"
            )
        off = {e: w[e] for e in g.edges if w[e] != 0}
        diag = {}
        for i in g.vertices:
            s = sum((w[(i, j)] for j in g.neighbors(i)), Fraction(0))
            if s != 0:
                diag[i] = -s
        m = CdvMatrix(off, diag)
    elif mode == "coned":
        if apex is None:
            raise PreconditionError("coned mode requires the apex vertex id")
        if apex in g.vertices:
            raise PreconditionError(f"apex {apex} collides with a graph vertex")
        if not w.supported_on(list(g.edges) + [edge_key(apex, v) for v in g.vertices]):
            raise PreconditionError("stress has entries outside the coned graph")
        zero3 = Vec3(Fraction(0), Fraction(0), Fraction(0))
        for i in g.vertices:
            total = zero3
            for j in g.neighbors(i):
                total = total + (u.coords[j] - u.coords[i]).scaled(w[(i, j)])
            total = total + (zero3 - u.coords[i]).scaled(w[(apex, i)])
            if not total.is_zero():
                raise PreconditionError(f"coned stress not in equilibrium at vertex {i}")
        apex_total = zero3
        for i in g.vertices:
            apex_total = apex_total + u.coords[i].scaled(w[(apex, i)])
        if not apex_total.is_zero():
            raise PreconditionError("coned stress not in equilibrium at the apex")
        off = {e: w[e] for e in g.edges if w[e] != 0}
        diag = {}
        for i in g.vertices:
            s = sum((w[(i, j)] for j in g.neighbors(i)), Fraction(0)) + w[(apex, i)]
            if s != 0:
                diag[i] = -s
        m = CdvMatrix(off, diag)
    else:
        raise PreconditionError(f"unknown mode {mode!r}")
    require_cdv(u, m)
    return m


def flat_plane_of(u: Embedding3D) -> tuple[Vec3, Fraction]:
    """Normal n and offset c with <n, u_i> = c for all vertices; c != 0.

    Raises if the embedding is not flat or its plane passes through the
    origin.
    """
    vs = [u.coords[v] for v in u.graph.vertices]
    normal = None
    a = vs[0]
    for b, c in itertools.combinations(vs[1:], 2):
        n = cross(b - a, c - a)
        if not n.is_zero():
            normal = n
            break
    if normal is None:
        raise PreconditionError("embedding is contained in a line; no plane is determined")
    offset = normal.dot(a)
    for v in vs:
        if normal.dot(v) != offset:
            raise PreconditionError("embedding is not flat")
    if offset == 0:
        raise PreconditionError("supporting plane passes through the origin")
    return normal, offset


def stress_from_flat_cdv(u: Embedding3D, m: CdvMatrix) -> Stress:
    """Edge restriction of a CDV matrix of a flat embedding.

    For an embedding contained in a plane missing the origin, dropping
    the diagonal leaves an equilibrium stress.
    """
    flat_plane_of(u)
    require_cdv(u, m)
    w = Stress({e: m.entry(*e) for e in u.graph.edges if m.entry(*e) != 0})
    report = check_equilibrium(u, w)
    if not report.ok:
        raise InternalConsistencyError("flat restriction failed to be an equilibrium stress")
    return w


def rescale_cdv(u: Embedding3D, r: Embedding3D, m: CdvMatrix) -> CdvMatrix:
    """Transport a CDV matrix along a vertex-wise radial rescaling.

    With r_i = lambda_i u_i (all lambda_i nonzero) the matrix with
    entries M_ij / (lambda_i lambda_j) is a CDV matrix for r, and
    applying the inverse rescaling returns the original exactly.
    """
    if u.graph is not r.graph:
        raise PreconditionError("rescaling requires the same graph")
    lambdas: dict[int, Fraction] = {}
    for v in u.graph.vertices:
        if u.coords[v].is_zero():
            raise PreconditionError(f"vertex {v} sits at the origin")
        lam = parallel_ratio(r.coords[v], u.coords[v])
        if lam is None:
            raise PreconditionError(f"r_{v} is not a multiple of u_{v}")
        if lam == 0:
            raise PreconditionError(f"scaling factor at vertex {v} is zero")
        lambdas[v] = lam
    off = {(i, j): m.entry(i, j) / (lambdas[i] * lambdas[j]) for (i, j) in m.edge_support()}
    diag = {v: d / (lambdas[v] * lambdas[v]) for v, d in m.diag_items()}
    return CdvMatrix(off, diag)


# -- central projection to a plane ------------------------------------------


@dataclass(frozen=True)
class PlaneChart:
    """Affine coordinates on the plane <normal, x> = 1.

    Points satisfy p = origin + s*e1 + t*e2; triple brackets of chart
    coordinates differ from det3 of the 3d position vectors by the
    constant jacobian det[e1 e2 origin].
    """

    normal: Vec3
    origin: Vec3
    e1: Vec3
    e2: Vec3
    jacobian: Fraction

    def to_plane(self, p: Vec3) -> Vec2:
        s = det3(p, self.e2, self.origin) / self.jacobian
        t = det3(self.e1, p, self.origin) / self.jacobian
        if det3(self.e1, self.e2, p) != self.jacobian:
            raise PreconditionError("point does not lie on the chart plane")
        return Vec2(s, t)


def plane_chart(normal: Vec3) -> PlaneChart:
    """Deterministic rational chart for the plane <normal, x> = 1."""
    if normal.is_zero():
        raise PreconditionError("plane normal must be nonzero")
    n = normal.coords()
    axis = max(range(3), key=lambda k: (abs(n[k]), k))
    others = [k for k in range(3) if k != axis]

    def unit(k: int, val: Fraction) -> Vec3:
        c = [Fraction(0)] * 3
        c[k] = val
        return Vec3(*c)

    e1 = unit(others[0], n[axis]) - unit(axis, n[others[0]])
    e2 = unit(others[1], n[axis]) - unit(axis, n[others[1]])
    origin = normal.scaled(Fraction(1) / normal.norm_sq())
    jac = det3(e1, e2, origin)
    if jac == 0:
        raise InternalConsistencyError("degenerate chart basis")
    return PlaneChart(normal, origin, e1, e2, jac)


@dataclass(frozen=True)
class ProjectedCdv:
    """Central projection of an embedding and CDV matrix onto a plane."""

    chart: PlaneChart
    embedding: Embedding2D
    stress: Stress
    lambdas: Mapping[int, Fraction]


def projection_lambdas(u: Embedding3D, normal: Vec3) -> dict[int, Fraction]:
    """Factors lambda_i with lambda_i u_i on the plane <normal, x> = 1."""
    lambdas = {}
    for v in u.graph.vertices:
        if u.coords[v].is_zero():
            raise PreconditionError(f"vertex {v} sits at the origin")
        d = normal.dot(u.coords[v])
        if d == 0:
            raise PreconditionError(f"vertex vector {v} is parallel to the projection plane")
        lambdas[v] = Fraction(1) / d
    return lambdas


def project_cdv(u: Embedding3D, normal: Vec3, m: CdvMatrix) -> ProjectedCdv:
    """Push a CDV matrix to an equilibrium stress of the central projection.

    The stress on edge {i,j} is M_ij / (lambda_i lambda_j); this map is
    a linear isomorphism onto the equilibrium stresses of the projected
    drawing, inverse to `unproject_stress`.
    """
    require_cdv(u, m)
    lambdas = projection_lambdas(u, normal)
    chart = plane_chart(normal)
    coords = {
        v: chart.to_plane(u.coords[v].scaled(lambdas[v])) for v in u.graph.vertices
    }
    p = Embedding2D(u.graph, coords)
    w = Stress(
        {
            e: m.entry(*e) / (lambdas[e[0]] * lambdas[e[1]])
            for e in m.edge_support()
            if m.entry(*e) != 0
        }
    )
    report = check_equilibrium(p, w)
    if not report.ok:
        raise InternalConsistencyError("projected stress failed the equilibrium check")
    return ProjectedCdv(chart, p, w, lambdas)


def unproject_stress(u: Embedding3D, normal: Vec3, w: Stress) -> CdvMatrix:
    """Pull an equilibrium stress of the central projection back to a CDV matrix.

    Edge entries become lambda_i lambda_j w_ij; the diagonal completion
    is unique.
    """
    lambdas = projection_lambdas(u, normal)
    projected = Embedding3D(
        u.graph, {v: u.coords[v].scaled(lambdas[v]) for v in u.graph.vertices}
    )
    report = check_equilibrium(projected, w)
    if not report.ok:
        raise PreconditionError(
            f"stress not in equilibrium on the projection at vertices {report.violating_vertices()}"
        )
    if not w.supported_on(u.graph.edges):
        raise PreconditionError("stress has entries on non-edges")
    off = {
        e: lambdas[e[0]] * lambdas[e[1]] * w[e] for e in w.support() if w[e] != 0
    }
    diag = _diagonal_extension(u.coords, off)
    m = CdvMatrix(off, diag)
    require_cdv(u, m)
    return m


# -- canonical CDV matrix ----------------------------------------------------


def face_polar_vector(u: Embedding3D, fid: int) -> Vec3:
    """The vector phi with <phi, x> = 1 on the supporting plane of a face.

    Requires the face to be planar with its plane missing the origin.
    """
    cycle = u.graph.faces[fid]
    k = len(cycle)
    phi = None
    for t in range(k):
        a, b, c = (u.coords[cycle[(t + s) % k]] for s in range(3))
        d = det3(a, b, c)
        if d != 0:
            phi = (cross(b, c) + cross(c, a) + cross(a, b)).scaled(Fraction(1) / d)
            break
    if phi is None:
        raise PreconditionError(
            f"face {fid}: supporting plane passes through the origin or face is degenerate"
        )
    for v in cycle:
        if phi.dot(u.coords[v]) != 1:
            raise PreconditionError(f"face {fid} is not planar")
    return phi


def canonical_cdv(u: Embedding3D) -> tuple[CdvMatrix, dict[int, Vec3]]:
    """The CDV matrix carried by a polygonal surface via its polar vectors.

    Each face contributes the vector phi_f normal to it with
    <phi_f, x> = 1 on the face; for the edge {i,j} with faces f (left
    of i->j) and g (right), M_ij is the unique scalar with
    phi_f - phi_g = M_ij (u_i x u_j), and the diagonal is forced.  For
    a convex polytope with the origin in its interior the result is
    positive on every edge.
    """
    g = u.graph
    require_valid(g)
    phi = {fid: face_polar_vector(u, fid) for fid in sorted(g.faces)}
    off: dict[EdgeKey, Fraction] = {}
    for (i, j) in g.edges:
        fid, gid = g.edge_faces(i, j)
        diff = phi[fid] - phi[gid]
        cr = cross(u.coords[i], u.coords[j])
        if cr.is_zero():
            raise PreconditionError(
                f"vertices {i} and {j} are radially parallel; no polar edge direction"
            )
        ratio = parallel_ratio(diff, cr)
        if ratio is None:
            raise InternalConsistencyError(
                f"polar difference across edge {{{i},{j}}} is not parallel to u_i x u_j"
            )
        if ratio != 0:
            off[(i, j)] = ratio
    diag = _diagonal_extension(u.coords, off)
    m = CdvMatrix(off, diag)
    require_cdv(u, m)
    return m, phi


# -- atomic CDV matrices ------------------------------------------------------


def _wheel_base_dets(wheel: Wheel, u: Embedding3D) -> list[Fraction]:
    c = u.coords[wheel.center]
    base = wheel.base
    k = len(base)
    out = []
    for t in range(k):
        d = det3(u.coords[base[t]], u.coords[base[(t + 1) % k]], c)
        if d == 0:
            raise PreconditionError(
                f"base pair ({base[t]},{base[(t+1)%k]}) is coplanar with center "
                f"{wheel.center} and the origin"
            )
        out.append(d)
    return out


def atomic_cdv_small(wheel: Wheel, u: Embedding3D) -> CdvMatrix:
    """The one CDV matrix (up to scale) supported on a wheel.

    Rim entries are -1/det(u_i u_{i+1} u_c), spokes are
    det(u_{i-1} u_i u_{i+1}) / (det(u_{i-1} u_i u_c) det(u_i u_{i+1} u_c)),
    and the diagonal completion is unique.
    """
    ds = _wheel_base_dets(wheel, u)
    base = wheel.base
    k = len(base)
    off: dict[tuple[int, int], Fraction] = {}
    for t in range(k):
        off[edge_key(base[t], base[(t + 1) % k])] = Fraction(-1) / ds[t]
    for t in range(k):
        num = det3(
            u.coords[base[(t - 1) % k]], u.coords[base[t]], u.coords[base[(t + 1) % k]]
        )
        val = num / (ds[(t - 1) % k] * ds[t])
        if val != 0:
            off[edge_key(base[t], wheel.center)] = val
    diag = _diagonal_extension(u.coords, off)
    return CdvMatrix(off, diag)


def wheel_det_product(wheel: Wheel, u: Embedding3D) -> Fraction:
    return Fraction(math.prod(_wheel_base_dets(wheel, u)))


def atomic_cdv_large(wheel: Wheel, u: Embedding3D) -> CdvMatrix:
    """Atomic CDV matrix scaled by the product of its base determinants.

    Edge entries become products of base determinants and are integers
    whenever the embedding is integral.
    """
    return atomic_cdv_small(wheel, u).scaled(wheel_det_product(wheel, u))


# -- wheel decomposition of CDV matrices --------------------------------------


def find_projection_plane(u: Embedding3D) -> Vec3:
    """Smallest integer normal v with <v, u_i> != 0 for every vertex.

    Candidates are scanned shell by shell in the max norm; within a
    shell, by L1 norm and then componentwise with positive values
    before negative ones.  Only vectors whose first nonzero component
    is positive are tried (v and -v define the same family of planes).
    """
    points = [u.coords[v] for v in u.graph.vertices]
    for p in points:
        if p.is_zero():
            raise PreconditionError("a vertex sits at the origin")

    def candidates(shell: int):
        rng = list(range(-shell, shell + 1))
        found = []
        for a in rng:
            for b in rng:
                for c in rng:
                    if max(abs(a), abs(b), abs(c)) != shell:
                        continue
                    first = next((x for x in (a, b, c) if x != 0), 0)
                    if first <= 0:
                        continue
                    found.append((a, b, c))
        def key(v):
            return (
                sum(abs(x) for x in v),
                tuple((abs(x), 0 if x >= 0 else 1) for x in v),
            )
        return sorted(found, key=key)

    for shell in range(1, 64):
        for a, b, c in candidates(shell):
            normal = Vec3.of(a, b, c)
            if all(normal.dot(p) != 0 for p in points):
                return normal
    raise InternalConsistencyError("no admissible projection plane found in 64 shells")


def wheel_decompose_cdv(u: Embedding3D, m: CdvMatrix) -> dict[int, Fraction]:
    """Coefficients expressing m as a combination of small atomic CDV matrices.

    Constructive route: centrally project m to an equilibrium stress on
    a plane missing the origin, lift that stress, and pull the lifting
    heights back through the projection.  Coefficients are unique up to
    adding <v, u_i> for a fixed vector v.
    """
    g = u.graph
    require_valid(g)
    if not g.is_simplicial():
        raise PreconditionError("wheel decomposition needs a triangulation")
    if len(g.vertices) <= 3:
        raise PreconditionError("wheel decomposition needs more than 3 vertices")
    for fid in sorted(g.faces):
        a, b, c = (u.coords[v] for v in g.faces[fid])
        if det3(a, b, c) == 0:
            raise PreconditionError(f"supporting plane of face {fid} passes through the origin")
    require_cdv(u, m)

    normal = find_projection_plane(u)
    projected = project_cdv(u, normal, m)
    root = min(g.faces)
    lifting = maxwell_cremona_lift(projected.embedding, projected.stress, root)
    jac = projected.chart.jacobian
    coeffs = {
        v: lifting.heights[v] * jac * normal.dot(u.coords[v]) for v in g.vertices
    }

    total = CdvMatrix()
    for wheel in wheels(g):
        if coeffs[wheel.center] != 0:
            total = total + atomic_cdv_small(wheel, u).scaled(coeffs[wheel.center])
    if total != m:
        raise InternalConsistencyError(
            "wheel decomposition does not re-sum to the input CDV matrix"
        )
    return coeffs


# -- integral positive CDV matrix ---------------------------------------------


@dataclass(frozen=True)
class IntegralCdv:
    matrix: CdvMatrix
    canonical: CdvMatrix
    polar_vectors: Mapping[int, Vec3]
    witness: SignWitness
    scale: int
    bounds: tuple[BoundCheck, ...]


def _sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


def check_convex_simplicial(u: Embedding3D) -> list[str]:
    """Violations of strict convexity for a claimed simplicial polytope.

    Every face must be a triangle seen counterclockwise from outside
    with all remaining vertices strictly on its inner side; this also
    forces adjacent faces to be non-coplanar and rejects reflected
    inputs.
    """
    g = u.graph
    problems = []
    if not g.is_simplicial():
        problems.append("not all faces are triangles")
        return problems
    for fid in sorted(g.faces):
        a, b, c = (u.coords[v] for v in g.faces[fid])
        for v in g.vertices:
            if v in g.faces[fid]:
                continue
            if bracket4(a, b, c, u.coords[v]) <= 0:
                problems.append(
                    f"vertex {v} is not strictly inside the plane of face {fid}"
                )
    return problems


def check_cone_convex_local(u: Embedding3D) -> list[str]:
    """Violations of the local cone-convexity conditions.

    An embedding is cone-convex when the radial cones over its faces
    are pointed, convex and disjoint.  The exactly checkable local
    part: no vertex at the origin, and for every directed edge i->j
    the remaining vertices of its left face lie strictly on the
    positive side of the plane spanned by u_i and u_j while those of
    its right face lie strictly on the negative side.  (Global
    disjointness of the cones is not tested; the constructions in this
    package produce it automatically.)
    """
    g = u.graph
    problems = []
    for v in g.vertices:
        if u.coords[v].is_zero():
            problems.append(f"vertex {v} sits at the origin")
    if problems:
        return problems
    for (i, j) in g.edges:
        for (a, b), want in (((i, j), 1), ((j, i), 1)):
            fid = g.left_face(a, b)
            for m in g.faces[fid]:
                if m in (a, b):
                    continue
                d = det3(u.coords[a], u.coords[b], u.coords[m])
                if d <= 0:
                    problems.append(
                        f"face {fid} is not strictly convex-positive across edge {a}->{b}"
                    )
                    break
    return problems


def require_cone_convex(u: Embedding3D) -> None:
    problems = check_cone_convex_local(u)
    if problems:
        raise PreconditionError("embedding is not cone-convex: " + problems[0])


def face_newell_normal(u: Embedding3D, fid: int) -> Vec3:
    """Outward normal of a counterclockwise-from-outside face polygon.

    Computed as the cyclic sum of cross products of consecutive vertex
    vectors, which is exact, orientation-aware and works for any
    polygon size.
    """
    cycle = u.graph.faces[fid]
    total = Vec3(Fraction(0), Fraction(0), Fraction(0))
    k = len(cycle)
    for t in range(k):
        total = total + cross(u.coords[cycle[t]], u.coords[cycle[(t + 1) % k]])
    return total


def origin_strictly_interior(u: Embedding3D) -> bool:
    """Exact sign test of the origin against every supporting face plane.

    Requires planar faces oriented counterclockwise from outside; a
    nonplanar face makes the test fail conservatively.
    """
    for fid in sorted(u.graph.faces):
        cycle = u.graph.faces[fid]
        normal = face_newell_normal(u, fid)
        levels = {normal.dot(u.coords[v]) for v in cycle}
        if len(levels) != 1:
            return False
        if levels.pop() <= 0:
            return False
    return True


def integral_positive_cdv(u: Embedding3D) -> IntegralCdv:
    """Integer CDV matrix, positive on all edges, for a convex simplicial polytope.

    The canonical matrix is decomposed over the wheels with the large
    (integral) atomic matrices, the coefficients are scaled by an
    integer C chosen so that flooring them cannot flip any edge sign,
    and the floored combination is returned.  Entry growth stays
    polynomial in the grid size for bounded vertex degree.  For the
    tetrahedron, where the decomposition basis degenerates to multiples
    of one matrix, the canonical matrix is scaled by the least common
    denominator of its entries instead.
    """
    g = u.graph
    require_valid(g)
    if not u.is_integer():
        raise PreconditionError("embedding must have integer coordinates")
    problems = check_convex_simplicial(u)
    if problems:
        raise PreconditionError("not a convex simplicial polytope: " + problems[0])
    if not origin_strictly_interior(u):
        raise PreconditionError("origin is not strictly interior")

    m_canonical, phi = canonical_cdv(u)
    delta = g.max_degree()
    spread_sq = u.spread_sq()

    if len(g.vertices) == 4:
        denom = lcm_denominator(
            [m for _, m in m_canonical.off_items()] + [m for _, m in m_canonical.diag_items()]
        )
        matrix = m_canonical.scaled(denom)
        scale = denom
    else:
        coeffs = wheel_decompose_cdv(u, m_canonical)
        all_wheels = wheels(g)
        large = {wh.center: atomic_cdv_large(wh, u) for wh in all_wheels}
        det_products = {wh.center: wheel_det_product(wh, u) for wh in all_wheels}
        alphas = {wh.center: coeffs[wh.center] / det_products[wh.center] for wh in all_wheels}
        max_large = max(mm.max_abs_edge() for mm in large.values())
        min_canonical = m_canonical.min_abs_edge_nonzero()
        scale = 4 * math.ceil(max_large / min_canonical)
        matrix = CdvMatrix()
        for wh in all_wheels:
            coeff = math.floor(scale * alphas[wh.center])
            if coeff != 0:
                matrix = matrix + large[wh.center].scaled(coeff)

    require_cdv(u, matrix)
    signs = {e: (_sign(m_canonical.entry(*e)), _sign(matrix.entry(*e))) for e in g.edges}
    witness = SignWitness(signs)
    if not witness.ok:
        raise InternalConsistencyError(
            f"edge signs of the integral matrix disagree with the canonical one: "
            f"{witness.mismatches()}"
        )
    if not matrix.edges_integer():
        raise InternalConsistencyError("integral construction left a fractional edge entry")
    if not matrix.positive_on(g.edges):
        raise InternalConsistencyError("integral matrix is not positive on all edges")

    max_entry_sq = max(matrix.entry(*e) ** 2 for e in g.edges)
    max_phi_sq = max(v.norm_sq() for v in phi.values())
    min_phi_diff_sq = None
    for (i, j) in g.edges:
        fid, gid = g.edge_faces(i, j)
        d = (phi[fid] - phi[gid]).norm_sq()
        if min_phi_diff_sq is None or d < min_phi_diff_sq:
            min_phi_diff_sq = d
    l2 = spread_sq
    # (16 L^{3D+7} + 4 L^{3D-3})^2, kept as integer powers of L^2.
    final_rhs_sq = (
        256 * l2 ** (3 * delta + 7)
        + 128 * l2 ** (3 * delta + 2)
        + 16 * l2 ** (3 * delta - 3)
    )
    bounds = (
        BoundCheck("polar_vector_bound", max_phi_sq, 4 * l2**2, strict=False),
        BoundCheck(
            "polar_difference_lower",
            Fraction(1) / l2**6,
            min_phi_diff_sq if min_phi_diff_sq is not None else Fraction(0),
            strict=False,
        ),
        BoundCheck(
            "canonical_entry_upper",
            max(m_canonical.entry(*e) ** 2 for e in g.edges),
            16 * l2**2,
            strict=False,
        ),
        BoundCheck(
            "canonical_entry_lower",
            Fraction(1) / l2**8,
            min(m_canonical.entry(*e) ** 2 for e in g.edges),
            strict=False,
        ),
        BoundCheck("integral_entry_bound", max_entry_sq, final_rhs_sq, strict=False),
        BoundCheck(
            "integral_entry_bound_center_form",
            max_entry_sq,
            256 * (4 * u.max_norm_sq()) ** (3 * delta + 7)
            + 128 * (4 * u.max_norm_sq()) ** (3 * delta + 2)
            + 16 * (4 * u.max_norm_sq()) ** (3 * delta - 3),
            strict=False,
        ),
    )
    return IntegralCdv(matrix, m_canonical, phi, witness, scale, bounds)
