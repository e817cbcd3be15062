"""End-to-end duality transforms.

Three entry points produce integer realizations of dual polytopes:

* `stacked_dual` consumes a 2d integer convex drawing with a positive
  integer equilibrium stress, stacks an apex below it to obtain a
  cone-convex spatial embedding with a positive integer CDV matrix,
  and applies the duality transform.
* `degree3_dual` consumes an integer convex polytope whose vertical
  shadow is a plane embedding; the reverse lifting supplies the
  integer stress, then the stacking route takes over.
* `simplicial_dual` consumes any integer convex simplicial polytope;
  after recentering the origin inside, an integral positive CDV matrix
  is built directly in space and the duality transform is applied.

Every pipeline re-verifies its output (convex position, exact bound
inequalities) and reports the grid size of the result.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .cdv3d import (
    CdvMatrix,
    IntegralCdv,
    cdv_from_stress,
    check_convex_simplicial,
    integral_positive_cdv,
    origin_strictly_interior,
    require_cdv,
    require_cone_convex,
)
from .errors import InternalConsistencyError, PreconditionError
from .exactgeom import Vec2, Vec3, bracket3
from .lovasz import (
    BoundReport,
    ConvexityReport,
    DualRealization,
    bound_report,
    build_phi,
    verify_dual_polytope,
)
from .polygraph import PlanarGraph3c, edge_key, require_valid, stack, validate
from .stress2d import (
    BoundCheck,
    Embedding2D,
    Embedding3D,
    ReverseLift,
    Stress,
    check_equilibrium,
    reverse_maxwell_cremona,
)


@dataclass(frozen=True)
class StackedInput:
    """A 2d drawing with stress, ready for the stacking construction.

    The drawing must be integral, its designated boundary face a
    triangle, every face strictly convex (interior counterclockwise,
    boundary clockwise), and the stress a positive integer equilibrium
    stress: strictly positive on every edge off the boundary face.
    """

    embedding: Embedding2D
    stress: Stress
    apex: int

    def boundary_face(self) -> int:
        fid = self.embedding.boundary_face
        if fid is None:
            fid = self.embedding.graph.boundary_face
        if fid is None:
            raise PreconditionError("stacked input needs a designated boundary face")
        return fid

    def boundary_vertices(self) -> tuple[int, int, int]:
        cycle = self.embedding.graph.faces[self.boundary_face()]
        if len(cycle) != 3:
            raise PreconditionError("boundary face must be a triangle")
        return cycle  # type: ignore[return-value]

    def validate(self) -> list[str]:
        problems = []
        g = self.embedding.graph
        report = validate(g)
        problems.extend(report.problems)
        if problems:
            return problems
        try:
            boundary = self.boundary_face()
            self.boundary_vertices()
        except PreconditionError as exc:
            return [str(exc)]
        if self.apex in g.vertices:
            problems.append(f"apex id {self.apex} collides with an existing vertex")
        if not self.embedding.is_integer():
            problems.append("coordinates are not all integers")
        if not self.stress.is_integer():
            problems.append("stress is not integral")
        if not self.stress.supported_on(g.edges):
            problems.append("stress has entries on non-edges")
        eq = check_equilibrium(self.embedding, self.stress)
        if not eq.ok:
            problems.append(
                f"stress not in equilibrium at vertices {eq.violating_vertices()}"
            )
        boundary_edges = set()
        cycle = g.faces[boundary]
        for t in range(len(cycle)):
            boundary_edges.add(edge_key(cycle[t], cycle[(t + 1) % len(cycle)]))
        for e in g.edges:
            if e not in boundary_edges and self.stress[e] <= 0:
                problems.append(f"stress is not positive on interior edge {e}")
        for fid, cyc in sorted(g.faces.items()):
            want_positive = fid != boundary
            k = len(cyc)
            for t in range(k):
                b = bracket3(
                    self.embedding.coords[cyc[t]],
                    self.embedding.coords[cyc[(t + 1) % k]],
                    self.embedding.coords[cyc[(t + 2) % k]],
                )
                if want_positive and b <= 0:
                    problems.append(f"face {fid} is not strictly convex counterclockwise")
                    break
                if not want_positive and b >= 0:
                    problems.append("boundary face is not strictly convex clockwise")
                    break
        return problems

    def require_valid(self) -> None:
        problems = self.validate()
        if problems:
            raise PreconditionError("invalid stacked input: " + problems[0])


@dataclass(frozen=True)
class StackingResult:
    graph: PlanarGraph3c
    embedding: Embedding3D
    matrix: CdvMatrix
    matrix_drawing: CdvMatrix
    matrix_tetrahedron: CdvMatrix
    lam: int


def stacking_embed(inp: StackedInput, mode: str = "theorem") -> StackingResult:
    """Cone-convex spatial embedding plus positive integer CDV matrix.

    The drawing is placed in the plane z = 1 (in "theorem" mode scaled
    by 3 and translated so the boundary barycenter hits the origin; in
    "paper-example" mode used as-is, which requires the barycenter to
    be zero already) and the apex goes to (0, 0, -3).  The matrix is
    M' + lam*M'', where M' extends the stress, M'' is the all-ones
    matrix on the apex tetrahedron, and lam exceeds the largest
    boundary-edge magnitude of M'.  Interior edges keep their stress
    value and no entry exceeds max|w| + 1 in magnitude.
    """
    inp.require_valid()
    g_up = inp.embedding.graph
    a, b, c = inp.boundary_vertices()
    coords = inp.embedding.coords
    barycenter_sum = coords[a] + coords[b] + coords[c]
    if mode == "theorem":
        def place(v: int) -> Vec3:
            q = coords[v].scaled(3) - barycenter_sum
            return Vec3(q.x, q.y, Fraction(1))
    elif mode == "paper-example":
        if not barycenter_sum.is_zero():
            raise PreconditionError(
                "paper-example mode requires the boundary barycenter at the origin"
            )
        def place(v: int) -> Vec3:
            return Vec3(coords[v].x, coords[v].y, Fraction(1))
    else:
        raise PreconditionError(f"unknown stacking mode {mode!r}")

    g = stack(g_up, inp.apex, inp.boundary_face())
    points = {v: place(v) for v in g_up.vertices}
    points[inp.apex] = Vec3.of(0, 0, -3)
    u = Embedding3D(g, points)
    u_up = Embedding3D(g_up, {v: points[v] for v in g_up.vertices})

    m_drawing = cdv_from_stress(u_up, inp.stress)
    tetra = sorted((inp.apex, a, b, c))
    m_tetra = CdvMatrix(
        {(i, j): 1 for i in tetra for j in tetra if i < j}, {i: 1 for i in tetra}
    )
    lam_val = max(abs(inp.stress[e]) for e in ((a, b), (b, c), (c, a))) + 1
    lam = int(lam_val)
    matrix = m_drawing + m_tetra.scaled(lam)

    require_cdv(u, matrix)
    require_cone_convex(u)
    if not matrix.positive_on(g.edges):
        raise InternalConsistencyError("stacked CDV matrix is not positive")
    boundary_edges = {edge_key(a, b), edge_key(b, c), edge_key(c, a)}
    limit = inp.stress.max_abs() + 1
    for e in g_up.edges:
        if e not in boundary_edges and matrix.entry(*e) != inp.stress[e]:
            raise InternalConsistencyError(f"interior edge {e} lost its stress value")
    for e in g.edges:
        if abs(matrix.entry(*e)) > limit:
            raise InternalConsistencyError(f"matrix entry at {e} exceeds max|w| + 1")
    return StackingResult(g, u, matrix, m_drawing, m_tetra, lam)


@dataclass(frozen=True)
class PipelineReport:
    pipeline: str
    embedding: Embedding3D
    matrix: CdvMatrix
    dual: DualRealization
    convexity: ConvexityReport
    bound: BoundReport
    extra_bounds: tuple[BoundCheck, ...] = ()
    notes: Mapping[str, object] = field(default_factory=dict)

    @property
    def grid_size(self) -> Fraction:
        return self.dual.grid_size()

    @property
    def ok(self) -> bool:
        return self.convexity.ok and self.bound.ok and all(c.holds for c in self.extra_bounds)


def _finish(
    pipeline: str,
    u: Embedding3D,
    matrix: CdvMatrix,
    anchor_face: int | None,
    anchor_phi: Vec3,
    extra_bounds: tuple[BoundCheck, ...],
    notes: dict,
) -> PipelineReport:
    dual_realization = build_phi(u, matrix, anchor_face, anchor_phi)
    convexity = verify_dual_polytope(u, dual_realization)
    if not convexity.ok:
        raise InternalConsistencyError(
            "dual realization failed convexity: " + "; ".join(convexity.failures())
        )
    bounds = bound_report(u, matrix, dual_realization)
    return PipelineReport(
        pipeline, u, matrix, dual_realization, convexity, bounds, extra_bounds, notes
    )


def stacked_dual(
    inp: StackedInput,
    mode: str = "theorem",
    anchor_face: int | None = None,
    anchor_phi: Vec3 = Vec3.of(0, 0, 0),
) -> PipelineReport:
    """Dual polytope of the stacking of an apex onto the drawing's boundary."""
    stacking = stacking_embed(inp, mode)
    n = len(stacking.graph.vertices)
    max_norm_sq = stacking.embedding.max_norm_sq()
    limit = inp.stress.max_abs() + 1
    report = _finish(
        "stacked-dual",
        stacking.embedding,
        stacking.matrix,
        anchor_face,
        anchor_phi,
        extra_bounds=(),
        notes={"lam": stacking.lam, "mode": mode},
    )
    base = report.dual.phi[report.dual.anchor_face]
    lhs_sq = max((v - base).norm_sq() for v in report.dual.phi.values())
    stacked_bound = BoundCheck(
        "stacked_dual_bound",
        lhs_sq,
        4 * n * n * limit * limit * max_norm_sq * max_norm_sq,
        strict=True,
    )
    return PipelineReport(
        report.pipeline,
        report.embedding,
        report.matrix,
        report.dual,
        report.convexity,
        report.bound,
        (stacked_bound,),
        report.notes,
    )


def shadow_is_plane_embedding(u: Embedding3D, boundary_face: int) -> list[str]:
    """Violations of 'the vertical shadow is a plane drawing'.

    Every face except the designated one must project positively
    oriented, the designated face must project negatively (it becomes
    the outer triangle), and all remaining vertices must project
    strictly inside it.
    """
    g = u.graph
    problems = []
    if boundary_face not in g.faces:
        return [f"no face with id {boundary_face}"]
    shadow = u.shadow()
    for fid in sorted(g.faces):
        br = shadow.face_bracket(fid)
        if fid == boundary_face:
            if br >= 0:
                problems.append("designated face does not project clockwise")
        elif br <= 0:
            problems.append(f"face {fid} does not project counterclockwise")
    cycle = g.faces[boundary_face]
    for v in g.vertices:
        if v in cycle:
            continue
        for t in range(len(cycle)):
            a, b = cycle[t], cycle[(t + 1) % len(cycle)]
            if bracket3(shadow.coords[a], shadow.coords[b], shadow.coords[v]) >= 0:
                problems.append(f"vertex {v} does not project strictly inside the outer face")
                break
    return problems


def degree3_dual(
    u: Embedding3D,
    apex: int,
    boundary_face: int | None = None,
) -> PipelineReport:
    """Dual of the apex-stacking of a convex polytope with planar shadow.

    The integer stress is produced by the reverse lifting (so only a
    polynomial blowup in the grid size for bounded degree), then the
    stacking pipeline runs on the shadow.
    """
    g = u.graph
    require_valid(g)
    if boundary_face is None:
        boundary_face = g.boundary_face
    if boundary_face is None:
        raise PreconditionError("degree-3 pipeline needs a designated boundary face")
    if not u.is_integer():
        raise PreconditionError("embedding must have integer coordinates")
    problems = check_convex_simplicial(u)
    if problems:
        raise PreconditionError("not a convex simplicial polytope: " + problems[0])
    problems = shadow_is_plane_embedding(u, boundary_face)
    if problems:
        raise PreconditionError(problems[0])

    reverse = reverse_maxwell_cremona(u)
    projection = Embedding2D(g, reverse.projection.coords, boundary_face=boundary_face)
    inp = StackedInput(projection, reverse.stress, apex)
    report = stacked_dual(inp, mode="theorem")
    return PipelineReport(
        "degree3-dual",
        report.embedding,
        report.matrix,
        report.dual,
        report.convexity,
        report.bound,
        report.extra_bounds + reverse.bounds,
        {**report.notes, "reverse_lift_scale": reverse.scale},
    )


@dataclass(frozen=True)
class OriginNormalization:
    embedding: Embedding3D
    translated: bool
    scale: int
    notes: str


def normalize_origin(u: Embedding3D) -> OriginNormalization:
    """Recenter an integer convex polytope so the origin is strictly inside.

    A no-op when the origin is already strictly interior.  Otherwise
    every vertex u_i is replaced by n*u_i - sum_j u_j: the image of the
    vertex centroid (strictly interior for a full-dimensional polytope)
    lands on the origin and integrality survives because the centroid
    denominator n is multiplied away.  Coordinates grow by at most a
    factor of 2n.
    """
    require_valid(u.graph)
    if not u.is_integer():
        raise PreconditionError("embedding must have integer coordinates")
    if origin_strictly_interior(u):
        return OriginNormalization(u, False, 1, "origin already strictly interior")
    n = len(u.graph.vertices)
    total = Vec3(Fraction(0), Fraction(0), Fraction(0))
    for v in u.graph.vertices:
        total = total + u.coords[v]
    moved = Embedding3D(
        u.graph, {v: u.coords[v].scaled(n) - total for v in u.graph.vertices}
    )
    if not origin_strictly_interior(moved):
        raise PreconditionError(
            "recentering failed: polytope is degenerate or not convex/oriented"
        )
    return OriginNormalization(moved, True, n, f"translated by minus the centroid, scaled by {n}")


def simplicial_dual(u: Embedding3D) -> PipelineReport:
    """Dual polytope of an arbitrary integer convex simplicial polytope."""
    require_valid(u.graph)
    if not u.is_integer():
        raise PreconditionError("embedding must have integer coordinates")
    problems = check_convex_simplicial(u)
    if problems:
        raise PreconditionError("not a convex simplicial polytope: " + problems[0])
    normalization = normalize_origin(u)
    centered = normalization.embedding
    integral = integral_positive_cdv(centered)
    report = _finish(
        "simplicial-dual",
        centered,
        integral.matrix,
        None,
        Vec3.of(0, 0, 0),
        extra_bounds=integral.bounds,
        notes={
            "normalized": normalization.translated,
            "normalization_scale": normalization.scale,
            "integral_scale": integral.scale,
        },
    )
    return report
