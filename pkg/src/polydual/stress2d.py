"""Equilibrium stresses on plane drawings and polyhedral liftings.

The central objects are edge weight assignments in equilibrium at
every vertex, their one-to-one correspondence with liftings of the
drawing to a polyhedral surface (Maxwell-Cremona), the atomic stresses
carried by wheels, the decomposition of an arbitrary equilibrium
stress over the wheels of a triangulation, and an integer-preserving
way to run the lifting correspondence backwards without the usual
exponential blowup from clearing denominators.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import InternalConsistencyError, PreconditionError
from .exactgeom import (
    Scalar,
    ScalarLike,
    Vec2,
    Vec3,
    bracket3,
    bracket4,
    scalar,
)
from .polygraph import EdgeKey, PlanarGraph3c, Wheel, edge_key, require_valid, wheels


class Stress:
    """Symmetric edge weights, keyed on unordered vertex pairs.

    Behaves as a function on edges with default value 0, so stresses
    supported on a subgraph (e.g. a single wheel) can be combined
    freely with stresses on the whole graph.
    """

    __slots__ = ("_w",)

    def __init__(self, weights: Mapping[tuple[int, int], ScalarLike] | None = None):
        self._w: dict[EdgeKey, Fraction] = {}
        if weights:
            for (i, j), w in weights.items():
                key = edge_key(i, j)
                if key in self._w:
                    raise PreconditionError(f"duplicate stress entry for edge {key}")
                self._w[key] = scalar(w)

    def __getitem__(self, edge: tuple[int, int]) -> Fraction:
        return self._w.get(edge_key(*edge), Fraction(0))

    def support(self) -> tuple[EdgeKey, ...]:
        return tuple(sorted(self._w))

    def items(self) -> list[tuple[EdgeKey, Fraction]]:
        return sorted(self._w.items())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Stress):
            return NotImplemented
        keys = set(self._w) | set(other._w)
        return all(self[k] == other[k] for k in keys)

    def __hash__(self):  # pragma: no cover - stresses are not hashable
        raise TypeError("Stress is not hashable")

    def __add__(self, other: "Stress") -> "Stress":
        keys = set(self._w) | set(other._w)
        return Stress({k: self[k] + other[k] for k in keys})

    def scaled(self, factor: ScalarLike) -> "Stress":
        f = scalar(factor)
        return Stress({k: f * w for k, w in self._w.items()})

    def max_abs(self) -> Fraction:
        if not self._w:
            return Fraction(0)
        return max(abs(w) for w in self._w.values())

    def min_abs_nonzero(self) -> Fraction:
        nz = [abs(w) for w in self._w.values() if w != 0]
        if not nz:
            raise PreconditionError("stress is identically zero")
        return min(nz)

    def is_integer(self) -> bool:
        return all(w.denominator == 1 for w in self._w.values())

    def supported_on(self, edges: Iterable[EdgeKey]) -> bool:
        allowed = set(edges)
        return all(k in allowed for k in self._w)


@dataclass(frozen=True)
class Embedding2D:
    """Vertex coordinates for a plane drawing of a graph."""

    graph: PlanarGraph3c
    coords: Mapping[int, Vec2]
    boundary_face: int | None = None

    def __post_init__(self):
        missing = [v for v in self.graph.vertices if v not in self.coords]
        if missing:
            raise PreconditionError(f"no coordinates for vertices {missing}")

    def point(self, v: int) -> Vec2:
        return self.coords[v]

    def root_face(self) -> int:
        if self.boundary_face is not None:
            return self.boundary_face
        if self.graph.boundary_face is not None:
            return self.graph.boundary_face
        return min(self.graph.faces)

    def is_integer(self) -> bool:
        return all(self.coords[v].is_integer() for v in self.graph.vertices)

    def face_bracket(self, fid: int) -> Fraction:
        cycle = self.graph.faces[fid]
        if len(cycle) != 3:
            raise PreconditionError(f"face {fid} is not a triangle")
        a, b, c = (self.coords[v] for v in cycle)
        return bracket3(a, b, c)

    def is_nondegenerate(self) -> bool:
        """Every consecutive vertex triple of every face spans a real corner."""
        for fid, cycle in self.graph.faces.items():
            k = len(cycle)
            for t in range(k):
                a, b, c = cycle[t], cycle[(t + 1) % k], cycle[(t + 2) % k]
                if bracket3(self.coords[a], self.coords[b], self.coords[c]) == 0:
                    return False
        return True


@dataclass(frozen=True)
class Embedding3D:
    """Vertex coordinates for a spatial embedding of a graph."""

    graph: PlanarGraph3c
    coords: Mapping[int, Vec3]

    def __post_init__(self):
        missing = [v for v in self.graph.vertices if v not in self.coords]
        if missing:
            raise PreconditionError(f"no coordinates for vertices {missing}")

    def point(self, v: int) -> Vec3:
        return self.coords[v]

    def is_integer(self) -> bool:
        return all(self.coords[v].is_integer() for v in self.graph.vertices)

    def shadow(self) -> Embedding2D:
        """Vertical projection onto the plane z = 0."""
        return Embedding2D(
            self.graph,
            {v: self.coords[v].xy() for v in self.graph.vertices},
            boundary_face=self.graph.boundary_face,
        )

    def max_norm_sq(self) -> Fraction:
        return max(self.coords[v].norm_sq() for v in self.graph.vertices)

    def spread_sq(self) -> Fraction:
        """Largest squared Euclidean distance between two vertices."""
        vs = [self.coords[v] for v in self.graph.vertices]
        best = Fraction(0)
        for a in range(len(vs)):
            for b in range(a + 1, len(vs)):
                d = (vs[a] - vs[b]).norm_sq()
                if d > best:
                    best = d
        return best


@dataclass(frozen=True)
class Lifting:
    """Heights turning a plane drawing into a face-wise planar surface."""

    heights: Mapping[int, Fraction]
    root_face: int

    def height(self, v: int) -> Fraction:
        return self.heights[v]


@dataclass(frozen=True)
class EquilibriumReport:
    residuals: Mapping[int, tuple[Fraction, ...]]

    @property
    def ok(self) -> bool:
        return all(all(c == 0 for c in r) for r in self.residuals.values())

    def violating_vertices(self) -> list[int]:
        return sorted(v for v, r in self.residuals.items() if any(c != 0 for c in r))


def check_equilibrium(embedding: Embedding2D | Embedding3D, w: Stress) -> EquilibriumReport:
    """Per-vertex residuals of the equilibrium condition sum w_ij (x_j - x_i) = 0."""
    g = embedding.graph
    if not w.supported_on(g.edges):
        raise PreconditionError("stress has entries on non-edges")
    residuals = {}
    for v in g.vertices:
        pv = embedding.coords[v]
        total = pv - pv  # zero of the right dimension
        for u in g.neighbors(v):
            total = total + (embedding.coords[u] - pv).scaled(w[(v, u)])
        residuals[v] = total.coords()
    return EquilibriumReport(residuals)


def require_equilibrium(embedding: Embedding2D | Embedding3D, w: Stress) -> None:
    report = check_equilibrium(embedding, w)
    if not report.ok:
        raise PreconditionError(
            f"stress is not in equilibrium at vertices {report.violating_vertices()}"
        )


# -- canonical stress of a projection -------------------------------------


def canonical_projection_stress(p: Embedding2D, u: Embedding3D) -> Stress:
    """Edge weights induced on the shadow of a lifted triangulation.

    For the edge {i, j} with apex k of the left face of i->j and apex l
    of the right face, the weight is
    [u_i u_j u_k u_l] / ([p_i p_j p_k] [p_l p_j p_i]).
    The result is in equilibrium on p, and zero exactly on edges whose
    two faces are coplanar in the lift.
    """
    g = p.graph
    if g is not u.graph:
        raise PreconditionError("projection and lift must share one graph")
    require_valid(g)
    if not g.is_simplicial():
        raise PreconditionError("canonical projection stress needs a triangulation")
    for v in g.vertices:
        if p.coords[v] != u.coords[v].xy():
            raise PreconditionError(f"p is not the vertical projection of u at vertex {v}")
    weights: dict[EdgeKey, Fraction] = {}
    for (i, j) in g.edges:
        fid, gid = g.edge_faces(i, j)
        k = g.apex_of(fid, i, j)
        l = g.apex_of(gid, i, j)
        num = bracket4(u.coords[i], u.coords[j], u.coords[k], u.coords[l])
        d1 = bracket3(p.coords[i], p.coords[j], p.coords[k])
        d2 = bracket3(p.coords[l], p.coords[j], p.coords[i])
        if d1 == 0 or d2 == 0:
            raise PreconditionError(f"face at edge {{{i},{j}}} projects to a degenerate triangle")
        weights[(i, j)] = num / (d1 * d2)
    return Stress(weights)


# -- Maxwell-Cremona lifting ----------------------------------------------


def maxwell_cremona_lift(p: Embedding2D, w: Stress, root_face: int) -> Lifting:
    """Lift a drawing with an equilibrium stress to a polyhedral surface.

    Each face receives an affine height function; crossing the directed
    edge i->j from its right face into its left face changes the height
    gradient by w_ij times the clockwise-rotated edge vector.  The root
    face is lifted to the zero plane.  Propagation runs over a spanning
    tree of face adjacencies; agreement on the remaining edges is
    checked exactly and certifies the equilibrium hypothesis.
    """
    g = p.graph
    require_valid(g)
    if root_face not in g.faces:
        raise PreconditionError(f"no face with id {root_face}")
    require_equilibrium(p, w)
    zero2 = Vec2(Fraction(0), Fraction(0))
    gradients: dict[int, Vec2] = {root_face: zero2}
    offsets: dict[int, Fraction] = {root_face: Fraction(0)}
    queue = deque([root_face])
    while queue:
        fid = queue.popleft()
        cycle = g.faces[fid]
        k = len(cycle)
        for t in range(k):
            i, j = cycle[t], cycle[(t + 1) % k]
            # fid is left of i->j; its neighbor across {i,j} is the right face.
            nid = g.right_face(i, j)
            if nid in gradients:
                continue
            # Crossing from left face fid to right face nid reverses the jump.
            grad = gradients[fid] - (p.coords[j] - p.coords[i]).perp_cw().scaled(w[(i, j)])
            off = gradients[fid].dot(p.coords[i]) + offsets[fid] - grad.dot(p.coords[i])
            gradients[nid] = grad
            offsets[nid] = off
            queue.append(nid)
    heights: dict[int, Fraction] = {}
    for fid in sorted(g.faces):
        for v in g.faces[fid]:
            h = gradients[fid].dot(p.coords[v]) + offsets[fid]
            if v in heights:
                if heights[v] != h:
                    raise InternalConsistencyError(
                        f"face height functions disagree at vertex {v}: "
                        f"{heights[v]} vs {h}"
                    )
            else:
                heights[v] = h
    return Lifting(heights, root_face)


def lift_to_embedding3d(p: Embedding2D, lifting: Lifting) -> Embedding3D:
    return Embedding3D(
        p.graph,
        {v: Vec3(p.coords[v].x, p.coords[v].y, lifting.heights[v]) for v in p.graph.vertices},
    )


# -- atomic stresses of wheels ---------------------------------------------


def _wheel_base_brackets(wheel: Wheel, p: Embedding2D) -> list[Fraction]:
    """Brackets [p_i p_{i+1} p_c] over consecutive base pairs."""
    c = p.coords[wheel.center]
    base = wheel.base
    k = len(base)
    out = []
    for t in range(k):
        b = bracket3(p.coords[base[t]], p.coords[base[(t + 1) % k]], c)
        if b == 0:
            raise PreconditionError(
                f"base pair ({base[t]},{base[(t+1)%k]}) is collinear with center {wheel.center}"
            )
        out.append(b)
    return out


def atomic_stress_small(wheel: Wheel, p: Embedding2D) -> Stress:
    """The equilibrium stress of lifting the hub to height 1.

    Rim edge (i, i+1) carries -1/[p_i p_{i+1} p_c]; the spoke to base
    vertex i carries [p_{i-1} p_i p_{i+1}] / ([p_{i-1} p_i p_c][p_i p_{i+1} p_c]).
    Up to scale this is the only equilibrium stress a wheel supports.
    """
    br = _wheel_base_brackets(wheel, p)
    base = wheel.base
    k = len(base)
    weights: dict[tuple[int, int], Fraction] = {}
    for t in range(k):
        weights[edge_key(base[t], base[(t + 1) % k])] = Fraction(-1) / br[t]
    for t in range(k):
        num = bracket3(
            p.coords[base[(t - 1) % k]], p.coords[base[t]], p.coords[base[(t + 1) % k]]
        )
        weights[edge_key(base[t], wheel.center)] = num / (br[(t - 1) % k] * br[t])
    return Stress(weights)


def atomic_stress_large(wheel: Wheel, p: Embedding2D) -> Stress:
    """The small atomic stress scaled by the product of all base brackets.

    Every weight becomes a product of base-triangle brackets, hence an
    integer whenever the drawing has integer coordinates.
    """
    br = _wheel_base_brackets(wheel, p)
    factor = math.prod(br)
    return atomic_stress_small(wheel, p).scaled(factor)


def wheel_base_product(wheel: Wheel, p: Embedding2D) -> Fraction:
    """The scale factor relating the small and large atomic stresses."""
    return Fraction(math.prod(_wheel_base_brackets(wheel, p)))


# -- wheel decomposition ----------------------------------------------------


def wheel_decompose_stress(p: Embedding2D, w: Stress, root_face: int | None = None) -> dict[int, Fraction]:
    """Coefficients expressing w as a combination of small atomic stresses.

    The coefficient of the wheel centered at v is the height of v in
    the lifting of w whose root face lies in the zero plane, so the
    decomposition is exact but only unique up to adding an affine
    function of the vertex coordinates.
    """
    g = p.graph
    if not g.is_simplicial():
        raise PreconditionError("wheel decomposition needs a triangulation")
    if not p.is_nondegenerate():
        raise PreconditionError("drawing has a degenerate face")
    root = p.root_face() if root_face is None else root_face
    lifting = maxwell_cremona_lift(p, w, root)
    coeffs = {v: lifting.heights[v] for v in g.vertices}
    total = Stress()
    for wheel in wheels(g):
        if coeffs[wheel.center] != 0:
            total = total + atomic_stress_small(wheel, p).scaled(coeffs[wheel.center])
    if total != w:
        raise InternalConsistencyError("wheel decomposition does not re-sum to the input stress")
    return coeffs


# -- reverse lifting with integer output ------------------------------------


@dataclass(frozen=True)
class SignWitness:
    """Per-edge sign comparison between two stresses on the same graph."""

    signs: Mapping[EdgeKey, tuple[int, int]]  # (canonical sign, output sign)

    @property
    def ok(self) -> bool:
        return all(a == b and a != 0 for a, b in self.signs.values())

    def mismatches(self) -> list[EdgeKey]:
        return sorted(k for k, (a, b) in self.signs.items() if a != b or a == 0)


@dataclass(frozen=True)
class BoundCheck:
    """An exact inequality report: lhs_sq and rhs_sq are squared sides."""

    name: str
    lhs_sq: Fraction
    rhs_sq: Fraction
    strict: bool = True

    @property
    def holds(self) -> bool:
        return self.lhs_sq < self.rhs_sq if self.strict else self.lhs_sq <= self.rhs_sq


@dataclass(frozen=True)
class ReverseLift:
    projection: Embedding2D
    stress: Stress
    canonical: Stress
    witness: SignWitness
    scale: int
    bounds: tuple[BoundCheck, ...]


def _sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


def reverse_maxwell_cremona(u: Embedding3D) -> ReverseLift:
    """Integer equilibrium stress on the shadow of an integer lift.

    The canonical stress of the projection is rational; clearing its
    denominators directly can cost an exponential factor.  Instead the
    canonical stress is decomposed over the wheels with large atomic
    stresses (which are integral here), the coefficients are scaled by
    an integer C large enough that flooring them cannot flip any edge
    sign, and the floored combination is returned.  Every output weight
    is a nonzero integer with the canonical sign, and its magnitude
    stays polynomial in the grid size for bounded vertex degree.
    """
    g = u.graph
    require_valid(g)
    if not g.is_simplicial():
        raise PreconditionError("reverse lifting needs a triangulation")
    if not u.is_integer():
        raise PreconditionError("reverse lifting needs integer coordinates")
    p = u.shadow()
    for fid in sorted(g.faces):
        if p.face_bracket(fid) == 0:
            raise PreconditionError(f"face {fid} lies in a vertical plane")
    canonical = canonical_projection_stress(p, u)
    for (i, j) in g.edges:
        if canonical[(i, j)] == 0:
            raise PreconditionError(f"faces adjacent to edge {{{i},{j}}} are coplanar")

    all_wheels = wheels(g)
    large = {wh.center: atomic_stress_large(wh, p) for wh in all_wheels}
    base_products = {wh.center: wheel_base_product(wh, p) for wh in all_wheels}
    max_large = max(st.max_abs() for st in large.values())
    c_exact = 4 * max_large / canonical.min_abs_nonzero()
    c = math.ceil(c_exact)

    # u is itself a lifting of its shadow, so its heights are valid
    # decomposition coefficients for the small atomic stresses; dividing
    # by the base product converts them to large-atomic coefficients.
    alphas = {
        wh.center: u.coords[wh.center].z / base_products[wh.center] for wh in all_wheels
    }
    resummed = Stress()
    for wh in all_wheels:
        if alphas[wh.center] != 0:
            resummed = resummed + large[wh.center].scaled(alphas[wh.center])
    if resummed != canonical:
        raise InternalConsistencyError(
            "large-atomic wheel decomposition does not re-sum to the canonical stress"
        )
    out = Stress()
    for wh in all_wheels:
        coeff = math.floor(c * alphas[wh.center])
        if coeff != 0:
            out = out + large[wh.center].scaled(coeff)

    signs = {
        e: (_sign(canonical[e]), _sign(out[e])) for e in g.edges
    }
    witness = SignWitness(signs)
    if not witness.ok:
        raise InternalConsistencyError(
            f"sign preservation failed on edges {witness.mismatches()}"
        )
    if not out.is_integer():
        raise InternalConsistencyError("reverse lifting produced a non-integer stress")
    require_equilibrium(p, out)

    delta = g.max_degree()
    spread_sq = u.spread_sq()
    max_norm_sq = u.max_norm_sq()
    max_out_sq = max(out[e] * out[e] for e in g.edges)
    bounds = (
        BoundCheck(
            "reverse_lift_grid_bound",
            max_out_sq,
            64 * spread_sq ** (2 * delta + 5),
        ),
        BoundCheck(
            "reverse_lift_center_bound",
            max_out_sq,
            64 * (4 * max_norm_sq) ** (2 * delta + 5),
        ),
    )
    return ReverseLift(p, out, canonical, witness, c, bounds)
