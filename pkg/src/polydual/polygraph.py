"""Planar 3-connected graphs with explicit oriented face structure.

Faces are part of the input, never recomputed: every face is a cyclic
vertex sequence oriented counterclockwise as seen from outside the
polytope (in 2d: interior faces counterclockwise in the plane, the
designated boundary face clockwise).  A well-formed graph uses every
undirected edge exactly twice, once in each direction; inputs whose
orientations disagree (e.g. reflected face lists) are rejected rather
than repaired.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import PreconditionError

EdgeKey = tuple[int, int]


def edge_key(i: int, j: int) -> EdgeKey:
    """Canonical unordered key for the edge {i, j}."""
    if i == j:
        raise ValueError(f"self loop at vertex {i}")
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True, slots=True)
class Wheel:
    """A hub vertex together with its cycle of neighbors.

    The base is recorded in rotation order around the center (the same
    counterclockwise-from-outside order the faces use) and starts at
    the smallest base vertex so equal wheels compare equal.
    """

    center: int
    base: tuple[int, ...]

    def spokes(self) -> list[EdgeKey]:
        return [edge_key(self.center, b) for b in self.base]

    def rim(self) -> list[EdgeKey]:
        k = len(self.base)
        return [edge_key(self.base[i], self.base[(i + 1) % k]) for i in range(k)]

    def edges(self) -> list[EdgeKey]:
        return self.rim() + self.spokes()


@dataclass(frozen=True)
class ValidationReport:
    problems: tuple[str, ...]
    n_vertices: int = 0
    n_edges: int = 0
    n_faces: int = 0

    @property
    def ok(self) -> bool:
        return not self.problems


class PlanarGraph3c:
    """A plane/sphere graph given by its oriented faces.

    Vertex ids and face ids are stable small integers supplied by the
    caller; the library never renumbers them.  The constructor is
    permissive so that `validate` can report problems; operations that
    need a well-formed graph call `require_valid` first.
    """

    def __init__(
        self,
        faces: Mapping[int, Sequence[int]] | Sequence[Sequence[int]],
        boundary_face: int | None = None,
        vertices: Iterable[int] | None = None,
    ):
        if isinstance(faces, Mapping):
            self.faces: dict[int, tuple[int, ...]] = {
                int(fid): tuple(int(v) for v in cycle) for fid, cycle in faces.items()
            }
        else:
            self.faces = {i: tuple(int(v) for v in cycle) for i, cycle in enumerate(faces)}
        if vertices is not None:
            self.vertices: tuple[int, ...] = tuple(sorted(set(int(v) for v in vertices)))
        else:
            seen: set[int] = set()
            for cycle in self.faces.values():
                seen.update(cycle)
            self.vertices = tuple(sorted(seen))
        self.boundary_face = boundary_face
        self._derived_ready = False

    # -- derived structure ------------------------------------------------

    def _build_derived(self) -> None:
        if self._derived_ready:
            return
        left: dict[tuple[int, int], int] = {}
        for fid in sorted(self.faces):
            cycle = self.faces[fid]
            k = len(cycle)
            for t in range(k):
                i, j = cycle[t], cycle[(t + 1) % k]
                if (i, j) in left:
                    raise PreconditionError(
                        f"directed edge {i}->{j} appears in faces "
                        f"{left[(i, j)]} and {fid}; face orientations are inconsistent"
                    )
                left[(i, j)] = fid
        edges = sorted({edge_key(i, j) for (i, j) in left})
        nbrs: dict[int, list[int]] = {v: [] for v in self.vertices}
        for a, b in edges:
            nbrs[a].append(b)
            nbrs[b].append(a)
        self._left_face = left
        self._edges = tuple(edges)
        self._neighbors = {v: tuple(sorted(ns)) for v, ns in nbrs.items()}
        self._derived_ready = True

    @property
    def edges(self) -> tuple[EdgeKey, ...]:
        self._build_derived()
        return self._edges

    def neighbors(self, v: int) -> tuple[int, ...]:
        self._build_derived()
        return self._neighbors[v]

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def max_degree(self) -> int:
        return max(self.degree(v) for v in self.vertices)

    def left_face(self, i: int, j: int) -> int:
        """Face lying to the left of the directed edge i->j."""
        self._build_derived()
        try:
            return self._left_face[(i, j)]
        except KeyError:
            raise PreconditionError(f"no face is bounded by the directed edge {i}->{j}")

    def right_face(self, i: int, j: int) -> int:
        return self.left_face(j, i)

    def edge_faces(self, i: int, j: int) -> tuple[int, int]:
        """(left, right) faces of the directed edge i->j."""
        return self.left_face(i, j), self.left_face(j, i)

    def face_ids(self) -> tuple[int, ...]:
        return tuple(sorted(self.faces))

    def has_edge(self, i: int, j: int) -> bool:
        self._build_derived()
        return (i, j) in self._left_face or (j, i) in self._left_face

    def is_simplicial(self) -> bool:
        return all(len(cycle) == 3 for cycle in self.faces.values())

    def apex_of(self, fid: int, i: int, j: int) -> int:
        """The vertex of triangular face `fid` other than i and j."""
        cycle = self.faces[fid]
        if len(cycle) != 3:
            raise PreconditionError(f"face {fid} is not a triangle")
        rest = [v for v in cycle if v not in (i, j)]
        if len(rest) != 1:
            raise PreconditionError(f"edge {{{i},{j}}} does not bound face {fid}")
        return rest[0]

    def face_with_vertices(self, verts: Iterable[int]) -> int:
        wanted = frozenset(verts)
        hits = [fid for fid, cycle in sorted(self.faces.items()) if frozenset(cycle) == wanted]
        if not hits:
            raise PreconditionError(f"no face with vertex set {sorted(wanted)}")
        if len(hits) > 1:
            raise PreconditionError(f"vertex set {sorted(wanted)} names faces {hits}")
        return hits[0]

    # -- rotation around a vertex -----------------------------------------

    def faces_at(self, v: int) -> tuple[int, ...]:
        """Faces incident to v, in counterclockwise rotation order.

        Consecutive faces in the result share an edge at v; the cycle
        starts at the smallest incident face id.
        """
        self._build_derived()
        incident = sorted(fid for fid, cycle in self.faces.items() if v in cycle)
        if not incident:
            raise PreconditionError(f"vertex {v} lies on no face")
        start = incident[0]
        order = [start]
        fid = start
        while True:
            cycle = self.faces[fid]
            pos = cycle.index(v)
            pred = cycle[pos - 1]
            fid = self.left_face(v, pred)
            if fid == start:
                break
            order.append(fid)
            if len(order) > len(self.faces):
                raise PreconditionError(f"face rotation around vertex {v} does not close")
        if len(order) != len(incident):
            raise PreconditionError(f"faces around vertex {v} do not form a single cycle")
        return tuple(order)

    def link_cycle(self, v: int) -> tuple[int, ...]:
        """Neighbors of v in counterclockwise rotation order."""
        cycle: list[int] = []
        for fid in self.faces_at(v):
            face = self.faces[fid]
            cycle.append(face[face.index(v) - 1])
        return tuple(cycle)


def validate(g: PlanarGraph3c) -> ValidationReport:
    """Check every structural invariant; report, never raise."""
    problems: list[str] = []
    for fid, cycle in sorted(g.faces.items()):
        if len(cycle) < 3:
            problems.append(f"face {fid} has fewer than 3 vertices")
        if len(set(cycle)) != len(cycle):
            problems.append(f"face {fid} repeats a vertex")
        for v in cycle:
            if v not in g.vertices:
                problems.append(f"face {fid} uses unknown vertex {v}")
    if g.boundary_face is not None and g.boundary_face not in g.faces:
        problems.append(f"designated boundary face {g.boundary_face} does not exist")

    directed: dict[tuple[int, int], list[int]] = {}
    for fid, cycle in sorted(g.faces.items()):
        k = len(cycle)
        for t in range(k):
            directed.setdefault((cycle[t], cycle[(t + 1) % k]), []).append(fid)
    for (i, j), fids in sorted(directed.items()):
        if len(fids) > 1:
            problems.append(f"directed edge {i}->{j} used by faces {fids} (orientation clash)")
        if (j, i) not in directed:
            problems.append(f"edge {{{i},{j}}} is traversed only as {i}->{j}")

    edges = {edge_key(i, j) for (i, j) in directed}
    n, m, f = len(g.vertices), len(edges), len(g.faces)
    if n - m + f != 2:
        problems.append(f"Euler check failed: V-E+F = {n}-{m}+{f} = {n - m + f} != 2")

    if not problems:
        adj: dict[int, set[int]] = {v: set() for v in g.vertices}
        for a, b in edges:
            adj[a].add(b)
            adj[b].add(a)
        if not _connected(set(g.vertices), adj, excluded=frozenset()):
            problems.append("graph is not connected")
        elif n >= 4 and not _three_connected(g.vertices, adj):
            problems.append("graph is not 3-connected")
        elif n < 4:
            problems.append("fewer than 4 vertices: cannot be 3-connected planar")

    return ValidationReport(tuple(problems), n, m, f)


def require_valid(g: PlanarGraph3c) -> None:
    report = validate(g)
    if not report.ok:
        raise PreconditionError("invalid graph: " + "; ".join(report.problems))


def _connected(vertices: set[int], adj: Mapping[int, set[int]], excluded: frozenset[int]) -> bool:
    remaining = vertices - excluded
    if not remaining:
        return True
    start = next(iter(remaining))
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in excluded and w not in seen:
                seen.add(w)
                stack.append(w)
    return seen == remaining


def _three_connected(vertices: Sequence[int], adj: Mapping[int, set[int]]) -> bool:
    # Brute-force pair removal; graphs here are small (tens of vertices).
    vs = list(vertices)
    for a_idx in range(len(vs)):
        for b_idx in range(a_idx + 1, len(vs)):
            if not _connected(set(vs), adj, excluded=frozenset((vs[a_idx], vs[b_idx]))):
                return False
    return True


def dual(g: PlanarGraph3c) -> PlanarGraph3c:
    """The dual sphere graph: one vertex per face of g, one face per vertex.

    The dual face for primal vertex v lists g's faces around v in
    counterclockwise rotation order, so the dual is oriented the same
    way as the primal.
    """
    require_valid(g)
    dual_faces = {v: g.faces_at(v) for v in g.vertices}
    return PlanarGraph3c(dual_faces, vertices=g.face_ids())


def wheels(g: PlanarGraph3c) -> list[Wheel]:
    """One wheel per vertex of a triangulation: the vertex plus its link.

    In a triangulation every graph edge lies in exactly four wheels
    (as a spoke of its two endpoints' wheels and as a rim edge of the
    two opposite vertices' wheels).
    """
    require_valid(g)
    if not g.is_simplicial():
        raise PreconditionError("wheels are defined only for triangulations")
    out = []
    for v in g.vertices:
        base = g.link_cycle(v)
        rot = base.index(min(base))
        out.append(Wheel(v, base[rot:] + base[:rot]))
    return out


def stack(g: PlanarGraph3c, new_vertex: int, face: int | Sequence[int]) -> PlanarGraph3c:
    """Replace a triangular face by three faces through a fresh vertex.

    Face ids of untouched faces are preserved; the three new faces take
    the next free ids in the order of the replaced cycle.
    """
    require_valid(g)
    if new_vertex in g.vertices:
        raise PreconditionError(f"vertex {new_vertex} already exists")
    fid = face if isinstance(face, int) else g.face_with_vertices(face)
    if fid not in g.faces:
        raise PreconditionError(f"no face with id {fid}")
    cycle = g.faces[fid]
    if len(cycle) != 3:
        raise PreconditionError(f"face {fid} is not a triangle")
    faces = {k: v for k, v in g.faces.items() if k != fid}
    next_id = max(g.faces) + 1
    for t in range(3):
        faces[next_id + t] = (cycle[t], cycle[(t + 1) % 3], new_vertex)
    boundary = g.boundary_face if g.boundary_face != fid else None
    return PlanarGraph3c(faces, boundary_face=boundary, vertices=(*g.vertices, new_vertex))
