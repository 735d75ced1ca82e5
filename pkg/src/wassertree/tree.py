"""Metric trees with marked ends (directions to infinity).

A tree is described combinatorially: a finite set of vertices, finite
edges with positive rational lengths, and *ends*, each realized as an
infinite leaf-edge hanging off an attach vertex.  A distinguished base
vertex serves as the origin for all Gromov-product and flow
computations.

Canonical form requires every vertex to have degree 1 or at least 3;
degree-2 vertices are removed by :func:`canonicalize`, which merges
their incident edges without changing the underlying metric space.  The
single allowed exception is a degree-2 base vertex, which is kept (the
base must remain a vertex) and reported as a warning.

All values are immutable after construction and every operation is a
pure function of its inputs, so instances can be shared freely across
threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import DomainError, StructureError
from .rationals import INFINITY, parse_fraction

__all__ = [
    "MetricTree",
    "TreePoint",
    "GeodesicPath",
    "ValidationReport",
    "validate_tree",
    "canonicalize",
    "path_between_ends",
    "gromov_product",
    "dist",
    "future_ends",
]


def _edge_key(u: str, v: str) -> tuple[str, str]:
    return (u, v) if u <= v else (v, u)


class MetricTree:
    """A locally finite metric tree with ends and a base vertex.

    Construction is permissive: arbitrary graphs can be stored so that
    :func:`validate_tree` can report their defects.  Operations that
    need a valid canonical tree check first and raise
    :class:`StructureError`.
    """

    def __init__(
        self,
        vertices: Iterable[str],
        edges: Iterable[tuple[str, str, Union[Fraction, int, str]]],
        ends: Iterable[tuple[str, str]],
        base: str,
    ):
        self.vertices: tuple[str, ...] = tuple(sorted({str(v) for v in vertices}))
        self._vertex_set = frozenset(self.vertices)
        raw_edges = [(str(u), str(v), parse_fraction(length)) for u, v, length in edges]
        self.edges: tuple[tuple[str, str, Fraction], ...] = tuple(
            sorted((*_edge_key(u, v), length) for u, v, length in raw_edges)
        )
        self.edge_length: dict[tuple[str, str], Fraction] = {
            (u, v): length for u, v, length in self.edges
        }
        end_pairs = sorted((str(e), str(a)) for e, a in ends)
        self.ends: dict[str, str] = dict(end_pairs)
        self._duplicate_ends = len(end_pairs) != len(self.ends)
        self.base = str(base)

        self.adjacency: dict[str, list[tuple[str, Fraction]]] = {v: [] for v in self.vertices}
        for u, v, length in self.edges:
            if u in self.adjacency:
                self.adjacency[u].append((v, length))
            if v in self.adjacency and u != v:
                self.adjacency[v].append((u, length))
        for v in self.adjacency:
            self.adjacency[v].sort()
        self.vertex_ends: dict[str, tuple[str, ...]] = {v: () for v in self.vertices}
        for end_id, attach in self.ends.items():
            if attach in self.vertex_ends:
                self.vertex_ends[attach] = self.vertex_ends[attach] + (end_id,)

        self._validation: Optional[ValidationReport] = None
        self._rooted = None

    # -- structure ---------------------------------------------------------

    def degree(self, v: str) -> int:
        return len(self.adjacency[v]) + len(self.vertex_ends[v])

    def end_ids(self) -> tuple[str, ...]:
        return tuple(self.ends)

    def attach(self, end_id: str) -> str:
        try:
            return self.ends[end_id]
        except KeyError:
            raise DomainError(f"unknown end {end_id!r}") from None

    def validation_report(self) -> "ValidationReport":
        if self._validation is None:
            self._validation = _validate(self)
        return self._validation

    def require_valid(self) -> None:
        report = self.validation_report()
        if not report.valid:
            raise StructureError("; ".join(report.violations))

    @property
    def base_is_degree_two(self) -> bool:
        return self.base in self._vertex_set and self.degree(self.base) == 2

    # -- rooted structure (base as root) -----------------------------------

    def _root(self):
        if self._rooted is None:
            self.require_valid()
            parent: dict[str, Optional[str]] = {self.base: None}
            parent_len: dict[str, Fraction] = {}
            depth: dict[str, Fraction] = {self.base: Fraction(0)}
            order = [self.base]
            stack = [self.base]
            while stack:
                v = stack.pop()
                for w, length in self.adjacency[v]:
                    if w not in parent:
                        parent[w] = v
                        parent_len[w] = length
                        depth[w] = depth[v] + length
                        order.append(w)
                        stack.append(w)
            subtree_ends: dict[str, frozenset[str]] = {}
            for v in reversed(order):
                acc = set(self.vertex_ends[v])
                for w, _ in self.adjacency[v]:
                    if parent.get(w) == v:
                        acc.update(subtree_ends[w])
                subtree_ends[v] = frozenset(acc)
            self._rooted = (parent, parent_len, depth, subtree_ends)
        return self._rooted

    def parent(self, v: str) -> Optional[str]:
        return self._root()[0][v]

    def depth(self, v: str) -> Fraction:
        """Exact distance from the base vertex."""
        return self._root()[2][v]

    def subtree_ends(self, v: str) -> frozenset[str]:
        """Ends lying in the subtree rooted at ``v`` (base as root)."""
        return self._root()[3][v]

    def vertex_path(self, u: str, v: str) -> tuple[str, ...]:
        """The unique vertex chain from ``u`` to ``v``."""
        parent, _, depth, _ = self._root()
        up, down = [], []
        a, b = u, v
        while a != b:
            if depth[a] >= depth[b]:
                up.append(a)
                a = parent[a]
            else:
                down.append(b)
                b = parent[b]
        return tuple(up + [a] + list(reversed(down)))

    def meet(self, u: str, v: str) -> str:
        """Lowest common ancestor of two vertices with the base as root."""
        parent, _, depth, _ = self._root()
        a, b = u, v
        while a != b:
            if depth[a] >= depth[b]:
                a = parent[a]
            else:
                b = parent[b]
        return a

    def vertex_distance(self, u: str, v: str) -> Fraction:
        depth = self._root()[2]
        return depth[u] + depth[v] - 2 * depth[self.meet(u, v)]


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    violations: tuple[str, ...]
    warnings: tuple[str, ...]


def _validate(t: MetricTree) -> ValidationReport:
    violations: list[str] = []
    warnings: list[str] = []

    if t.base not in t._vertex_set:
        violations.append(f"base vertex {t.base!r} is not a vertex")
    if t._duplicate_ends:
        violations.append("duplicate end ids")
    for end_id, attach in t.ends.items():
        if attach not in t._vertex_set:
            violations.append(f"end {end_id!r} attaches to unknown vertex {attach!r}")
        if end_id in t._vertex_set:
            violations.append(f"end id {end_id!r} collides with a vertex id")

    seen_pairs = set()
    for u, v, length in t.edges:
        if u == v:
            violations.append(f"self-loop at {u!r}")
        if u not in t._vertex_set or v not in t._vertex_set:
            violations.append(f"edge ({u!r},{v!r}) references unknown vertex")
        if length <= 0:
            violations.append(f"edge ({u!r},{v!r}) has non-positive length {length}")
        if (u, v) in seen_pairs:
            violations.append(f"parallel edges between {u!r} and {v!r}")
        seen_pairs.add((u, v))

    if violations:
        return ValidationReport(False, tuple(violations), tuple(warnings))

    # Connectivity and acyclicity of the finite part (ends are leaves and
    # cannot close a cycle).
    if t.vertices:
        seen = {t.vertices[0]}
        stack = [t.vertices[0]]
        while stack:
            v = stack.pop()
            for w, _ in t.adjacency[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != len(t.vertices):
            violations.append("not connected")
        elif len(t.edges) != len(t.vertices) - 1:
            violations.append("not acyclic")
    else:
        violations.append("no vertices")

    if len(t.ends) < 2:
        violations.append("fewer than 2 ends")

    if not violations:
        for v in t.vertices:
            deg = t.degree(v)
            if deg == 2:
                if v == t.base:
                    warnings.append("base vertex has degree 2 (kept as exception)")
                else:
                    violations.append(f"non-canonical vertex {v!r} (degree 2)")
            elif deg == 0 and len(t.vertices) > 1:
                violations.append(f"isolated vertex {v!r}")

    return ValidationReport(not violations, tuple(violations), tuple(warnings))


def validate_tree(t: MetricTree) -> ValidationReport:
    """Check every structural invariant and report each violation."""
    return t.validation_report()


def canonicalize(t: MetricTree) -> MetricTree:
    """Suppress degree-2 vertices, summing the lengths of merged edges.

    The metric space is unchanged.  A degree-2 base vertex is retained
    (the base must stay a vertex); ``validate_tree`` flags it with a
    warning afterwards.
    """
    adjacency = {v: dict() for v in t.vertices}
    for u, v, length in t.edges:
        if u == v or u not in adjacency or v not in adjacency:
            raise StructureError("canonicalize requires a simple connected acyclic graph")
        if v in adjacency[u]:
            raise StructureError("canonicalize requires a simple connected acyclic graph")
        if length <= 0:
            raise StructureError(f"non-positive edge length on ({u!r},{v!r})")
        adjacency[u][v] = length
        adjacency[v][u] = length
    if t.base not in adjacency:
        raise StructureError(f"base vertex {t.base!r} is not a vertex")
    # Connectivity / acyclicity of the finite part.
    if t.vertices:
        seen = {t.vertices[0]}
        stack = [t.vertices[0]]
        while stack:
            v = stack.pop()
            for w in adjacency[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != len(t.vertices):
            raise StructureError("not connected")
        if len(t.edges) != len(t.vertices) - 1:
            raise StructureError("not acyclic")

    end_attach = dict(t.ends)
    ends_at = {v: [e for e, a in end_attach.items() if a == v] for v in t.vertices}

    def degree(v):
        return len(adjacency[v]) + len(ends_at[v])

    changed = True
    while changed:
        changed = False
        for v in sorted(adjacency):
            if v == t.base or degree(v) != 2:
                continue
            neighbors = sorted(adjacency[v])
            local_ends = sorted(ends_at[v])
            if len(neighbors) == 2:
                a, b = neighbors
                length = adjacency[v][a] + adjacency[v][b]
                del adjacency[a][v]
                del adjacency[b][v]
                adjacency[a][b] = length
                adjacency[b][a] = length
            elif len(neighbors) == 1 and len(local_ends) == 1:
                a = neighbors[0]
                del adjacency[a][v]
                end_attach[local_ends[0]] = a
                ends_at[a].append(local_ends[0])
            else:
                # Two end-edges at a non-base vertex would disconnect the
                # finite part; unreachable for valid inputs.
                raise StructureError(f"cannot suppress vertex {v!r}")
            del adjacency[v]
            del ends_at[v]
            changed = True
            break

    new_edges = []
    for u in adjacency:
        for v, length in adjacency[u].items():
            if u < v:
                new_edges.append((u, v, length))
    return MetricTree(
        vertices=adjacency.keys(),
        edges=new_edges,
        ends=end_attach.items(),
        base=t.base,
    )


# -- points -----------------------------------------------------------------


@dataclass(frozen=True)
class TreePoint:
    """A point of the tree: a vertex, or an offset along an edge.

    Representation is canonical so points can be compared and merged:
    vertex points are never written as offset-0 edge points, finite edge
    points measure their offset from the smaller endpoint id, and ray
    points (on an infinite end-edge) measure from the attach vertex.
    """

    kind: str  # "vertex" | "edge" | "ray"
    vertex: Optional[str] = None
    edge: Optional[tuple[str, str]] = None
    end: Optional[str] = None
    offset: Optional[Fraction] = None

    @staticmethod
    def at_vertex(v: str) -> "TreePoint":
        return TreePoint(kind="vertex", vertex=v)

    @staticmethod
    def on_edge(u: str, v: str, offset_from_u: Fraction, length: Fraction) -> "TreePoint":
        if offset_from_u < 0 or offset_from_u > length:
            raise DomainError(f"offset {offset_from_u} outside edge of length {length}")
        if offset_from_u == 0:
            return TreePoint.at_vertex(u)
        if offset_from_u == length:
            return TreePoint.at_vertex(v)
        a, b = _edge_key(u, v)
        off = offset_from_u if a == u else length - offset_from_u
        return TreePoint(kind="edge", edge=(a, b), offset=off)

    @staticmethod
    def on_ray(end_id: str, attach: str, offset: Fraction) -> "TreePoint":
        if offset < 0:
            raise DomainError(f"negative ray offset {offset}")
        if offset == 0:
            return TreePoint.at_vertex(attach)
        return TreePoint(kind="ray", end=end_id, offset=offset)

    def sort_key(self):
        return (
            self.kind,
            self.vertex or "",
            self.edge or ("", ""),
            self.end or "",
            self.offset if self.offset is not None else Fraction(0),
        )


@dataclass(frozen=True)
class GeodesicPath:
    """The locus of the complete geodesic between two distinct ends.

    ``vertices`` runs from the source's attach vertex to the target's
    (head-to-tail oriented ``edges`` in between); the two infinite
    leaf-edges are implicit at both ends.
    """

    source: str
    target: str
    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]


def path_between_ends(t: MetricTree, a: str, b: str) -> GeodesicPath:
    """The unique tree path between two distinct ends."""
    if a == b:
        raise DomainError(f"no geodesic from end {a!r} to itself")
    va, vb = t.attach(a), t.attach(b)
    chain = t.vertex_path(va, vb)
    edges = tuple(zip(chain, chain[1:]))
    return GeodesicPath(source=a, target=b, vertices=chain, edges=edges)


def gromov_product(t: MetricTree, a: str, b: str):
    """Distance from the base to the geodesic joining ends ``a`` and ``b``.

    Returns the INFINITY sentinel when ``a == b``; the sentinel supports
    no arithmetic and must be handled explicitly by callers.
    """
    if a == b:
        if a not in t.ends:
            raise DomainError(f"unknown end {a!r}")
        return INFINITY
    va, vb = t.attach(a), t.attach(b)
    return t.depth(t.meet(va, vb))


def future_ends(t: MetricTree, tail: str, head: str) -> frozenset[str]:
    """Ends on the head side after removing the open edge (tail, head).

    Finite edges are given by their two vertices; an end-edge is
    addressed with the end id as ``head`` (outward) or ``tail``
    (inward).
    """
    t.require_valid()
    if head in t.ends:
        return frozenset({head})
    if tail in t.ends:
        return frozenset(t.ends) - {tail}
    if _edge_key(tail, head) not in t.edge_length:
        raise DomainError(f"no edge between {tail!r} and {head!r}")
    parent = t._root()[0]
    if parent[head] == tail:
        return t.subtree_ends(head)
    return frozenset(t.ends) - t.subtree_ends(tail)


# -- exact metric -----------------------------------------------------------


def _portals(t: MetricTree, p: TreePoint) -> list[tuple[str, Fraction]]:
    """Vertices through which any path must leave the point's edge."""
    if p.kind == "vertex":
        return [(p.vertex, Fraction(0))]
    if p.kind == "edge":
        u, v = p.edge
        length = t.edge_length[(u, v)]
        return [(u, p.offset), (v, length - p.offset)]
    return [(t.attach(p.end), p.offset)]


def _check_point(t: MetricTree, p: TreePoint) -> None:
    if p.kind == "vertex":
        if p.vertex not in t._vertex_set:
            raise DomainError(f"unknown vertex {p.vertex!r}")
    elif p.kind == "edge":
        if p.edge not in t.edge_length:
            raise DomainError(f"unknown edge {p.edge!r}")
        if not 0 < p.offset < t.edge_length[p.edge]:
            raise DomainError(f"offset {p.offset} outside edge {p.edge!r}")
    elif p.kind == "ray":
        if p.end not in t.ends:
            raise DomainError(f"unknown end {p.end!r}")
        if p.offset <= 0:
            raise DomainError(f"ray point must have positive offset, got {p.offset}")
    else:
        raise DomainError(f"bad point kind {p.kind!r}")


def dist(t: MetricTree, p: TreePoint, q: TreePoint) -> Fraction:
    """Exact tree distance between two (finite) points."""
    t.require_valid()
    _check_point(t, p)
    _check_point(t, q)
    if p == q:
        return Fraction(0)
    if p.kind == "edge" and q.kind == "edge" and p.edge == q.edge:
        return abs(p.offset - q.offset)
    if p.kind == "ray" and q.kind == "ray" and p.end == q.end:
        return abs(p.offset - q.offset)
    best = None
    for u, du in _portals(t, p):
        for v, dv in _portals(t, q):
            cand = du + t.vertex_distance(u, v) + dv
            if best is None or cand < best:
                best = cand
    return best
