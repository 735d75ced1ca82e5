"""Dynamical transport plans: weighted families of complete geodesics.

A coupling of two boundary measures lifts to a plan with one atom per
coupled pair: the geodesic between the two ends, unit speed, oriented
from source to target.  The canonical parametrization puts each atom at
time 0 on the point of its geodesic nearest the base vertex; a rational
``time_offset`` shifts an individual atom along its own line.

The module provides the mass bookkeeping that mirrors the edge/vertex
flows (and the comparison between the two), antagonism detection, the
piecewise-isometric time function attached to a flow field, snapshots
of a plan at any rational time, and a verifier that a plan really moves
at unit speed in the quadratic Wasserstein metric.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .errors import DomainError
from .flows import (
    NEGATIVE,
    NEUTRAL,
    POSITIVE,
    BoundaryMeasure,
    FlowField,
    compute_flow_field,
)
from .lp import solve_transportation
from .transport import Coupling, is_cyclically_monotone
from .tree import GeodesicPath, MetricTree, TreePoint, dist, path_between_ends

__all__ = [
    "PlanAtom",
    "DynamicalPlan",
    "TimeFunction",
    "Snapshot",
    "LevelSnapshot",
    "FlowBoundsReport",
    "GeodesicReport",
    "lift",
    "plan_marginals",
    "antagonist_pairs",
    "plan_edge_and_vertex_masses",
    "check_flow_bounds",
    "build_time_function",
    "snapshot",
    "second_moment",
    "flow_level_snapshot",
    "verify_geodesic",
    "align_offsets_to_time_function",
    "reverse_plan",
    "with_offsets",
]


@dataclass(frozen=True)
class PlanAtom:
    """One weighted geodesic of a dynamical plan.

    ``coords`` assigns an arc-length coordinate to every vertex of the
    path, increasing from source to target, with 0 at ``base_vertex``
    (the path point nearest the base).  The atom's position at time t
    is the point with coordinate ``t + time_offset``.
    """

    source: str
    target: str
    mass: Fraction
    path: GeodesicPath
    base_vertex: str
    coords: tuple[Fraction, ...]
    time_offset: Fraction

    def position(self, time: Fraction, t: MetricTree) -> TreePoint:
        c = time + self.time_offset
        coords = self.coords
        verts = self.path.vertices
        if c <= coords[0]:
            return TreePoint.on_ray(self.source, verts[0], coords[0] - c)
        if c >= coords[-1]:
            return TreePoint.on_ray(self.target, verts[-1], c - coords[-1])
        hi = 1
        while coords[hi] < c:
            hi += 1
        u, v = verts[hi - 1], verts[hi]
        length = coords[hi] - coords[hi - 1]
        return TreePoint.on_edge(u, v, c - coords[hi - 1], length)

    def vertex_coord(self, v: str) -> Fraction:
        return self.coords[self.path.vertices.index(v)]


@dataclass(frozen=True)
class DynamicalPlan:
    atoms: tuple[PlanAtom, ...]

    def total_mass(self) -> Fraction:
        return sum((a.mass for a in self.atoms), Fraction(0))


def lift(pi: Coupling, t: MetricTree) -> DynamicalPlan:
    """Canonical plan over a coupling: one atom per pair, zero offsets."""
    t.require_valid()
    atoms = []
    for (a, b) in sorted(pi.atoms):
        path = path_between_ends(t, a, b)
        depths = [t.depth(v) for v in path.vertices]
        base_idx = depths.index(min(depths))
        coords = [Fraction(0)] * len(path.vertices)
        for idx in range(1, len(path.vertices)):
            u, v = path.vertices[idx - 1], path.vertices[idx]
            key = (u, v) if u <= v else (v, u)
            coords[idx] = coords[idx - 1] + t.edge_length[key]
        shift = coords[base_idx]
        coords = tuple(c - shift for c in coords)
        atoms.append(
            PlanAtom(
                source=a,
                target=b,
                mass=pi.atoms[(a, b)],
                path=path,
                base_vertex=path.vertices[base_idx],
                coords=coords,
                time_offset=Fraction(0),
            )
        )
    return DynamicalPlan(atoms=tuple(atoms))


def with_offsets(plan: DynamicalPlan, offsets: Sequence[Fraction]) -> DynamicalPlan:
    if len(offsets) != len(plan.atoms):
        raise DomainError("one offset per atom required")
    atoms = tuple(
        PlanAtom(
            source=a.source,
            target=a.target,
            mass=a.mass,
            path=a.path,
            base_vertex=a.base_vertex,
            coords=a.coords,
            time_offset=Fraction(off),
        )
        for a, off in zip(plan.atoms, offsets)
    )
    return DynamicalPlan(atoms=atoms)


def plan_marginals(plan: DynamicalPlan) -> tuple[BoundaryMeasure, BoundaryMeasure]:
    left: dict[str, Fraction] = {}
    right: dict[str, Fraction] = {}
    for a in plan.atoms:
        left[a.source] = left.get(a.source, Fraction(0)) + a.mass
        right[a.target] = right.get(a.target, Fraction(0)) + a.mass
    return BoundaryMeasure(left), BoundaryMeasure(right)


def plan_coupling(plan: DynamicalPlan) -> Coupling:
    """Project a plan back to its end coupling."""
    atoms: dict[tuple[str, str], Fraction] = {}
    for a in plan.atoms:
        key = (a.source, a.target)
        atoms[key] = atoms.get(key, Fraction(0)) + a.mass
    return Coupling(atoms)


def antagonist_pairs(plan: DynamicalPlan):
    """All atom pairs traversing some edge in opposite orientations.

    The witness is ``("edge", (u, v))`` for a finite edge or
    ``("ray", end_id)`` when one atom enters through the end the other
    leaves by (impossible for plans over antipodal measures).
    """
    oriented = []
    for a in plan.atoms:
        oriented.append(frozenset(a.path.edges))
    results = []
    for i in range(len(plan.atoms)):
        for j in range(i + 1, len(plan.atoms)):
            ai, aj = plan.atoms[i], plan.atoms[j]
            shared = sorted(
                (min(u, v), max(u, v))
                for (u, v) in oriented[i]
                if (v, u) in oriented[j]
            )
            if shared:
                results.append((i, j, ("edge", shared[0])))
            elif ai.source == aj.target:
                results.append((i, j, ("ray", ai.source)))
            elif ai.target == aj.source:
                results.append((i, j, ("ray", ai.target)))
    return results


def plan_edge_and_vertex_masses(plan: DynamicalPlan):
    """Oriented edge masses, vertex masses, and nearest-point masses.

    Returns ``(edge_mass, vertex_mass, base_mass)``: the mass of atoms
    traversing each oriented finite edge, passing through each vertex,
    and passing through each vertex as the point of their geodesic
    nearest the base.
    """
    edge_mass: dict[tuple[str, str], Fraction] = {}
    vertex_mass: dict[str, Fraction] = {}
    base_mass: dict[str, Fraction] = {}
    for a in plan.atoms:
        for e in a.path.edges:
            edge_mass[e] = edge_mass.get(e, Fraction(0)) + a.mass
        for v in a.path.vertices:
            vertex_mass[v] = vertex_mass.get(v, Fraction(0)) + a.mass
        base_mass[a.base_vertex] = base_mass.get(a.base_vertex, Fraction(0)) + a.mass
    return edge_mass, vertex_mass, base_mass


@dataclass(frozen=True)
class FlowBoundsReport:
    """Mass-versus-flow comparison over all edges and vertices.

    ``strict_edges`` and ``strict_vertices`` list the sites where the
    plan carries strictly more than the flow requires; the remaining
    flags relate the equality case to antagonism and to the specific
    flow, which is what the theory predicts.
    """

    strict_edges: tuple
    strict_vertices: tuple
    bounds_hold: bool
    all_equal: bool
    antagonism_free: bool
    equivalence_holds: bool
    specific_flow_matches: Optional[bool]

    @property
    def passed(self) -> bool:
        return (
            self.bounds_hold
            and self.equivalence_holds
            and (self.specific_flow_matches is not False)
        )


def check_flow_bounds(plan: DynamicalPlan, ff: FlowField) -> FlowBoundsReport:
    """Verify mass >= flow bounds and the equality/antagonism dichotomy."""
    t = ff.tree
    nm, np_ = plan_marginals(plan)
    if nm != ff.minus or np_ != ff.plus:
        raise DomainError("plan marginals do not match the flow field's measures")

    edge_mass, vertex_mass, base_mass = plan_edge_and_vertex_masses(plan)

    def mu(tail, head):
        return edge_mass.get((tail, head), Fraction(0))

    strict_edges = []
    bounds_hold = True
    for u, v, _length in t.edges:
        for tail, head in ((u, v), (v, u)):
            bound = max(ff.flow(tail, head), Fraction(0))
            got = mu(tail, head)
            if got < bound:
                bounds_hold = False
                strict_edges.append(((tail, head), got, bound, "violated"))
            elif got > bound:
                strict_edges.append(((tail, head), got, bound, "strict"))
    # End edges: inward traversals carry the source mass, outward the
    # target mass; recorded for completeness.
    for end_id in sorted(t.ends):
        attach = t.attach(end_id)
        outward = ff.flow(attach, end_id)
        uses = {
            (attach, end_id): sum(
                (a.mass for a in plan.atoms if a.target == end_id), Fraction(0)
            ),
            (end_id, attach): sum(
                (a.mass for a in plan.atoms if a.source == end_id), Fraction(0)
            ),
        }
        for (tail, head), got in uses.items():
            flow = outward if tail == attach else -outward
            bound = max(flow, Fraction(0))
            if got < bound:
                bounds_hold = False
                strict_edges.append(((tail, head), got, bound, "violated"))
            elif got > bound:
                strict_edges.append(((tail, head), got, bound, "strict"))

    strict_vertices = []
    for x in t.vertices:
        got = vertex_mass.get(x, Fraction(0))
        bound = ff.vertex_flow[x]
        if got < bound:
            bounds_hold = False
            strict_vertices.append((x, got, bound, "violated"))
        elif got > bound:
            strict_vertices.append((x, got, bound, "strict"))

    all_equal = not strict_edges and not strict_vertices
    antagonism_free = not antagonist_pairs(plan)
    specific_matches: Optional[bool] = None
    if all_equal:
        specific_matches = all(
            base_mass.get(x, Fraction(0)) == ff.specific_flow[x] for x in t.vertices
        )
    return FlowBoundsReport(
        strict_edges=tuple(strict_edges),
        strict_vertices=tuple(strict_vertices),
        bounds_hold=bounds_hold,
        all_equal=all_equal,
        antagonism_free=antagonism_free,
        equivalence_holds=all_equal == antagonism_free,
        specific_flow_matches=specific_matches,
    )


@dataclass(frozen=True)
class TimeFunction:
    """Continuous time coordinate: unit slope along positive edges,
    constant on neutral ones, normalized to 0 at the base vertex."""

    vertex_time: Mapping[str, Fraction]
    edge_class: Mapping[tuple[str, str], str]
    ray_class: Mapping[str, str]

    def at_vertex(self, v: str) -> Fraction:
        return self.vertex_time[v]

    def at_point(self, t: MetricTree, p: TreePoint) -> Fraction:
        if p.kind == "vertex":
            return self.vertex_time[p.vertex]
        if p.kind == "edge":
            u, v = p.edge
            cls = self.edge_class[(u, v)]
            if cls == POSITIVE:
                return self.vertex_time[u] + p.offset
            if cls == NEGATIVE:
                return self.vertex_time[u] - p.offset
            return self.vertex_time[u]
        cls = self.ray_class[p.end]
        base = self.vertex_time[t.attach(p.end)]
        if cls == POSITIVE:
            return base + p.offset
        if cls == NEGATIVE:
            return base - p.offset
        return base


def build_time_function(t: MetricTree, ff: FlowField) -> TimeFunction:
    """Propagate times from the base across the (acyclic) tree."""
    t.require_valid()
    vertex_time: dict[str, Fraction] = {t.base: Fraction(0)}
    stack = [t.base]
    while stack:
        v = stack.pop()
        for w, length in t.adjacency[v]:
            if w in vertex_time:
                continue
            cls = ff.edge_class(v, w)
            if cls == NEUTRAL:
                vertex_time[w] = vertex_time[v]
            elif ff.flow(v, w) > 0:
                vertex_time[w] = vertex_time[v] + length
            else:
                vertex_time[w] = vertex_time[v] - length
            stack.append(w)
    ray_class = {}
    for end_id in t.ends:
        f = ff.end_flow[end_id]
        ray_class[end_id] = POSITIVE if f > 0 else NEGATIVE if f < 0 else NEUTRAL
    return TimeFunction(
        vertex_time=vertex_time,
        edge_class=dict(ff.classification),
        ray_class=ray_class,
    )


@dataclass(frozen=True)
class Snapshot:
    """The plan's mass distribution at one time; atoms at coincident
    points are merged, so a snapshot is a measure, not labelled
    particles."""

    time: Fraction
    atoms: Mapping[TreePoint, Fraction]

    def total_mass(self) -> Fraction:
        return sum(self.atoms.values(), Fraction(0))


def snapshot(plan: DynamicalPlan, time, t: MetricTree) -> Snapshot:
    time = Fraction(time)
    atoms: dict[TreePoint, Fraction] = {}
    for a in plan.atoms:
        p = a.position(time, t)
        atoms[p] = atoms.get(p, Fraction(0)) + a.mass
    return Snapshot(time=time, atoms=atoms)


def second_moment(s: Snapshot, t: MetricTree) -> Fraction:
    """Mass-weighted squared distance to the base vertex."""
    origin = TreePoint.at_vertex(t.base)
    total = Fraction(0)
    for p, mass in s.atoms.items():
        d = dist(t, origin, p)
        total += mass * d * d
    return total


@dataclass(frozen=True)
class LevelSnapshot:
    """Snapshot built directly from the flow field at a time level.

    Mass sits on the level set of the time function restricted to the
    non-neutral part of the tree: the flow value at each crossing point
    of a positive edge and the vertex flow at each level vertex.
    ``tie_components`` flags neutral components whose boundary has two
    or more flow-carrying vertices on this level (informational; the
    masses are already per boundary vertex and per direction).
    """

    snapshot: Snapshot
    tie_components: tuple[tuple[str, ...], ...]


def flow_level_snapshot(
    t: MetricTree, ff: FlowField, tf: TimeFunction, time
) -> LevelSnapshot:
    time = Fraction(time)
    atoms: dict[TreePoint, Fraction] = {}

    def put(point, mass):
        atoms[point] = atoms.get(point, Fraction(0)) + mass

    for x in t.vertices:
        if ff.vertex_flow[x] > 0 and tf.vertex_time[x] == time:
            put(TreePoint.at_vertex(x), ff.vertex_flow[x])
    for u, v, length in t.edges:
        cls = ff.classification[(u, v)]
        if cls == NEUTRAL:
            continue
        tail, head = (u, v) if cls == POSITIVE else (v, u)
        lo, hi = tf.vertex_time[tail], tf.vertex_time[head]
        if lo < time < hi:
            put(
                TreePoint.on_edge(tail, head, time - lo, length),
                abs(ff.edge_flow[(u, v)]),
            )
    for end_id in sorted(t.ends):
        f = ff.end_flow[end_id]
        if f == 0:
            continue
        attach = t.attach(end_id)
        at = tf.vertex_time[attach]
        if f > 0 and time > at:
            put(TreePoint.on_ray(end_id, attach, time - at), f)
        elif f < 0 and time < at:
            put(TreePoint.on_ray(end_id, attach, at - time), -f)

    # Neutral components with several flow-carrying boundary vertices on
    # this level admit bookkeeping ties; flag them for review.
    tie_components = []
    seen: set[str] = set()
    for start in t.vertices:
        if start in seen:
            continue
        component = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for w, _l in t.adjacency[v]:
                if w not in component and ff.edge_class(v, w) == NEUTRAL:
                    component.add(w)
                    stack.append(w)
        seen.update(component)
        if len(component) < 2:
            continue
        boundary = sorted(
            x
            for x in component
            if ff.vertex_flow[x] > 0 and tf.vertex_time[x] == time
        )
        if len(boundary) >= 2:
            tie_components.append(tuple(boundary))
    return LevelSnapshot(
        snapshot=Snapshot(time=time, atoms=atoms),
        tie_components=tuple(tie_components),
    )


def align_offsets_to_time_function(
    plan: DynamicalPlan, tf: TimeFunction
) -> DynamicalPlan:
    """Shift each atom so its position at time t sits on time level t."""
    return with_offsets(plan, [-tf.vertex_time[a.base_vertex] for a in plan.atoms])


def reverse_plan(plan: DynamicalPlan, t: MetricTree) -> DynamicalPlan:
    """Swap sources and targets; position at time t becomes position at -t."""
    atoms = []
    for a in plan.atoms:
        verts = tuple(reversed(a.path.vertices))
        edges = tuple((v, u) for (u, v) in reversed(a.path.edges))
        coords = tuple(-c for c in reversed(a.coords))
        shift = coords[verts.index(a.base_vertex)]
        assert shift == 0
        atoms.append(
            PlanAtom(
                source=a.target,
                target=a.source,
                mass=a.mass,
                path=GeodesicPath(
                    source=a.target, target=a.source, vertices=verts, edges=edges
                ),
                base_vertex=a.base_vertex,
                coords=coords,
                time_offset=-a.time_offset,
            )
        )
    return DynamicalPlan(atoms=tuple(atoms))


@dataclass(frozen=True)
class GeodesicReport:
    antagonism_free: bool
    antagonists: tuple
    tau_isometric: bool
    tau_failures: tuple
    speed_checks: tuple
    speed_ok: bool

    @property
    def passed(self) -> bool:
        return self.antagonism_free and self.tau_isometric and self.speed_ok


def _snapshot_transport_value(
    t: MetricTree, a: Snapshot, b: Snapshot
) -> Fraction:
    rows = sorted(a.atoms, key=TreePoint.sort_key)
    cols = sorted(b.atoms, key=TreePoint.sort_key)
    costs = []
    for p in rows:
        row = []
        for q in cols:
            d = dist(t, p, q)
            row.append(d * d)
        costs.append(row)
    supplies = [a.atoms[p] for p in rows]
    demands = [b.atoms[q] for q in cols]
    _, value = solve_transportation(costs, supplies, demands)
    return value


def verify_geodesic(plan: DynamicalPlan, t: MetricTree, sample_times) -> GeodesicReport:
    """Check that a plan moves at unit Wasserstein speed.

    Three independent checks: (a) no antagonist pair of atoms; (b) the
    time function of the induced flow field is isometric along every
    supported geodesic (each finite edge is traversed in its positive
    orientation, mass enters through negative end-edges and leaves
    through positive ones); (c) for each sampled pair r < s the exact
    optimal transport cost between the two snapshots under squared tree
    distance equals (s - r)^2.
    """
    times = sorted({Fraction(x) for x in sample_times})
    if len(times) < 2:
        raise DomainError("need at least two distinct sample times")

    pairs = antagonist_pairs(plan)

    nm, np_ = plan_marginals(plan)
    ff = compute_flow_field(t, nm, np_)
    tau_failures = []
    for idx, a in enumerate(plan.atoms):
        for (tail, head) in a.path.edges:
            if ff.flow(tail, head) <= 0:
                tau_failures.append((idx, ("edge", (tail, head))))
        if ff.end_flow[a.source] >= 0:
            tau_failures.append((idx, ("ray", a.source)))
        if ff.end_flow[a.target] <= 0:
            tau_failures.append((idx, ("ray", a.target)))

    snapshots = {r: snapshot(plan, r, t) for r in times}
    speed_checks = []
    speed_ok = True
    for i in range(len(times)):
        for j in range(i + 1, len(times)):
            r, s = times[i], times[j]
            value = _snapshot_transport_value(t, snapshots[r], snapshots[s])
            expected = (s - r) ** 2
            ok = value == expected
            speed_ok = speed_ok and ok
            speed_checks.append((r, s, value, expected, ok))

    return GeodesicReport(
        antagonism_free=not pairs,
        antagonists=tuple(pairs),
        tau_isometric=not tau_failures,
        tau_failures=tuple(tau_failures),
        speed_checks=tuple(speed_checks),
        speed_ok=speed_ok,
    )
