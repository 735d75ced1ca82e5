"""Deciding and constructing complete Wasserstein geodesics between ends.

On a finite instance two boundary measures are the two ends of a
complete unit geodesic exactly when they are antipodal, and the
geodesic is built explicitly: solve the boundary transport problem,
lift the optimal coupling with canonical (zero) offsets, and verify the
construction.  The decision report carries the optimal value and the
specific-flow second moment, which are the two finiteness functionals
that decide realizability for infinite families.

Infinite families are probed by truncation: a family spec generates a
growing spine of vertices with paired ends and summable masses, each
truncation is renormalized and analyzed, and the trend of the
per-level values is classified.  The verdict is about the computed
prefix only, never a proof about the infinite object.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import DomainError, StructureError
from .flows import (
    BoundaryMeasure,
    FlowField,
    check_antipodal,
    compute_flow_field,
    specific_flow_second_moment,
)
from .lp import solve_transportation
from .dynamics import (
    DynamicalPlan,
    GeodesicReport,
    Snapshot,
    lift,
    snapshot,
    verify_geodesic,
)
from .rationals import parse_fraction
from .transport import Coupling, cost_matrix, solve_optimal_coupling
from .tree import MetricTree, canonicalize

__all__ = [
    "RealizabilityReport",
    "FamilySpec",
    "FamilyVerdict",
    "decide",
    "realize",
    "family_analyze",
    "spine_truncation",
    "REALIZABLE",
    "NOT_ANTIPODAL",
]

REALIZABLE = "realizable"
NOT_ANTIPODAL = "not-antipodal"

CONVERGED = "converged-within-tolerance"
DIVERGING = "diverging-trend"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class RealizabilityReport:
    antipodal: bool
    verdict: str
    lp_value: Optional[Fraction]
    flow_moment: Optional[Fraction]
    coupling: Optional[Coupling]
    plan: Optional[DynamicalPlan]
    flow_field: Optional[FlowField]
    geodesic: Optional[GeodesicReport]
    sample_times: tuple[Fraction, ...]


def _default_times(plan: DynamicalPlan) -> tuple[Fraction, ...]:
    spread = Fraction(0)
    for a in plan.atoms:
        spread = max(spread, abs(a.coords[0]), abs(a.coords[-1]))
    far = spread + 1
    return tuple(sorted({-far, Fraction(-1), Fraction(0), Fraction(1), far}))


def decide(
    t: MetricTree,
    minus: BoundaryMeasure,
    plus: BoundaryMeasure,
    sample_times: Optional[Sequence[Fraction]] = None,
) -> RealizabilityReport:
    """Decide whether the pair of measures bounds a complete geodesic.

    Antipodality is necessary; on a finite instance it is also
    sufficient, and the witness construction (optimal coupling, its
    canonical lift, and the unit-speed verification) is returned.
    """
    t.require_valid()
    if not check_antipodal(t, minus, plus):
        return RealizabilityReport(
            antipodal=False,
            verdict=NOT_ANTIPODAL,
            lp_value=None,
            flow_moment=None,
            coupling=None,
            plan=None,
            flow_field=None,
            geodesic=None,
            sample_times=(),
        )
    cm = cost_matrix(t, minus, plus)
    coupling, value = solve_optimal_coupling(cm, minus, plus)
    ff = compute_flow_field(t, minus, plus)
    moment = specific_flow_second_moment(t, ff)
    plan = lift(coupling, t)
    times = tuple(sorted({Fraction(x) for x in sample_times})) if sample_times else _default_times(plan)
    report = verify_geodesic(plan, t, times)
    return RealizabilityReport(
        antipodal=True,
        verdict=REALIZABLE,
        lp_value=value,
        flow_moment=moment,
        coupling=coupling,
        plan=plan,
        flow_field=ff,
        geodesic=report,
        sample_times=times,
    )


def realize(
    t: MetricTree,
    minus: BoundaryMeasure,
    plus: BoundaryMeasure,
    times: Sequence[Fraction] = (),
) -> tuple[Coupling, DynamicalPlan, list[Snapshot]]:
    """Build the geodesic and snapshot it at the requested times."""
    report = decide(t, minus, plus)
    if report.verdict != REALIZABLE:
        raise DomainError("measures are not antipodal; no geodesic exists")
    snaps = [snapshot(report.plan, Fraction(x), t) for x in times]
    return report.coupling, report.plan, snaps


# -- truncated families ------------------------------------------------------


def _rule_values(rule: dict, count: int, what: str) -> list[Fraction]:
    kind = rule.get("kind")
    if kind == "constant":
        value = parse_fraction(rule["value"])
        return [value] * count
    if kind == "geometric":
        ratio = parse_fraction(rule["ratio"])
        scale = parse_fraction(rule.get("scale", 1))
        out = []
        current = ratio
        for _ in range(count):
            out.append(scale * current)
            current *= ratio
        return out
    if kind == "explicit":
        values = [parse_fraction(v) for v in rule["values"]]
        if len(values) < count:
            raise StructureError(
                f"family {what} list has {len(values)} entries, level {count} requested"
            )
        return values[:count]
    raise StructureError(f"unknown {what} rule kind {kind!r}")


@dataclass(frozen=True)
class FamilySpec:
    """Spine family: level k adds a spine edge of length L_k, a source
    end S_k at the previous spine vertex carrying mass p_k, and a target
    end T_k at the new vertex carrying the same mass.

    Truncating at level K keeps levels 1..K and renormalizes both
    measures by the same factor, so antipodality and every flow sign
    survive truncation.
    """

    kind: str
    masses: dict
    lengths: dict

    @staticmethod
    def from_json(data: dict) -> "FamilySpec":
        kind = data.get("kind")
        if kind == "spine":
            return FamilySpec(kind="spine", masses=dict(data["masses"]), lengths=dict(data["lengths"]))
        if kind == "custom":
            return FamilySpec(
                kind="spine",
                masses={"kind": "explicit", "values": list(data["masses"])},
                lengths={"kind": "explicit", "values": list(data["lengths"])},
            )
        raise StructureError(f"unknown family kind {kind!r}")

    def level_data(self, level: int) -> tuple[list[Fraction], list[Fraction]]:
        masses = _rule_values(self.masses, level, "masses")
        lengths = _rule_values(self.lengths, level, "lengths")
        if any(m < 0 for m in masses):
            raise StructureError("family masses must be nonnegative")
        if any(l <= 0 for l in lengths):
            raise StructureError("family lengths must be positive")
        return masses, lengths

    def truncation(self, level: int):
        masses, lengths = self.level_data(level)
        return spine_truncation(masses, lengths)


def spine_truncation(
    masses: Sequence[Fraction], lengths: Sequence[Fraction]
) -> tuple[MetricTree, BoundaryMeasure, BoundaryMeasure]:
    """Finite instance for the first K levels of a spine family."""
    K = len(masses)
    if K != len(lengths):
        raise StructureError("masses and lengths must have the same level count")
    if K < 1:
        raise StructureError("need at least one level")
    total = sum(masses, Fraction(0))
    if total <= 0:
        raise StructureError("truncation carries no mass; cannot renormalize")
    vertices = [f"u{k}" for k in range(K + 1)]
    edges = [(f"u{k - 1}", f"u{k}", lengths[k - 1]) for k in range(1, K + 1)]
    ends = []
    for k in range(1, K + 1):
        ends.append((f"S{k}", f"u{k - 1}"))
        ends.append((f"T{k}", f"u{k}"))
    raw = MetricTree(vertices=vertices, edges=edges, ends=ends, base="u0")
    tree = canonicalize(raw)
    minus = BoundaryMeasure({f"S{k}": masses[k - 1] / total for k in range(1, K + 1) if masses[k - 1] > 0})
    plus = BoundaryMeasure({f"T{k}": masses[k - 1] / total for k in range(1, K + 1) if masses[k - 1] > 0})
    return tree, minus, plus


@dataclass(frozen=True)
class FamilyVerdict:
    levels: tuple[int, ...]
    moment_sums: tuple[Fraction, ...]
    lp_values: tuple[Fraction, ...]
    increments: tuple[Fraction, ...]
    classification: str
    tolerance: Fraction
    max_level: int
    converged_at: Optional[int]


def family_analyze(spec: FamilySpec, max_level: int, tolerance) -> FamilyVerdict:
    """Analyze truncations up to ``max_level`` and classify the trend.

    Classification: converged-within-tolerance when the last two
    moment-sum increments are below tolerance and non-increasing;
    diverging-trend when increments never decrease and the final sum
    exceeds ten times the level-3 sum; inconclusive otherwise.  The
    verdict is about the computed prefix only.
    """
    tolerance = parse_fraction(tolerance)
    if max_level < 3:
        raise DomainError("max_level must be at least 3")
    if tolerance <= 0:
        raise DomainError("tolerance must be positive")

    levels = list(range(1, max_level + 1))
    moment_sums: list[Fraction] = []
    lp_values: list[Fraction] = []
    for level in levels:
        try:
            tree, minus, plus = spec.truncation(level)
        except StructureError as exc:
            raise StructureError(f"level {level}: {exc}") from exc
        ff = compute_flow_field(tree, minus, plus)
        moment_sums.append(specific_flow_second_moment(tree, ff))
        cm = cost_matrix(tree, minus, plus)
        # Only the optimal value is reported per level, so the plain
        # solver (no vertex tie-break) is enough and much faster here.
        supplies = [minus.mass(a) for a in cm.rows]
        demands = [plus.mass(b) for b in cm.cols]
        costs = [[cm.cost(a, b) for b in cm.cols] for a in cm.rows]
        _, value = solve_transportation(costs, supplies, demands)
        lp_values.append(value)

    increments = [moment_sums[0]]
    for i in range(1, len(moment_sums)):
        increments.append(moment_sums[i] - moment_sums[i - 1])

    converged_at = None
    for i in range(1, len(levels)):
        if (
            increments[i - 1] < tolerance
            and increments[i] < tolerance
            and increments[i] <= increments[i - 1]
        ):
            converged_at = levels[i]
            break

    last_two_small = (
        increments[-1] < tolerance
        and increments[-2] < tolerance
        and increments[-1] <= increments[-2]
    )
    nondecreasing = all(
        increments[i] >= increments[i - 1] for i in range(1, len(increments))
    )
    level3_sum = moment_sums[2]
    if last_two_small:
        classification = CONVERGED
    elif nondecreasing and moment_sums[-1] > 10 * level3_sum:
        classification = DIVERGING
    else:
        classification = INCONCLUSIVE

    return FamilyVerdict(
        levels=tuple(levels),
        moment_sums=tuple(moment_sums),
        lp_values=tuple(lp_values),
        increments=tuple(increments),
        classification=classification,
        tolerance=tolerance,
        max_level=max_level,
        converged_at=converged_at,
    )
