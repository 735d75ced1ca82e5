"""Optimal transport between boundary measures under the Gromov cost.

The cost of sending a unit of mass from end ``a`` to end ``b`` is minus
the squared Gromov product (squared distance from the base vertex to
the geodesic joining the two ends).  Antipodality keeps the diagonal,
where the product is infinite, out of every instance.

Besides the exact solver this module carries an independent value
oracle, an exhaustive cyclical-monotonicity test, and the uncrossing
rewrite that removes opposite traversals edge by edge without ever
increasing the objective.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Mapping, Optional, Union

from .errors import DomainError, OversizeError
from .flows import BoundaryMeasure, check_antipodal
from .lp import min_cost_transport_value, solve_transportation
from .rationals import parse_fraction
from .tree import MetricTree, gromov_product

__all__ = [
    "CostMatrix",
    "Coupling",
    "MonotonicityResult",
    "cost_matrix",
    "solve_optimal_coupling",
    "brute_force_value",
    "is_cyclically_monotone",
    "uncross",
    "CYCLE_SUPPORT_CAP",
    "PARTIAL_CYCLE_LENGTH",
]

# Exhaustive cycle checking is factorial; above this many support atoms
# only cycles up to PARTIAL_CYCLE_LENGTH are checked and the result is
# marked non-exhaustive.
CYCLE_SUPPORT_CAP = 8
PARTIAL_CYCLE_LENGTH = 4

ORACLE_SUPPORT_CAP = 7


@dataclass(frozen=True)
class CostMatrix:
    """Minus squared Gromov product on source-support x target-support."""

    rows: tuple[str, ...]
    cols: tuple[str, ...]
    values: Mapping[tuple[str, str], Fraction]

    def cost(self, a: str, b: str) -> Fraction:
        return self.values[(a, b)]


class Coupling:
    """A transport plan: nonnegative masses on ordered end pairs."""

    __slots__ = ("atoms",)

    def __init__(self, atoms: Mapping[tuple[str, str], Union[Fraction, int, str]]):
        cleaned: dict[tuple[str, str], Fraction] = {}
        for pair in sorted(atoms):
            mass = parse_fraction(atoms[pair])
            if mass < 0:
                raise DomainError(f"negative mass {mass} on pair {pair!r}")
            if mass > 0:
                cleaned[(str(pair[0]), str(pair[1]))] = mass
        self.atoms = cleaned

    def marginals(self) -> tuple[BoundaryMeasure, BoundaryMeasure]:
        left: dict[str, Fraction] = {}
        right: dict[str, Fraction] = {}
        for (a, b), mass in self.atoms.items():
            left[a] = left.get(a, Fraction(0)) + mass
            right[b] = right.get(b, Fraction(0)) + mass
        return BoundaryMeasure(left), BoundaryMeasure(right)

    def value(self, cm: CostMatrix) -> Fraction:
        return sum((cm.cost(a, b) * m for (a, b), m in self.atoms.items()), Fraction(0))

    def transpose(self) -> "Coupling":
        return Coupling({(b, a): m for (a, b), m in self.atoms.items()})

    def __eq__(self, other):
        return isinstance(other, Coupling) and self.atoms == other.atoms

    def __repr__(self):
        inner = ", ".join(f"({a},{b}): {m}" for (a, b), m in sorted(self.atoms.items()))
        return f"Coupling({{{inner}}})"


def _require_feasible(pi: Coupling, minus: BoundaryMeasure, plus: BoundaryMeasure) -> None:
    left, right = pi.marginals()
    if left != minus or right != plus:
        raise DomainError("coupling marginals do not match the prescribed measures")


def cost_matrix(t: MetricTree, minus: BoundaryMeasure, plus: BoundaryMeasure) -> CostMatrix:
    """Build the cost table over the two supports."""
    if not check_antipodal(t, minus, plus):
        raise DomainError("measures are not antipodal (supports intersect)")
    rows = tuple(sorted(minus.support))
    cols = tuple(sorted(plus.support))
    values = {}
    for a in rows:
        for b in cols:
            g = gromov_product(t, a, b)
            values[(a, b)] = -g * g
    return CostMatrix(rows=rows, cols=cols, values=values)


def solve_optimal_coupling(
    cm: CostMatrix, minus: BoundaryMeasure, plus: BoundaryMeasure
) -> tuple[Coupling, Fraction]:
    """Exact minimizer over the transport polytope, plus its value.

    The result is always a vertex (at most m+n-1 atoms).  Ties between
    optimal vertices are broken deterministically: the returned vertex
    lexicographically maximizes its mass vector read in (source id,
    target id) order.
    """
    if minus.support != set(cm.rows) or plus.support != set(cm.cols):
        raise DomainError("cost matrix does not cover the measure supports")
    supplies = [minus.mass(a) for a in cm.rows]
    demands = [plus.mass(b) for b in cm.cols]
    costs = [[cm.cost(a, b) for b in cm.cols] for a in cm.rows]
    masses, value = solve_transportation(costs, supplies, demands, lex_tiebreak=True)
    atoms = {(cm.rows[i], cm.cols[j]): q for (i, j), q in masses.items()}
    return Coupling(atoms), value


def brute_force_value(
    cm: CostMatrix, minus: BoundaryMeasure, plus: BoundaryMeasure
) -> Fraction:
    """Independent exact optimum, for checking the simplex route.

    Computed by successive shortest augmenting paths, a different
    algorithm family from the primal simplex used by
    :func:`solve_optimal_coupling`.  Refuses supports larger than
    ORACLE_SUPPORT_CAP per side.
    """
    if len(minus.support) > ORACLE_SUPPORT_CAP or len(plus.support) > ORACLE_SUPPORT_CAP:
        raise OversizeError(
            f"oracle refuses supports larger than {ORACLE_SUPPORT_CAP} per side"
        )
    if minus.support != set(cm.rows) or plus.support != set(cm.cols):
        raise DomainError("cost matrix does not cover the measure supports")
    supplies = [minus.mass(a) for a in cm.rows]
    demands = [plus.mass(b) for b in cm.cols]
    costs = [[cm.cost(a, b) for b in cm.cols] for a in cm.rows]
    return min_cost_transport_value(costs, supplies, demands)


@dataclass(frozen=True)
class MonotonicityResult:
    monotone: bool
    witness: Optional[tuple[tuple[str, str], ...]]
    exhaustive: bool

    def __bool__(self):
        return self.monotone


def is_cyclically_monotone(pi, cost) -> MonotonicityResult:
    """Test cyclical monotonicity of a plan's support for a given cost.

    For every cycle of support atoms the diagonal cost sum must not
    exceed the shifted sum.  Cycles are enumerated exhaustively up to
    CYCLE_SUPPORT_CAP atoms; beyond that only cycles of length at most
    PARTIAL_CYCLE_LENGTH are checked and ``exhaustive`` is False.  On
    failure the witness is the violating cycle of atoms.

    Accepts a :class:`Coupling` or a raw pair->mass mapping, and a
    :class:`CostMatrix` or a raw pair->cost mapping, so the same test
    runs on end couplings and on snapshot couplings.
    """
    atoms = pi.atoms if isinstance(pi, Coupling) else dict(pi)
    lookup = cost.values if isinstance(cost, CostMatrix) else cost

    def label_key(pair):
        return tuple(
            x.sort_key() if hasattr(x, "sort_key") else x for x in pair
        )

    support = sorted(atoms, key=label_key)
    k = len(support)
    exhaustive = k <= CYCLE_SUPPORT_CAP
    max_len = k if exhaustive else PARTIAL_CYCLE_LENGTH

    for first_idx in range(k):
        first = support[first_idx]
        rest = support[first_idx + 1 :]
        for size in range(2, max_len + 1):
            for tail in permutations(rest, size - 1):
                cycle = (first,) + tail
                kept = sum(
                    (lookup[pair] for pair in cycle), Fraction(0)
                )
                shifted = Fraction(0)
                ok = True
                for idx, (a, _b) in enumerate(cycle):
                    b_next = cycle[(idx + 1) % size][1]
                    if (a, b_next) not in lookup:
                        ok = False
                        break
                    shifted += lookup[(a, b_next)]
                if ok and kept > shifted:
                    return MonotonicityResult(False, cycle, exhaustive)
    return MonotonicityResult(True, None, exhaustive)


def uncross(pi: Coupling, t: MetricTree) -> Coupling:
    """Remove opposite traversals of every finite edge by target swaps.

    Edges are processed once each, ordered by increasing distance of
    their midpoint from the base and then lexicographically.  At each
    edge, pairs crossing it in opposite orientations exchange targets
    until one orientation carries nothing.  A swap never creates a new
    oriented traversal anywhere (the new geodesics ride prefixes and
    suffixes of the old ones), so previously cleaned edges stay clean,
    the objective never increases, and one pass suffices.
    """
    t.require_valid()
    minus, plus = pi.marginals()
    if minus.support & plus.support:
        raise DomainError("coupling marginals are not antipodal")

    parent = t._root()[0]

    def order_key(edge):
        u, v, length = edge
        midpoint = min(t.depth(u), t.depth(v)) + length / 2
        return (midpoint, u, v)

    atoms = dict(pi.atoms)
    for u, v, _length in sorted(t.edges, key=order_key):
        child = v if parent[v] == u else u
        below = t.subtree_ends(child)
        forward = []  # crossing toward the child side
        backward = []
        for pair in sorted(atoms):
            a, b = pair
            a_in, b_in = a in below, b in below
            if a_in == b_in:
                continue
            (forward if b_in else backward).append(pair)
        fi = bi = 0
        while fi < len(forward) and bi < len(backward):
            fa, fb = forward[fi]
            ba, bb = backward[bi]
            q = min(atoms[(fa, fb)], atoms[(ba, bb)])
            for pair in ((fa, fb), (ba, bb)):
                atoms[pair] -= q
                if atoms[pair] == 0:
                    del atoms[pair]
            for pair in ((fa, bb), (ba, fb)):
                atoms[pair] = atoms.get(pair, Fraction(0)) + q
            if (fa, fb) not in atoms:
                fi += 1
            if (ba, bb) not in atoms:
                bi += 1
    return Coupling(atoms)
