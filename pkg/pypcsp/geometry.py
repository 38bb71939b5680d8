"""
Outcome sets of tests: finite sets of success vectors in ``[0,1]^W`` for an ordered success alphabet ``W``, either
kept verbatim (raw mode) or as the vertices of their convex hull (convex mode).  Every query is answered exactly by
``sympy``'s rational simplex through ``LinearProgram``, which the other modules use for their feasibility questions
as well.
"""
import json
import logging
from fractions import Fraction
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import sympy
from sympy.solvers.simplex import InfeasibleLPError, UnboundedLPError, linprog

from pypcsp.enums import Direction, Mode, Order
from pypcsp.terms import OMEGA
from pypcsp.utils import GeometryException, InvariantViolation, Rational, format_fraction, fraction_sum, to_fraction

__author__ = "PyPCSP contributors"
__email__ = "pypcsp@example.org"

logger = logging.getLogger(__name__)

Vector = Tuple[Fraction, ...]


ZERO = Fraction(0)


def _rational(value: Fraction) -> sympy.Rational:
    return sympy.Rational(value.numerator, value.denominator)


def _fraction(value: Any) -> Fraction:
    value = sympy.Rational(value)
    return Fraction(int(value.p), int(value.q))


class LinearProgram:
    """
    A system of linear constraints over non-negative variables, solved exactly by ``sympy``'s rational simplex.

    Variables are identified by the integers returned from ``new_var``.  Constraints are given as sparse coefficient
    maps ``{variable: coefficient}``.
    """

    def __init__(self) -> None:
        self.variable_count = 0
        self.names = []
        self.constraints = []

    def new_var(self, name: Optional[str] = None) -> int:
        index = self.variable_count
        self.variable_count += 1
        self.names.append(name or "x{}".format(index))
        return index

    def new_vars(self, count: int, prefix: str = "x") -> List[int]:
        return [self.new_var("{}{}".format(prefix, i)) for i in range(count)]

    def _add(self, coefficients: Dict[int, Rational], sense: int, rhs: Rational) -> None:
        row = {}
        for variable, coefficient in coefficients.items():
            if not 0 <= variable < self.variable_count:
                raise InvariantViolation("unknown variable {}".format(variable))
            coefficient = to_fraction(coefficient)
            if coefficient:
                row[variable] = row.get(variable, ZERO) + coefficient
        self.constraints.append(({v: c for v, c in row.items() if c}, sense, to_fraction(rhs)))

    def add_eq(self, coefficients: Dict[int, Rational], rhs: Rational) -> None:
        self._add(coefficients, 0, rhs)

    def add_le(self, coefficients: Dict[int, Rational], rhs: Rational) -> None:
        self._add(coefficients, 1, rhs)

    def add_ge(self, coefficients: Dict[int, Rational], rhs: Rational) -> None:
        self._add(coefficients, -1, rhs)

    def is_feasible(self) -> bool:
        return self.solve() is not None

    def _matrices(self) -> Optional[Tuple[List[List[sympy.Rational]], List[sympy.Rational]]]:
        # everything as A x <= b; equalities contribute both directions
        rows, bounds = [], []
        for row, sense, rhs in self.constraints:
            if not row:
                if (sense == 0 and rhs != 0) or (sense == 1 and rhs < 0) or (sense == -1 and rhs > 0):
                    return None
                continue
            dense = [_rational(row.get(v, ZERO)) for v in range(self.variable_count)]
            if sense >= 0:
                rows.append(dense)
                bounds.append(_rational(rhs))
            if sense <= 0:
                rows.append([-c for c in dense])
                bounds.append(-_rational(rhs))
        if not rows:
            rows, bounds = [[_rational(ZERO)] * self.variable_count], [_rational(ZERO)]
        return rows, bounds

    def solve(self, maximize: Optional[Dict[int, Rational]] = None) -> Optional[List[Fraction]]:
        """
        :param maximize:
            Optional linear objective.  Without it any feasible point is returned.
        :return:
            Values of all variables at a feasible (optimal, when an objective is given) basic solution, or None when
            the system is infeasible.
        :raises InvariantViolation:
            When the objective is unbounded.
        """
        matrices = self._matrices()
        if matrices is None:
            logger.debug("lp infeasible by an empty row")
            return None
        if not self.variable_count:
            return []

        rows, bounds = matrices
        maximize = maximize or {}
        cost = [-_rational(to_fraction(maximize.get(v, 0))) for v in range(self.variable_count)]
        logger.debug("lp with %d variables and %d rows", self.variable_count, len(rows))
        try:
            _, values = linprog(cost, rows, bounds)
        except InfeasibleLPError:
            logger.debug("lp infeasible")
            return None
        except UnboundedLPError as e:
            raise InvariantViolation("unbounded objective") from e
        return [_fraction(value) for value in values]


def convex_weights(points: Sequence[Sequence[Fraction]], target: Sequence[Fraction]) -> Optional[List[Fraction]]:
    """
    :return:
        Weights ``l_k >= 0`` summing to one with ``sum l_k * points[k] == target``, or None when ``target`` lies
        outside the convex hull of ``points``.
    """
    if not points:
        return None
    program = LinearProgram()
    weights = program.new_vars(len(points), prefix="l")
    program.add_eq({w: 1 for w in weights}, 1)
    for coordinate, value in enumerate(target):
        program.add_eq({w: point[coordinate] for w, point in zip(weights, points)}, value)
    solution = program.solve()
    if solution is None:
        return None
    return [solution[w] for w in weights]


class OutcomeSet:
    __slots__ = ("omega", "mode", "points")

    def __init__(self, omega: Sequence[str], mode: Mode, points: Iterable[Sequence[Fraction]]) -> None:
        self.omega = tuple(omega)
        self.mode = mode
        vectors = set()
        for point in points:
            vector = tuple(to_fraction(value) for value in point)
            if len(vector) != len(self.omega):
                raise GeometryException("vector {} does not match success alphabet {}".format(vector, self.omega))
            if any(not 0 <= value <= 1 for value in vector):
                raise GeometryException("vector {} outside the unit cube".format(format_vector(vector)))
            vectors.add(vector)
        self.points = tuple(sorted(vectors))

    @property
    def dimension(self) -> int:
        return len(self.omega)

    @property
    def is_convex(self) -> bool:
        return self.mode is Mode.convex

    def __iter__(self) -> Iterator[Vector]:
        return iter(self.points)

    def __len__(self) -> int:
        return len(self.points)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OutcomeSet):
            return NotImplemented
        return (self.omega, self.mode, self.points) == (other.omega, other.mode, other.points)

    def __hash__(self) -> int:
        return hash((self.omega, self.mode, self.points))

    def __contains__(self, vector: Sequence[Fraction]) -> bool:
        vector = tuple(to_fraction(v) for v in vector)
        if not self.is_convex:
            return vector in self.points
        return convex_weights(self.points, vector) is not None

    def scalars(self) -> Tuple[Fraction, ...]:
        if self.dimension != 1:
            raise GeometryException("outcome set over {} is not scalar".format(self.omega))
        return tuple(point[0] for point in self.points)

    def to_json(self) -> Dict[str, Any]:
        return {
            "omega": list(self.omega),
            "mode": self.mode.value,
            "points": [[format_fraction(value) for value in point] for point in self.points],
        }

    @classmethod
    def from_json(cls, data: Union[str, Dict[str, Any]]) -> "OutcomeSet":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            return cls(data["omega"], Mode(data["mode"]), [[Fraction(v) for v in p] for p in data["points"]])
        except (KeyError, TypeError, ValueError) as e:
            raise GeometryException("malformed outcome set {!r}".format(data)) from e

    def __str__(self) -> str:
        return "{" + ", ".join(format_vector(point) for point in self.points) + "}"

    def __repr__(self) -> str:
        return "OutcomeSet({}, {}, {})".format(self.omega, self.mode.name, self)


def format_vector(vector: Sequence[Fraction]) -> str:
    if len(vector) == 1:
        return format_fraction(vector[0])
    return "(" + ",".join(format_fraction(value) for value in vector) + ")"


def zero(omega: Sequence[str]) -> Vector:
    return tuple(Fraction(0) for _ in omega)


def unit(omega: Sequence[str], label: str) -> Vector:
    if label not in omega:
        raise GeometryException("{} is not a success action of {}".format(label, tuple(omega)))
    return tuple(Fraction(1 if name == label else 0) for name in omega)


def raw(points: Iterable[Sequence[Fraction]], omega: Sequence[str] = (OMEGA,)) -> OutcomeSet:
    return OutcomeSet(omega, Mode.raw, points)


def hull_reduce(points: Iterable[Sequence[Fraction]], omega: Sequence[str] = (OMEGA,)) -> OutcomeSet:
    """
    Reduces a finite set of vectors to the vertices of its convex hull.  In one dimension these are the minimum and
    the maximum; otherwise every point lying in the hull of the remaining ones is dropped.
    """
    unique = sorted({tuple(to_fraction(v) for v in point) for point in points})
    if len(unique) > 2:
        if len(omega) == 1:
            unique = [unique[0], unique[-1]]
        else:
            kept = list(range(len(unique)))
            for index in range(len(unique)):
                others = [unique[k] for k in kept if k != index]
                if convex_weights(others, unique[index]) is not None:
                    kept.remove(index)
            logger.debug("hull reduction kept %d of %d points", len(kept), len(unique))
            unique = [unique[k] for k in kept]
    return OutcomeSet(omega, Mode.convex, unique)


def convex_closure(outcomes: OutcomeSet) -> OutcomeSet:
    if outcomes.is_convex:
        return outcomes
    return hull_reduce(outcomes.points, outcomes.omega)


def _check_compatible(sets: Sequence[OutcomeSet]) -> None:
    alphabets = {outcomes.omega for outcomes in sets}
    if len(alphabets) > 1:
        raise GeometryException("success alphabets differ: {}".format(sorted(alphabets)))


def minkowski_mix(parts: Sequence[Tuple[Fraction, OutcomeSet]]) -> OutcomeSet:
    """
    The set-valued expectation ``sum p_i * X_i``: every way of choosing one point from each ``X_i``.  Raw sets give
    the raw set of all such sums, convex sets the reduced hull of the vertex sums.

    :raises GeometryException: when weights do not sum to one or modes and alphabets differ.
    """
    if not parts:
        raise GeometryException("mix of no outcome sets")
    sets = [outcomes for _, outcomes in parts]
    _check_compatible(sets)
    modes = {outcomes.mode for outcomes in sets}
    if len(modes) > 1:
        raise GeometryException("cannot mix raw and convex outcome sets")
    weights = [to_fraction(p) for p, _ in parts]
    if fraction_sum(weights) != 1 or any(p < 0 for p in weights):
        raise GeometryException("mixing weights must be non-negative and sum to 1")

    mode, omega = modes.pop(), sets[0].omega
    partial = {zero(omega)}
    for p, outcomes in zip(weights, sets):
        partial = {tuple(a + p * b for a, b in zip(sum_, point)) for sum_ in partial for point in outcomes}
        if mode is Mode.convex and len(outcomes) > 1:
            partial = set(hull_reduce(partial, omega).points)
    return OutcomeSet(omega, mode, partial)


def union(sets: Sequence[OutcomeSet]) -> OutcomeSet:
    _check_compatible(sets)
    points = [point for outcomes in sets for point in outcomes]
    if all(outcomes.mode is Mode.raw for outcomes in sets):
        return OutcomeSet(sets[0].omega, Mode.raw, points)
    return hull_reduce(points, sets[0].omega)


def apply_success(label: str, outcomes: OutcomeSet) -> OutcomeSet:
    """
    Maps every vector ``o`` to ``label!o``: the coordinate of ``label`` is set to 1 when ``label`` is a success action
    of the set, every other label leaves the set unchanged.
    """
    if label not in outcomes.omega:
        return outcomes
    index = outcomes.omega.index(label)
    points = [point[:index] + (Fraction(1),) + point[index + 1 :] for point in outcomes]
    if outcomes.is_convex:
        return hull_reduce(points, outcomes.omega)
    return OutcomeSet(outcomes.omega, outcomes.mode, points)


def dominated_point_exists(outcomes: OutcomeSet, vector: Sequence[Fraction], direction: Direction) -> bool:
    """
    Decides whether some ``o`` in the convex hull of ``outcomes`` satisfies ``o <= vector`` (``Direction.below``) or
    ``o >= vector`` (``Direction.above``) componentwise.  Raw sets are searched point by point.
    """
    vector = tuple(to_fraction(v) for v in vector)
    if len(vector) != outcomes.dimension:
        raise GeometryException("vector {} does not match success alphabet {}".format(vector, outcomes.omega))

    def fits(point: Vector) -> bool:
        if direction is Direction.below:
            return all(a <= b for a, b in zip(point, vector))
        return all(a >= b for a, b in zip(point, vector))

    if any(fits(point) for point in outcomes):
        return True
    if not outcomes.is_convex or len(outcomes) < 2:
        return False

    program = LinearProgram()
    weights = program.new_vars(len(outcomes), prefix="l")
    program.add_eq({w: 1 for w in weights}, 1)
    for coordinate, bound in enumerate(vector):
        row = {w: point[coordinate] for w, point in zip(weights, outcomes)}
        if direction is Direction.below:
            program.add_le(row, bound)
        else:
            program.add_ge(row, bound)
    return program.is_feasible()


def compare(order: Order, left: OutcomeSet, right: OutcomeSet) -> bool:
    """
    The Hoare order holds when every outcome on the left is dominated by some outcome on the right; the Smyth order
    when every outcome on the right dominates some outcome on the left.  As soon as one side is convex both sides
    are read as hulls, and the quantified side is checked on its vertices only.

    :raises GeometryException: when the success alphabets differ.
    """
    _check_compatible([left, right])
    hulls = left.is_convex or right.is_convex
    if hulls:
        left, right = convex_closure(left), convex_closure(right)

    if order is Order.hoare:
        return all(dominated_point_exists(right, x, Direction.above) for x in left)
    return all(dominated_point_exists(left, y, Direction.below) for y in right)


def scalar_extrema(outcomes: OutcomeSet) -> Tuple[Fraction, Fraction]:
    """
    :return: the least and greatest success probability of a scalar outcome set.
    :raises GeometryException: for vector outcome sets.
    """
    values = outcomes.scalars()
    if not values:
        raise GeometryException("empty outcome set has no extrema")
    return min(values), max(values)
