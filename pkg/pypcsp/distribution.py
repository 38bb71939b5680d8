import json
import logging
from collections import defaultdict
from fractions import Fraction
from typing import Any, Callable, Dict, Iterable, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

from pypcsp.geometry import LinearProgram
from pypcsp.terms import ProbChoice, Term
from pypcsp.utils import DistributionException, Rational, format_fraction, fraction_sum, to_fraction

__author__ = "PyPCSP contributors"
__email__ = "pypcsp@example.org"

logger = logging.getLogger(__name__)

StateId = int
Vector = Tuple[Fraction, ...]


class Dist(Mapping):
    """
    A finite-support probability distribution over interned states.  Weights are exact, strictly positive and sum to
    one; states of weight zero are never stored, so two distributions are equal exactly when they assign the same
    weights.
    """

    __slots__ = ("_weights", "_hash")

    def __init__(self, weights: Mapping[StateId, Rational]) -> None:
        cleaned = {}
        for state, weight in weights.items():
            weight = to_fraction(weight)
            if weight < 0:
                raise DistributionException("negative weight {} for state {}".format(weight, state))
            if weight:
                cleaned[state] = cleaned.get(state, Fraction(0)) + weight
        total = fraction_sum(cleaned.values())
        if total != 1:
            raise DistributionException("weights sum to {}, not 1".format(format_fraction(total)))
        self._weights = dict(sorted(cleaned.items()))
        self._hash = None

    def __getitem__(self, state: StateId) -> Fraction:
        return self._weights[state]

    def __iter__(self) -> Iterator[StateId]:
        return iter(self._weights)

    def __len__(self) -> int:
        return len(self._weights)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dist):
            return NotImplemented
        return self._weights == other._weights

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(self._weights.items()))
        return self._hash

    def __lt__(self, other: "Dist") -> bool:
        return tuple(self._weights.items()) < tuple(other._weights.items())

    def weight(self, state: StateId) -> Fraction:
        return self._weights.get(state, Fraction(0))

    def support(self) -> Tuple[StateId, ...]:
        return tuple(self._weights)

    @property
    def is_point(self) -> bool:
        return len(self._weights) == 1

    def map_states(self, mapping: Union[Mapping[StateId, Any], Callable[[StateId], Any]]) -> "Dist":
        """
        The image of the distribution under a state map, ``f(D)(t) = sum of D(s) over f(s) = t``.
        """
        apply = mapping if callable(mapping) else mapping.__getitem__
        image = defaultdict(Fraction)
        for state, weight in self._weights.items():
            image[apply(state)] += weight
        return Dist(image)

    def product(self, other: "Dist", combine: Callable[[StateId, StateId], StateId]) -> "Dist":
        image = defaultdict(Fraction)
        for left, p in self._weights.items():
            for right, q in other._weights.items():
                image[combine(left, right)] += p * q
        return Dist(image)

    def to_json(self) -> Dict[str, Any]:
        return {"dist": [{"state": state, "p": format_fraction(p)} for state, p in self._weights.items()]}

    @classmethod
    def from_json(cls, data: Union[str, Dict[str, Any]]) -> "Dist":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            return cls({int(item["state"]): Fraction(item["p"]) for item in data["dist"]})
        except (KeyError, TypeError, ValueError) as e:
            raise DistributionException("malformed distribution {!r}".format(data)) from e

    def __repr__(self) -> str:
        return "{" + ", ".join("{}: {}".format(s, format_fraction(p)) for s, p in self._weights.items()) + "}"


def point(state: StateId) -> Dist:
    return Dist({state: 1})


def mix(parts: Iterable[Tuple[Rational, Dist]]) -> Dist:
    """
    :param parts:
        Pairs ``(p_i, D_i)`` with non-negative weights summing to one.
    :return:
        The pointwise weighted sum; mass on repeated states is merged.
    """
    combined = defaultdict(Fraction)
    total = Fraction(0)
    for p, dist in parts:
        p = to_fraction(p)
        if p < 0:
            raise DistributionException("negative mixing weight {}".format(p))
        total += p
        for state, weight in dist.items():
            combined[state] += p * weight
    if total != 1:
        raise DistributionException("mixing weights sum to {}, not 1".format(format_fraction(total)))
    return Dist(combined)


def expected(dist: Dist, values: Mapping[StateId, Union[Rational, Sequence[Rational]]]) -> Union[Fraction, Vector]:
    """
    The expected value of a (vector valued) function over ``dist``.

    :raises DistributionException: when ``values`` has no entry for some state in the support.
    """
    missing = [state for state in dist if state not in values]
    if missing:
        raise DistributionException("no value for states {}".format(missing))

    first = values[dist.support()[0]]
    if isinstance(first, (tuple, list)):
        width = len(first)
        return tuple(
            fraction_sum(p * to_fraction(values[state][i]) for state, p in dist.items()) for i in range(width)
        )
    return fraction_sum(p * to_fraction(values[state]) for state, p in dist.items())


class LiftStep(NamedTuple):
    state: StateId
    p: Fraction
    target: Dist


class LiftWitness:
    """
    A decomposition ``D = sum p_i * s_i`` and ``E = sum p_i * F_i`` with every ``(s_i, F_i)`` in the lifted relation.
    """

    def __init__(self, steps: Sequence[LiftStep]) -> None:
        self.steps = tuple(steps)

    def __iter__(self) -> Iterator[LiftStep]:
        return iter(self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    def validate(
        self,
        source: Dist,
        target: Dist,
        pairs: Optional[Iterable[Tuple[StateId, Dist]]] = None,
    ) -> bool:
        if fraction_sum(step.p for step in self.steps) != 1 or any(step.p <= 0 for step in self.steps):
            return False

        if pairs is not None:
            allowed = set(pairs)
            if any((step.state, step.target) not in allowed for step in self.steps):
                return False

        left = defaultdict(Fraction)
        right = defaultdict(Fraction)
        for step in self.steps:
            left[step.state] += step.p
            for state, weight in step.target.items():
                right[state] += step.p * weight
        return dict(left) == dict(source.items()) and dict(right) == dict(target.items())

    def to_json(self) -> List[Dict[str, Any]]:
        return [{"state": s, "p": format_fraction(p), "target": t.to_json()} for s, p, t in self.steps]


def lift_check(pairs: Iterable[Tuple[StateId, Dist]], source: Dist, target: Dist) -> Optional[LiftWitness]:
    """
    Decides whether ``source`` is related to ``target`` by the lifting of the relation ``pairs``.  The mass of one
    state may be split over several partners, so the question is posed as linear feasibility over one weight per
    usable pair.

    :return: a witness when the lifting holds, otherwise None.
    """
    candidates = sorted({(s, phi) for s, phi in pairs if s in source}, key=lambda pair: (pair[0], pair[1]))
    if any(not any(s == state for s, _ in candidates) for state in source):
        return None

    program = LinearProgram()
    weights = program.new_vars(len(candidates), prefix="w")

    by_state = defaultdict(dict)
    for w, (s, _) in zip(weights, candidates):
        by_state[s][w] = 1
    for state, p in source.items():
        program.add_eq(by_state[state], p)

    states = set(target) | {t for _, phi in candidates for t in phi}
    for t in sorted(states):
        program.add_eq({w: phi.weight(t) for w, (_, phi) in zip(weights, candidates) if t in phi}, target.weight(t))

    solution = program.solve()
    if solution is None:
        return None
    return LiftWitness([LiftStep(s, solution[w], phi) for w, (s, phi) in zip(weights, candidates) if solution[w]])


def interp(term: Term, intern: Callable[[Term], StateId]) -> Dist:
    """
    The interpretation of a desugared term as a distribution: a state-based term denotes its point distribution and
    ``P |+p| Q`` denotes ``p * [P] + (1-p) * [Q]``.

    :param intern:
        Maps a state-based term to its state identifier, typically ``PLTS.intern``.
    """
    weights = defaultdict(Fraction)
    stack = [(term, Fraction(1))]
    while stack:
        current, mass = stack.pop()
        if isinstance(current, ProbChoice):
            stack.append((current.right, mass * (1 - current.p)))
            stack.append((current.left, mass * current.p))
        else:
            weights[intern(current)] += mass
    return Dist(weights)
