"""
Applying tests to processes and gathering the results.

A test is a process that may perform success actions.  It is run in lock-step with the process under test,
synchronising on every visible action, and the success probabilities of all ways of resolving the nondeterminism
make up the outcome set of the application.  Three ways of gathering results are provided:

``results_state``
    a state counts as successful as soon as a success action is enabled,
``results_action``
    success requires the success action to be performed,
``results_vector``
    action-based, one coordinate per success action, closed under convex combinations.
"""
import logging
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from pypcsp.distribution import Dist, StateId
from pypcsp.enums import Flavour, Kind, Order, TermClass
from pypcsp.geometry import (
    OutcomeSet,
    apply_success,
    compare,
    hull_reduce,
    minkowski_mix,
    raw,
    scalar_extrema,
    union,
    zero,
)
from pypcsp.plts import PLTS
from pypcsp.terms import OMEGA, Par, Term, classify, desugar, is_success, replace_success, tau, prefix
from pypcsp.utils import SortException

__author__ = "PyPCSP contributors"
__email__ = "pypcsp@example.org"

logger = logging.getLogger(__name__)


class ResultsGatherer:
    """
    Memoised results-gathering over one pLTS.  The memo tables are keyed by state and belong to this instance only.
    """

    def __init__(self, plts: PLTS, omega: Sequence[str] = (OMEGA,)) -> None:
        self.plts = plts
        self.omega = tuple(omega)
        self._state = {}
        self._action = {}
        self._vector = {}

    def _mix(self, dist: Dist, per_state) -> OutcomeSet:
        return minkowski_mix([(p, per_state(s)) for s, p in dist.items()])

    def state_based(self, state: StateId) -> OutcomeSet:
        if state not in self._state:
            moves = self.plts.step(state)
            if self.plts.has_success(state):
                result = raw([(1,)])
            elif moves:
                result = union([self.results_state(target) for _, target in moves])
            else:
                result = raw([(0,)])
            self._state[state] = result
        return self._state[state]

    def results_state(self, dist: Dist) -> OutcomeSet:
        return self._mix(dist, self.state_based)

    def action_based(self, state: StateId) -> OutcomeSet:
        if state not in self._action:
            moves = self.plts.step(state)
            if not moves:
                result = raw([(0,)])
            else:
                parts = [self.results_action(target) for label, target in moves if not is_success(label)]
                if any(is_success(label) for label, _ in moves):
                    parts.append(raw([(1,)]))
                result = union(parts)
            self._action[state] = result
        return self._action[state]

    def results_action(self, dist: Dist) -> OutcomeSet:
        return self._mix(dist, self.action_based)

    def vector_based(self, state: StateId) -> OutcomeSet:
        if state not in self._vector:
            moves = self.plts.step(state)
            if not moves:
                result = hull_reduce([zero(self.omega)], self.omega)
            else:
                points = []
                for label, target in moves:
                    points.extend(apply_success(label, self.results_vector(target)))
                result = hull_reduce(points, self.omega)
            self._vector[state] = result
        return self._vector[state]

    def results_vector(self, dist: Dist) -> OutcomeSet:
        return self._mix(dist, self.vector_based)

    def results(self, flavour: Flavour, dist: Dist) -> OutcomeSet:
        if flavour is Flavour.state:
            return self.results_state(dist)
        if flavour is Flavour.action:
            return self.results_action(dist)
        return self.results_vector(dist)


def results_state(plts: PLTS, dist: Dist) -> OutcomeSet:
    return ResultsGatherer(plts).results_state(dist)


def results_action(plts: PLTS, dist: Dist) -> OutcomeSet:
    return ResultsGatherer(plts).results_action(dist)


def results_vector(plts: PLTS, dist: Dist, omega: Sequence[str] = (OMEGA,)) -> OutcomeSet:
    return ResultsGatherer(plts, omega).results_vector(dist)


class TestApplication:
    """
    A test run against a process: the composition ``T |[Act]| P`` with its pLTS and initial distribution.
    """

    def __init__(self, test: Term, process: Term, composed: Term, plts: PLTS, initial: Dist, omega: Tuple[str, ...]):
        self.test = test
        self.process = process
        self.composed = composed
        self.plts = plts
        self.initial = initial
        self.omega = omega
        self.gatherer = ResultsGatherer(plts, omega)

    def outcomes(self, flavour: Flavour = Flavour.vector) -> OutcomeSet:
        if flavour is not Flavour.vector and len(self.omega) != 1:
            raise SortException("{} results need a test with a single success action".format(flavour.value))
        return self.gatherer.results(flavour, self.initial)

    def results_state(self) -> OutcomeSet:
        return self.outcomes(Flavour.state)

    def results_action(self) -> OutcomeSet:
        return self.outcomes(Flavour.action)

    def results_vector(self) -> OutcomeSet:
        return self.outcomes(Flavour.vector)

    def __repr__(self) -> str:
        return "TestApplication({})".format(self.composed)


def apply_test(test: Term, process: Term, omega: Optional[Sequence[str]] = None) -> TestApplication:
    """
    Composes ``test`` and ``process`` in parallel, synchronising on every visible action either of them uses.

    :param omega:
        The ordered success alphabet of the test.  Defaults to the success actions occurring in ``test``, and to the
        single action ``omega`` when there are none.
    :raises SortException:
        When the process performs success actions or the test mixes scalar and vector success actions.
    """
    test, process = desugar(test), desugar(process)
    if classify(process).term_class is not TermClass.process:
        raise SortException("the process under test must not perform success actions")
    classification = classify(test)
    if omega is None:
        omega = classification.omega or (OMEGA,)
    omega = tuple(omega)
    missing = set(classification.omega) - set(omega)
    if missing:
        raise SortException("success actions {} missing from {}".format(sorted(missing), omega))

    composed = Par(test.actions() | process.actions(), test, process)
    plts = PLTS()
    initial = plts.add(composed)
    logger.debug("applied test with %d success actions, %d states", len(omega), len(plts))
    return TestApplication(test, process, composed, plts, initial, omega)


def state_to_action_test(test: Term) -> Term:
    """
    Rewrites every ``omega.Q`` into ``tau.omega``.  The action-based results of the original test coincide with the
    state-based results of the rewritten one, against every process.
    """
    return replace_success(test, lambda label, body: tau(prefix(label)))


def order_for(kind: Kind) -> Order:
    return Order.hoare if kind is Kind.may else Order.smyth


def test_order(kind: Kind, flavour: Flavour, test: Term, left: Term, right: Term) -> bool:
    """
    Compares the outcome sets of one test applied to ``left`` and to ``right``: the Hoare order for may testing,
    the Smyth order for must testing.
    """
    left_outcomes = apply_test(test, left).outcomes(flavour)
    right_outcomes = apply_test(test, right).outcomes(flavour)
    return compare(order_for(kind), left_outcomes, right_outcomes)


def success_extrema(test: Term, process: Term, flavour: Flavour = Flavour.state) -> Tuple[Fraction, Fraction]:
    return scalar_extrema(apply_test(test, process).outcomes(flavour))


def battery_order(
    kind: Kind, flavour: Flavour, tests: Iterable[Term], left: Term, right: Term
) -> Optional[Term]:
    """
    Runs a finite battery of tests.

    :return: the first test that distinguishes ``left`` from ``right``, or None when every test agrees.
    """
    for test in tests:
        if not test_order(kind, flavour, test, left, right):
            logger.debug("test %s distinguishes the processes", test)
            return test
    return None


def outcome_report(application: TestApplication, flavours: Iterable[Flavour]) -> Dict[str, Dict]:
    report = {}
    for flavour in flavours:
        outcomes = application.outcomes(flavour)
        entry = {"outcomes": outcomes.to_json()}
        if outcomes.dimension == 1:
            low, high = scalar_extrema(outcomes)
            entry["min"], entry["max"] = str(low), str(high)
        report[flavour.value] = entry
    return report


def flavours_for(application: TestApplication) -> List[Flavour]:
    if len(application.omega) == 1:
        return [Flavour.state, Flavour.action, Flavour.vector]
    return [Flavour.vector]


__all__ = [
    "ResultsGatherer",
    "TestApplication",
    "apply_test",
    "results_state",
    "results_action",
    "results_vector",
    "state_to_action_test",
    "test_order",
    "success_extrema",
    "battery_order",
]
