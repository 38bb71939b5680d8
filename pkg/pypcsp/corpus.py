"""
Seeded generators of terms, tests and formulas.

Everything drawn from a ``TermGenerator`` is a function of its seed, so corpora used by the property suites and by the
``corpus`` command are reproducible.
"""
import itertools
import logging
import random
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from pypcsp.enums import AxiomId, Logic
from pypcsp.logic import Conj, Diamond, Formula, ProbSum, Ref, Top
from pypcsp.terms import (
    NIL,
    ExtChoice,
    IntChoice,
    Par,
    Prefix,
    ProbChoice,
    Term,
    ext_sum,
    int_sum,
    omega_name,
)

__author__ = "PyPCSP contributors"
__email__ = "pypcsp@example.org"

logger = logging.getLogger(__name__)

DEFAULT_ALPHABET = ("a", "b")
DEFAULT_WEIGHTS = (Fraction(1, 2), Fraction(1, 3), Fraction(2, 3))


class TermGenerator:
    """
    Draws random terms of bounded depth.

    :param seed: seed of the underlying ``random.Random``.
    :param alphabet: the visible actions used by prefixes.
    :param max_depth: bound on the nesting depth of operators.
    :param weights: the probabilities ``|+p|`` may carry.
    :param parallel: whether parallel composition is drawn at all.
    """

    def __init__(
        self,
        seed: int = 0,
        alphabet: Sequence[str] = DEFAULT_ALPHABET,
        max_depth: int = 3,
        weights: Sequence[Fraction] = DEFAULT_WEIGHTS,
        parallel: bool = False,
    ) -> None:
        self.seed = seed
        self.random = random.Random(seed)
        self.alphabet = tuple(alphabet)
        self.max_depth = max_depth
        self.weights = tuple(Fraction(w) for w in weights)
        self.parallel = parallel

    def _depth(self, depth: Optional[int]) -> int:
        return self.max_depth if depth is None else depth

    def action(self) -> str:
        return self.random.choice(self.alphabet)

    def weight(self) -> Fraction:
        return self.random.choice(self.weights)

    def term(self, depth: Optional[int] = None, leaves: Sequence[Term] = (NIL,)) -> Term:
        """
        A term built from every operator, possibly with external choices over probabilistic operands.
        """
        depth = self._depth(depth)
        if depth <= 0:
            return self.random.choice(leaves)

        operators = ["nil", "prefix", "prefix", "int", "ext", "prob"]
        if self.parallel:
            operators.append("par")
        operator = self.random.choice(operators)
        if operator == "nil":
            return self.random.choice(leaves)
        if operator == "prefix":
            return Prefix(self.action(), self.term(depth - 1, leaves))

        left, right = self.term(depth - 1, leaves), self.term(depth - 1, leaves)
        if operator == "int":
            return IntChoice(left, right)
        if operator == "ext":
            return ExtChoice(left, right)
        if operator == "prob":
            return ProbChoice(self.weight(), left, right)
        sync = [a for a in self.alphabet if self.random.random() < 0.5]
        return Par(sync, left, right)

    def ncsp(self, depth: Optional[int] = None) -> Term:
        """
        A term without parallel composition.
        """
        parallel, self.parallel = self.parallel, False
        try:
            return self.term(depth)
        finally:
            self.parallel = parallel

    def state(self, depth: Optional[int] = None) -> Term:
        """
        A term denoting a single state: probabilistic choices only occur below prefixes.
        """
        depth = self._depth(depth)
        if depth <= 0:
            return NIL
        operator = self.random.choice(["nil", "prefix", "prefix", "int", "ext"])
        if operator == "nil":
            return NIL
        if operator == "prefix":
            return Prefix(self.action(), self.ncsp(depth - 1))
        left, right = self.state(depth - 1), self.state(depth - 1)
        return IntChoice(left, right) if operator == "int" else ExtChoice(left, right)

    def test(self, depth: Optional[int] = None, omega: Sequence[str] = (omega_name(),)) -> Term:
        """
        A test: a term whose leaves are ``0`` or a success action of ``omega``.
        """
        leaves = [NIL] + [Prefix(success) for success in omega]
        parallel, self.parallel = self.parallel, False
        try:
            return self.term(depth, leaves)
        finally:
            self.parallel = parallel

    def vector_test(self, size: int = 2, depth: Optional[int] = None) -> Term:
        return self.test(depth, [omega_name(i) for i in range(1, size + 1)])

    def formula(self, depth: Optional[int] = None, logic: Logic = Logic.F) -> Formula:
        depth = self._depth(depth)
        if depth <= 0:
            if logic is Logic.F and self.random.random() < 0.5:
                return Ref(a for a in self.alphabet if self.random.random() < 0.5)
            return Top()
        choices = ["top", "diamond", "diamond", "conj", "sum"]
        if logic is Logic.F:
            choices.append("ref")
        choice = self.random.choice(choices)
        if choice == "top":
            return Top()
        if choice == "ref":
            return Ref(a for a in self.alphabet if self.random.random() < 0.5)
        if choice == "diamond":
            return Diamond(self.action(), self.formula(depth - 1, logic))
        if choice == "conj":
            return Conj([self.formula(depth - 1, logic), self.formula(depth - 1, logic)])
        p = self.weight()
        return ProbSum([(p, self.formula(depth - 1, logic)), (1 - p, self.formula(depth - 1, logic))])

    def terms(self, count: int, depth: Optional[int] = None) -> List[Term]:
        return [self.term(depth) for _ in range(count)]

    def pairs(self, count: int, depth: Optional[int] = None) -> List[Tuple[Term, Term]]:
        return [(self.ncsp(depth), self.ncsp(depth)) for _ in range(count)]


def exhaustive_ncsp(
    alphabet: Sequence[str] = DEFAULT_ALPHABET,
    max_prefixes: int = 2,
    weights: Sequence[Fraction] = (Fraction(1, 2),),
    max_size: int = 4,
) -> List[Term]:
    """
    Every parallel-free term with at most ``max_size`` operators and ``max_prefixes`` prefixes, ordered by size and
    then by syntax.
    """
    by_size: Dict[Tuple[int, int], List[Term]] = {(1, 0): [NIL]}

    def terms(size: int, prefixes: int) -> List[Term]:
        return by_size.get((size, prefixes), [])

    for size in range(2, max_size + 1):
        for prefixes in range(max_prefixes + 1):
            found = []
            if prefixes:
                for body in terms(size - 1, prefixes - 1):
                    found.extend(Prefix(a, body) for a in alphabet)
            for left_size in range(1, size - 1):
                right_size = size - 1 - left_size
                for left_prefixes in range(prefixes + 1):
                    for left, right in itertools.product(
                        terms(left_size, left_prefixes), terms(right_size, prefixes - left_prefixes)
                    ):
                        found.append(IntChoice(left, right))
                        found.append(ExtChoice(left, right))
                        found.extend(ProbChoice(p, left, right) for p in weights)
            if found:
                by_size[(size, prefixes)] = sorted(set(found))

    result = [term for key in sorted(by_size) for term in by_size[key]]
    logger.debug("exhaustive corpus of %d terms", len(result))
    return result


def axiom_instance(axiom: AxiomId, generator: TermGenerator, depth: int = 2) -> Tuple[Term, Term]:
    """
    A random instance ``(lhs, rhs)`` of an axiom schema, side conditions included.
    """
    draw = generator.ncsp
    p, q = generator.weight(), generator.weight()
    a, b = generator.action(), generator.action()
    P, Q, R = draw(depth), draw(depth), draw(depth)

    if axiom is AxiomId.P1:
        return ProbChoice(p, P, P), P
    if axiom is AxiomId.P2:
        return ProbChoice(p, P, Q), ProbChoice(1 - p, Q, P)
    if axiom is AxiomId.P3:
        return (
            ProbChoice(q, ProbChoice(p, P, Q), R),
            ProbChoice(p * q, P, ProbChoice((1 - p) * q / (1 - p * q), Q, R)),
        )
    if axiom is AxiomId.I1:
        return IntChoice(P, P), P
    if axiom is AxiomId.I2:
        return IntChoice(P, Q), IntChoice(Q, P)
    if axiom is AxiomId.I3:
        return IntChoice(IntChoice(P, Q), R), IntChoice(P, IntChoice(Q, R))
    if axiom is AxiomId.E1:
        return ExtChoice(P, NIL), P
    if axiom is AxiomId.E2:
        return ExtChoice(P, Q), ExtChoice(Q, P)
    if axiom is AxiomId.E3:
        return ExtChoice(ExtChoice(P, Q), R), ExtChoice(P, ExtChoice(Q, R))
    if axiom is AxiomId.EI:
        return ExtChoice(Prefix(a, P), Prefix(a, Q)), IntChoice(Prefix(a, P), Prefix(a, Q))
    if axiom is AxiomId.D1:
        return ExtChoice(P, ProbChoice(p, Q, R)), ProbChoice(p, ExtChoice(P, Q), ExtChoice(P, R))
    if axiom is AxiomId.D2:
        head = Prefix(a, P)
        return ExtChoice(head, IntChoice(Q, R)), IntChoice(ExtChoice(head, Q), ExtChoice(head, R))
    if axiom is AxiomId.D3:
        S = draw(depth)
        left, right = IntChoice(P, Q), IntChoice(R, S)
        rhs = int_sum([ExtChoice(P, right), ExtChoice(Q, right), ExtChoice(left, R), ExtChoice(left, S)])
        return ExtChoice(left, right), rhs
    if axiom is AxiomId.May0:
        return ExtChoice(Prefix(a, P), Prefix(b, Q)), IntChoice(Prefix(a, P), Prefix(b, Q))
    if axiom is AxiomId.May1:
        return P, IntChoice(P, Q)
    if axiom is AxiomId.May2:
        return NIL, P
    if axiom is AxiomId.May3:
        return Prefix(a, ProbChoice(p, P, Q)), ProbChoice(p, Prefix(a, P), Prefix(a, Q))
    if axiom is AxiomId.May4:
        return ProbChoice(p, P, Q), IntChoice(P, Q)
    if axiom is AxiomId.Must1:
        return IntChoice(P, Q), Q
    if axiom is AxiomId.MustDual:
        return IntChoice(P, Q), ProbChoice(p, P, Q)
    if axiom is AxiomId.Must2:
        return _must2_instance(generator, depth)
    if axiom is AxiomId.Must2p:
        return _must2_prime_instance(generator, depth)
    raise ValueError("no instances for {}".format(axiom))


def _distinct_actions(generator: TermGenerator) -> List[str]:
    count = generator.random.randint(1, len(generator.alphabet))
    return sorted(generator.random.sample(generator.alphabet, count))


def _restricted(generator: TermGenerator, actions: Sequence[str], depth: int) -> Term:
    """
    An external choice of prefixes drawn from ``actions``, so that its initial actions lie among them.
    """
    count = generator.random.randint(0, len(actions))
    return ext_sum([Prefix(a, generator.ncsp(depth - 1)) for a in generator.random.sample(list(actions), count)])


def _must2_instance(generator: TermGenerator, depth: int) -> Tuple[Term, Term]:
    actions = _distinct_actions(generator)
    rest = _restricted(generator, actions, depth)
    if generator.random.random() < 0.5:
        rest = ProbChoice(generator.weight(), rest, _restricted(generator, actions, depth))
    weights = generator.random.choice([[Fraction(1)], [Fraction(1, 2), Fraction(1, 2)]])

    components, prefixes = [], []
    for a in actions:
        bodies = [generator.ncsp(depth - 1) for _ in weights]
        leaves = []
        for body in bodies:
            leaf = Prefix(a, body)
            if generator.random.random() < 0.5:
                leaf = ExtChoice(leaf, generator.state(depth - 1))
            leaves.append(leaf)
        if len(weights) == 1:
            components.append(leaves[0])
            prefixes.append(Prefix(a, bodies[0]))
        else:
            components.append(ProbChoice(weights[0], leaves[0], leaves[1]))
            prefixes.append(Prefix(a, ProbChoice(weights[0], bodies[0], bodies[1])))
    return IntChoice(rest, int_sum(components)), ext_sum(prefixes)


def _must2_prime_instance(generator: TermGenerator, depth: int) -> Tuple[Term, Term]:
    actions = _distinct_actions(generator)
    rest = _restricted(generator, actions, depth)
    components, prefixes = [], []
    for a in actions:
        body = generator.ncsp(depth - 1)
        component = Prefix(a, body)
        if generator.random.random() < 0.5:
            component = ExtChoice(component, component)
        components.append(component)
        prefixes.append(Prefix(a, body))
    return IntChoice(rest, int_sum(components)), ext_sum(prefixes)


def axiom_instances(axiom: AxiomId, count: int, seed: int = 0, **kwargs) -> Iterator[Tuple[Term, Term]]:
    generator = TermGenerator(seed, **kwargs)
    for _ in range(count):
        yield axiom_instance(axiom, generator)


def sample(kind: str, count: int, seed: int = 0, **kwargs) -> List[object]:
    """
    ``count`` items of one kind: ``term``, ``ncsp``, ``state``, ``test``, ``vector_test`` or ``formula``.
    """
    generator = TermGenerator(seed, **kwargs)
    draw = {
        "term": generator.term,
        "ncsp": generator.ncsp,
        "state": generator.state,
        "test": generator.test,
        "vector_test": generator.vector_test,
        "formula": generator.formula,
    }.get(kind)
    if draw is None:
        raise ValueError("unknown corpus kind {!r}".format(kind))
    return [draw() for _ in range(count)]


__all__ = [
    "TermGenerator",
    "exhaustive_ncsp",
    "axiom_instance",
    "axiom_instances",
    "sample",
]
