import re
from fractions import Fraction
from typing import FrozenSet, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple, Type, TypeVar

from pypcsp.enums import TermClass
from pypcsp.utils import SortException, check_probability, format_fraction, fraction_sum, to_fraction, Rational

__author__ = "PyPCSP contributors"
__email__ = "pypcsp@example.org"


TAU = "tau"
OMEGA = "omega"

ACTION_PATTERN = re.compile(r"^[a-z][a-zA-Z0-9_]*$")
SUCCESS_PATTERN = re.compile(r"^omega([0-9]*)$")

NodeT = TypeVar("NodeT", bound="Node")


def is_success(label: str) -> bool:
    return SUCCESS_PATTERN.match(label) is not None


def is_visible(label: str) -> bool:
    return label != TAU and not is_success(label)


def success_sort_key(label: str) -> Tuple[int, int]:
    index = SUCCESS_PATTERN.match(label).group(1)
    return (0, 0) if not index else (1, int(index))


def sort_success(labels: Iterable[str]) -> Tuple[str, ...]:
    return tuple(sorted(set(labels), key=success_sort_key))


def omega_name(index: Optional[int] = None) -> str:
    return OMEGA if index is None else "{}{}".format(OMEGA, index)


class Node:
    def nodes_(self) -> Iterator[NodeT]:
        yield self

    def find_(self, type: Type[NodeT]) -> List[NodeT]:
        return [node for node in self.nodes_() if isinstance(node, type)]


class Term(Node):
    """
    Base class of the pCSP abstract syntax.  Terms are immutable and compare structurally, so they can be used directly
    as dictionary keys when states are interned.
    """

    __slots__ = ("_key", "_hash", "_text")

    is_binary = False
    operator = None

    def __init__(self) -> None:
        self._key = None
        self._hash = None
        self._text = None

    def children(self) -> Tuple["Term", ...]:
        return ()

    def nodes_(self) -> Iterator[NodeT]:
        yield self
        for child in self.children():
            yield from child.nodes_()

    def _make_key(self) -> tuple:
        raise NotImplementedError()

    def key(self) -> tuple:
        if self._key is None:
            self._key = self._make_key()
        return self._key

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Term):
            return NotImplemented
        return hash(self) == hash(other) and self.key() == other.key()

    def __ne__(self, other: object) -> bool:
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.key())
        return self._hash

    def __lt__(self, other: "Term") -> bool:
        return self.unparse() < other.unparse()

    @property
    def is_state_based(self) -> bool:
        return True

    def actions(self) -> FrozenSet[str]:
        """
        :return: The visible actions occurring as prefixes or synchronisation sets of the term.
        """
        found = set()
        for node in self.nodes_():
            if isinstance(node, Prefix) and is_visible(node.action):
                found.add(node.action)
            elif isinstance(node, Par):
                found.update(node.sync)
        return frozenset(found)

    def success_actions(self) -> FrozenSet[str]:
        return frozenset(node.action for node in self.find_(Prefix) if is_success(node.action))

    def size(self) -> int:
        return sum(1 for _ in self.nodes_())

    def unparse(self, **kwargs) -> str:
        if self._text is None:
            self._text = self._unparse()
        return self._text

    def _unparse(self) -> str:
        raise NotImplementedError()

    def _operand(self, child: "Term", right: bool) -> str:
        if not child.is_binary:
            return child.unparse()
        if right and self._continues_chain(child):
            return child.unparse()
        return "({})".format(child.unparse())

    def _continues_chain(self, child: "Term") -> bool:
        return type(child) is type(self)

    def __str__(self) -> str:
        return self.unparse()

    def __repr__(self) -> str:
        return "{}({!r})".format(type(self).__name__, self.unparse())


class Nil(Term):
    __slots__ = ()

    def _make_key(self) -> tuple:
        return ("0",)

    def _unparse(self) -> str:
        return "0"


class Prefix(Term):
    __slots__ = ("action", "body")

    def __init__(self, action: str, body: Optional[Term] = None) -> None:
        super().__init__()
        if action == TAU:
            raise SortException("tau is never written as a prefix, use P |~| P")
        if not ACTION_PATTERN.match(action):
            raise SortException("invalid action name {!r}".format(action))
        self.action = action
        self.body = NIL if body is None else body

    def children(self) -> Tuple[Term, ...]:
        return (self.body,)

    def _make_key(self) -> tuple:
        return ("pre", self.action, self.body.key())

    def _unparse(self) -> str:
        if isinstance(self.body, Nil):
            return self.action
        return "{}.{}".format(self.action, self._operand(self.body, right=False))


class BinaryTerm(Term):
    __slots__ = ("left", "right")

    is_binary = True

    def __init__(self, left: Term, right: Term) -> None:
        super().__init__()
        self.left = left
        self.right = right

    def children(self) -> Tuple[Term, ...]:
        return self.left, self.right

    def _make_key(self) -> tuple:
        return (self.operator, self.left.key(), self.right.key())

    def _unparse(self) -> str:
        return "{} {} {}".format(
            self._operand(self.left, right=False), self._symbol(), self._operand(self.right, right=True)
        )

    def _symbol(self) -> str:
        return self.operator


class IntChoice(BinaryTerm):
    __slots__ = ()
    operator = "|~|"


class ExtChoice(BinaryTerm):
    __slots__ = ()
    operator = "[]"

    @property
    def is_state_based(self) -> bool:
        return self.left.is_state_based and self.right.is_state_based


class Par(BinaryTerm):
    __slots__ = ("sync",)
    operator = "|[]|"

    def __init__(self, sync: Iterable[str], left: Term, right: Term) -> None:
        super().__init__(left, right)
        self.sync = frozenset(sync)
        for action in self.sync:
            if not ACTION_PATTERN.match(action) or not is_visible(action):
                raise SortException("synchronisation set may only hold visible actions, got {!r}".format(action))

    @property
    def is_state_based(self) -> bool:
        return self.left.is_state_based and self.right.is_state_based

    def _make_key(self) -> tuple:
        return (self.operator, tuple(sorted(self.sync)), self.left.key(), self.right.key())

    def _symbol(self) -> str:
        return "|[{}]|".format(",".join(sorted(self.sync)))

    def _continues_chain(self, child: Term) -> bool:
        return isinstance(child, Par) and child.sync == self.sync


class ProbChoice(BinaryTerm):
    __slots__ = ("p",)
    operator = "|+|"

    def __init__(self, p: Rational, left: Term, right: Term) -> None:
        super().__init__(left, right)
        self.p = check_probability(to_fraction(p), exc=SortException)

    @property
    def is_state_based(self) -> bool:
        return False

    def _make_key(self) -> tuple:
        return (self.operator, self.p, self.left.key(), self.right.key())

    def _symbol(self) -> str:
        return "|+{}|".format(format_fraction(self.p))


NIL = Nil()


class Classification(NamedTuple):
    term_class: TermClass
    omega: Tuple[str, ...]


def prefix(actions: str, body: Optional[Term] = None) -> Term:
    """
    Builds a chain of prefixes, ``prefix("a.b", P)`` is ``a.b.P``.
    """
    term = NIL if body is None else body
    for action in reversed(actions.split(".")):
        term = Prefix(action, term)
    return term


def tau(body: Term) -> Term:
    return IntChoice(body, body)


def ext_sum(parts: Sequence[Term]) -> Term:
    """
    The indexed external choice as right-nested binaries; the empty choice is ``0``.
    """
    if not parts:
        return NIL
    term = parts[-1]
    for part in reversed(parts[:-1]):
        term = ExtChoice(part, term)
    return term


def int_sum(parts: Sequence[Term]) -> Term:
    if not parts:
        raise SortException("internal choice over an empty index set")
    term = parts[-1]
    for part in reversed(parts[:-1]):
        term = IntChoice(part, term)
    return term


def prob_sum(parts: Sequence[Tuple[Rational, Term]]) -> Term:
    """
    The indexed probabilistic choice as right-nested binaries.

    :param parts:
        Pairs of weight and term.  Weights are positive and sum to one.
    :return:
        ``P1 |+p1| (P2 |+q2| ...)`` where each ``q_i`` is ``p_i`` rescaled by the mass left over by the earlier
        summands.
    """
    weighted = [(to_fraction(p), term) for p, term in parts]
    if not weighted:
        raise SortException("probabilistic choice over an empty index set")
    if any(p <= 0 for p, _ in weighted) or fraction_sum(p for p, _ in weighted) != 1:
        raise SortException("weights of a probabilistic choice must be positive and sum to 1")

    def nest(items: List[Tuple[Fraction, Term]], mass: Fraction) -> Term:
        p, term = items[0]
        if len(items) == 1:
            return term
        return ProbChoice(p / mass, term, nest(items[1:], mass - p))

    return nest(weighted, Fraction(1))


def is_sugar(term: Term) -> bool:
    """
    :return: True when some external choice or parallel composition has an operand that is not state-based.
    """
    return any(
        isinstance(node, (ExtChoice, Par)) and not (node.left.is_state_based and node.right.is_state_based)
        for node in term.nodes_()
    )


def is_ncsp(term: Term) -> bool:
    return not term.find_(Par)


def desugar(term: Term) -> Term:
    """
    Distributes external choice and parallel composition over probabilistic choice, so that afterwards every operand
    of ``[]`` and ``|[A]|`` is state-based.  The interpretation of the term is unchanged.
    """
    if isinstance(term, Nil):
        return term
    if isinstance(term, Prefix):
        body = desugar(term.body)
        return term if body is term.body else Prefix(term.action, body)
    if isinstance(term, IntChoice):
        return IntChoice(desugar(term.left), desugar(term.right))
    if isinstance(term, ProbChoice):
        return ProbChoice(term.p, desugar(term.left), desugar(term.right))
    if isinstance(term, ExtChoice):
        return _distribute(desugar(term.left), desugar(term.right), ExtChoice)
    if isinstance(term, Par):
        return _distribute(desugar(term.left), desugar(term.right), lambda l, r: Par(term.sync, l, r))
    raise SortException("unknown term {!r}".format(term))


def _distribute(left: Term, right: Term, combine) -> Term:
    if isinstance(left, ProbChoice):
        return ProbChoice(left.p, _distribute(left.left, right, combine), _distribute(left.right, right, combine))
    if isinstance(right, ProbChoice):
        return ProbChoice(right.p, _distribute(left, right.left, combine), _distribute(left, right.right, combine))
    return combine(left, right)


def classify(term: Term) -> Classification:
    """
    Decides whether a term is a process, a scalar test (success action ``omega``) or a vector test over
    ``omega1, omega2, ...``.

    :raises SortException: when the scalar and vector success actions are mixed.
    """
    successes = term.success_actions()
    if not successes:
        return Classification(TermClass.process, ())
    if successes == {OMEGA}:
        return Classification(TermClass.scalar_test, (OMEGA,))
    if OMEGA in successes:
        raise SortException("scalar success action omega mixed with vector success actions")
    return Classification(TermClass.vector_test, sort_success(successes))


def check_sorts(term: Term) -> None:
    """
    :raises SortException: when a desugared term still places a probabilistic choice under ``[]`` or ``|[A]|``.
    """
    if is_sugar(term):
        raise SortException("operands of [] and |[A]| must be state-based, desugar {} first".format(term))


def replace_success(term: Term, replacement) -> Term:
    """
    Rebuilds ``term`` with every subterm ``w.Q`` (``w`` a success action) replaced by ``replacement(w, Q')``.
    """
    if isinstance(term, Nil):
        return term
    if isinstance(term, Prefix):
        body = replace_success(term.body, replacement)
        if is_success(term.action):
            return replacement(term.action, body)
        return Prefix(term.action, body)
    if isinstance(term, ProbChoice):
        return ProbChoice(term.p, replace_success(term.left, replacement), replace_success(term.right, replacement))
    if isinstance(term, Par):
        return Par(term.sync, replace_success(term.left, replacement), replace_success(term.right, replacement))
    return type(term)(replace_success(term.left, replacement), replace_success(term.right, replacement))
