"""
Probabilistic labelled transition systems generated from pCSP terms.

States are state-based terms interned to integers in the order they are discovered.  The transitions of a state are
derived syntactically (action, internal and external choice, parallel composition with synchronisation) and every
target is a distribution over further states.  Since terms have no recursion the graph is acyclic and every state
has a finite depth.
"""
import itertools
import logging
from collections import defaultdict
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

from pypcsp.distribution import Dist, StateId, interp, point
from pypcsp.geometry import convex_weights
from pypcsp.terms import (
    ExtChoice,
    IntChoice,
    Nil,
    Par,
    Prefix,
    ProbChoice,
    Term,
    TAU,
    check_sorts,
    desugar,
    is_success,
    is_visible,
)
from pypcsp.utils import PLTSException, format_fraction

__author__ = "PyPCSP contributors"
__email__ = "pypcsp@example.org"

logger = logging.getLogger(__name__)

Label = str
Transition = Tuple[Label, Dist]
TermDist = Tuple[Tuple[Term, Fraction], ...]


def _reduce_vectors(vectors: Iterable[Dict[StateId, Fraction]]) -> List[Dict[StateId, Fraction]]:
    unique = []
    seen = set()
    for vector in vectors:
        key = tuple(sorted((s, p) for s, p in vector.items() if p))
        if key not in seen:
            seen.add(key)
            unique.append(dict(key))
    if len(unique) <= 2:
        return unique

    coordinates = sorted({s for vector in unique for s in vector})
    points = [[vector.get(s, Fraction(0)) for s in coordinates] for vector in unique]
    kept = list(range(len(points)))
    for index in range(len(points)):
        others = [points[k] for k in kept if k != index]
        if convex_weights(others, points[index]) is not None:
            kept.remove(index)
    return [unique[k] for k in kept]


class DistPolytope:
    """
    A convex set of distributions given by its vertices.  An empty polytope stands for "no derivative exists".
    """

    def __init__(self, vertices: Iterable[Dist] = (), reduce: bool = True) -> None:
        vertices = list(vertices)
        if reduce:
            vertices = [Dist(vector) for vector in _reduce_vectors(dict(v.items()) for v in vertices)]
        self.vertices = tuple(sorted(set(vertices)))

    def __iter__(self) -> Iterator[Dist]:
        return iter(self.vertices)

    def __len__(self) -> int:
        return len(self.vertices)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DistPolytope):
            return NotImplemented
        return self.vertices == other.vertices

    def __hash__(self) -> int:
        return hash(self.vertices)

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    def states(self) -> Tuple[StateId, ...]:
        return tuple(sorted({s for vertex in self.vertices for s in vertex}))

    def weights_for(self, dist: Dist) -> Optional[List[Fraction]]:
        coordinates = sorted(set(self.states()) | set(dist))
        points = [[v.weight(s) for s in coordinates] for v in self.vertices]
        return convex_weights(points, [dist.weight(s) for s in coordinates])

    def __contains__(self, dist: Dist) -> bool:
        return self.weights_for(dist) is not None

    def __repr__(self) -> str:
        return "DistPolytope({})".format(list(self.vertices))


EMPTY = DistPolytope()


def mix_polytopes(parts: Sequence[Tuple[Fraction, DistPolytope]]) -> DistPolytope:
    """
    The Minkowski mix ``sum p_i * X_i``; empty as soon as one ``X_i`` is empty.
    """
    if any(polytope.is_empty for _, polytope in parts):
        return EMPTY
    partial = [{}]
    for p, polytope in parts:
        sums = []
        for vector in partial:
            for vertex in polytope:
                combined = dict(vector)
                for state, weight in vertex.items():
                    combined[state] = combined.get(state, Fraction(0)) + p * weight
                sums.append(combined)
        partial = _reduce_vectors(sums) if len(polytope) > 1 else sums
    return DistPolytope((Dist(vector) for vector in partial), reduce=False)


class PLTS:
    """
    An interned state space shared by every term added to it.

    .. code-block:: python

        plts = PLTS()
        initial = plts.add(parse("a |+1/2| b"))
    """

    def __init__(self) -> None:
        self.states = []
        self.index = {}
        self.transitions = []
        self.depths = []
        self._term_moves = {}
        self._tau_cache = {}
        self._a_cache = {}
        self._refusal_cache = {}

    def __len__(self) -> int:
        return len(self.states)

    def term(self, state: StateId) -> Term:
        return self.states[state]

    def add(self, term: Term) -> Dist:
        """
        Interns every state reachable from ``term`` and returns its interpretation.  Sugar is removed first.
        """
        term = desugar(term)
        check_sorts(term)
        before = len(self.states)
        dist = interp(term, self.intern)
        logger.debug("interned %d new states, %d in total", len(self.states) - before, len(self.states))
        return dist

    def intern(self, term: Term) -> StateId:
        if term in self.index:
            return self.index[term]
        if not term.is_state_based:
            raise PLTSException("cannot intern {} as a state".format(term))

        state = len(self.states)
        self.index[term] = state
        self.states.append(term)
        self.transitions.append(())
        self.depths.append(0)

        moves = set()
        for label, targets in self._moves(term):
            moves.add((label, Dist({self.intern(t): p for t, p in targets})))
        transitions = tuple(sorted(moves, key=lambda move: (move[0], move[1])))
        self.transitions[state] = transitions
        self.depths[state] = 1 + max((self.depth(dist) for _, dist in transitions), default=-1)
        return state

    def _interp_terms(self, term: Term) -> TermDist:
        weights = defaultdict(Fraction)

        def walk(t: Term, mass: Fraction) -> None:
            if isinstance(t, ProbChoice):
                walk(t.left, mass * t.p)
                walk(t.right, mass * (1 - t.p))
            else:
                weights[t] += mass

        walk(term, Fraction(1))
        return tuple(weights.items())

    def _moves(self, term: Term) -> List[Tuple[Label, TermDist]]:
        if term in self._term_moves:
            return self._term_moves[term]

        if isinstance(term, Nil):
            moves = []
        elif isinstance(term, Prefix):
            moves = [(term.action, self._interp_terms(term.body))]
        elif isinstance(term, IntChoice):
            moves = [(TAU, self._interp_terms(term.left)), (TAU, self._interp_terms(term.right))]
        elif isinstance(term, ExtChoice):
            moves = []
            for label, targets in self._moves(term.left):
                if label == TAU:
                    targets = tuple((ExtChoice(t, term.right), p) for t, p in targets)
                moves.append((label, targets))
            for label, targets in self._moves(term.right):
                if label == TAU:
                    targets = tuple((ExtChoice(term.left, t), p) for t, p in targets)
                moves.append((label, targets))
        elif isinstance(term, Par):
            moves = self._par_moves(term)
        else:
            raise PLTSException("{} is not state-based".format(term))

        self._term_moves[term] = moves
        return moves

    def _par_moves(self, term: Par) -> List[Tuple[Label, TermDist]]:
        left_moves, right_moves = self._moves(term.left), self._moves(term.right)
        moves = []
        for label, targets in left_moves:
            if label not in term.sync:
                moves.append((label, tuple((Par(term.sync, t, term.right), p) for t, p in targets)))
        for label, targets in right_moves:
            if label not in term.sync:
                moves.append((label, tuple((Par(term.sync, term.left, t), p) for t, p in targets)))
        for label, left_targets in left_moves:
            if label not in term.sync:
                continue
            for other, right_targets in right_moves:
                if other == label:
                    moves.append(
                        (
                            TAU,
                            tuple(
                                (Par(term.sync, l, r), p * q) for l, p in left_targets for r, q in right_targets
                            ),
                        )
                    )
        return moves

    def step(self, state: StateId) -> Tuple[Transition, ...]:
        return self.transitions[state]

    def labels(self, state: StateId) -> FrozenSet[Label]:
        return frozenset(label for label, _ in self.transitions[state])

    def refuses(self, state: StateId, actions: Iterable[Label]) -> bool:
        blocked = set(actions) | {TAU}
        return not any(label in blocked for label, _ in self.transitions[state])

    def is_stable(self, state: StateId) -> bool:
        return TAU not in self.labels(state)

    def has_success(self, state: StateId) -> bool:
        return any(is_success(label) for label, _ in self.transitions[state])

    def depth(self, target) -> int:
        if isinstance(target, Dist):
            return max(self.depths[s] for s in target)
        return self.depths[target]

    def alphabet(self) -> FrozenSet[Label]:
        return frozenset(label for moves in self.transitions for label, _ in moves if is_visible(label))

    def success_alphabet(self) -> FrozenSet[Label]:
        return frozenset(label for moves in self.transitions for label, _ in moves if is_success(label))

    def reachable(self, dist: Dist) -> List[StateId]:
        seen, stack = set(), list(dist)
        while stack:
            state = stack.pop()
            if state in seen:
                continue
            seen.add(state)
            for _, target in self.transitions[state]:
                stack.extend(target)
        return sorted(seen)

    def lifted_step(self, dist: Dist, label: Label) -> DistPolytope:
        """
        All ``E`` with ``dist`` moving to ``E`` by the lifting of the strong transitions labelled ``label``.
        """
        return mix_polytopes(
            [
                (p, DistPolytope(target for other, target in self.transitions[s] if other == label))
                for s, p in dist.items()
            ]
        )

    def lifted_step_contains(self, dist: Dist, label: Label, target: Dist) -> bool:
        return target in self.lifted_step(dist, label)

    def _tau_state(self, state: StateId, omega_avoiding: bool) -> DistPolytope:
        key = (state, omega_avoiding)
        if key not in self._tau_cache:
            candidates = [point(state)]
            if not (omega_avoiding and self.has_success(state)):
                for label, target in self.transitions[state]:
                    if label == TAU:
                        candidates.extend(self.weak_tau_derivatives(target, omega_avoiding))
            self._tau_cache[key] = DistPolytope(candidates)
        return self._tau_cache[key]

    def weak_tau_derivatives(self, dist: Dist, omega_avoiding: bool = False) -> DistPolytope:
        """
        The polytope of all ``E`` reachable from ``dist`` by the reflexive transitive closure of lifted internal
        moves, each state resolving its own choices independently.

        :param omega_avoiding:
            When True, states with an enabled success action do not move.
        """
        return mix_polytopes([(p, self._tau_state(s, omega_avoiding)) for s, p in dist.items()])

    def _a_state(self, state: StateId, action: Label, omega_avoiding: bool) -> DistPolytope:
        key = (state, action, omega_avoiding)
        if key not in self._a_cache:
            candidates = []
            blocked = omega_avoiding and self.has_success(state)
            for label, target in self.transitions[state]:
                if label == action and (not blocked or is_success(action)):
                    candidates.extend(self.weak_tau_derivatives(target, omega_avoiding))
                elif label == TAU and not blocked:
                    candidates.extend(self.weak_a_derivatives(target, action, omega_avoiding))
            self._a_cache[key] = DistPolytope(candidates)
        return self._a_cache[key]

    def weak_a_derivatives(self, dist: Dist, action: Label, omega_avoiding: bool = False) -> DistPolytope:
        """
        The polytope of weak ``action`` derivatives: internal moves, one lifted ``action`` move taken by every state of
        the support, then internal moves again.  For ``tau`` this is ``weak_tau_derivatives``.
        """
        if action == TAU:
            return self.weak_tau_derivatives(dist, omega_avoiding)
        return mix_polytopes([(p, self._a_state(s, action, omega_avoiding)) for s, p in dist.items()])

    def weak_derivatives_omega_avoiding(self, dist: Dist, action: Label = TAU) -> DistPolytope:
        return self.weak_a_derivatives(dist, action, omega_avoiding=True)

    def _can_refuse(self, state: StateId, actions: FrozenSet[Label], omega_avoiding: bool) -> bool:
        key = (state, actions, omega_avoiding)
        if key not in self._refusal_cache:
            result = self.refuses(state, actions)
            if not result and not (omega_avoiding and self.has_success(state)):
                result = any(
                    label == TAU and all(self._can_refuse(t, actions, omega_avoiding) for t in target)
                    for label, target in self.transitions[state]
                )
            self._refusal_cache[key] = result
        return self._refusal_cache[key]

    def can_weakly_refuse(self, dist: Dist, actions: Iterable[Label], omega_avoiding: bool = False) -> bool:
        """
        :return: True when some weak internal derivative of ``dist`` has only states refusing ``actions``.
        """
        actions = frozenset(actions)
        return all(self._can_refuse(s, actions, omega_avoiding) for s in dist)

    def refusal_witness(self, dist: Dist, actions: Iterable[Label], omega_avoiding: bool = False) -> Optional[Dist]:
        """
        :return: an explicit weak internal derivative of ``dist`` refusing ``actions``, or None.
        """
        actions = frozenset(actions)
        if not self.can_weakly_refuse(dist, actions, omega_avoiding):
            return None

        def resolve(state: StateId) -> Dist:
            if self.refuses(state, actions):
                return point(state)
            for label, target in self.transitions[state]:
                if label == TAU and all(self._can_refuse(t, actions, omega_avoiding) for t in target):
                    return _mix_resolved(target, resolve)
            raise PLTSException("inconsistent refusal cache for state {}".format(state))

        return _mix_resolved(dist, resolve)

    def pure_weak_tau_derivatives(self, dist: Dist, omega_avoiding: bool = False) -> Set[Dist]:
        """
        Enumerates the weak internal derivatives obtained when every state either stops or commits to one internal
        move.  Their convex hull is ``weak_tau_derivatives(dist)``.
        """

        def options(state: StateId) -> List[Dist]:
            result = [point(state)]
            if not (omega_avoiding and self.has_success(state)):
                for label, target in self.transitions[state]:
                    if label == TAU:
                        result.extend(combine(target))
            return result

        def combine(target: Dist) -> List[Dist]:
            choices = [options(s) for s in target]
            combined = []
            for selection in itertools.product(*choices):
                weights = defaultdict(Fraction)
                for (s, p), chosen in zip(target.items(), selection):
                    for t, q in chosen.items():
                        weights[t] += p * q
                combined.append(Dist(weights))
            return combined

        return set(combine(dist))

    def to_dot(self, name: str = "plts") -> str:
        """
        Graphviz rendering: states as filled dots labelled with their term, probabilistic branching through small
        hollow nodes with probability-labelled edges.
        """
        lines = ["digraph {} {{".format(name), '  node [fontname="monospace"];']
        for state, term in enumerate(self.states):
            lines.append('  s{} [shape=point, xlabel="{}"];'.format(state, str(term).replace('"', '\\"')))
        for index, (state, label, target) in enumerate(self.iter_transitions()):
            if target.is_point:
                lines.append('  s{} -> s{} [label="{}"];'.format(state, target.support()[0], label))
                continue
            lines.append("  d{} [shape=circle, width=0.1, label=\"\"];".format(index))
            lines.append('  s{} -> d{} [label="{}"];'.format(state, index, label))
            for other, p in target.items():
                lines.append('  d{} -> s{} [label="{}", style=dashed];'.format(index, other, format_fraction(p)))
        lines.append("}")
        return "\n".join(lines)

    def iter_transitions(self) -> Iterator[Tuple[StateId, Label, Dist]]:
        for state, moves in enumerate(self.transitions):
            for label, target in moves:
                yield state, label, target

    def to_json(self) -> Dict:
        return {
            "states": [
                {"id": state, "term": str(term), "depth": self.depths[state]} for state, term in enumerate(self.states)
            ],
            "transitions": [
                {"source": state, "label": label, "target": target.to_json()}
                for state, label, target in self.iter_transitions()
            ],
        }


def _mix_resolved(dist: Dist, resolve) -> Dist:
    weights = defaultdict(Fraction)
    for state, p in dist.items():
        for other, q in resolve(state).items():
            weights[other] += p * q
    return Dist(weights)


def build(term: Term) -> Tuple[PLTS, Dist]:
    """
    Builds the pLTS of ``term``.

    :return: the state space and the interpretation of the term as a distribution over it.
    """
    plts = PLTS()
    initial = plts.add(term)
    return plts, initial
