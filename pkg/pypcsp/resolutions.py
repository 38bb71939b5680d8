"""
Resolutions: fully probabilistic automata obtained from a pLTS by resolving every nondeterministic choice, possibly
by interpolating between choices.  A resolution is kept as an unrolled tree whose nodes are mapped back to states of
the pLTS by the resolving function.
"""
import itertools
import json
import logging
from collections import defaultdict
from fractions import Fraction
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

from pypcsp.distribution import Dist, StateId
from pypcsp.geometry import LinearProgram, OutcomeSet, Vector, hull_reduce, zero
from pypcsp.plts import PLTS
from pypcsp.terms import OMEGA
from pypcsp.testing import ResultsGatherer
from pypcsp.utils import ResolutionException, to_fraction

__author__ = "PyPCSP contributors"
__email__ = "pypcsp@example.org"

logger = logging.getLogger(__name__)

NodeId = int


class Move(NamedTuple):
    label: str
    target: Dist


class Resolution:
    """
    :param plts: the resolved pLTS.
    :param resolving: ``resolving[r]`` is the state of the pLTS node ``r`` resolves.
    :param moves: ``moves[r]`` is the single transition of node ``r``, or None when ``r`` is deadlocked.
    :param initial: the initial distribution over nodes.
    """

    def __init__(
        self,
        plts: PLTS,
        resolving: Sequence[StateId],
        moves: Sequence[Optional[Move]],
        initial: Dist,
        omega: Sequence[str] = (OMEGA,),
    ) -> None:
        if len(resolving) != len(moves):
            raise ResolutionException("every node needs a resolved state and a move entry")
        self.plts = plts
        self.resolving = tuple(resolving)
        self.moves = tuple(moves)
        self.initial = initial
        self.omega = tuple(omega)

    def __len__(self) -> int:
        return len(self.resolving)

    def pushforward(self, dist: Dist) -> Dist:
        return dist.map_states(self.resolving.__getitem__)

    def to_json(self) -> Dict[str, Any]:
        return {
            "omega": list(self.omega),
            "initial": self.initial.to_json(),
            "nodes": [
                {
                    "id": node,
                    "state": state,
                    "move": None if move is None else {"label": move.label, "target": move.target.to_json()},
                }
                for node, (state, move) in enumerate(zip(self.resolving, self.moves))
            ],
        }

    @classmethod
    def from_json(cls, data: Union[str, Dict[str, Any]], plts: PLTS) -> "Resolution":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            nodes = sorted(data["nodes"], key=lambda node: node["id"])
            if [node["id"] for node in nodes] != list(range(len(nodes))):
                raise ResolutionException("node identifiers must be 0..n-1")
            moves = [
                None if node["move"] is None else Move(node["move"]["label"], Dist.from_json(node["move"]["target"]))
                for node in nodes
            ]
            return cls(
                plts,
                [int(node["state"]) for node in nodes],
                moves,
                Dist.from_json(data["initial"]),
                data.get("omega", (OMEGA,)),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ResolutionException("malformed resolution {!r}".format(data)) from e


def _well_formed(res: Resolution) -> Optional[str]:
    size, states = len(res), len(res.plts)
    if any(not 0 <= node < size for node in res.initial):
        return "initial distribution refers to unknown nodes"
    if any(not 0 <= state < states for state in res.resolving):
        return "resolving function leaves the pLTS"
    for node, move in enumerate(res.moves):
        if move is not None and any(not node < child < size for child in move.target):
            return "node {} does not point strictly forward in the tree".format(node)
    return None


def resolution_failures(res: Resolution, initial: Dist) -> List[str]:
    problem = _well_formed(res)
    if problem:
        return [problem]

    failures = []
    if res.pushforward(res.initial) != initial:
        failures.append("the initial distribution does not resolve {!r}".format(initial))
    for node, (state, move) in enumerate(zip(res.resolving, res.moves)):
        transitions = res.plts.step(state)
        if move is None:
            if transitions:
                failures.append("node {} is deadlocked but state {} is not".format(node, state))
        elif (move.label, res.pushforward(move.target)) not in transitions:
            failures.append("node {} --{}--> has no counterpart at state {}".format(node, move.label, state))
    return failures


def check_resolution(res: Resolution, initial: Dist) -> bool:
    """
    Checks the three defining clauses: the initial distribution resolves ``initial``, every transition of a node is
    matched at its state after pushing the target forward, and deadlocked nodes resolve deadlocked states.
    """
    failures = resolution_failures(res, initial)
    for reason in failures:
        logger.debug("resolution rejected: %s", reason)
    return not failures


def pr(res: Resolution, sequence: Sequence[str], dist: Optional[Dist] = None) -> Fraction:
    """
    The probability that the resolution, started in ``dist`` (by default its initial distribution), performs the
    label sequence ``sequence`` from its start.
    """
    dist = res.initial if dist is None else dist
    if not sequence:
        return Fraction(1)
    total = Fraction(0)
    for node, p in dist.items():
        move = res.moves[node]
        if move is not None and move.label == sequence[0]:
            total += p * pr(res, sequence[1:], move.target)
    return total


def w_of(res: Resolution) -> Vector:
    """
    The success tuple: for every success action the probability of eventually performing it, by recursion over the
    tree.
    """
    memo = {}

    def node_value(node: NodeId) -> Vector:
        if node not in memo:
            move = res.moves[node]
            if move is None:
                memo[node] = zero(res.omega)
            else:
                memo[node] = _fire(move.label, dist_value(move.target), res.omega)
        return memo[node]

    def dist_value(dist: Dist) -> Vector:
        total = [Fraction(0)] * len(res.omega)
        for node, p in dist.items():
            for index, value in enumerate(node_value(node)):
                total[index] += p * value
        return tuple(total)

    return dist_value(res.initial)


def _sequences(res: Resolution, success: str) -> List[Tuple[str, ...]]:
    """
    Every label sequence along a path of the tree that ends with the first occurrence of ``success``.
    """
    found = set()
    stack = [(node, ()) for node in res.initial]
    while stack:
        node, path = stack.pop()
        move = res.moves[node]
        if move is None:
            continue
        path = path + (move.label,)
        if move.label == success:
            found.add(path)
            continue
        stack.extend((child, path) for child in move.target)
    return sorted(found)


def w_of_by_sequences(res: Resolution) -> Vector:
    return tuple(sum((pr(res, sequence) for sequence in _sequences(res, w)), Fraction(0)) for w in res.omega)


class _TreeBuilder:
    def __init__(self) -> None:
        self.resolving = []
        self.moves = []

    def node(self, state: StateId) -> NodeId:
        self.resolving.append(state)
        self.moves.append(None)
        return len(self.resolving) - 1

    def finish(self, plts: PLTS, initial: Dist, omega: Sequence[str]) -> Resolution:
        return Resolution(plts, self.resolving, self.moves, initial, omega)


def _choices(plts: PLTS, state: StateId) -> List[Any]:
    """
    Pure resolutions of one state occurrence as nested plans: None for a deadlock, otherwise the chosen transition
    together with a plan for every state of its target.
    """
    moves = plts.step(state)
    if not moves:
        return [None]
    plans = []
    for index, (_, target) in enumerate(moves):
        for selection in itertools.product(*(_choices(plts, t) for t in target)):
            plans.append((index, selection))
    return plans


def _materialise(plts: PLTS, builder: _TreeBuilder, state: StateId, plan: Any) -> NodeId:
    node = builder.node(state)
    if plan is not None:
        index, selection = plan
        label, target = plts.step(state)[index]
        children = {}
        for (t, p), child_plan in zip(target.items(), selection):
            children[_materialise(plts, builder, t, child_plan)] = p
        builder.moves[node] = Move(label, Dist(children))
    return node


def enumerate_deterministic_resolutions(
    plts: PLTS, initial: Dist, omega: Sequence[str] = (OMEGA,)
) -> List[Resolution]:
    """
    Every resolution that commits, at each occurrence of a state in the unrolled tree, to exactly one of its
    transitions.  The list is in a canonical order.
    """
    per_state = [_choices(plts, state) for state in initial]
    resolutions = []
    for selection in itertools.product(*per_state):
        builder = _TreeBuilder()
        weights = {}
        for (state, p), plan in zip(initial.items(), selection):
            weights[_materialise(plts, builder, state, plan)] = p
        resolutions.append(builder.finish(plts, Dist(weights), omega))
    logger.debug("enumerated %d deterministic resolutions", len(resolutions))
    return resolutions


def w_set(plts: PLTS, initial: Dist, omega: Sequence[str] = (OMEGA,)) -> OutcomeSet:
    return hull_reduce([w_of(res) for res in enumerate_deterministic_resolutions(plts, initial, omega)], omega)


def _fire(label: str, vector: Vector, omega: Tuple[str, ...]) -> Vector:
    if label not in omega:
        return vector
    index = omega.index(label)
    return vector[:index] + (Fraction(1),) + vector[index + 1 :]


class _Synthesis:
    """
    Builds a resolution reaching a given outcome by unfolding convex decompositions: a distribution splits its
    target over the outcome sets of its states, a state splits its share over candidate transitions and interpolates
    between them with fresh nodes when more than one is used.
    """

    def __init__(self, plts: PLTS, omega: Sequence[str]) -> None:
        self.plts = plts
        self.omega = tuple(omega)
        self.gatherer = ResultsGatherer(plts, omega)
        self.builder = _TreeBuilder()

    def _decompose(self, candidates: List[Vector], groups: List[Tuple[Fraction, List[int]]], target: Vector):
        """
        Finds weights ``l_k >= 0`` summing to one inside every group such that the group-weighted combination of the
        candidates equals ``target``.
        """
        program = LinearProgram()
        weights = program.new_vars(len(candidates), prefix="l")
        for _, members in groups:
            program.add_eq({weights[k]: 1 for k in members}, 1)
        for coordinate, value in enumerate(target):
            row = {}
            for mass, members in groups:
                for k in members:
                    row[weights[k]] = mass * candidates[k][coordinate]
            program.add_eq(row, value)
        return program.solve()

    def state(self, state: StateId, target: Vector) -> List[Tuple[Fraction, NodeId]]:
        moves = self.plts.step(state)
        if not moves:
            if any(target):
                raise ResolutionException("deadlocked state {} cannot reach {}".format(state, target))
            return [(Fraction(1), self.builder.node(state))]

        candidates, origins = [], []
        for index, (label, dist) in enumerate(moves):
            for vertex in self.gatherer.results_vector(dist):
                candidates.append(_fire(label, vertex, self.omega))
                origins.append((index, vertex))

        solution = self._decompose(candidates, [(Fraction(1), list(range(len(candidates))))], target)
        if solution is None:
            raise ResolutionException("outcome {} is not reachable from state {}".format(target, state))

        nodes = []
        for weight, (index, vertex) in zip(solution, origins):
            if not weight:
                continue
            label, dist = moves[index]
            node = self.builder.node(state)
            self.builder.moves[node] = Move(label, self.dist(dist, vertex))
            nodes.append((weight, node))
        return nodes

    def dist(self, dist: Dist, target: Vector) -> Dist:
        states = list(dist)
        candidates, groups = [], []
        for state in states:
            members = []
            for vertex in self.gatherer.vector_based(state):
                members.append(len(candidates))
                candidates.append(vertex)
            groups.append((dist[state], members))

        solution = self._decompose(candidates, groups, target)
        if solution is None:
            raise ResolutionException("outcome {} is not reachable from {!r}".format(target, dist))

        weights = defaultdict(Fraction)
        for state, (p, members) in zip(states, groups):
            share = tuple(
                sum((solution[k] * candidates[k][i] for k in members), Fraction(0)) for i in range(len(self.omega))
            )
            for weight, node in self.state(state, share):
                weights[node] += p * weight
        return Dist(weights)


def synthesize_resolution(
    plts: PLTS, initial: Dist, target: Sequence[Fraction], omega: Sequence[str] = (OMEGA,)
) -> Resolution:
    """
    Builds a resolution of ``initial`` whose success tuple is ``target``.

    :raises ResolutionException: when ``target`` is not an outcome of ``initial``.
    """
    target = tuple(to_fraction(v) for v in target)
    if len(target) != len(omega):
        raise ResolutionException("target {} does not match success alphabet {}".format(target, tuple(omega)))
    synthesis = _Synthesis(plts, omega)
    start = synthesis.dist(initial, target)
    logger.debug("synthesised resolution with %d nodes for %s", len(synthesis.builder.resolving), target)
    return synthesis.builder.finish(plts, start, omega)


__all__ = [
    "Move",
    "Resolution",
    "check_resolution",
    "resolution_failures",
    "pr",
    "w_of",
    "w_of_by_sequences",
    "enumerate_deterministic_resolutions",
    "w_set",
    "synthesize_resolution",
]
