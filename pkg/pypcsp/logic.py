"""
The modal logics F and L over distributions of a pLTS.

Formulas are built from ``Top``, ``Ref`` (refusal of a set of actions), ``Diamond`` (a weak visible move),
``Conj`` (finite conjunction) and ``ProbSum`` (a weak internal move into a weighted combination of distributions each
satisfying its component).  L is the fragment without ``Ref``.

Satisfaction is decided exactly.  Formulas without ``ProbSum`` are decided state by state; a formula with
probabilistic structure is encoded as one rational linear program whose variables are flows of probability mass
along internal and visible transitions, which is feasible exactly when the formula holds.
"""
import json
import logging
from collections import defaultdict
from fractions import Fraction
from typing import Any, Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

from pypcsp.distribution import Dist, StateId
from pypcsp.enums import Logic
from pypcsp.geometry import LinearProgram
from pypcsp.plts import PLTS
from pypcsp.terms import (
    ExtChoice,
    Node,
    Prefix,
    ProbChoice,
    TAU,
    Term,
    ext_sum,
    int_sum,
    omega_name,
    prob_sum,
)
from pypcsp.utils import FormulaException, Rational, format_fraction, fraction_sum, to_fraction

__author__ = "PyPCSP contributors"
__email__ = "pypcsp@example.org"

logger = logging.getLogger(__name__)

CONST = -1

Expr = Dict[int, Fraction]


class Formula(Node):
    __slots__ = ("_key",)

    def __init__(self) -> None:
        self._key = None

    def children(self) -> Tuple["Formula", ...]:
        return ()

    def nodes_(self):
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
        if not isinstance(other, Formula):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def is_L(self) -> bool:
        return not self.find_(Ref)

    @property
    def has_probabilistic(self) -> bool:
        return bool(self.find_(ProbSum))

    def depth(self) -> int:
        return max((child.depth() for child in self.children()), default=0)

    def actions(self) -> FrozenSet[str]:
        found = set()
        for node in self.nodes_():
            if isinstance(node, Ref):
                found.update(node.actions_)
            elif isinstance(node, Diamond):
                found.add(node.action)
        return frozenset(found)

    def unparse(self) -> str:
        raise NotImplementedError()

    def _operand(self) -> str:
        return self.unparse()

    def to_json(self) -> Any:
        raise NotImplementedError()

    def __str__(self) -> str:
        return self.unparse()

    def __repr__(self) -> str:
        return "{}({!r})".format(type(self).__name__, self.unparse())


class Top(Formula):
    __slots__ = ()

    def _make_key(self) -> tuple:
        return ("tt",)

    def unparse(self) -> str:
        return "tt"

    def to_json(self) -> Any:
        return {"top": True}


class Ref(Formula):
    __slots__ = ("actions_",)

    def __init__(self, actions: Iterable[str]) -> None:
        super().__init__()
        self.actions_ = frozenset(actions)
        if TAU in self.actions_:
            raise FormulaException("tau cannot be refused explicitly")

    def _make_key(self) -> tuple:
        return ("ref", tuple(sorted(self.actions_)))

    def unparse(self) -> str:
        return "ref{" + ",".join(sorted(self.actions_)) + "}"

    def to_json(self) -> Any:
        return {"ref": sorted(self.actions_)}


class Diamond(Formula):
    __slots__ = ("action", "body")

    def __init__(self, action: str, body: Formula) -> None:
        super().__init__()
        if action == TAU:
            raise FormulaException("diamond modalities take visible actions")
        self.action = action
        self.body = body

    def children(self) -> Tuple[Formula, ...]:
        return (self.body,)

    def depth(self) -> int:
        return 1 + self.body.depth()

    def _make_key(self) -> tuple:
        return ("dia", self.action, self.body.key())

    def unparse(self) -> str:
        return "<{}>{}".format(self.action, self.body._operand())

    def to_json(self) -> Any:
        return {"diamond": self.action, "body": self.body.to_json()}


class Conj(Formula):
    """
    Finite conjunction; the empty conjunction is true.
    """

    __slots__ = ("parts",)

    def __init__(self, parts: Iterable[Formula]) -> None:
        super().__init__()
        self.parts = tuple(parts)

    def children(self) -> Tuple[Formula, ...]:
        return self.parts

    def _make_key(self) -> tuple:
        return ("and",) + tuple(part.key() for part in self.parts)

    def unparse(self) -> str:
        if not self.parts:
            return "tt"
        if len(self.parts) == 1:
            return self.parts[0].unparse()
        return " & ".join(part._operand() for part in self.parts)

    def _operand(self) -> str:
        return self.unparse() if len(self.parts) <= 1 else "({})".format(self.unparse())

    def to_json(self) -> Any:
        return {"conj": [part.to_json() for part in self.parts]}


class ProbSum(Formula):
    """
    ``p1*f1 (+) p2*f2 (+) ...``.  Weights are exact, non-negative and sum to one.  Summands of weight zero are
    dropped: every formula is satisfied by some distribution, so they constrain nothing.
    """

    __slots__ = ("parts",)

    def __init__(self, parts: Iterable[Tuple[Rational, Formula]]) -> None:
        super().__init__()
        weighted = [(to_fraction(p), formula) for p, formula in parts]
        if any(p < 0 or p > 1 for p, _ in weighted):
            raise FormulaException("weights of a probabilistic formula lie in [0,1]")
        if fraction_sum(p for p, _ in weighted) != 1:
            raise FormulaException("weights of a probabilistic formula must sum to 1")
        self.parts = tuple((p, formula) for p, formula in weighted if p)

    def children(self) -> Tuple[Formula, ...]:
        return tuple(formula for _, formula in self.parts)

    def _make_key(self) -> tuple:
        return ("sum",) + tuple((p, formula.key()) for p, formula in self.parts)

    def unparse(self) -> str:
        return " (+) ".join("{}*{}".format(format_fraction(p), f._operand()) for p, f in self.parts)

    def _operand(self) -> str:
        return "({})".format(self.unparse())

    def to_json(self) -> Any:
        return {"sum": [{"p": format_fraction(p), "f": f.to_json()} for p, f in self.parts]}


def formula_from_json(data: Union[str, Any]) -> Formula:
    if isinstance(data, str):
        data = json.loads(data)
    try:
        if "top" in data:
            return Top()
        if "ref" in data:
            return Ref(data["ref"])
        if "diamond" in data:
            return Diamond(data["diamond"], formula_from_json(data["body"]))
        if "conj" in data:
            return Conj(formula_from_json(part) for part in data["conj"])
        if "sum" in data:
            return ProbSum((Fraction(part["p"]), formula_from_json(part["f"])) for part in data["sum"])
    except (KeyError, TypeError, ValueError) as e:
        raise FormulaException("malformed formula {!r}".format(data)) from e
    raise FormulaException("malformed formula {!r}".format(data))


def simplify(formula: Formula) -> Formula:
    """
    Flattens nested conjunctions, drops trivially true conjuncts and replaces single-component sums and
    conjunctions by their component.
    """
    if isinstance(formula, Diamond):
        return Diamond(formula.action, simplify(formula.body))
    if isinstance(formula, Conj):
        parts = []
        for part in formula.parts:
            part = simplify(part)
            if isinstance(part, Conj):
                parts.extend(part.parts)
            elif not isinstance(part, Top):
                parts.append(part)
        if not parts:
            return Top()
        return parts[0] if len(parts) == 1 else Conj(parts)
    if isinstance(formula, ProbSum):
        parts = [(p, simplify(f)) for p, f in formula.parts]
        if len(parts) == 1:
            return parts[0][1]
        return ProbSum(parts)
    return formula


class _Satisfaction:
    """
    One satisfaction query against a pLTS.  State-wise answers for formulas without probabilistic sums are memoised
    per instance.
    """

    def __init__(self, plts: PLTS) -> None:
        self.plts = plts
        self._good = {}
        self._weak_good = {}
        self._diamond_good = {}

    def good(self, state: StateId, formula: Formula) -> bool:
        key = (state, formula)
        if key in self._good:
            return self._good[key]
        if isinstance(formula, Top):
            result = True
        elif isinstance(formula, Ref):
            result = self.plts.can_weakly_refuse(Dist({state: 1}), formula.actions_)
        elif isinstance(formula, Conj):
            result = all(self.good(state, part) for part in formula.parts)
        elif isinstance(formula, Diamond):
            result = self._diamond(state, formula)
        else:
            raise FormulaException("{} is not decided state by state".format(formula))
        self._good[key] = result
        return result

    def _weak(self, state: StateId, formula: Formula) -> bool:
        key = (state, formula)
        if key not in self._weak_good:
            self._weak_good[key] = self.good(state, formula) or any(
                label == TAU and all(self._weak(t, formula) for t in target)
                for label, target in self.plts.step(state)
            )
        return self._weak_good[key]

    def _diamond(self, state: StateId, formula: Diamond) -> bool:
        key = (state, formula)
        if key not in self._diamond_good:
            result = False
            for label, target in self.plts.step(state):
                if label == formula.action and all(self._weak(t, formula.body) for t in target):
                    result = True
                elif label == TAU and all(self._diamond(t, formula) for t in target):
                    result = True
                if result:
                    break
            self._diamond_good[key] = result
        return self._diamond_good[key]


class FlowVars(NamedTuple):
    moves: Dict[Tuple[StateId, int], int]
    fires: Dict[Tuple[StateId, int], int]
    stays: Dict[StateId, int]


class TauFlow:
    """
    A decoded flow of probability mass along internal transitions.  ``moves[(s, i)]`` is the mass leaving ``s``
    through its ``i``-th transition and ``stays[s]`` the mass that ends in ``s``.  For a weak visible move
    ``fires[(s, i)]`` is the mass leaving through the visible transition ``i`` instead of stopping.
    """

    def __init__(self, source: Dist, moves: Dict, stays: Dict, fires: Optional[Dict] = None) -> None:
        self.source = source
        self.moves = {k: v for k, v in moves.items() if v}
        self.stays = {k: v for k, v in stays.items() if v}
        self.fires = {k: v for k, v in (fires or {}).items() if v}

    def result(self) -> Dist:
        return Dist(self.stays)

    def fired_states(self) -> Dist:
        weights = defaultdict(Fraction)
        for (state, _), mass in self.fires.items():
            weights[state] += mass
        return Dist(weights)

    def inflow(self, state: StateId) -> Fraction:
        outgoing = sum((m for (s, _), m in self.moves.items() if s == state), Fraction(0))
        outgoing += sum((m for (s, _), m in self.fires.items() if s == state), Fraction(0))
        return outgoing + self.stays.get(state, Fraction(0))

    def policy(self, state: StateId) -> List[Tuple[Optional[int], Fraction]]:
        """
        The memoryless choice at ``state``: pairs of transition index (None for stopping) and probability.
        """
        total = self.inflow(state)
        if not total:
            return [(None, Fraction(1))]
        options = []
        if self.stays.get(state):
            options.append((None, self.stays[state] / total))
        for (s, index), mass in sorted(self.moves.items()):
            if s == state:
                options.append((index, mass / total))
        for (s, index), mass in sorted(self.fires.items()):
            if s == state:
                options.append((index, mass / total))
        return options


class WeakWitness(NamedTuple):
    """
    Evidence for ``source ==a==> target``: internal moves to ``before``, one lifted ``a`` move to ``after``, then
    internal moves to ``target``.  For internal moves only ``first`` is set.
    """

    first: TauFlow
    firing: Tuple[Tuple[StateId, Fraction, Dist], ...]
    second: Optional[TauFlow]

    @property
    def before(self) -> Dist:
        return self.first.result() if self.second is None else self.first.fired_states()

    @property
    def after(self) -> Optional[Dist]:
        return None if self.second is None else self.second.source


class _FlowProgram:
    """
    Linear encoding of weak transitions.  Distributions are maps from states to linear expressions over the program
    variables; the key ``CONST`` of an expression holds its constant part.
    """

    def __init__(self, plts: PLTS, satisfaction: Optional[_Satisfaction] = None) -> None:
        self.plts = plts
        self.program = LinearProgram()
        self.satisfaction = satisfaction or _Satisfaction(plts)

    def constant(self, dist: Dist) -> Dict[StateId, Expr]:
        return {state: {CONST: p} for state, p in dist.items()}

    def equate(self, left: Expr, right: Expr) -> None:
        coefficients = defaultdict(Fraction)
        for variable, value in left.items():
            coefficients[variable] += value
        for variable, value in right.items():
            coefficients[variable] -= value
        rhs = -coefficients.pop(CONST, Fraction(0))
        self.program.add_eq({v: c for v, c in coefficients.items() if c}, rhs)

    def closure(self, states: Iterable[StateId]) -> List[StateId]:
        seen, stack = set(), list(states)
        while stack:
            state = stack.pop()
            if state in seen:
                continue
            seen.add(state)
            for label, target in self.plts.step(state):
                if label == TAU:
                    stack.extend(target)
        return sorted(seen)

    def flow(
        self, source: Dict[StateId, Expr], stay: bool = True, fire: Optional[str] = None
    ) -> Tuple[FlowVars, Dict[StateId, Expr], Dict[StateId, Expr]]:
        """
        Adds a flow of the mass of ``source`` along internal transitions, ending either by stopping (``stay``) or by
        firing a transition labelled ``fire``.

        :return: the flow variables, the distribution of stopped mass and the distribution reached by firing.
        """
        domain = self.closure(source)
        moves, fires, stays = {}, {}, {}
        inflow = {state: defaultdict(Fraction, source.get(state, {})) for state in domain}
        for state in domain:
            for index, (label, target) in enumerate(self.plts.step(state)):
                if label == TAU:
                    variable = moves[(state, index)] = self.program.new_var("x{}_{}".format(state, index))
                    for other, p in target.items():
                        inflow[other][variable] += p
                elif fire is not None and label == fire:
                    fires[(state, index)] = self.program.new_var("y{}_{}".format(state, index))
            if stay:
                stays[state] = self.program.new_var("z{}".format(state))

        for state in domain:
            outflow = {v: Fraction(1) for (s, _), v in moves.items() if s == state}
            outflow.update({v: Fraction(1) for (s, _), v in fires.items() if s == state})
            if state in stays:
                outflow[stays[state]] = Fraction(1)
            self.equate(inflow[state], outflow)

        stopped = {state: {variable: Fraction(1)} for state, variable in stays.items()}
        fired = defaultdict(lambda: defaultdict(Fraction))
        for (state, index), variable in fires.items():
            for other, p in self.plts.step(state)[index][1].items():
                fired[other][variable] += p
        return FlowVars(moves, fires, stays), stopped, {s: dict(e) for s, e in fired.items()}

    def distribution(self, domain: Iterable[StateId]) -> Dict[StateId, Expr]:
        variables = {state: self.program.new_var("d{}".format(state)) for state in domain}
        self.program.add_eq({v: 1 for v in variables.values()}, 1)
        return {state: {v: Fraction(1)} for state, v in variables.items()}

    def require(self, formula: Formula, dist: Dict[StateId, Expr]) -> None:
        """
        Constrains the distribution ``dist`` to satisfy ``formula``.
        """
        if not formula.has_probabilistic:
            for state, expression in dist.items():
                if not self.satisfaction.good(state, formula):
                    self.equate(expression, {})
            return

        if isinstance(formula, Conj):
            for part in formula.parts:
                self.require(part, dist)
        elif isinstance(formula, Diamond):
            _, _, fired = self.flow(dist, stay=False, fire=formula.action)
            _, stopped, _ = self.flow(fired, stay=True)
            self.require(formula.body, stopped)
        elif isinstance(formula, ProbSum):
            _, stopped, _ = self.flow(dist, stay=True)
            components = [(p, self.distribution(stopped)) for p, _ in formula.parts]
            for state, expression in stopped.items():
                combined = defaultdict(Fraction)
                for p, component in components:
                    for variable, value in component[state].items():
                        combined[variable] += p * value
                self.equate(expression, combined)
            for (_, part), (_, component) in zip(formula.parts, components):
                self.require(part, component)
        else:
            raise FormulaException("unexpected formula {}".format(formula))

    @staticmethod
    def evaluate(dist: Dict[StateId, Expr], values: List[Fraction]) -> Dist:
        weights = {}
        for state, expression in dist.items():
            weights[state] = sum(
                (c * (values[v] if v != CONST else 1) for v, c in expression.items()), Fraction(0)
            )
        return Dist(weights)

    @staticmethod
    def decode(source: Dist, flow: FlowVars, values: List[Fraction]) -> TauFlow:
        return TauFlow(
            source,
            {k: values[v] for k, v in flow.moves.items()},
            {k: values[v] for k, v in flow.stays.items()},
            {k: values[v] for k, v in flow.fires.items()},
        )


class SatWitness(NamedTuple):
    """
    Evidence behind a positive answer.  For ``<a>f`` ``derivative`` is the weak ``a`` derivative satisfying ``f``; for
    a probabilistic sum it is the weak internal derivative and ``components`` lists the distribution chosen for
    every summand.  Otherwise ``derivative`` is the distribution itself.
    """

    derivative: Dist
    components: Tuple[Dist, ...]


def sat(plts: PLTS, dist: Dist, formula: Formula) -> bool:
    """
    Decides ``dist |= formula``.  Actions the pLTS never performs make their diamonds false.
    """
    formula = simplify(formula)
    return _sat(plts, dist, formula, _Satisfaction(plts))


def _sat(plts: PLTS, dist: Dist, formula: Formula, satisfaction: _Satisfaction) -> bool:
    if not formula.has_probabilistic:
        return all(satisfaction.good(state, formula) for state in dist)
    if isinstance(formula, Conj):
        return all(_sat(plts, dist, part, satisfaction) for part in formula.parts)

    encoding = _FlowProgram(plts, satisfaction)
    encoding.require(formula, encoding.constant(dist))
    result = encoding.program.is_feasible()
    logger.debug(
        "satisfaction by linear program with %d variables: %s", encoding.program.variable_count, result
    )
    return result


def sat_witness(plts: PLTS, dist: Dist, formula: Formula) -> Optional[SatWitness]:
    """
    Like ``sat`` but returns the evidence of a positive answer, or None.
    """
    formula = simplify(formula)
    if not isinstance(formula, (Diamond, ProbSum)):
        return SatWitness(dist, ()) if sat(plts, dist, formula) else None

    encoding = _FlowProgram(plts)
    source = encoding.constant(dist)
    if isinstance(formula, Diamond):
        _, _, fired = encoding.flow(source, stay=False, fire=formula.action)
        _, stopped, _ = encoding.flow(fired, stay=True)
        encoding.require(formula.body, stopped)
        components = []
    else:
        _, stopped, _ = encoding.flow(source, stay=True)
        components = [encoding.distribution(stopped) for _ in formula.parts]
        for state, expression in stopped.items():
            combined = defaultdict(Fraction)
            for (p, _), component in zip(formula.parts, components):
                for variable, value in component[state].items():
                    combined[variable] += p * value
            encoding.equate(expression, combined)
        for (_, part), component in zip(formula.parts, components):
            encoding.require(part, component)

    values = encoding.program.solve()
    if values is None:
        return None
    return SatWitness(
        _FlowProgram.evaluate(stopped, values),
        tuple(_FlowProgram.evaluate(component, values) for component in components),
    )


def weak_witness(plts: PLTS, source: Dist, target: Dist, action: str = TAU) -> Optional[WeakWitness]:
    """
    Finds flows showing that ``source`` reaches exactly ``target`` by a weak ``action`` move (weak internal moves
    for ``tau``).

    :return: the decoded flows, or None when ``target`` is not a weak derivative.
    """
    encoding = _FlowProgram(plts)
    constant = encoding.constant(source)
    if action == TAU:
        first, stopped, _ = encoding.flow(constant, stay=True)
        second = None
    else:
        first, _, fired = encoding.flow(constant, stay=False, fire=action)
        second, stopped, _ = encoding.flow(fired, stay=True)

    for state in set(stopped) | set(target):
        if state not in stopped:
            return None
        encoding.equate(stopped[state], {CONST: target.weight(state)})

    values = encoding.program.solve()
    if values is None:
        return None

    first_flow = _FlowProgram.decode(source, first, values)
    if second is None:
        return WeakWitness(first_flow, (), None)

    firing = tuple(
        (state, mass, plts.step(state)[index][1]) for (state, index), mass in sorted(first_flow.fires.items())
    )
    after = defaultdict(Fraction)
    for _, mass, dist in firing:
        for other, p in dist.items():
            after[other] += mass * p
    return WeakWitness(first_flow, firing, _FlowProgram.decode(Dist(after), second, values))


class _CharacteristicFormulas:
    def __init__(self, plts: PLTS, logic: Logic, alphabet: FrozenSet[str]) -> None:
        self.plts = plts
        self.logic = logic
        self.alphabet = alphabet
        self._states = {}

    def state(self, state: StateId) -> Formula:
        if state not in self._states:
            moves = self.plts.step(state)
            parts = [Diamond(label, self.dist(target)) for label, target in moves if label != TAU]
            if self.plts.is_stable(state):
                if self.logic is Logic.F:
                    parts.append(Ref(self.alphabet - self.plts.labels(state)))
            else:
                parts.extend(self.dist(target) for label, target in moves if label == TAU)
            self._states[state] = Conj(parts)
        return self._states[state]

    def dist(self, dist: Dist) -> Formula:
        if dist.is_point:
            return self.state(dist.support()[0])
        return ProbSum((p, self.state(s)) for s, p in dist.items())


def char_formula(
    plts: PLTS, target: Union[StateId, Dist], logic: Logic = Logic.F, alphabet: Optional[Iterable[str]] = None
) -> Formula:
    """
    The characteristic formula of a state or distribution.  Stable states refuse every action they cannot perform,
    which is only recorded in F.

    :param alphabet:
        The visible alphabet refusals range over; by default every visible action of the pLTS.
    """
    alphabet = frozenset(alphabet) if alphabet is not None else plts.alphabet()
    builder = _CharacteristicFormulas(plts, logic, alphabet | plts.alphabet())
    if isinstance(target, Dist):
        return builder.dist(target)
    return builder.state(target)


def logic_leq(left: Term, right: Term, logic: Logic, alphabet: Optional[Iterable[str]] = None) -> bool:
    """
    Decides the logical preorder through the characteristic formula of the universally quantified side: for L,
    ``[right]`` satisfies the L-formula of ``[left]``; for F, ``[left]`` satisfies the F-formula of ``[right]``.
    """
    return logic_query(PLTS(), left, right, logic, alphabet).holds


class LogicQuery(NamedTuple):
    holds: bool
    formula: Formula
    subject: Dist


def logic_query(
    plts: PLTS, left: Term, right: Term, logic: Logic, alphabet: Optional[Iterable[str]] = None
) -> LogicQuery:
    """
    Adds both terms to ``plts`` and checks the characteristic formula of one side against the other, the subject.
    """
    left_dist, right_dist = plts.add(left), plts.add(right)
    act = plts.alphabet() | frozenset(alphabet or ())
    if logic is Logic.L:
        formula = char_formula(plts, left_dist, Logic.L, act)
        return LogicQuery(sat(plts, right_dist, formula), formula, right_dist)
    formula = char_formula(plts, right_dist, Logic.F, act)
    return LogicQuery(sat(plts, left_dist, formula), formula, left_dist)


class CharTest(NamedTuple):
    test: Term
    target: Tuple[Fraction, ...]
    omega: Tuple[str, ...]


class _FreshSuccess:
    def __init__(self) -> None:
        self.counter = 0

    def __call__(self) -> str:
        self.counter += 1
        return omega_name(self.counter)


def char_test(formula: Formula) -> CharTest:
    """
    The characteristic test and target value of a formula: a distribution satisfies the formula exactly when some
    outcome of the test is below the target, and for formulas of L also exactly when some outcome is above it.
    Success actions ``omega1, omega2, ...`` are drawn from a counter, so subtests never share one.
    """
    fresh = _FreshSuccess()
    test, target = _char_test(formula, fresh)
    omega = tuple(omega_name(i) for i in range(1, fresh.counter + 1))
    return CharTest(test, tuple(target.get(name, Fraction(0)) for name in omega), omega)


def _scaled(vector: Dict[str, Fraction], factor: Fraction) -> Dict[str, Fraction]:
    return {name: factor * value for name, value in vector.items()}


def _added(vectors: Iterable[Dict[str, Fraction]]) -> Dict[str, Fraction]:
    total = defaultdict(Fraction)
    for vector in vectors:
        for name, value in vector.items():
            total[name] += value
    return dict(total)


def _char_test(formula: Formula, fresh: _FreshSuccess) -> Tuple[Term, Dict[str, Fraction]]:
    if isinstance(formula, Top) or (isinstance(formula, Conj) and not formula.parts):
        success = fresh()
        return Prefix(success), {success: Fraction(1)}

    if isinstance(formula, Ref):
        success = fresh()
        return ext_sum([Prefix(a, Prefix(success)) for a in sorted(formula.actions_)]), {}

    if isinstance(formula, Diamond):
        body, target = _char_test(formula.body, fresh)
        success = fresh()
        return ExtChoice(Prefix(success), Prefix(formula.action, body)), target

    if isinstance(formula, Conj):
        if len(formula.parts) == 1:
            return _char_test(formula.parts[0], fresh)
        weight = Fraction(1, len(formula.parts))
        parts = [_char_test(part, fresh) for part in formula.parts]
        return (
            prob_sum([(weight, test) for test, _ in parts]),
            _added(_scaled(target, weight) for _, target in parts),
        )

    if isinstance(formula, ProbSum):
        parts = [(p, _char_test(part, fresh)) for p, part in formula.parts]
        branches, targets = [], []
        for p, (test, target) in parts:
            success = fresh()
            branches.append(ProbChoice(Fraction(1, 2), test, Prefix(success)))
            targets.append(_scaled(_added([_scaled(target, Fraction(1, 2)), {success: Fraction(1, 2)}]), p))
        return int_sum(branches), _added(targets)

    raise FormulaException("unexpected formula {}".format(formula))


__all__ = [
    "Formula",
    "Top",
    "Ref",
    "Diamond",
    "Conj",
    "ProbSum",
    "sat",
    "sat_witness",
    "weak_witness",
    "char_formula",
    "char_test",
    "logic_leq",
    "simplify",
    "formula_from_json",
    "logic_query",
    "LogicQuery",
    "CharTest",
    "SatWitness",
    "TauFlow",
    "WeakWitness",
]
