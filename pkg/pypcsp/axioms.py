"""
Equational and inequational reasoning about parallel-free pCSP terms.

A ``Derivation`` is a proof tree whose steps are axiom instances, congruence steps, reflexivity, transitivity,
symmetry (for equations only) and ``=prob`` steps, which identify terms with the same interpretation.  Derivations are
checked against one of three theories: the common equations, the may theory (equations, ``May0`` and the may
inequations) and the must theory (equations and the must inequations).

``synth_derivation`` builds a proof of ``P <= Q`` whenever the corresponding simulation preorder holds.  The search
is driven by satisfaction witnesses of characteristic formulas: they provide the weak derivatives that every step of
the construction needs.
"""
import json
import logging
from fractions import Fraction
from typing import Any, Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple, Union

from pypcsp.distribution import Dist
from pypcsp.enums import AxiomId, Logic, Theory
from pypcsp.logic import Diamond, char_formula, sat_witness, weak_witness
from pypcsp.plts import PLTS
from pypcsp.simulation import fsim_leq, sim_leq
from pypcsp.terms import (
    NIL,
    TAU,
    ExtChoice,
    IntChoice,
    Nil,
    Par,
    Prefix,
    ProbChoice,
    Term,
    ext_sum,
    int_sum,
    prob_sum,
)
from pypcsp.utils import DerivationException, InvariantViolation, format_fraction

__author__ = "PyPCSP contributors"
__email__ = "pypcsp@example.org"

logger = logging.getLogger(__name__)

EQUATIONS = frozenset(
    [
        AxiomId.P1,
        AxiomId.P2,
        AxiomId.P3,
        AxiomId.I1,
        AxiomId.I2,
        AxiomId.I3,
        AxiomId.E1,
        AxiomId.E2,
        AxiomId.E3,
        AxiomId.EI,
        AxiomId.D1,
        AxiomId.D2,
        AxiomId.D3,
    ]
)
MAY_EQUATIONS = frozenset([AxiomId.May0])
MAY_INEQUATIONS = frozenset([AxiomId.May1, AxiomId.May2, AxiomId.May3, AxiomId.May4])
MUST_INEQUATIONS = frozenset([AxiomId.Must1, AxiomId.Must2, AxiomId.Must2p, AxiomId.MustDual])


def allowed_axioms(theory: Theory) -> FrozenSet[AxiomId]:
    if theory is Theory.may:
        return EQUATIONS | MAY_EQUATIONS | MAY_INEQUATIONS
    if theory is Theory.must:
        return EQUATIONS | MUST_INEQUATIONS
    return EQUATIONS


def is_equation(axiom: AxiomId) -> bool:
    return axiom in EQUATIONS or axiom in MAY_EQUATIONS


class Derivation:
    rule = None

    @property
    def lhs(self) -> Term:
        raise NotImplementedError()

    @property
    def rhs(self) -> Term:
        raise NotImplementedError()

    def premises(self) -> Tuple["Derivation", ...]:
        return ()

    @property
    def is_equational(self) -> bool:
        return all(premise.is_equational for premise in self.premises())

    def steps(self) -> Iterator["Derivation"]:
        yield self
        for premise in self.premises():
            yield from premise.steps()

    def axioms_used(self) -> FrozenSet[AxiomId]:
        return frozenset(step.axiom for step in self.steps() if isinstance(step, AxiomStep))

    def _describe(self) -> str:
        return self.rule

    def pretty(self, indent: int = 0) -> str:
        """
        One line per step: the rule, then the proved (in)equation; premises are indented below their conclusion.
        """
        relation = "=" if self.is_equational else "<="
        lines = ["{}{}: {} {} {}".format("  " * indent, self._describe(), self.lhs, relation, self.rhs)]
        lines.extend(premise.pretty(indent + 1) for premise in self.premises())
        return "\n".join(lines)

    def to_json(self) -> Dict[str, Any]:
        raise NotImplementedError()

    def __str__(self) -> str:
        return self.pretty()

    def __repr__(self) -> str:
        return "{}({} .. {})".format(type(self).__name__, self.lhs, self.rhs)


class Refl(Derivation):
    rule = "refl"

    def __init__(self, term: Term) -> None:
        self.term = term

    @property
    def lhs(self) -> Term:
        return self.term

    @property
    def rhs(self) -> Term:
        return self.term

    def to_json(self) -> Dict[str, Any]:
        return {"rule": self.rule, "term": str(self.term)}


class AxiomStep(Derivation):
    """
    An instance of an axiom.  ``reverse`` uses an equation from right to left.
    """

    rule = "axiom"

    def __init__(self, axiom: AxiomId, lhs: Term, rhs: Term, reverse: bool = False) -> None:
        self.axiom = axiom
        self._lhs = lhs
        self._rhs = rhs
        self.reverse = reverse

    @property
    def lhs(self) -> Term:
        return self._lhs

    @property
    def rhs(self) -> Term:
        return self._rhs

    @property
    def is_equational(self) -> bool:
        return is_equation(self.axiom)

    def _describe(self) -> str:
        return self.axiom.value + (" (reversed)" if self.reverse else "")

    def to_json(self) -> Dict[str, Any]:
        return {
            "rule": self.rule,
            "axiom": self.axiom.value,
            "lhs": str(self._lhs),
            "rhs": str(self._rhs),
            "reverse": self.reverse,
        }


class ProbStep(Derivation):
    """
    ``P =prob Q`` for terms with the same interpretation.
    """

    rule = "prob"

    def __init__(self, lhs: Term, rhs: Term) -> None:
        self._lhs = lhs
        self._rhs = rhs

    @property
    def lhs(self) -> Term:
        return self._lhs

    @property
    def rhs(self) -> Term:
        return self._rhs

    def to_json(self) -> Dict[str, Any]:
        return {"rule": self.rule, "lhs": str(self._lhs), "rhs": str(self._rhs)}


class Cong(Derivation):
    """
    Closure under an operator: ``op`` is one of ``prefix``, ``int``, ``ext`` and ``prob``.
    """

    rule = "cong"
    operators = ("prefix", "int", "ext", "prob")

    def __init__(
        self, op: str, parts: Sequence[Derivation], action: Optional[str] = None, p: Optional[Fraction] = None
    ) -> None:
        if op not in self.operators:
            raise DerivationException("unknown operator {!r} in a congruence step".format(op))
        if len(parts) != (1 if op == "prefix" else 2):
            raise DerivationException("operator {} takes {} operands".format(op, 1 if op == "prefix" else 2))
        self.op = op
        self.parts = tuple(parts)
        self.action = action
        self.p = p

    def _build(self, operands: Sequence[Term]) -> Term:
        if self.op == "prefix":
            return Prefix(self.action, operands[0])
        if self.op == "int":
            return IntChoice(*operands)
        if self.op == "ext":
            return ExtChoice(*operands)
        return ProbChoice(self.p, *operands)

    @property
    def lhs(self) -> Term:
        return self._build([part.lhs for part in self.parts])

    @property
    def rhs(self) -> Term:
        return self._build([part.rhs for part in self.parts])

    def premises(self) -> Tuple[Derivation, ...]:
        return self.parts

    def _describe(self) -> str:
        if self.op == "prefix":
            return "cong {}.".format(self.action)
        if self.op == "prob":
            return "cong |+{}|".format(format_fraction(self.p))
        return "cong {}".format(self.op)

    def to_json(self) -> Dict[str, Any]:
        data = {"rule": self.rule, "op": self.op, "premises": [part.to_json() for part in self.parts]}
        if self.action is not None:
            data["action"] = self.action
        if self.p is not None:
            data["p"] = format_fraction(self.p)
        return data


class Trans(Derivation):
    rule = "trans"

    def __init__(self, steps: Sequence[Derivation]) -> None:
        if not steps:
            raise DerivationException("transitivity over no steps")
        self.steps_ = tuple(steps)

    @property
    def lhs(self) -> Term:
        return self.steps_[0].lhs

    @property
    def rhs(self) -> Term:
        return self.steps_[-1].rhs

    def premises(self) -> Tuple[Derivation, ...]:
        return self.steps_

    def to_json(self) -> Dict[str, Any]:
        return {"rule": self.rule, "steps": [step.to_json() for step in self.steps_]}


class Sym(Derivation):
    rule = "sym"

    def __init__(self, premise: Derivation) -> None:
        self.premise = premise

    @property
    def lhs(self) -> Term:
        return self.premise.rhs

    @property
    def rhs(self) -> Term:
        return self.premise.lhs

    def premises(self) -> Tuple[Derivation, ...]:
        return (self.premise,)

    def to_json(self) -> Dict[str, Any]:
        return {"rule": self.rule, "premise": self.premise.to_json()}


def derivation_from_json(data: Union[str, Dict[str, Any]]) -> Derivation:
    from pypcsp.parser import parse

    if isinstance(data, str):
        data = json.loads(data)
    try:
        rule = data["rule"]
        if rule == "refl":
            return Refl(parse(data["term"]))
        if rule == "axiom":
            return AxiomStep(AxiomId(data["axiom"]), parse(data["lhs"]), parse(data["rhs"]), data.get("reverse", False))
        if rule == "prob":
            return ProbStep(parse(data["lhs"]), parse(data["rhs"]))
        if rule == "cong":
            p = Fraction(data["p"]) if "p" in data else None
            return Cong(data["op"], [derivation_from_json(d) for d in data["premises"]], data.get("action"), p)
        if rule == "trans":
            return Trans([derivation_from_json(d) for d in data["steps"]])
        if rule == "sym":
            return Sym(derivation_from_json(data["premise"]))
    except (KeyError, TypeError, ValueError) as e:
        raise DerivationException("malformed derivation {!r}".format(data)) from e
    raise DerivationException("unknown rule in {!r}".format(data))


# construction helpers


def trans(*steps: Derivation) -> Derivation:
    flat = []
    for step in steps:
        if isinstance(step, Trans):
            flat.extend(step.steps_)
        elif not isinstance(step, Refl):
            flat.append(step)
    if not flat:
        return steps[0]
    return flat[0] if len(flat) == 1 else Trans(flat)


def cong(
    op: str, parts: Sequence[Derivation], action: Optional[str] = None, p: Optional[Fraction] = None
) -> Derivation:
    step = Cong(op, parts, action, p)
    if all(isinstance(part, Refl) for part in parts):
        return Refl(step.lhs)
    return step


def cong_chain(op: str, parts: Sequence[Derivation]) -> Derivation:
    """
    Congruence through a right-nested chain of ``int`` or ``ext``, matching ``int_sum`` and ``ext_sum``.
    """
    if len(parts) == 1:
        return parts[0]
    return cong(op, [parts[0], cong_chain(op, parts[1:])])


def cong_prob_sum(parts: Sequence[Tuple[Fraction, Derivation]], mass: Fraction = Fraction(1)) -> Derivation:
    """
    Congruence through a probabilistic sum nested the way ``prob_sum`` nests it.
    """
    p, first = parts[0]
    if len(parts) == 1:
        return first
    return cong("prob", [first, cong_prob_sum(parts[1:], mass - p)], p=p / mass)


def link(lhs: Term, rhs: Term) -> Derivation:
    return Refl(lhs) if lhs == rhs else ProbStep(lhs, rhs)


# axiom schemas


def _int_components(term: Term, count: int) -> Optional[List[Term]]:
    """
    Splits a right-nested internal choice into exactly ``count`` components.
    """
    components = []
    while len(components) < count - 1:
        if not isinstance(term, IntChoice):
            return None
        components.append(term.left)
        term = term.right
    components.append(term)
    return components


def _ext_prefixes(term: Term) -> Optional[List[Prefix]]:
    """
    The prefixes of a right-nested external choice of prefixes; ``0`` is the empty choice.
    """
    if isinstance(term, Nil):
        return []
    prefixes = []
    while isinstance(term, ExtChoice):
        if not isinstance(term.left, Prefix):
            return None
        prefixes.append(term.left)
        term = term.right
    if not isinstance(term, Prefix):
        return None
    prefixes.append(term)
    return prefixes


def inits(term: Term) -> FrozenSet[str]:
    """
    The initial actions of a parallel-free term; an internal choice has the single initial action ``tau``.
    """
    if isinstance(term, Nil):
        return frozenset()
    if isinstance(term, Prefix):
        return frozenset([term.action])
    if isinstance(term, IntChoice):
        return frozenset([TAU])
    if isinstance(term, (ProbChoice, ExtChoice)):
        return inits(term.left) | inits(term.right)
    raise DerivationException("initial actions are only defined without parallel composition, got {}".format(term))


def _must2_component(component: Term, action: str, body: Term) -> bool:
    if component == Prefix(action, body):
        return True
    if isinstance(component, ExtChoice) and component.left == Prefix(action, body):
        return True
    if isinstance(component, ProbChoice) and isinstance(body, ProbChoice) and component.p == body.p:
        return _must2_component(component.left, action, body.left) and _must2_component(
            component.right, action, body.right
        )
    return False


class _SchemaContext:
    def __init__(self) -> None:
        self.plts = PLTS()


def _match(axiom: AxiomId, lhs: Term, rhs: Term, context: _SchemaContext) -> bool:
    if axiom is AxiomId.P1:
        return isinstance(lhs, ProbChoice) and lhs.left == lhs.right == rhs
    if axiom is AxiomId.P2:
        return (
            isinstance(lhs, ProbChoice)
            and isinstance(rhs, ProbChoice)
            and rhs.p == 1 - lhs.p
            and (rhs.left, rhs.right) == (lhs.right, lhs.left)
        )
    if axiom is AxiomId.P3:
        if not (isinstance(lhs, ProbChoice) and isinstance(lhs.left, ProbChoice) and isinstance(rhs, ProbChoice)):
            return False
        p, q = lhs.left.p, lhs.p
        if p * q >= 1 or not isinstance(rhs.right, ProbChoice):
            return False
        return (
            rhs.p == p * q
            and rhs.left == lhs.left.left
            and rhs.right.p == (1 - p) * q / (1 - p * q)
            and rhs.right.left == lhs.left.right
            and rhs.right.right == lhs.right
        )
    if axiom is AxiomId.I1:
        return isinstance(lhs, IntChoice) and lhs.left == lhs.right == rhs
    if axiom is AxiomId.I2:
        return isinstance(lhs, IntChoice) and rhs == IntChoice(lhs.right, lhs.left)
    if axiom is AxiomId.I3:
        return (
            isinstance(lhs, IntChoice)
            and isinstance(lhs.left, IntChoice)
            and rhs == IntChoice(lhs.left.left, IntChoice(lhs.left.right, lhs.right))
        )
    if axiom is AxiomId.E1:
        return isinstance(lhs, ExtChoice) and isinstance(lhs.right, Nil) and lhs.left == rhs
    if axiom is AxiomId.E2:
        return isinstance(lhs, ExtChoice) and rhs == ExtChoice(lhs.right, lhs.left)
    if axiom is AxiomId.E3:
        return (
            isinstance(lhs, ExtChoice)
            and isinstance(lhs.left, ExtChoice)
            and rhs == ExtChoice(lhs.left.left, ExtChoice(lhs.left.right, lhs.right))
        )
    if axiom in (AxiomId.EI, AxiomId.May0):
        if not (isinstance(lhs, ExtChoice) and isinstance(lhs.left, Prefix) and isinstance(lhs.right, Prefix)):
            return False
        if axiom is AxiomId.EI and lhs.left.action != lhs.right.action:
            return False
        return rhs == IntChoice(lhs.left, lhs.right)
    if axiom is AxiomId.D1:
        if not (isinstance(lhs, ExtChoice) and isinstance(lhs.right, ProbChoice)):
            return False
        left, choice = lhs.left, lhs.right
        return rhs == ProbChoice(choice.p, ExtChoice(left, choice.left), ExtChoice(left, choice.right))
    if axiom is AxiomId.D2:
        if not (isinstance(lhs, ExtChoice) and isinstance(lhs.left, Prefix) and isinstance(lhs.right, IntChoice)):
            return False
        left, choice = lhs.left, lhs.right
        return rhs == IntChoice(ExtChoice(left, choice.left), ExtChoice(left, choice.right))
    if axiom is AxiomId.D3:
        if not (isinstance(lhs, ExtChoice) and isinstance(lhs.left, IntChoice) and isinstance(lhs.right, IntChoice)):
            return False
        return rhs == _d3_rhs(lhs.left, lhs.right)
    if axiom is AxiomId.May1:
        return isinstance(rhs, IntChoice) and rhs.left == lhs
    if axiom is AxiomId.May2:
        return isinstance(lhs, Nil)
    if axiom is AxiomId.May3:
        return (
            isinstance(lhs, Prefix)
            and isinstance(lhs.body, ProbChoice)
            and rhs
            == ProbChoice(lhs.body.p, Prefix(lhs.action, lhs.body.left), Prefix(lhs.action, lhs.body.right))
        )
    if axiom is AxiomId.May4:
        return isinstance(lhs, ProbChoice) and rhs == IntChoice(lhs.left, lhs.right)
    if axiom is AxiomId.Must1:
        return isinstance(lhs, IntChoice) and lhs.right == rhs
    if axiom is AxiomId.MustDual:
        return isinstance(lhs, IntChoice) and isinstance(rhs, ProbChoice) and (rhs.left, rhs.right) == (
            lhs.left,
            lhs.right,
        )
    if axiom is AxiomId.Must2:
        return _match_must2(lhs, rhs)
    if axiom is AxiomId.Must2p:
        return _match_must2_prime(lhs, rhs, context)
    return False


def _d3_rhs(left: IntChoice, right: IntChoice) -> Term:
    return int_sum(
        [
            ExtChoice(left.left, right),
            ExtChoice(left.right, right),
            ExtChoice(left, right.left),
            ExtChoice(left, right.right),
        ]
    )


def _match_must2(lhs: Term, rhs: Term) -> bool:
    """
    ``R |~| (|~|_i (+)_j p_j (a_i.Q_ij [] P_ij)) <= []_i a_i.(+)_j p_j Q_ij`` provided ``inits(R)`` is among the
    ``a_i``.
    """
    prefixes = _ext_prefixes(rhs)
    if prefixes is None:
        return False
    if not prefixes:
        rest, components = lhs, []
    else:
        if not isinstance(lhs, IntChoice):
            return False
        rest = lhs.left
        components = _int_components(lhs.right, len(prefixes))
        if components is None:
            return False
    try:
        initial = inits(rest)
    except DerivationException:
        return False
    if not initial <= {prefix.action for prefix in prefixes}:
        return False
    return all(_must2_component(c, prefix.action, prefix.body) for c, prefix in zip(components, prefixes))


def _match_must2_prime(lhs: Term, rhs: Term, context: _SchemaContext) -> bool:
    """
    ``R |~| (|~|_i P_i) <= []_i a_i.Q_i`` provided ``[P_i] --a_i--> [Q_i]`` and ``[R]`` refuses every other action.
    """
    prefixes = _ext_prefixes(rhs)
    if prefixes is None:
        return False
    if not prefixes:
        rest, components = lhs, []
    else:
        if not isinstance(lhs, IntChoice):
            return False
        rest = lhs.left
        components = _int_components(lhs.right, len(prefixes))
        if components is None:
            return False

    plts = context.plts
    if any(term.find_(Par) for term in [lhs, rhs]):
        return False
    rest_dist = plts.add(rest)
    for component, prefix in zip(components, prefixes):
        source, target = plts.add(component), plts.add(prefix.body)
        if not plts.lifted_step_contains(source, prefix.action, target):
            return False
    refused = (plts.alphabet() | rest.actions()) - {prefix.action for prefix in prefixes}
    return all(plts.refuses(state, refused) for state in rest_dist)


# checking


def _check(derivation: Derivation, theory: Theory, location: str, context: _SchemaContext) -> None:
    if isinstance(derivation, Refl):
        return

    if isinstance(derivation, AxiomStep):
        axiom = derivation.axiom
        if axiom not in allowed_axioms(theory):
            raise DerivationException("{} is not part of the {} theory".format(axiom.value, theory.value), location)
        if derivation.reverse and not is_equation(axiom):
            raise DerivationException("inequation {} used right to left".format(axiom.value), location)
        lhs, rhs = derivation.lhs, derivation.rhs
        if derivation.reverse:
            lhs, rhs = rhs, lhs
        if not _match(axiom, lhs, rhs, context):
            raise DerivationException("{} does not match {} and {}".format(axiom.value, lhs, rhs), location)
        return

    if isinstance(derivation, ProbStep):
        plts = context.plts
        if plts.add(derivation.lhs) != plts.add(derivation.rhs):
            raise DerivationException(
                "{} and {} have different interpretations".format(derivation.lhs, derivation.rhs), location
            )
        return

    if isinstance(derivation, Cong):
        if derivation.op == "prefix" and (derivation.action is None or derivation.action == TAU):
            raise DerivationException("prefix congruence needs a visible action", location)
        if derivation.op == "prob" and (derivation.p is None or not 0 < derivation.p < 1):
            raise DerivationException("probabilistic congruence needs a weight in (0,1)", location)
        for index, part in enumerate(derivation.parts):
            _check(part, theory, "{}.{}".format(location, index), context)
        return

    if isinstance(derivation, Trans):
        for index, step in enumerate(derivation.steps_):
            _check(step, theory, "{}.{}".format(location, index), context)
        for index, (before, after) in enumerate(zip(derivation.steps_, derivation.steps_[1:])):
            if before.rhs != after.lhs:
                raise DerivationException(
                    "step ends in {} but the next starts from {}".format(before.rhs, after.lhs),
                    "{}.{}".format(location, index + 1),
                )
        return

    if isinstance(derivation, Sym):
        if not derivation.premise.is_equational:
            raise DerivationException("symmetry applied to an inequation", location)
        _check(derivation.premise, theory, location + ".0", context)
        return

    raise DerivationException("unknown step {!r}".format(derivation), location)


def validate_derivation(derivation: Derivation, theory: Theory) -> None:
    """
    :raises DerivationException: naming the first ill-formed step by its path from the root.
    """
    _check(derivation, theory, "root", _SchemaContext())


def check_derivation(derivation: Derivation, theory: Theory) -> bool:
    try:
        validate_derivation(derivation, theory)
    except DerivationException as e:
        logger.debug("derivation rejected: %s", e)
        return False
    return True


# normal forms


def _is_chain(term: Term) -> bool:
    return _ext_prefixes(term) is not None


def is_normal_form(term: Term, deep: bool = True) -> bool:
    if isinstance(term, (ProbChoice, IntChoice)):
        return is_normal_form(term.left, deep) and is_normal_form(term.right, deep)
    prefixes = _ext_prefixes(term)
    if prefixes is None:
        return False
    return not deep or all(is_normal_form(prefix.body) for prefix in prefixes)


def _merge(left: Term, right: Term) -> Tuple[Term, Derivation]:
    """
    Normalises ``left [] right`` for normal forms ``left`` and ``right``.
    """
    term = ExtChoice(left, right)

    if isinstance(right, ProbChoice):
        distributed = ProbChoice(right.p, ExtChoice(left, right.left), ExtChoice(left, right.right))
        first, d_first = _merge(left, right.left)
        second, d_second = _merge(left, right.right)
        return (
            ProbChoice(right.p, first, second),
            trans(AxiomStep(AxiomId.D1, term, distributed), cong("prob", [d_first, d_second], p=right.p)),
        )

    if isinstance(left, ProbChoice) or isinstance(left, Nil) or (isinstance(left, IntChoice) and _is_chain(right)):
        if isinstance(right, Nil):
            return left, AxiomStep(AxiomId.E1, term, left)
        swapped, d_swapped = _merge(right, left)
        return swapped, trans(AxiomStep(AxiomId.E2, term, ExtChoice(right, left)), d_swapped)

    if isinstance(right, Nil):
        return left, AxiomStep(AxiomId.E1, term, left)

    if isinstance(left, IntChoice):
        parts = [
            ExtChoice(left.left, right),
            ExtChoice(left.right, right),
            ExtChoice(left, right.left),
            ExtChoice(left, right.right),
        ]
        merged = [_merge(part.left, part.right) for part in parts]
        return (
            int_sum([m for m, _ in merged]),
            trans(AxiomStep(AxiomId.D3, term, int_sum(parts)), cong_chain("int", [d for _, d in merged])),
        )

    if isinstance(left, Prefix):
        if isinstance(right, IntChoice):
            distributed = IntChoice(ExtChoice(left, right.left), ExtChoice(left, right.right))
            first, d_first = _merge(left, right.left)
            second, d_second = _merge(left, right.right)
            return (
                IntChoice(first, second),
                trans(AxiomStep(AxiomId.D2, term, distributed), cong("int", [d_first, d_second])),
            )
        return term, Refl(term)

    head, rest = left.left, left.right
    inner, d_inner = _merge(rest, right)
    reassociated = AxiomStep(AxiomId.E3, term, ExtChoice(head, ExtChoice(rest, right)))
    outer, d_outer = _merge(head, inner)
    return outer, trans(reassociated, cong("ext", [Refl(head), d_inner]), d_outer)


def _head_normal_form(term: Term, deep: bool) -> Tuple[Term, Derivation]:
    if isinstance(term, Nil):
        return term, Refl(term)
    if isinstance(term, Prefix):
        if not deep:
            return term, Refl(term)
        body, d_body = _head_normal_form(term.body, deep)
        return Prefix(term.action, body), cong("prefix", [d_body], action=term.action)
    if isinstance(term, Par):
        raise DerivationException("normal forms are only defined without parallel composition, got {}".format(term))

    left, d_left = _head_normal_form(term.left, deep)
    right, d_right = _head_normal_form(term.right, deep)
    if isinstance(term, IntChoice):
        return IntChoice(left, right), cong("int", [d_left, d_right])
    if isinstance(term, ProbChoice):
        return ProbChoice(term.p, left, right), cong("prob", [d_left, d_right], p=term.p)
    merged, d_merged = _merge(left, right)
    return merged, trans(cong("ext", [d_left, d_right]), d_merged)


def normal_form(term: Term) -> Tuple[Term, Derivation]:
    """
    Rewrites a parallel-free term into the normal form ``N ::= N |+p| N | N |~| N | []_i a_i.N_i`` with the common
    equations: external choice is distributed over probabilistic choice, then over internal choice.

    :return: the normal form and an equational derivation of ``term = normal form``.
    :raises DerivationException: when the term uses parallel composition.
    """
    result, derivation = _head_normal_form(term, deep=True)
    logger.debug("normal form of %s has %d steps", term, sum(1 for _ in derivation.steps()))
    return result, derivation


def dist_term(plts: PLTS, dist: Dist) -> Term:
    """
    The canonical term of a distribution: a flat probabilistic sum of its distinct states ordered by their syntax.
    """
    return prob_sum(sorted(((p, plts.term(s)) for s, p in dist.items()), key=lambda part: part[1].unparse()))


def prob_normal_form(term: Term) -> Term:
    """
    The canonical representative of ``term`` under ``=prob``.  Terms with the same interpretation have the identical
    representative.
    """
    plts = PLTS()
    return dist_term(plts, plts.add(term))


# derived rules


def derive_may4(left: Term, right: Term, p: Fraction) -> Derivation:
    """
    ``P |+p| Q <= P |~| Q`` in the may theory from ``May1``, ``I2`` and ``P1``.
    """
    both = IntChoice(left, right)
    to_both_left = AxiomStep(AxiomId.May1, left, both)
    to_both_right = trans(
        AxiomStep(AxiomId.May1, right, IntChoice(right, left)), AxiomStep(AxiomId.I2, IntChoice(right, left), both)
    )
    return trans(
        cong("prob", [to_both_left, to_both_right], p=p), AxiomStep(AxiomId.P1, ProbChoice(p, both, both), both)
    )


def derive_must_dual(left: Term, right: Term, p: Fraction) -> Derivation:
    """
    ``P |~| Q <= P |+p| Q`` in the must theory from ``P1``, ``I2`` and ``Must1``.
    """
    both = IntChoice(left, right)
    to_left = trans(
        AxiomStep(AxiomId.I2, both, IntChoice(right, left)), AxiomStep(AxiomId.Must1, IntChoice(right, left), left)
    )
    to_right = AxiomStep(AxiomId.Must1, both, right)
    return trans(
        AxiomStep(AxiomId.P1, both, ProbChoice(p, both, both), reverse=True),
        cong("prob", [to_left, to_right], p=p),
    )


def derive_may3_dual(action: str, left: Term, right: Term, p: Fraction) -> Derivation:
    """
    ``a.P |+p| a.Q <= a.(P |+p| Q)`` in the must theory from ``I1`` and ``Must2``.
    """
    spread = ProbChoice(p, Prefix(action, left), Prefix(action, right))
    doubled = IntChoice(spread, spread)
    return trans(
        AxiomStep(AxiomId.I1, spread, doubled, reverse=True),
        AxiomStep(AxiomId.Must2, doubled, Prefix(action, ProbChoice(p, left, right))),
    )


# synthesis


class _Synthesizer:
    """
    Builds derivations in one theory over one shared pLTS.  Lemmas about weak moves are stated for may as
    ``derivative <= origin`` and for must as ``origin <= derivative``; ``chain`` and ``link`` orient them.
    """

    def __init__(self, theory: Theory) -> None:
        self.theory = theory
        self.plts = PLTS()

    @property
    def may(self) -> bool:
        return self.theory is Theory.may

    def term(self, dist: Dist) -> Term:
        return dist_term(self.plts, dist)

    def state_term(self, dist: Dist) -> Optional[Term]:
        return self.plts.term(dist.support()[0]) if dist.is_point else None

    def chain(self, *steps: Derivation) -> Derivation:
        """
        Steps listed from the derivative towards the origin.
        """
        return trans(*steps) if self.may else trans(*reversed(steps))

    def link(self, derivative: Term, origin: Term) -> Derivation:
        return link(derivative, origin) if self.may else link(origin, derivative)

    # weak internal moves

    def strong_tau(self, state: Term, target: Dist) -> Derivation:
        """
        For ``state --tau--> target``: ``term(target) <= state`` (may), ``state <= term(target)`` (must).
        """
        plts = self.plts
        derivative = self.term(target)
        if isinstance(state, IntChoice):
            for chosen, other, first in ((state.left, state.right, True), (state.right, state.left, False)):
                if plts.add(chosen) != target:
                    continue
                if self.may:
                    step = AxiomStep(AxiomId.May1, chosen, IntChoice(chosen, other))
                    if not first:
                        step = trans(step, AxiomStep(AxiomId.I2, IntChoice(chosen, other), state))
                else:
                    step = AxiomStep(AxiomId.Must1, state, chosen)
                    if first:
                        step = trans(AxiomStep(AxiomId.I2, state, IntChoice(other, chosen)), AxiomStep(
                            AxiomId.Must1, IntChoice(other, chosen), chosen
                        ))
                return self.chain(self.link(derivative, chosen), step)

        if isinstance(state, ExtChoice):
            for side in (0, 1):
                operand = state.left if side == 0 else state.right
                operand_state = plts.intern(operand)
                for label, operand_target in plts.step(operand_state):
                    if label != TAU:
                        continue
                    if side == 0:
                        wrapped = operand_target.map_states(lambda t: plts.intern(ExtChoice(plts.term(t), state.right)))
                    else:
                        wrapped = operand_target.map_states(lambda t: plts.intern(ExtChoice(state.left, plts.term(t))))
                    if wrapped != target:
                        continue
                    inner = self.strong_tau(operand, operand_target)
                    moved = self.term(operand_target)
                    if side == 0:
                        combined = ExtChoice(moved, state.right)
                        lifted = cong("ext", [inner, Refl(state.right)])
                    else:
                        combined = ExtChoice(state.left, moved)
                        lifted = cong("ext", [Refl(state.left), inner])
                    return self.chain(self.link(derivative, combined), lifted)

        raise InvariantViolation("no internal move of {} reaches {!r}".format(state, target))

    def tau_lemma(self, origin: Term, target: Dist) -> Derivation:
        """
        For ``[origin] ==tau==> target``: ``term(target) <= origin`` (may), ``origin <= term(target)`` (must).
        """
        plts = self.plts
        source = plts.add(origin)
        witness = weak_witness(plts, source, target)
        if witness is None:
            raise InvariantViolation("{!r} is not a weak internal derivative of {}".format(target, origin))
        flow = witness.first
        memo = {}

        def state_result(state: int) -> Tuple[Dist, Derivation]:
            if state in memo:
                return memo[state]
            state_term = plts.term(state)
            options = flow.policy(state)
            if options == [(None, Fraction(1))]:
                memo[state] = (Dist({state: 1}), Refl(state_term))
                return memo[state]

            parts, reached = [], {}
            for index, p in options:
                if index is None:
                    parts.append((p, Refl(state_term)))
                    reached_dist = Dist({state: 1})
                else:
                    successor = plts.step(state)[index][1]
                    reached_dist, inner = dist_result(successor)
                    parts.append((p, self.chain(inner, self.strong_tau(state_term, successor))))
                for other, q in reached_dist.items():
                    reached[other] = reached.get(other, Fraction(0)) + p * q

            result = Dist(reached)
            if self.may:
                combined = cong_prob_sum(parts)
                summed, collapsed = combined.lhs, combined.rhs
            else:
                combined = cong_prob_sum(parts)
                summed, collapsed = combined.rhs, combined.lhs
            memo[state] = (
                result,
                self.chain(self.link(self.term(result), summed), combined, self.link(collapsed, state_term)),
            )
            return memo[state]

        def dist_result(dist: Dist) -> Tuple[Dist, Derivation]:
            parts, reached = [], {}
            for state, p in sorted(dist.items(), key=lambda item: plts.term(item[0]).unparse()):
                state_dist, derivation = state_result(state)
                parts.append((p, derivation))
                for other, q in state_dist.items():
                    reached[other] = reached.get(other, Fraction(0)) + p * q
            result = Dist(reached)
            combined = cong_prob_sum(parts)
            summed = combined.lhs if self.may else combined.rhs
            origin_side = combined.rhs if self.may else combined.lhs
            return result, self.chain(
                self.link(self.term(result), summed), combined, self.link(origin_side, self.term(dist))
            )

        reached, derivation = dist_result(source)
        if reached != target:
            raise InvariantViolation("flow decomposition reached {!r} instead of {!r}".format(reached, target))
        return self.chain(derivation, self.link(self.term(source), origin))

    # weak visible moves, may only

    def strong_action(self, state: Term, action: str, target: Dist) -> Derivation:
        """
        For ``state --a--> target``: ``a.term(target) <= state`` in the may theory.
        """
        plts = self.plts
        derivative = self.term(target)
        if isinstance(state, Prefix) and state.action == action and plts.add(state.body) == target:
            return cong("prefix", [link(derivative, state.body)], action=action)
        if isinstance(state, ExtChoice):
            for first in (True, False):
                operand, other = (state.left, state.right) if first else (state.right, state.left)
                if (action, target) not in plts.step(plts.intern(operand)):
                    continue
                inner = self.strong_action(operand, action, target)
                padded = ExtChoice(operand, NIL)
                steps = [
                    inner,
                    AxiomStep(AxiomId.E1, operand, padded, reverse=True),
                    cong("ext", [Refl(operand), AxiomStep(AxiomId.May2, NIL, other)]),
                ]
                if not first:
                    steps.append(AxiomStep(AxiomId.E2, ExtChoice(operand, other), state))
                return trans(*steps)
        raise InvariantViolation("no {} move of {} reaches {!r}".format(action, state, target))

    def _push_prefix(self, action: str, parts: Sequence[Tuple[Fraction, Term]], mass: Fraction) -> Derivation:
        """
        ``a.(+)_k p_k X_k <= (+)_k p_k a.X_k`` by repeated ``May3``, following the nesting of ``prob_sum``.
        """
        p, first = parts[0]
        if len(parts) == 1:
            return Refl(Prefix(action, first))
        rest = [(q / (mass - p), term) for q, term in parts[1:]]
        rest_term = prob_sum(rest)
        weight = p / mass
        step = AxiomStep(
            AxiomId.May3,
            Prefix(action, ProbChoice(weight, first, rest_term)),
            ProbChoice(weight, Prefix(action, first), Prefix(action, rest_term)),
        )
        pushed = self._push_prefix(action, rest, Fraction(1))
        return trans(step, cong("prob", [Refl(Prefix(action, first)), pushed], p=weight))

    def action_lemma(self, origin: Term, action: str, target: Dist) -> Derivation:
        """
        For ``[origin] ==a==> target``: ``a.term(target) <= origin`` in the may theory.
        """
        plts = self.plts
        source = plts.add(origin)
        witness = weak_witness(plts, source, target, action)
        if witness is None:
            raise InvariantViolation("{!r} is not a weak {} derivative of {}".format(target, action, origin))

        after = witness.after
        before = witness.before
        settle = cong("prefix", [self.tau_lemma(self.term(after), target)], action=action)

        firing = witness.firing
        spread_parts = [(mass, self.term(dist)) for _, mass, dist in firing]
        spread = prob_sum(spread_parts)
        regroup = cong("prefix", [link(self.term(after), spread)], action=action)
        pushed = self._push_prefix(action, spread_parts, Fraction(1))
        fired = cong_prob_sum(
            [(mass, self.strong_action(plts.term(state), action, dist)) for state, mass, dist in firing]
        )
        collapse = link(fired.rhs, self.term(before))
        return trans(settle, regroup, pushed, fired, collapse, self.tau_lemma(origin, before))

    # may theory

    def may_general(self, left: Term, right: Term) -> Derivation:
        plts = self.plts
        left_dist, right_dist = plts.add(left), plts.add(right)
        if left_dist.is_point:
            state = self.state_term(left_dist)
            return trans(link(left, state), self.may_state(state, right))

        formula = char_formula(plts, left_dist, Logic.L)
        witness = sat_witness(plts, right_dist, formula)
        if witness is None:
            raise InvariantViolation("{} is not simulated by {}".format(left, right))
        ordered = sorted(left_dist.items(), key=lambda item: plts.term(item[0]).unparse())
        by_state = {
            state: (p, self.may_state(plts.term(state), self.term(component)))
            for (state, p), component in zip(left_dist.items(), witness.components)
        }
        combined = cong_prob_sum([by_state[state] for state, _ in ordered])
        return trans(
            link(left, combined.lhs),
            combined,
            link(combined.rhs, self.term(witness.derivative)),
            self.tau_lemma(right, witness.derivative),
        )

    def may_state(self, state: Term, right: Term) -> Derivation:
        normal, d_normal = _head_normal_form(state, deep=False)
        return trans(d_normal, self.may_normal(normal, right))

    def _prefixes_to_int(self, term: Term) -> Tuple[Term, Derivation]:
        """
        Rewrites an external choice of two or more prefixes into an internal choice of prefixes with ``May0`` and
        ``D2``.
        """
        head, rest = term.left, term.right
        if isinstance(rest, Prefix):
            converted = IntChoice(head, rest)
            return converted, AxiomStep(AxiomId.May0, term, converted)
        inner, d_inner = self._prefixes_to_int(rest)
        distributed, d_distributed = self._distribute_prefix(head, inner)
        return distributed, trans(cong("ext", [Refl(head), d_inner]), d_distributed)

    def _distribute_prefix(self, head: Prefix, term: Term) -> Tuple[Term, Derivation]:
        if isinstance(term, Prefix):
            converted = IntChoice(head, term)
            return converted, AxiomStep(AxiomId.May0, ExtChoice(head, term), converted)
        first, d_first = self._distribute_prefix(head, term.left)
        second, d_second = self._distribute_prefix(head, term.right)
        step = AxiomStep(
            AxiomId.D2, ExtChoice(head, term), IntChoice(ExtChoice(head, term.left), ExtChoice(head, term.right))
        )
        return IntChoice(first, second), trans(step, cong("int", [d_first, d_second]))

    def may_normal(self, normal: Term, right: Term) -> Derivation:
        if isinstance(normal, IntChoice):
            parts = cong("int", [self.may_general(normal.left, right), self.may_general(normal.right, right)])
            return trans(parts, AxiomStep(AxiomId.I1, IntChoice(right, right), right))
        if isinstance(normal, Nil):
            return AxiomStep(AxiomId.May2, normal, right)
        if isinstance(normal, ExtChoice):
            converted, d_converted = self._prefixes_to_int(normal)
            return trans(d_converted, self.may_normal(converted, right))

        plts = self.plts
        body_formula = char_formula(plts, plts.add(normal.body), Logic.L)
        witness = sat_witness(plts, plts.add(right), Diamond(normal.action, body_formula))
        if witness is None:
            raise InvariantViolation("{} is not simulated by {}".format(normal, right))
        derivative = witness.derivative
        inner = self.may_general(normal.body, self.term(derivative))
        return trans(cong("prefix", [inner], action=normal.action), self.action_lemma(right, normal.action, derivative))

    # must theory

    def must_general(self, left: Term, right: Term) -> Derivation:
        plts = self.plts
        left_dist, right_dist = plts.add(left), plts.add(right)
        if right_dist.is_point:
            state = self.state_term(right_dist)
            return trans(self.must_state(left, state), link(state, right))

        formula = char_formula(plts, right_dist, Logic.F)
        witness = sat_witness(plts, left_dist, formula)
        if witness is None:
            raise InvariantViolation("{} does not failure-simulate {}".format(left, right))
        ordered = sorted(right_dist.items(), key=lambda item: plts.term(item[0]).unparse())
        by_state = {
            state: (p, self.must_state(self.term(component), plts.term(state)))
            for (state, p), component in zip(right_dist.items(), witness.components)
        }
        combined = cong_prob_sum([by_state[state] for state, _ in ordered])
        return trans(
            self.tau_lemma(left, witness.derivative),
            link(self.term(witness.derivative), combined.lhs),
            combined,
            link(combined.rhs, right),
        )

    def must_state(self, left: Term, state: Term) -> Derivation:
        normal, d_normal = _head_normal_form(state, deep=False)
        return trans(self.must_normal(left, normal), Sym(d_normal) if not isinstance(d_normal, Refl) else d_normal)

    def _duplicate(self, term: Term, copies: int) -> Derivation:
        """
        ``R = R |~| (R |~| ...)`` with ``copies`` occurrences, by ``I1`` from right to left.
        """
        if copies == 1:
            return Refl(term)
        step = AxiomStep(AxiomId.I1, term, IntChoice(term, term), reverse=True)
        return trans(step, cong("int", [Refl(term), self._duplicate(term, copies - 1)]))

    def must_normal(self, left: Term, normal: Term) -> Derivation:
        if isinstance(normal, IntChoice):
            parts = cong("int", [self.must_general(left, normal.left), self.must_general(left, normal.right)])
            return trans(AxiomStep(AxiomId.I1, left, IntChoice(left, left), reverse=True), parts)

        plts = self.plts
        prefixes = _ext_prefixes(normal)
        left_dist = plts.add(left)
        for prefix in prefixes:
            plts.add(prefix.body)
        refused = (plts.alphabet() | left.actions()) - {prefix.action for prefix in prefixes}
        stable = plts.refusal_witness(left_dist, refused)
        if stable is None:
            raise InvariantViolation("{} cannot refuse {}".format(left, sorted(refused)))
        settled = self.term(stable)

        pre, before_terms, posts, after_terms = [self.tau_lemma(left, stable)], [settled], [], []
        for prefix in prefixes:
            formula = Diamond(prefix.action, char_formula(plts, plts.add(prefix.body), Logic.F))
            found = sat_witness(plts, left_dist, formula)
            if found is None:
                raise InvariantViolation("{} cannot match {}".format(left, prefix))
            witness = weak_witness(plts, left_dist, found.derivative, prefix.action)
            before, after = witness.before, witness.after
            pre.append(self.tau_lemma(left, before))
            before_terms.append(self.term(before))
            after_terms.append(self.term(after))
            posts.append(cong("prefix", [self.must_general(self.term(after), prefix.body)], action=prefix.action))

        if not prefixes:
            return trans(pre[0], AxiomStep(AxiomId.Must2p, settled, NIL))

        gathered = IntChoice(settled, int_sum(before_terms[1:]))
        reached = ext_sum([Prefix(prefix.action, term) for prefix, term in zip(prefixes, after_terms)])
        return trans(
            self._duplicate(left, len(prefixes) + 1),
            cong_chain("int", pre),
            AxiomStep(AxiomId.Must2p, gathered, reached),
            cong_chain("ext", posts),
        )


def _direct_axiom(left: Term, right: Term, theory: Theory) -> Optional[Derivation]:
    context = _SchemaContext()
    for axiom in sorted(allowed_axioms(theory), key=lambda a: a.value):
        if axiom is AxiomId.Must2p:
            continue
        if _match(axiom, left, right, context):
            return AxiomStep(axiom, left, right)
        if is_equation(axiom) and _match(axiom, right, left, context):
            return AxiomStep(axiom, left, right, reverse=True)
    return None


def synth_derivation(left: Term, right: Term, theory: Theory) -> Optional[Derivation]:
    """
    Searches for a derivation of ``left <= right``.

    :return: a derivation accepted by ``check_derivation`` when ``left`` is simulated (may) or failure simulated
        (must) by ``right``, otherwise None.
    :raises DerivationException: for terms with parallel composition or ``theory=Theory.eq``.
    :raises InvariantViolation: when a semantically valid goal yields no valid derivation.
    """
    if theory is Theory.eq:
        raise DerivationException("derivations are synthesised for the may and must theories only")
    for term in (left, right):
        if term.find_(Par):
            raise DerivationException("{} uses parallel composition".format(term))

    holds = sim_leq(left, right) if theory is Theory.may else fsim_leq(left, right)
    if not holds:
        return None
    if left == right:
        return Refl(left)

    derivation = _direct_axiom(left, right, theory)
    if derivation is None:
        synthesizer = _Synthesizer(theory)
        if theory is Theory.may:
            derivation = synthesizer.may_general(left, right)
        else:
            derivation = synthesizer.must_general(left, right)

    try:
        validate_derivation(derivation, theory)
    except DerivationException as e:
        raise InvariantViolation("synthesised derivation of {} <= {} is invalid: {}".format(left, right, e)) from e
    logger.debug("derived %s <= %s in %d steps", left, right, sum(1 for _ in derivation.steps()))
    return derivation


__all__ = [
    "Derivation",
    "Refl",
    "AxiomStep",
    "ProbStep",
    "Cong",
    "Trans",
    "Sym",
    "derivation_from_json",
    "allowed_axioms",
    "inits",
    "normal_form",
    "is_normal_form",
    "prob_normal_form",
    "dist_term",
    "check_derivation",
    "validate_derivation",
    "synth_derivation",
    "derive_may4",
    "derive_must_dual",
    "derive_may3_dual",
]
