"""
Simulation and failure simulation.

The preorders are decided through the characteristic formulas of ``pypcsp.logic``.  Finite relations supplied from
outside, as ``SimCertificate`` objects, are checked clause by clause.
"""
import functools
import json
import logging
from fractions import Fraction
from typing import Any, Dict, FrozenSet, Iterable, Iterator, List, NamedTuple, Optional, Tuple, Union

from pypcsp.distribution import Dist, StateId
from pypcsp.enums import Logic, SimKind
from pypcsp.geometry import LinearProgram
from pypcsp.logic import CharTest, Formula, SatWitness, char_test, logic_query, sat_witness
from pypcsp.plts import PLTS, DistPolytope
from pypcsp.terms import Term
from pypcsp.utils import CertificateException, builder

__author__ = "PyPCSP contributors"
__email__ = "pypcsp@example.org"

logger = logging.getLogger(__name__)


class Verdict(NamedTuple):
    """
    The answer to a preorder question.  ``formula`` is the characteristic formula that was checked; a negative
    answer also carries its characteristic test, which tells the two processes apart by testing.
    """

    holds: bool
    formula: Formula
    test: Optional[CharTest] = None
    witness: Optional[SatWitness] = None

    def __bool__(self) -> bool:
        return self.holds


@functools.lru_cache(maxsize=512)
def _decide(left: Term, right: Term, logic: Logic, alphabet: FrozenSet[str]) -> Verdict:
    plts = PLTS()
    query = logic_query(plts, left, right, logic, alphabet)
    if not query.holds:
        logger.debug("%s fails for %s and %s", logic.value, left, right)
        return Verdict(False, query.formula, char_test(query.formula))
    return Verdict(True, query.formula, None, sat_witness(plts, query.subject, query.formula))


def sim_leq(left: Term, right: Term, alphabet: Optional[Iterable[str]] = None) -> Verdict:
    """
    The simulation preorder: ``[right]`` satisfies the L-characteristic formula of ``[left]``.
    """
    return _decide(left, right, Logic.L, frozenset(alphabet or ()))


def fsim_leq(left: Term, right: Term, alphabet: Optional[Iterable[str]] = None) -> Verdict:
    """
    The failure simulation preorder: ``[left]`` satisfies the F-characteristic formula of ``[right]``.  Note the
    opposing direction with respect to ``sim_leq``.
    """
    return _decide(left, right, Logic.F, frozenset(alphabet or ()))


def sim_eq(left: Term, right: Term, alphabet: Optional[Iterable[str]] = None) -> bool:
    return bool(sim_leq(left, right, alphabet)) and bool(sim_leq(right, left, alphabet))


def fsim_eq(left: Term, right: Term, alphabet: Optional[Iterable[str]] = None) -> bool:
    return bool(fsim_leq(left, right, alphabet)) and bool(fsim_leq(right, left, alphabet))


class SimCertificate:
    """
    A finite relation between states and distributions of one pLTS, claimed to be a simulation of the given kind.

    .. code-block:: python

        certificate = SimCertificate(SimKind.simulation, plts).pair(s, theta).pair(t, delta)
    """

    def __init__(
        self,
        kind: SimKind,
        plts: PLTS,
        pairs: Iterable[Tuple[StateId, Dist]] = (),
        alphabet: Iterable[str] = (),
        immutable: bool = True,
    ) -> None:
        self.kind = kind
        self.plts = plts
        self.pairs = list(pairs)
        self.alphabet = frozenset(alphabet)
        self.immutable = immutable

    def __copy__(self) -> "SimCertificate":
        new = type(self).__new__(type(self))
        new.__dict__.update(self.__dict__)
        new.pairs = list(self.pairs)
        return new

    @builder
    def pair(self, state: StateId, dist: Dist) -> "SimCertificate":
        self.pairs.append((state, dist))

    def __iter__(self) -> Iterator[Tuple[StateId, Dist]]:
        return iter(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def to_json(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "alphabet": sorted(self.alphabet),
            "pairs": [{"state": state, "dist": dist.to_json()} for state, dist in self.pairs],
        }

    @classmethod
    def from_json(cls, data: Union[str, Dict[str, Any]], plts: PLTS) -> "SimCertificate":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            return cls(
                SimKind(data["kind"]),
                plts,
                [(int(item["state"]), Dist.from_json(item["dist"])) for item in data["pairs"]],
                data.get("alphabet", ()),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise CertificateException("malformed certificate {!r}".format(data)) from e


def _lifts_into(pairs: List[Tuple[StateId, Dist]], source: Dist, polytope: DistPolytope) -> bool:
    """
    Decides whether ``source`` is related by the lifted relation ``pairs`` to some point of ``polytope``, by one
    linear program over the vertex weights of the polytope and the lifting weights of the pairs.
    """
    if polytope.is_empty:
        return False
    candidates = [(s, phi) for s, phi in pairs if s in source]
    if any(not any(s == state for s, _ in candidates) for state in source):
        return False

    program = LinearProgram()
    vertices = list(polytope)
    mixing = program.new_vars(len(vertices), prefix="l")
    weights = program.new_vars(len(candidates), prefix="w")
    program.add_eq({v: 1 for v in mixing}, 1)

    for state, p in source.items():
        program.add_eq({w: 1 for w, (s, _) in zip(weights, candidates) if s == state}, p)

    states = {t for vertex in vertices for t in vertex} | {t for _, phi in candidates for t in phi}
    for t in sorted(states):
        row = {w: phi.weight(t) for w, (_, phi) in zip(weights, candidates) if t in phi}
        for v, vertex in zip(mixing, vertices):
            if t in vertex:
                row[v] = row.get(v, Fraction(0)) - vertex.weight(t)
        program.add_eq(row, 0)
    return program.is_feasible()


def _check_references(certificate: SimCertificate) -> None:
    size = len(certificate.plts)
    for state, dist in certificate.pairs:
        if not 0 <= state < size or any(not 0 <= t < size for t in dist):
            raise CertificateException("pair ({}, {!r}) refers to states outside the pLTS".format(state, dist))


def certificate_failures(certificate: SimCertificate) -> Iterator[str]:
    """
    Yields a description of every violated clause.

    :raises CertificateException: when a pair refers to states outside the pLTS.
    """
    _check_references(certificate)
    plts, kind = certificate.plts, certificate.kind
    omega_avoiding = kind is SimKind.e_failure_simulation
    act = plts.alphabet() | certificate.alphabet

    for state, dist in certificate.pairs:
        if omega_avoiding and plts.has_success(state):
            continue
        for label, target in plts.step(state):
            derivatives = plts.weak_a_derivatives(dist, label, omega_avoiding)
            if not _lifts_into(certificate.pairs, target, derivatives):
                yield "state {} --{}--> {!r} is not matched by {!r}".format(state, label, target, dist)

        if kind is SimKind.simulation or not plts.is_stable(state):
            continue
        if omega_avoiding:
            refused = (act | plts.success_alphabet()) - plts.labels(state)
        else:
            refused = act - plts.labels(state)
        if not plts.can_weakly_refuse(dist, refused, omega_avoiding):
            yield "refusal of {{{}}} by state {} is not matched by {!r}".format(
                ",".join(sorted(refused)), state, dist
            )


def check_certificate(certificate: SimCertificate) -> bool:
    for reason in certificate_failures(certificate):
        logger.debug("certificate rejected: %s", reason)
        return False
    return True


def validate_certificate(certificate: SimCertificate) -> None:
    for reason in certificate_failures(certificate):
        raise CertificateException(reason)


def certificate_for_terms(
    kind: SimKind, pairs: Iterable[Tuple[Term, Term]], plts: Optional[PLTS] = None
) -> SimCertificate:
    """
    Builds a certificate from pairs of terms: the left term of each pair must be state-based, the right one is
    interpreted as a distribution.
    """
    plts = plts or PLTS()
    certificate = SimCertificate(kind, plts, immutable=False)
    for left, right in pairs:
        source = plts.add(left)
        if not source.is_point:
            raise CertificateException("{} does not denote a state".format(left))
        certificate.pair(source.support()[0], plts.add(right))
    return certificate


__all__ = [
    "Verdict",
    "SimCertificate",
    "check_certificate",
    "validate_certificate",
    "certificate_failures",
    "certificate_for_terms",
    "sim_leq",
    "fsim_leq",
    "sim_eq",
    "fsim_eq",
]
