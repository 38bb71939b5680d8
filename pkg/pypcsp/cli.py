"""
The ``pypcsp`` command.

Every command writes one report to standard output, as JSON (``--format json``) or as indented text.  Diagnostics go
to standard error through ``logging``.  Exit codes: 0 on success, 1 on a negative verdict, 2 on invalid input and
3 when an internal consistency check fails.
"""
import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence

from pypcsp.axioms import check_derivation, normal_form, synth_derivation
from pypcsp.corpus import TermGenerator, sample
from pypcsp.distribution import point
from pypcsp.enums import Direction, Flavour, Kind, Logic, SimKind, Theory
from pypcsp.geometry import compare, dominated_point_exists
from pypcsp.logic import char_formula, char_test, logic_query, sat
from pypcsp.parser import parse, parse_formula
from pypcsp.plts import PLTS, build
from pypcsp.resolutions import (
    Resolution,
    check_resolution,
    enumerate_deterministic_resolutions,
    resolution_failures,
    synthesize_resolution,
    w_of,
    w_set,
)
from pypcsp.simulation import SimCertificate, certificate_failures, check_certificate, fsim_leq, sim_leq
from pypcsp.terms import Term, classify, is_sugar
from pypcsp.testing import apply_test, flavours_for, order_for, outcome_report, results_vector
from pypcsp.utils import (
    CertificateException,
    DerivationException,
    DistributionException,
    FormulaException,
    GeometryException,
    InvariantViolation,
    ParseException,
    PLTSException,
    ResolutionException,
    SortException,
    format_fraction,
)

__author__ = "PyPCSP contributors"
__email__ = "pypcsp@example.org"

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_INVARIANT = 3

INPUT_ERRORS = (
    ParseException,
    SortException,
    DistributionException,
    GeometryException,
    PLTSException,
    FormulaException,
    CertificateException,
    ResolutionException,
    DerivationException,
)


class Report(dict):
    """
    A command's output together with its exit code.
    """

    def __init__(self, code: int = EXIT_OK, **fields: Any) -> None:
        super().__init__(fields)
        self.code = code


def _read(source: str) -> str:
    if os.path.isfile(source):
        with open(source, encoding="utf-8") as handle:
            return handle.read()
    return source


def _term(args: argparse.Namespace, source: str) -> Term:
    """
    Reads a term from a file, or takes the argument itself as a term when no such file exists.
    """
    return parse(_read(source), alphabet=args.alphabet)


def _verdict(holds: bool, **fields: Any) -> Report:
    return Report(EXIT_OK if holds else EXIT_NEGATIVE, verdict=holds, **fields)


def _vector(text: str) -> List[Fraction]:
    try:
        return [Fraction(value) for value in text.split(",")]
    except (ValueError, ZeroDivisionError) as e:
        raise ParseException("malformed vector {!r}".format(text)) from e


# commands


def cmd_parse(args: argparse.Namespace) -> Report:
    term = _term(args, args.term)
    classification = classify(term)
    return Report(
        term=str(term),
        sugar=is_sugar(term),
        term_class=classification.term_class.value,
        omega=list(classification.omega),
    )


def cmd_lts(args: argparse.Namespace) -> Report:
    plts, initial = build(_term(args, args.term))
    if args.dot:
        return Report(dot=plts.to_dot())
    return Report(initial=initial.to_json(), plts=plts.to_json())


def cmd_apply(args: argparse.Namespace) -> Report:
    application = apply_test(_term(args, args.test), _term(args, args.process))
    return Report(omega=list(application.omega), results=outcome_report(application, flavours_for(application)))


def cmd_outcomes(args: argparse.Namespace) -> Report:
    application = apply_test(_term(args, args.test), _term(args, args.process))
    flavour = Flavour(args.flavour)
    return Report(flavour=flavour.value, results=outcome_report(application, [flavour])[flavour.value])


def cmd_order(args: argparse.Namespace) -> Report:
    kind, flavour = Kind(args.kind), Flavour(args.flavour)
    test = _term(args, args.test)
    left = apply_test(test, _term(args, args.left)).outcomes(flavour)
    right = apply_test(test, _term(args, args.right)).outcomes(flavour)
    order = order_for(kind)
    return _verdict(
        compare(order, left, right), order=order.value, left=left.to_json(), right=right.to_json()
    )


def cmd_sim(args: argparse.Namespace) -> Report:
    left, right = _term(args, args.left), _term(args, args.right)
    verdict = fsim_leq(left, right) if args.must else sim_leq(left, right)
    fields = {"relation": "failure simulation" if args.must else "simulation", "formula": str(verdict.formula)}
    if verdict.test is not None:
        fields["test"] = str(verdict.test.test)
        fields["target"] = [format_fraction(v) for v in verdict.test.target]
        fields["omega"] = list(verdict.test.omega)
    return _verdict(verdict.holds, **fields)


def cmd_logic(args: argparse.Namespace) -> Report:
    query = logic_query(PLTS(), _term(args, args.left), _term(args, args.right), Logic(args.logic))
    return _verdict(query.holds, logic=args.logic, formula=str(query.formula))


def cmd_charform(args: argparse.Namespace) -> Report:
    plts, initial = build(_term(args, args.term))
    return Report(logic=args.logic, formula=str(char_formula(plts, initial, Logic(args.logic))))


def cmd_chartest(args: argparse.Namespace) -> Report:
    formula = parse_formula(_read(args.formula))
    found = char_test(formula)
    return Report(
        formula=str(formula),
        test=str(found.test),
        omega=list(found.omega),
        target=[format_fraction(v) for v in found.target],
    )


def cmd_normalize(args: argparse.Namespace) -> Report:
    term = _term(args, args.term)
    result, derivation = normal_form(term)
    report = Report(term=str(term), normal_form=str(result))
    if args.proof:
        report["derivation"] = derivation.to_json() if args.format == "json" else derivation.pretty()
    return report


def cmd_prove(args: argparse.Namespace) -> Report:
    theory = Theory(args.theory)
    left, right = _term(args, args.left), _term(args, args.right)
    derivation = synth_derivation(left, right, theory)
    if derivation is None:
        return _verdict(False, theory=theory.value)
    if not check_derivation(derivation, theory):
        raise InvariantViolation("derivation rejected by the checker")
    proof = derivation.to_json() if args.format == "json" else derivation.pretty()
    return _verdict(True, theory=theory.value, derivation=proof)


def cmd_resolutions(args: argparse.Namespace) -> Report:
    application = apply_test(_term(args, args.test), _term(args, args.process))
    plts, initial, omega = application.plts, application.initial, application.omega
    if args.target:
        resolution = synthesize_resolution(plts, initial, _vector(args.target), omega)
        if not check_resolution(resolution, initial):
            raise InvariantViolation("synthesised resolution is ill-formed")
        return Report(
            resolution=resolution.to_json(), success=[format_fraction(v) for v in w_of(resolution)]
        )
    resolutions = enumerate_deterministic_resolutions(plts, initial, omega)
    return Report(
        omega=list(omega),
        count=len(resolutions),
        outcomes=w_set(plts, initial, omega).to_json(),
    )


def _crosscheck_application(test: Term, process: Term) -> List[str]:
    failures = []
    application = apply_test(test, process)
    plts, initial, omega = application.plts, application.initial, application.omega
    expected = results_vector(plts, initial, omega)
    found = w_set(plts, initial, omega)
    if found != expected:
        failures.append("resolutions give {} but results-gathering gives {}".format(found, expected))
    for vertex in expected:
        resolution = synthesize_resolution(plts, initial, vertex, omega)
        if not check_resolution(resolution, initial) or tuple(w_of(resolution)) != tuple(vertex):
            failures.append("vertex {} is not realised by a valid resolution".format(vertex))
    return failures


def _crosscheck_process(process: Term, formulas: Sequence) -> List[str]:
    failures = []
    plts, initial = build(process)
    own = char_formula(plts, initial, Logic.F)
    if not sat(plts, initial, own):
        failures.append("{} does not satisfy its characteristic formula".format(process))
    for formula in [char_formula(plts, initial, Logic.L)] + list(formulas):
        holds = sat(plts, initial, formula)
        found = char_test(formula)
        application = apply_test(found.test, process, found.omega)
        outcomes = application.outcomes(Flavour.vector)
        if dominated_point_exists(outcomes, found.target, Direction.below) != holds:
            failures.append("characteristic test of {} disagrees with satisfaction".format(formula))
        if formula.is_L() and dominated_point_exists(outcomes, found.target, Direction.above) != holds:
            failures.append("characteristic test of {} disagrees with satisfaction from above".format(formula))
    return failures


def _crosscheck_certificate(left: Term, right: Term, data: str) -> List[str]:
    """
    A valid certificate pairing the state of ``left`` with ``[right]`` (simulation), or the state of ``right`` with
    ``[left]`` (failure simulation), proves the preorder; the logic route has to agree.
    """
    plts = PLTS()
    source, target = plts.add(left), plts.add(right)
    certificate = SimCertificate.from_json(data, plts)
    failures = ["certificate: {}".format(reason) for reason in certificate_failures(certificate)]
    if failures:
        return failures

    if certificate.kind is SimKind.simulation:
        claimed = source.is_point and (source.support()[0], target) in certificate.pairs
        decided = sim_leq(left, right).holds
    elif certificate.kind is SimKind.failure_simulation:
        claimed = target.is_point and (target.support()[0], source) in certificate.pairs
        decided = fsim_leq(left, right).holds
    else:
        claimed = decided = False
    if claimed and not decided:
        message = "a valid {} certificate relates {} and {} but the logic disagrees"
        failures.append(message.format(certificate.kind.value, left, right))
    return failures


def _crosscheck_identity(process: Term) -> List[str]:
    plts, initial = build(process)
    pairs = [(state, point(state)) for state in plts.reachable(initial)]
    failures = []
    for kind in (SimKind.simulation, SimKind.failure_simulation):
        if not check_certificate(SimCertificate(kind, plts, pairs)):
            failures.append("the identity relation on {} is not a {} certificate".format(process, kind.value))
    return failures


def _crosscheck_resolution(test: Term, process: Term, data: str) -> List[str]:
    application = apply_test(test, process)
    resolution = Resolution.from_json(data, application.plts)
    return ["resolution: {}".format(reason) for reason in resolution_failures(resolution, application.initial)]


def cmd_crosscheck(args: argparse.Namespace) -> Report:
    failures = []
    checked = 0
    if args.test and args.process:
        failures.extend(_crosscheck_application(_term(args, args.test), _term(args, args.process)))
        checked += 1
        if args.resolution:
            resolution = _read(args.resolution)
            failures.extend(_crosscheck_resolution(_term(args, args.test), _term(args, args.process), resolution))
            checked += 1
    if args.process:
        process = _term(args, args.process)
        failures.extend(_crosscheck_process(process, []))
        failures.extend(_crosscheck_identity(process))
        checked += 1
        if args.right and args.certificate:
            failures.extend(_crosscheck_certificate(process, _term(args, args.right), _read(args.certificate)))
            checked += 1

    if args.corpus:
        generator = TermGenerator(args.seed, alphabet=args.alphabet or ("a", "b"), max_depth=args.max_depth)
        for _ in range(args.corpus):
            process = generator.ncsp()
            failures.extend(_crosscheck_application(generator.vector_test(), process))
            failures.extend(_crosscheck_process(process, [generator.formula()]))
            failures.extend(_crosscheck_identity(process))
            checked += 1

    for failure in failures:
        logger.warning("crosscheck divergence: %s", failure)
    return Report(EXIT_INVARIANT if failures else EXIT_OK, checked=checked, failures=failures)


def cmd_corpus(args: argparse.Namespace) -> Report:
    kwargs = {"max_depth": args.max_depth}
    if args.alphabet:
        kwargs["alphabet"] = args.alphabet
    items = sample(args.kind, args.count, seed=args.seed, **kwargs)
    return Report(kind=args.kind, seed=args.seed, items=[str(item) for item in items])


# argument parsing


def _alphabet(text: str) -> List[str]:
    return sorted(action.strip() for action in text.split(",") if action.strip())


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "text"], default="text")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--alphabet", type=_alphabet, default=None, help="comma separated visible actions")
    common.add_argument("--max-depth", dest="max_depth", type=int, default=3)
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="pypcsp", description="Testing and simulation of finite probabilistic CSP.")
    commands = parser.add_subparsers(dest="command", required=True)

    def command(name: str, handler: Callable[[argparse.Namespace], Report], help: str) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, parents=[common], help=help)
        sub.set_defaults(handler=handler)
        return sub

    sub = command("parse", cmd_parse, "parse and classify a term")
    sub.add_argument("term")

    sub = command("lts", cmd_lts, "print the pLTS of a term")
    sub.add_argument("term")
    sub.add_argument("--dot", action="store_true")

    sub = command("apply", cmd_apply, "apply a test to a process")
    sub.add_argument("test")
    sub.add_argument("process")

    sub = command("outcomes", cmd_outcomes, "one flavour of outcomes of a test application")
    sub.add_argument("test")
    sub.add_argument("process")
    sub.add_argument("--flavour", choices=[f.value for f in Flavour], default=Flavour.vector.value)

    sub = command("order", cmd_order, "compare two processes under one test")
    sub.add_argument("--kind", choices=[k.value for k in Kind], required=True)
    sub.add_argument("--flavour", choices=[f.value for f in Flavour], default=Flavour.state.value)
    sub.add_argument("--test", required=True)
    sub.add_argument("left")
    sub.add_argument("right")

    sub = command("sim", cmd_sim, "decide simulation, or failure simulation with --must")
    sub.add_argument("--must", action="store_true")
    sub.add_argument("left")
    sub.add_argument("right")

    sub = command("logic", cmd_logic, "decide the logical preorder of L or F")
    sub.add_argument("--logic", choices=[l.value for l in Logic], default=Logic.F.value)
    sub.add_argument("left")
    sub.add_argument("right")

    sub = command("charform", cmd_charform, "characteristic formula of a term")
    sub.add_argument("--logic", choices=[l.value for l in Logic], default=Logic.F.value)
    sub.add_argument("term")

    sub = command("chartest", cmd_chartest, "characteristic test of a formula")
    sub.add_argument("formula")

    sub = command("normalize", cmd_normalize, "normal form of a parallel-free term")
    sub.add_argument("--proof", action="store_true")
    sub.add_argument("term")

    sub = command("prove", cmd_prove, "derive left <= right in the may or must theory")
    sub.add_argument("--theory", choices=[Theory.may.value, Theory.must.value], default=Theory.may.value)
    sub.add_argument("left")
    sub.add_argument("right")

    sub = command("resolutions", cmd_resolutions, "resolutions of a test application")
    sub.add_argument("--target", help="comma separated success tuple to realise")
    sub.add_argument("test")
    sub.add_argument("process")

    sub = command("crosscheck", cmd_crosscheck, "run the oracle equalities")
    sub.add_argument("--test")
    sub.add_argument("--process")
    sub.add_argument("--right", help="second process, related to --process by --certificate")
    sub.add_argument("--certificate", help="JSON simulation certificate over the pLTS of --process and --right")
    sub.add_argument("--resolution", help="JSON resolution of the application of --test to --process")
    sub.add_argument("--corpus", type=int, default=0, help="number of seeded corpus items to check")

    sub = command("corpus", cmd_corpus, "print seeded corpus items")
    sub.add_argument("--kind", choices=["term", "ncsp", "state", "test", "vector_test", "formula"], default="term")
    sub.add_argument("--count", type=int, default=10)

    return parser


def _render_text(value: Any, indent: int = 0) -> List[str]:
    pad = "  " * indent
    if isinstance(value, dict):
        lines = []
        for key in sorted(value):
            item = value[key]
            if isinstance(item, (dict, list)) and item:
                lines.append("{}{}:".format(pad, key))
                lines.extend(_render_text(item, indent + 1))
            else:
                lines.append("{}{}: {}".format(pad, key, _scalar(item)))
        return lines
    if isinstance(value, list):
        lines = []
        for item in value:
            if isinstance(item, (dict, list)):
                lines.append("{}-".format(pad))
                lines.extend(_render_text(item, indent + 1))
            else:
                lines.append("{}- {}".format(pad, _scalar(item)))
        return lines
    return ["{}{}".format(pad, line) for line in str(value).splitlines()]


def _scalar(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str) and "\n" in value:
        return "\n" + value
    return str(value)


def render(report: Dict[str, Any], format: str) -> str:
    if format == "json":
        return json.dumps(report, sort_keys=True, indent=2)
    return "\n".join(_render_text(report))


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    configure_logging(args.verbose)
    logger.info("running %s", args.command)
    try:
        report = args.handler(args)
    except InvariantViolation as e:
        logger.error("internal consistency check failed: %s", e)
        return EXIT_INVARIANT
    except INPUT_ERRORS as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except OSError as e:
        logger.error("%s", e)
        return EXIT_USAGE

    print(render(report, args.format))
    logger.info("%s finished with exit code %d", args.command, report.code)
    return report.code


if __name__ == "__main__":
    sys.exit(main())
