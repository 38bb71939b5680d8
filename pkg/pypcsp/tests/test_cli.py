import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from unittest import mock

from parameterized import parameterized

from pypcsp.cli import EXIT_INVARIANT, EXIT_NEGATIVE, EXIT_OK, EXIT_USAGE, main
from pypcsp.distribution import point
from pypcsp.enums import SimKind
from pypcsp.parser import parse
from pypcsp.plts import PLTS
from pypcsp.resolutions import synthesize_resolution
from pypcsp.simulation import SimCertificate
from pypcsp.terms import NIL
from pypcsp.testing import apply_test
from pypcsp.tests import P_C_TEXT, P_FIG_TEXT, Q_C_TEXT, Q_FIG_TEXT, T_C_TEXT, T_FIG_TEXT, Qc, Tc
from pypcsp.utils import InvariantViolation

__author__ = "PyPCSP contributors"
__email__ = "pypcsp@example.org"


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue()


def run_json(*argv):
    code, output = run(*argv, "--format", "json")
    return code, json.loads(output) if output else None


class ExitCodeTests(unittest.TestCase):
    @parameterized.expand(
        [
            ("may_holds", ["sim", P_C_TEXT, Q_C_TEXT], EXIT_OK),
            ("may_fails", ["sim", Q_C_TEXT, P_C_TEXT], EXIT_NEGATIVE),
            ("must_holds", ["sim", "--must", Q_C_TEXT, P_C_TEXT], EXIT_OK),
            ("must_fails", ["sim", "--must", P_C_TEXT, Q_C_TEXT], EXIT_NEGATIVE),
            ("must_fails_on_ext_choice", ["sim", "--must", "(a |+1/2| b) [] (a |+1/2| b)", P_C_TEXT], EXIT_NEGATIVE),
            ("order_holds", ["order", "--kind", "may", "--test", T_FIG_TEXT, Q_FIG_TEXT, P_FIG_TEXT], EXIT_OK),
            ("order_fails", ["order", "--kind", "may", "--test", T_FIG_TEXT, P_FIG_TEXT, Q_FIG_TEXT], EXIT_NEGATIVE),
            ("logic_fails", ["logic", "--logic", "F", P_C_TEXT, Q_C_TEXT], EXIT_NEGATIVE),
            ("syntax_error", ["parse", "a |~|"], EXIT_USAGE),
            ("action_outside_alphabet", ["parse", "c", "--alphabet", "a,b"], EXIT_USAGE),
            ("no_command", [], EXIT_USAGE),
            ("unknown_flavour", ["outcomes", "--flavour", "both", T_C_TEXT, P_C_TEXT], EXIT_USAGE),
            ("process_succeeds", ["apply", T_C_TEXT, T_C_TEXT], EXIT_USAGE),
            ("unreachable_target", ["resolutions", "--target", "1,1", T_C_TEXT, Q_C_TEXT], EXIT_USAGE),
            ("malformed_target", ["resolutions", "--target", "1,x", T_C_TEXT, Q_C_TEXT], EXIT_USAGE),
        ]
    )
    def test_exit_code(self, _, argv, expected):
        code, _ = run(*argv)

        self.assertEqual(expected, code)

    def test_internal_error(self):
        with mock.patch("pypcsp.cli.synth_derivation", side_effect=InvariantViolation("broken")):
            code, output = run("prove", P_C_TEXT, Q_C_TEXT)

        self.assertEqual(EXIT_INVARIANT, code)
        self.assertEqual("", output)


class CommandTests(unittest.TestCase):
    def test_parse(self):
        code, report = run_json("parse", "tau.a")

        self.assertEqual(EXIT_OK, code)
        self.assertEqual("a |~| a", report["term"])
        self.assertEqual("process", report["term_class"])

    def test_parse_from_file(self):
        with tempfile.NamedTemporaryFile("w", suffix=".pcsp", delete=False) as handle:
            handle.write("# a vector test\n" + T_C_TEXT + "\n")
        try:
            code, report = run_json("parse", handle.name)
        finally:
            os.unlink(handle.name)

        self.assertEqual(EXIT_OK, code)
        self.assertEqual("vector-test", report["term_class"])
        self.assertEqual(["omega1", "omega2"], report["omega"])

    def test_lts_dot(self):
        code, report = run_json("lts", "--dot", "a")

        self.assertEqual(EXIT_OK, code)
        self.assertTrue(report["dot"].startswith("digraph"))

    def test_apply(self):
        code, report = run_json("apply", T_C_TEXT, Q_C_TEXT)

        self.assertEqual(EXIT_OK, code)
        self.assertEqual(["omega1", "omega2"], report["omega"])
        self.assertEqual([["0", "1"], ["1", "0"]], report["results"]["vector"]["outcomes"]["points"])

    def test_outcomes(self):
        code, report = run_json("outcomes", "--flavour", "state", T_FIG_TEXT, Q_FIG_TEXT)

        self.assertEqual(EXIT_OK, code)
        self.assertEqual([["1/2"]], report["results"]["outcomes"]["points"])

    def test_sim_reports_distinguishing_test(self):
        code, report = run_json("sim", Q_C_TEXT, P_C_TEXT)

        self.assertEqual(EXIT_NEGATIVE, code)
        self.assertFalse(report["verdict"])
        self.assertIn("test", report)

    def test_text_format(self):
        code, output = run("sim", P_C_TEXT, Q_C_TEXT)

        self.assertEqual(EXIT_OK, code)
        self.assertIn("verdict: true", output.splitlines())
        self.assertIn("relation: simulation", output.splitlines())

    def test_chartest(self):
        code, report = run_json("chartest", "<a>tt")

        self.assertEqual(EXIT_OK, code)
        self.assertEqual("omega2 [] a.omega1", report["test"])
        self.assertEqual(["1", "0"], report["target"])

    def test_normalize(self):
        code, report = run_json("normalize", "--proof", "a [] (b |~| c)")

        self.assertEqual(EXIT_OK, code)
        self.assertEqual("(a [] b) |~| (a [] c)", report["normal_form"])
        self.assertEqual("D2", report["derivation"]["axiom"])

    def test_prove(self):
        code, report = run_json("prove", "--theory", "must", Q_C_TEXT, P_C_TEXT)

        self.assertEqual(EXIT_OK, code)
        self.assertTrue(report["verdict"])
        self.assertIn("rule", report["derivation"])

    def test_resolutions(self):
        code, report = run_json("resolutions", T_C_TEXT, Q_C_TEXT)

        self.assertEqual(EXIT_OK, code)
        self.assertEqual(2, report["count"])

    def test_resolution_for_target(self):
        code, report = run_json("resolutions", "--target", "1/2,1/2", T_C_TEXT, Q_C_TEXT)

        self.assertEqual(EXIT_OK, code)
        self.assertEqual(["1/2", "1/2"], report["success"])

    def test_crosscheck(self):
        code, report = run_json("crosscheck", "--test", T_C_TEXT, "--process", Q_C_TEXT)

        self.assertEqual(EXIT_OK, code)
        self.assertEqual(2, report["checked"])
        self.assertEqual([], report["failures"])

    def test_corpus(self):
        code, report = run_json("corpus", "--kind", "ncsp", "--count", "3", "--seed", "4")

        self.assertEqual(EXIT_OK, code)
        self.assertEqual(3, len(report["items"]))
        self.assertEqual(report, run_json("corpus", "--kind", "ncsp", "--count", "3", "--seed", "4")[1])


class CrosscheckFileTests(unittest.TestCase):
    def write(self, data):
        with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as handle:
            json.dump(data, handle)
        self.addCleanup(os.unlink, handle.name)
        return handle.name

    def test_valid_certificate_agrees_with_logic(self):
        plts = PLTS()
        source, target = plts.add(parse("a")), plts.add(Qc)
        nil = plts.intern(NIL)
        certificate = SimCertificate(SimKind.simulation, plts).pair(source.support()[0], target).pair(nil, point(nil))

        code, report = run_json(
            "crosscheck", "--process", "a", "--right", Q_C_TEXT, "--certificate", self.write(certificate.to_json())
        )

        self.assertEqual(EXIT_OK, code)
        self.assertEqual(2, report["checked"])

    def test_invalid_certificate_is_reported(self):
        plts = PLTS()
        source, target = plts.add(parse("a")), plts.add(Qc)
        certificate = SimCertificate(SimKind.simulation, plts).pair(source.support()[0], target)

        code, report = run_json(
            "crosscheck", "--process", "a", "--right", Q_C_TEXT, "--certificate", self.write(certificate.to_json())
        )

        self.assertEqual(EXIT_INVARIANT, code)
        self.assertTrue(any(failure.startswith("certificate:") for failure in report["failures"]))

    def test_corrupted_resolution_is_reported(self):
        application = apply_test(Tc, Qc)
        resolution = synthesize_resolution(application.plts, application.initial, (1, 0), application.omega)
        data = resolution.to_json()
        for node in data["nodes"]:
            node["move"] = None

        code, report = run_json(
            "crosscheck", "--test", T_C_TEXT, "--process", Q_C_TEXT, "--resolution", self.write(data)
        )

        self.assertEqual(EXIT_INVARIANT, code)
        self.assertTrue(any(failure.startswith("resolution:") for failure in report["failures"]))
