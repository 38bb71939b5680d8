import unittest
from fractions import Fraction

from parameterized import parameterized

from pypcsp.distribution import mix, point
from pypcsp.enums import Direction, Logic
from pypcsp.geometry import dominated_point_exists
from pypcsp.logic import (
    Conj,
    Diamond,
    ProbSum,
    Ref,
    Top,
    char_formula,
    char_test,
    formula_from_json,
    logic_leq,
    logic_query,
    sat,
    sat_witness,
    simplify,
    weak_witness,
)
from pypcsp.parser import parse, parse_formula
from pypcsp.plts import PLTS, build
from pypcsp.testing import apply_test
from pypcsp.tests import Pc, Qc
from pypcsp.utils import FormulaException

__author__ = "PyPCSP contributors"
__email__ = "pypcsp@example.org"

half = Fraction(1, 2)


class FormulaTests(unittest.TestCase):
    def test_tau_cannot_be_refused(self):
        with self.assertRaises(FormulaException):
            Ref(["tau"])

    def test_tau_diamond(self):
        with self.assertRaises(FormulaException):
            Diamond("tau", Top())

    def test_probabilistic_weights(self):
        with self.assertRaises(FormulaException):
            ProbSum([(half, Top()), (Fraction(1, 3), Top())])

    def test_zero_weight_summands_are_dropped(self):
        self.assertEqual(ProbSum([(1, Top())]), ProbSum([(1, Top()), (0, Ref(["a"]))]))

    def test_logic_membership(self):
        self.assertTrue(parse_formula("<a>tt & (1/2*<b>tt (+) 1/2*tt)").is_L())
        self.assertFalse(parse_formula("<a>ref{b}").is_L())

    def test_depth_and_actions(self):
        formula = parse_formula("<a><b>tt & ref{c}")

        self.assertEqual(2, formula.depth())
        self.assertEqual({"a", "b", "c"}, formula.actions())

    def test_unparse(self):
        formula = Conj([Diamond("a", Conj([Ref(["a", "b"])])), Ref(["b"])])

        self.assertEqual("<a>ref{a,b} & ref{b}", formula.unparse())

    def test_json(self):
        formula = parse_formula("<a>(1/3*ref{b} (+) 2/3*tt) & tt")

        self.assertEqual(formula, formula_from_json(formula.to_json()))

    def test_malformed_json(self):
        with self.assertRaises(FormulaException):
            formula_from_json({"box": "a"})


class SimplifyTests(unittest.TestCase):
    def test_nested_conjunctions_flatten(self):
        formula = Conj([Top(), Conj([Ref(["a"]), Top()]), Diamond("b", Conj([]))])

        self.assertEqual(Conj([Ref(["a"]), Diamond("b", Top())]), simplify(formula))

    def test_empty_conjunction_is_top(self):
        self.assertEqual(Top(), simplify(Conj([Top()])))

    def test_single_summand(self):
        self.assertEqual(Ref(["a"]), simplify(ProbSum([(1, Conj([Ref(["a"])]))])))


class SatTests(unittest.TestCase):
    @parameterized.expand(
        [
            ("top", "a", "tt", True),
            ("diamond", "a", "<a>tt", True),
            ("missing_diamond", "b", "<a>tt", False),
            ("diamond_after_tau", "a |~| b", "<a>tt", True),
            ("nested", "a.(b [] c)", "<a>(<b>tt & <c>tt)", True),
            ("nested_choice", "a.b [] a.c", "<a>(<b>tt & <c>tt)", False),
            ("refusal", "a", "ref{b}", True),
            ("no_refusal", "a [] b", "ref{b}", False),
            ("refusal_after_tau", "a |~| b", "ref{a}", True),
            ("no_joint_refusal", "a |~| b", "ref{a,b}", False),
            ("nil_refuses_everything", "0", "ref{a,b}", True),
            ("conj", "a |~| b", "<a>tt & <b>tt", True),
            ("conj_of_refusals", "a |~| b", "ref{a} & ref{b}", True),
            ("prob_split", "a |+1/2| b", "1/2*<a>tt (+) 1/2*<b>tt", True),
            ("prob_wrong_split", "a |+1/2| b", "1/3*<a>tt (+) 2/3*<b>tt", False),
            ("prob_by_tau", "a |~| b", "1/3*<a>tt (+) 2/3*<b>tt", True),
            ("prob_point", "a", "1/2*<a>tt (+) 1/2*<b>tt", False),
            ("prob_with_refusal", "a |+1/2| b", "1/2*ref{a} (+) 1/2*ref{b}", True),
            ("prob_under_diamond", "c.(a |~| b)", "<c>(1/4*<a>tt (+) 3/4*<b>tt)", True),
            ("prob_under_diamond_fails", "c.(a |+1/2| b)", "<c>(1/4*<a>tt (+) 3/4*<b>tt)", False),
        ]
    )
    def test_sat(self, _, process, formula, expected):
        plts, initial = build(parse(process))

        self.assertEqual(expected, sat(plts, initial, parse_formula(formula)))

    def test_unknown_action(self):
        plts, initial = build(parse("a"))

        self.assertFalse(sat(plts, initial, parse_formula("<z>tt")))
        self.assertTrue(sat(plts, initial, parse_formula("ref{z}")))


class WitnessTests(unittest.TestCase):
    def test_probabilistic_witness_components(self):
        plts, initial = build(Qc)
        formula = parse_formula("1/2*<a>tt (+) 1/2*<b>tt")

        witness = sat_witness(plts, initial, formula)

        self.assertEqual(2, len(witness.components))
        self.assertEqual(witness.derivative, mix(zip([half, half], witness.components)))
        self.assertIn(witness.derivative, plts.weak_tau_derivatives(initial))
        for (_, part), component in zip(formula.parts, witness.components):
            self.assertTrue(sat(plts, component, part))

    def test_diamond_witness(self):
        plts, initial = build(parse("a.b |~| c"))

        witness = sat_witness(plts, initial, parse_formula("<a>tt"))

        self.assertEqual(point(plts.intern(parse("b"))), witness.derivative)

    def test_no_witness(self):
        plts, initial = build(Pc)

        self.assertIsNone(sat_witness(plts, initial, parse_formula("<a>tt")))

    def test_weak_internal_witness(self):
        plts, initial = build(Qc)
        a = plts.intern(parse("a"))

        witness = weak_witness(plts, initial, point(a))

        self.assertIsNone(witness.second)
        self.assertEqual(point(a), witness.before)
        self.assertEqual([(None, Fraction(1))], witness.first.policy(a))

    def test_weak_action_witness(self):
        plts, initial = build(parse("tau.a.b"))
        a, b = plts.intern(parse("a.b")), plts.intern(parse("b"))

        witness = weak_witness(plts, initial, point(b), "a")

        self.assertEqual(point(a), witness.before)
        self.assertEqual(point(b), witness.after)
        self.assertEqual(((a, Fraction(1), point(b)),), witness.firing)

    def test_no_weak_witness(self):
        plts, initial = build(Pc)

        self.assertIsNone(weak_witness(plts, initial, point(plts.intern(parse("a")))))


class CharacteristicFormulaTests(unittest.TestCase):
    def test_state_formula_in_f(self):
        plts, initial = build(parse("a"))

        formula = char_formula(plts, initial.support()[0], Logic.F, alphabet=["a", "b"])

        self.assertEqual(Conj([Diamond("a", Conj([Ref(["a", "b"])])), Ref(["b"])]), formula)

    def test_state_formula_in_l(self):
        plts, initial = build(parse("a"))

        formula = char_formula(plts, initial.support()[0], Logic.L)

        self.assertEqual(Conj([Diamond("a", Conj([]))]), formula)
        self.assertTrue(formula.is_L())

    def test_distribution_formula(self):
        plts, initial = build(Pc)

        formula = char_formula(plts, initial, Logic.L)

        self.assertIsInstance(formula, ProbSum)
        self.assertEqual([half, half], [p for p, _ in formula.parts])

    def test_unstable_state_lists_tau_derivatives(self):
        plts, initial = build(Qc)

        formula = char_formula(plts, initial, Logic.F)

        self.assertEqual(2, len(formula.parts))

    @parameterized.expand([("p", "a |+1/2| b"), ("q", "a |~| b"), ("r", "a.(b |~| c) [] d")])
    def test_every_process_satisfies_its_formula(self, _, text):
        plts, initial = build(parse(text))

        self.assertTrue(sat(plts, initial, char_formula(plts, initial, Logic.F)))
        self.assertTrue(sat(plts, initial, char_formula(plts, initial, Logic.L)))


class LogicOrderTests(unittest.TestCase):
    @parameterized.expand(
        [
            ("l_prob_below_int", Pc, Qc, Logic.L, True),
            ("l_int_not_below_prob", Qc, Pc, Logic.L, False),
            ("f_int_below_prob", Qc, Pc, Logic.F, True),
            ("f_prob_not_below_int", Pc, Qc, Logic.F, False),
        ]
    )
    def test_logic_leq(self, _, left, right, logic, expected):
        self.assertEqual(expected, logic_leq(left, right, logic))

    def test_logic_query_subject(self):
        plts = PLTS()

        query = logic_query(plts, Pc, Qc, Logic.F)

        self.assertEqual(plts.add(Pc), query.subject)
        self.assertFalse(query.holds)


class CharTestTests(unittest.TestCase):
    def test_top(self):
        result = char_test(Top())

        self.assertEqual(parse("omega1"), result.test)
        self.assertEqual((Fraction(1),), result.target)
        self.assertEqual(("omega1",), result.omega)

    def test_diamond(self):
        result = char_test(parse_formula("<a>tt"))

        self.assertEqual(parse("omega2 [] a.omega1"), result.test)
        self.assertEqual((Fraction(1), Fraction(0)), result.target)

    def test_refusal(self):
        result = char_test(parse_formula("ref{a,b}"))

        self.assertEqual(parse("a.omega1 [] b.omega1"), result.test)
        self.assertEqual((Fraction(0),), result.target)

    @parameterized.expand(
        [
            ("diamond_yes", "a", "<a>tt"),
            ("diamond_no", "b", "<a>tt"),
            ("refusal_yes", "a |~| b", "ref{a}"),
            ("refusal_no", "a [] b", "ref{a}"),
            ("conj", "a |~| b", "<a>tt & <b>tt"),
            ("prob_yes", "a |+1/2| b", "1/2*<a>tt (+) 1/2*<b>tt"),
            ("prob_no", "a", "1/2*<a>tt (+) 1/2*<b>tt"),
        ]
    )
    def test_characteristic_test_agrees_with_satisfaction(self, _, process_text, formula_text):
        process, formula = parse(process_text), parse_formula(formula_text)
        plts, initial = build(process)
        result = char_test(formula)

        outcomes = apply_test(result.test, process, result.omega).results_vector()

        self.assertEqual(
            sat(plts, initial, formula), dominated_point_exists(outcomes, result.target, Direction.below)
        )
