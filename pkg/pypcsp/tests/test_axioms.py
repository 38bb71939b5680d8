import json
import unittest
from fractions import Fraction

from parameterized import parameterized

from pypcsp.axioms import (
    EQUATIONS,
    MAY_INEQUATIONS,
    MUST_INEQUATIONS,
    AxiomStep,
    Cong,
    ProbStep,
    Refl,
    Sym,
    Trans,
    allowed_axioms,
    check_derivation,
    derivation_from_json,
    derive_may3_dual,
    derive_may4,
    derive_must_dual,
    inits,
    is_normal_form,
    normal_form,
    prob_normal_form,
    synth_derivation,
    validate_derivation,
)
from pypcsp.corpus import axiom_instances
from pypcsp.enums import AxiomId, Theory
from pypcsp.parser import parse
from pypcsp.simulation import fsim_leq, sim_eq, sim_leq
from pypcsp.terms import NIL
from pypcsp.tests import Pc, Qc
from pypcsp.utils import DerivationException

__author__ = "PyPCSP contributors"
__email__ = "pypcsp@example.org"

half = Fraction(1, 2)
a, b = parse("a"), parse("b")
BA = parse("b |~| a")


def home_theory(axiom):
    if axiom in EQUATIONS:
        return Theory.eq
    if axiom in MUST_INEQUATIONS:
        return Theory.must
    return Theory.may


class TheoryTests(unittest.TestCase):
    def test_equations_belong_to_every_theory(self):
        for theory in Theory:
            self.assertTrue(EQUATIONS <= allowed_axioms(theory))

    def test_may_and_must_are_disjoint_beyond_equations(self):
        may, must = allowed_axioms(Theory.may), allowed_axioms(Theory.must)

        self.assertEqual(EQUATIONS, may & must)
        self.assertIn(AxiomId.May0, may)
        self.assertTrue(MAY_INEQUATIONS <= may)
        self.assertNotIn(AxiomId.Must1, may)

    def test_inits(self):
        self.assertEqual({"a", "b", "c"}, inits(parse("a [] (b |+1/2| c)")))
        self.assertEqual({"tau"}, inits(Qc))
        self.assertEqual(set(), inits(NIL))

    def test_inits_of_parallel_composition(self):
        with self.assertRaises(DerivationException):
            inits(parse("a |[a]| a"))


class AxiomInstanceTests(unittest.TestCase):
    @parameterized.expand([(axiom.value, axiom) for axiom in AxiomId])
    def test_random_instances_are_accepted(self, _, axiom):
        theory = home_theory(axiom)
        for lhs, rhs in axiom_instances(axiom, 5, seed=7):
            validate_derivation(AxiomStep(axiom, lhs, rhs), theory)

    @parameterized.expand([(axiom.value, axiom) for axiom in sorted(EQUATIONS, key=lambda axiom: axiom.value)])
    def test_equations_can_be_reversed(self, _, axiom):
        for lhs, rhs in axiom_instances(axiom, 3, seed=11):
            self.assertTrue(check_derivation(AxiomStep(axiom, rhs, lhs, reverse=True), Theory.eq))

    @parameterized.expand(
        [
            ("may_axiom_in_must", AxiomStep(AxiomId.May1, a, Qc), Theory.must),
            ("must_axiom_in_may", AxiomStep(AxiomId.Must1, Qc, b), Theory.may),
            ("inequation_in_eq", AxiomStep(AxiomId.May2, NIL, a), Theory.eq),
            ("wrong_instance", AxiomStep(AxiomId.I2, Qc, Qc), Theory.eq),
            ("reversed_inequation", AxiomStep(AxiomId.May1, Qc, a, reverse=True), Theory.may),
            ("must1_keeps_right_operand", AxiomStep(AxiomId.Must1, Qc, a), Theory.must),
            ("ei_needs_equal_actions", AxiomStep(AxiomId.EI, parse("a [] b"), Qc), Theory.eq),
            ("must2_initials", AxiomStep(AxiomId.Must2, parse("c |~| a"), a), Theory.must),
        ]
    )
    def test_rejected_steps(self, _, derivation, theory):
        self.assertFalse(check_derivation(derivation, theory))

    def test_may0_is_not_an_equation_of_eq(self):
        step = AxiomStep(AxiomId.May0, parse("a [] b"), Qc)

        self.assertTrue(check_derivation(step, Theory.may))
        self.assertFalse(check_derivation(step, Theory.eq))

    def test_must2_prime_uses_the_transitions(self):
        lhs = parse("0 |~| (a.b [] a.b)")

        self.assertTrue(check_derivation(AxiomStep(AxiomId.Must2p, lhs, parse("a.b")), Theory.must))
        self.assertFalse(check_derivation(AxiomStep(AxiomId.Must2p, lhs, parse("a.c")), Theory.must))


class DerivationTests(unittest.TestCase):
    def test_transitivity_needs_matching_ends(self):
        derivation = Trans([AxiomStep(AxiomId.I2, Qc, BA), AxiomStep(AxiomId.I2, Qc, BA)])

        self.assertFalse(check_derivation(derivation, Theory.eq))

    def test_failure_location(self):
        derivation = Trans([AxiomStep(AxiomId.I2, Qc, BA), AxiomStep(AxiomId.I2, BA, BA)])

        with self.assertRaises(DerivationException) as context:
            validate_derivation(derivation, Theory.eq)

        self.assertEqual("root.1", context.exception.location)

    def test_symmetry(self):
        self.assertTrue(check_derivation(Sym(AxiomStep(AxiomId.I2, Qc, BA)), Theory.eq))
        self.assertFalse(check_derivation(Sym(AxiomStep(AxiomId.May1, a, Qc)), Theory.may))

    def test_prob_steps(self):
        self.assertTrue(check_derivation(ProbStep(Pc, parse("b |+1/2| a")), Theory.eq))
        self.assertFalse(check_derivation(ProbStep(Pc, Qc), Theory.eq))

    def test_congruence(self):
        derivation = Cong("prefix", [AxiomStep(AxiomId.I2, Qc, BA)], action="c")

        self.assertEqual(parse("c.(a |~| b)"), derivation.lhs)
        self.assertEqual(parse("c.(b |~| a)"), derivation.rhs)
        self.assertTrue(check_derivation(derivation, Theory.eq))

    def test_congruence_needs_visible_prefix(self):
        derivation = Cong("prefix", [Refl(a)], action="tau")

        self.assertFalse(check_derivation(derivation, Theory.eq))

    def test_congruence_needs_a_weight(self):
        self.assertFalse(check_derivation(Cong("prob", [Refl(a), Refl(b)]), Theory.eq))

    def test_congruence_arity(self):
        with self.assertRaises(DerivationException):
            Cong("ext", [Refl(a)])
        with self.assertRaises(DerivationException):
            Cong("par", [Refl(a), Refl(b)])

    def test_empty_transitivity(self):
        with self.assertRaises(DerivationException):
            Trans([])

    def test_pretty(self):
        self.assertEqual("refl: a = a", Refl(a).pretty())
        self.assertEqual("May1: a <= a |~| b", AxiomStep(AxiomId.May1, a, Qc).pretty())
        self.assertEqual("I2 (reversed): b |~| a = a |~| b", AxiomStep(AxiomId.I2, BA, Qc, reverse=True).pretty())

    def test_json(self):
        derivation = derive_may4(a, b, half)

        restored = derivation_from_json(json.dumps(derivation.to_json()))

        self.assertEqual(derivation.to_json(), restored.to_json())
        self.assertTrue(check_derivation(restored, Theory.may))

    @parameterized.expand(
        [
            ("unknown_axiom", {"rule": "axiom", "axiom": "P9", "lhs": "a", "rhs": "a"}),
            ("unknown_rule", {"rule": "magic"}),
            ("missing_field", {"rule": "refl"}),
        ]
    )
    def test_malformed_json(self, _, data):
        with self.assertRaises(DerivationException):
            derivation_from_json(data)


class DerivedRuleTests(unittest.TestCase):
    def test_may4(self):
        derivation = derive_may4(a, b, half)

        self.assertEqual(Pc, derivation.lhs)
        self.assertEqual(Qc, derivation.rhs)
        self.assertTrue(check_derivation(derivation, Theory.may))
        self.assertEqual({AxiomId.May1, AxiomId.I2, AxiomId.P1}, derivation.axioms_used())

    def test_must_dual(self):
        derivation = derive_must_dual(a, b, half)

        self.assertEqual(Qc, derivation.lhs)
        self.assertEqual(Pc, derivation.rhs)
        self.assertTrue(check_derivation(derivation, Theory.must))
        self.assertFalse(check_derivation(derivation, Theory.may))

    def test_may3_dual(self):
        derivation = derive_may3_dual("c", a, b, half)

        self.assertEqual(parse("c.a |+1/2| c.b"), derivation.lhs)
        self.assertEqual(parse("c.(a |+1/2| b)"), derivation.rhs)
        self.assertTrue(check_derivation(derivation, Theory.must))


class NormalFormTests(unittest.TestCase):
    @parameterized.expand(
        [
            ("distributes_over_int", "a [] (b |~| c)", "(a [] b) |~| (a [] c)"),
            ("distributes_over_prob", "a [] (b |+1/2| c)", "(a [] b) |+1/2| (a [] c)"),
            ("drops_nil", "0 [] a", "a"),
            ("keeps_normal_forms", "a.b [] c", "a.b [] c"),
            ("under_prefix", "a.(0 [] b)", "a.b"),
        ]
    )
    def test_normal_form(self, _, text, expected):
        term = parse(text)

        result, derivation = normal_form(term)

        self.assertEqual(parse(expected), result)
        self.assertTrue(is_normal_form(result))
        self.assertEqual(term, derivation.lhs)
        self.assertEqual(result, derivation.rhs)
        self.assertTrue(derivation.is_equational)
        self.assertTrue(check_derivation(derivation, Theory.eq))

    def test_normal_form_is_equivalent(self):
        term = parse("(a |~| b.c) [] (d |+1/3| a)")

        result, _ = normal_form(term)

        self.assertTrue(sim_eq(term, result))

    @parameterized.expand(
        [
            ("nil", "0", True),
            ("choice_of_prefixes", "a [] b", True),
            ("int_of_chains", "(a [] b) |~| c", True),
            ("ext_over_int", "a [] (b |~| c)", False),
            ("int_under_ext", "(a |~| b) [] c", False),
            ("deep", "a.(b [] (c |+1/2| d))", False),
        ]
    )
    def test_is_normal_form(self, _, text, expected):
        self.assertEqual(expected, is_normal_form(parse(text)))

    def test_shallow_normal_form(self):
        self.assertTrue(is_normal_form(parse("a.(b [] (c |+1/2| d))"), deep=False))

    def test_parallel_composition(self):
        with self.assertRaises(DerivationException):
            normal_form(parse("a |[a]| a"))

    def test_prob_normal_form(self):
        self.assertEqual(prob_normal_form(Pc), prob_normal_form(parse("b |+1/2| a")))
        self.assertEqual(
            prob_normal_form(parse("(a |+1/2| b) |+1/2| c")), prob_normal_form(parse("a |+1/4| (b |+1/3| c)"))
        )
        self.assertNotEqual(prob_normal_form(Pc), prob_normal_form(parse("a |+1/3| b")))


class SynthesisTests(unittest.TestCase):
    def test_may_direct_axiom(self):
        derivation = synth_derivation(Pc, Qc, Theory.may)

        self.assertEqual(Pc, derivation.lhs)
        self.assertEqual(Qc, derivation.rhs)
        self.assertTrue(check_derivation(derivation, Theory.may))

    def test_must_direct_axiom(self):
        derivation = synth_derivation(Qc, Pc, Theory.must)

        self.assertTrue(check_derivation(derivation, Theory.must))

    def test_no_derivation_when_preorder_fails(self):
        self.assertIsNone(synth_derivation(Qc, Pc, Theory.may))
        self.assertIsNone(synth_derivation(Pc, Qc, Theory.must))

    def test_identical_terms(self):
        self.assertIsInstance(synth_derivation(Pc, Pc, Theory.may), Refl)

    def test_equational_theory(self):
        with self.assertRaises(DerivationException):
            synth_derivation(Pc, Qc, Theory.eq)

    def test_parallel_composition(self):
        with self.assertRaises(DerivationException):
            synth_derivation(parse("a |[a]| a"), Qc, Theory.may)

    @parameterized.expand(
        [
            ("prefix_below_choice", "a", "a [] b"),
            ("nil_below_prefix", "0", "a.b"),
            ("prob_under_prefix", "a.(b |+1/2| c)", "a.b |~| a.c"),
            ("int_below_prefix", "a.b |~| a.c", "a.(b |~| c)"),
            ("deep_choice", "a.(b |~| c)", "a.b [] a.c"),
            ("prob_of_choices", "(a [] b) |+1/2| a", "a [] b"),
            ("external_of_prob", "a.(b |+1/3| c) [] d", "(a.b [] d) |~| (a.c [] d)"),
        ]
    )
    def test_synthesis_agrees_with_preorders(self, _, left_text, right_text):
        left, right = parse(left_text), parse(right_text)
        for theory, preorder in ((Theory.may, sim_leq), (Theory.must, fsim_leq)):
            for lhs, rhs in ((left, right), (right, left)):
                derivation = synth_derivation(lhs, rhs, theory)

                self.assertEqual(bool(preorder(lhs, rhs)), derivation is not None)
                if derivation is not None:
                    self.assertEqual((lhs, rhs), (derivation.lhs, derivation.rhs))
                    self.assertTrue(check_derivation(derivation, theory))
