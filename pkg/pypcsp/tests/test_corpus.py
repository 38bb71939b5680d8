import unittest

from parameterized import parameterized

from pypcsp.corpus import TermGenerator, axiom_instance, exhaustive_ncsp, sample
from pypcsp.enums import AxiomId, Logic, TermClass
from pypcsp.logic import Formula, Ref
from pypcsp.parser import parse
from pypcsp.plts import build
from pypcsp.terms import NIL, Par, Term, classify

__author__ = "PyPCSP contributors"
__email__ = "pypcsp@example.org"


class TermGeneratorTests(unittest.TestCase):
    def test_same_seed_same_terms(self):
        self.assertEqual(TermGenerator(3).terms(10), TermGenerator(3).terms(10))

    def test_depth_zero_draws_leaves(self):
        self.assertEqual(NIL, TermGenerator(1).term(0))

    def test_ncsp_has_no_parallel_composition(self):
        generator = TermGenerator(5, parallel=True)

        for _ in range(20):
            self.assertEqual([], generator.ncsp().find_(Par))
        self.assertTrue(generator.parallel)

    def test_parallel_composition_is_drawn(self):
        generator = TermGenerator(0, parallel=True, max_depth=4)

        self.assertTrue(any(term.find_(Par) for term in generator.terms(50)))

    def test_states_are_point_distributions(self):
        generator = TermGenerator(2)

        for _ in range(20):
            _, initial = build(generator.state())
            self.assertTrue(initial.is_point)

    def test_alphabet(self):
        generator = TermGenerator(4, alphabet=["x"])

        for term in generator.terms(20):
            self.assertTrue(term.actions() <= {"x"})

    def test_tests_never_mix_success_actions(self):
        generator = TermGenerator(6)

        for _ in range(20):
            self.assertNotEqual(TermClass.vector_test, classify(generator.test()).term_class)
            self.assertNotEqual(TermClass.scalar_test, classify(generator.vector_test()).term_class)

    def test_formulas_of_l_have_no_refusals(self):
        generator = TermGenerator(8)

        for _ in range(20):
            formula = generator.formula(logic=Logic.L)
            self.assertTrue(formula.is_L())
            self.assertEqual([], formula.find_(Ref))

    def test_pairs(self):
        pairs = TermGenerator(9).pairs(4, depth=2)

        self.assertEqual(4, len(pairs))
        self.assertTrue(all(isinstance(term, Term) for pair in pairs for term in pair))


class ExhaustiveTests(unittest.TestCase):
    def test_smallest_terms(self):
        self.assertEqual([NIL, parse("a")], exhaustive_ncsp(alphabet=["a"], max_prefixes=1, max_size=2))

    def test_binary_operators(self):
        terms = exhaustive_ncsp(alphabet=["a"], max_prefixes=1, max_size=3)

        self.assertEqual(5, len(terms))
        self.assertIn(parse("0 |+1/2| 0"), terms)
        self.assertIn(parse("0 [] 0"), terms)

    def test_terms_are_distinct(self):
        terms = exhaustive_ncsp()

        self.assertEqual(len(terms), len(set(terms)))
        self.assertTrue(all(term.size() <= 4 for term in terms))


class SampleTests(unittest.TestCase):
    @parameterized.expand([("term",), ("ncsp",), ("state",), ("test",), ("vector_test",)])
    def test_term_kinds(self, kind):
        items = sample(kind, 3, seed=1)

        self.assertEqual(3, len(items))
        self.assertTrue(all(isinstance(item, Term) for item in items))
        self.assertEqual(items, sample(kind, 3, seed=1))

    def test_formulas(self):
        self.assertTrue(all(isinstance(item, Formula) for item in sample("formula", 3)))

    def test_unknown_kind(self):
        with self.assertRaises(ValueError):
            sample("bisimulation", 1)

    def test_axiom_instance_shapes(self):
        generator = TermGenerator(0)

        lhs, rhs = axiom_instance(AxiomId.E1, generator)

        self.assertEqual(rhs, lhs.left)
        self.assertEqual(NIL, lhs.right)
