import unittest

from hypothesis import given, settings
from hypothesis import strategies as st
from parameterized import parameterized

from pypcsp.axioms import (
    EQUATIONS,
    MAY_EQUATIONS,
    MAY_INEQUATIONS,
    MUST_INEQUATIONS,
    check_derivation,
    is_normal_form,
    normal_form,
    prob_normal_form,
    synth_derivation,
)
from pypcsp.corpus import TermGenerator, axiom_instance
from pypcsp.enums import Theory
from pypcsp.plts import PLTS
from pypcsp.simulation import fsim_eq, fsim_leq, sim_eq, sim_leq

__author__ = "PyPCSP contributors"
__email__ = "pypcsp@example.org"

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)
processes = st.builds(lambda seed: TermGenerator(seed, max_depth=2).ncsp(), seeds)


def by_value(axioms):
    return [(axiom.value, axiom) for axiom in sorted(axioms, key=lambda axiom: axiom.value)]


def instance(axiom, seed):
    return axiom_instance(axiom, TermGenerator(seed), depth=1)


class SoundnessTests(unittest.TestCase):
    @parameterized.expand(by_value(EQUATIONS))
    def test_equations_preserve_both_preorders(self, _, axiom):
        for seed in range(4):
            lhs, rhs = instance(axiom, seed)

            self.assertTrue(sim_eq(lhs, rhs))
            self.assertTrue(fsim_eq(lhs, rhs))

    @parameterized.expand(by_value(MAY_EQUATIONS | MAY_INEQUATIONS))
    def test_may_axioms(self, _, axiom):
        for seed in range(4):
            lhs, rhs = instance(axiom, seed)

            self.assertTrue(sim_leq(lhs, rhs))

    @parameterized.expand(by_value(MAY_EQUATIONS))
    def test_may_equations_hold_both_ways(self, _, axiom):
        for seed in range(4):
            lhs, rhs = instance(axiom, seed)

            self.assertTrue(sim_leq(rhs, lhs))

    @parameterized.expand(by_value(MUST_INEQUATIONS))
    def test_must_axioms(self, _, axiom):
        for seed in range(4):
            lhs, rhs = instance(axiom, seed)

            self.assertTrue(fsim_leq(lhs, rhs))


class NormalFormLaws(unittest.TestCase):
    @settings(max_examples=30, deadline=None)
    @given(processes)
    def test_normal_form(self, term):
        result, derivation = normal_form(term)

        self.assertTrue(is_normal_form(result))
        self.assertEqual((term, result), (derivation.lhs, derivation.rhs))
        self.assertTrue(check_derivation(derivation, Theory.eq))
        self.assertTrue(sim_eq(term, result))

    @settings(max_examples=30, deadline=None)
    @given(processes)
    def test_prob_normal_form_keeps_the_interpretation(self, term):
        plts = PLTS()

        self.assertEqual(plts.add(term), plts.add(prob_normal_form(term)))


class CompletenessLaws(unittest.TestCase):
    @settings(max_examples=15, deadline=None)
    @given(processes, processes)
    def test_may_derivation_exists_exactly_when_simulated(self, left, right):
        derivation = synth_derivation(left, right, Theory.may)

        self.assertEqual(bool(sim_leq(left, right)), derivation is not None)
        if derivation is not None:
            self.assertTrue(check_derivation(derivation, Theory.may))

    @settings(max_examples=15, deadline=None)
    @given(processes, processes)
    def test_must_derivation_exists_exactly_when_failure_simulated(self, left, right):
        derivation = synth_derivation(left, right, Theory.must)

        self.assertEqual(bool(fsim_leq(left, right)), derivation is not None)
        if derivation is not None:
            self.assertTrue(check_derivation(derivation, Theory.must))

    @settings(max_examples=15, deadline=None)
    @given(processes)
    def test_terms_are_below_their_normal_forms(self, term):
        result, _ = normal_form(term)

        for theory in (Theory.may, Theory.must):
            self.assertIsNotNone(synth_derivation(term, result, theory))
