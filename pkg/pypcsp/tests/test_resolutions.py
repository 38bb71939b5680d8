import unittest
from fractions import Fraction

from pypcsp.distribution import point
from pypcsp.geometry import hull_reduce
from pypcsp.resolutions import (
    Move,
    Resolution,
    check_resolution,
    enumerate_deterministic_resolutions,
    pr,
    resolution_failures,
    synthesize_resolution,
    w_of,
    w_of_by_sequences,
    w_set,
)
from pypcsp.testing import apply_test
from pypcsp.tests import Pc, Pfig, Qc, Tc, Tfig
from pypcsp.utils import ResolutionException

__author__ = "PyPCSP contributors"
__email__ = "pypcsp@example.org"

half = Fraction(1, 2)
W2 = ("omega1", "omega2")


class EnumerationTests(unittest.TestCase):
    def test_internal_choice_has_two_resolutions(self):
        application = apply_test(Tc, Qc)

        resolutions = enumerate_deterministic_resolutions(application.plts, application.initial, W2)

        self.assertEqual(2, len(resolutions))
        self.assertEqual([(0, 1), (1, 0)], sorted(w_of(res) for res in resolutions))
        self.assertTrue(all(check_resolution(res, application.initial) for res in resolutions))

    def test_probabilistic_choice_has_one_resolution(self):
        application = apply_test(Tc, Pc)

        resolutions = enumerate_deterministic_resolutions(application.plts, application.initial, W2)

        self.assertEqual(1, len(resolutions))
        self.assertEqual((half, half), w_of(resolutions[0]))

    def test_choices_multiply_across_states(self):
        application = apply_test(Tfig, Pfig)

        resolutions = enumerate_deterministic_resolutions(application.plts, application.initial)

        self.assertEqual(4, len(resolutions))
        self.assertEqual([(0,), (half,), (half,), (1,)], sorted(w_of(res) for res in resolutions))

    def test_w_set_matches_vector_results(self):
        for test, process in [(Tc, Pc), (Tc, Qc), (Tfig, Pfig)]:
            application = apply_test(test, process)

            outcomes = w_set(application.plts, application.initial, application.omega)

            self.assertEqual(application.results_vector(), outcomes)

    def test_w_set_of_internal_choice(self):
        application = apply_test(Tc, Qc)

        self.assertEqual(hull_reduce([(0, 1), (1, 0)], W2), w_set(application.plts, application.initial, W2))


class SequenceTests(unittest.TestCase):
    def setUp(self):
        application = apply_test(Tc, Pc)
        self.initial = application.initial
        (self.resolution,) = enumerate_deterministic_resolutions(application.plts, application.initial, W2)

    def test_empty_sequence(self):
        self.assertEqual(Fraction(1), pr(self.resolution, ()))

    def test_sequence_probability(self):
        self.assertEqual(half, pr(self.resolution, ("tau", "omega1")))
        self.assertEqual(Fraction(1), pr(self.resolution, ("tau",)))
        self.assertEqual(Fraction(0), pr(self.resolution, ("omega1",)))

    def test_success_tuple_by_sequences(self):
        self.assertEqual(w_of(self.resolution), w_of_by_sequences(self.resolution))


class SynthesisTests(unittest.TestCase):
    def test_interpolated_outcome(self):
        application = apply_test(Tc, Qc)

        resolution = synthesize_resolution(application.plts, application.initial, (half, half), W2)

        self.assertTrue(check_resolution(resolution, application.initial))
        self.assertEqual((half, half), w_of(resolution))
        self.assertEqual((half, half), w_of_by_sequences(resolution))

    def test_vertex_outcome(self):
        application = apply_test(Tc, Qc)

        resolution = synthesize_resolution(application.plts, application.initial, (1, 0), W2)

        self.assertTrue(check_resolution(resolution, application.initial))
        self.assertEqual((1, 0), w_of(resolution))

    def test_scalar_outcome(self):
        application = apply_test(Tfig, Pfig)
        target = (Fraction(1, 4),)

        resolution = synthesize_resolution(application.plts, application.initial, target)

        self.assertTrue(check_resolution(resolution, application.initial))
        self.assertEqual(target, w_of(resolution))

    def test_unreachable_outcome(self):
        application = apply_test(Tc, Qc)

        with self.assertRaises(ResolutionException):
            synthesize_resolution(application.plts, application.initial, (1, 1), W2)

    def test_dimension_mismatch(self):
        application = apply_test(Tc, Qc)

        with self.assertRaises(ResolutionException):
            synthesize_resolution(application.plts, application.initial, (1,), W2)


class CheckResolutionTests(unittest.TestCase):
    def setUp(self):
        application = apply_test(Tc, Qc)
        self.plts = application.plts
        self.initial = application.initial
        self.root = application.initial.support()[0]

    def test_deadlocked_node_of_live_state(self):
        resolution = Resolution(self.plts, [self.root], [None], point(0))

        failures = resolution_failures(resolution, self.initial)

        self.assertEqual(1, len(failures))
        self.assertFalse(check_resolution(resolution, self.initial))

    def test_wrong_initial_distribution(self):
        (_, target), _ = self.plts.step(self.root)
        resolution = Resolution(self.plts, [self.root], [None], point(0))
        other = target.support()[0]

        self.assertFalse(check_resolution(Resolution(self.plts, [other], [None], point(0)), self.initial))
        self.assertFalse(check_resolution(resolution, target))

    def test_tree_must_point_forward(self):
        label, _ = self.plts.step(self.root)[0]
        resolution = Resolution(self.plts, [self.root], [Move(label, point(0))], point(0))

        self.assertIn("forward", resolution_failures(resolution, self.initial)[0])

    def test_move_without_counterpart(self):
        resolution = Resolution(self.plts, [self.root, self.root], [Move("a", point(1)), None], point(0))

        self.assertFalse(check_resolution(resolution, self.initial))

    def test_mismatched_lengths(self):
        with self.assertRaises(ResolutionException):
            Resolution(self.plts, [self.root], [], point(0))

    def test_json(self):
        resolution = synthesize_resolution(self.plts, self.initial, (half, half), W2)

        restored = Resolution.from_json(resolution.to_json(), self.plts)

        self.assertEqual(resolution.to_json(), restored.to_json())
        self.assertTrue(check_resolution(restored, self.initial))

    def test_malformed_json(self):
        with self.assertRaises(ResolutionException):
            data = {"initial": point(0).to_json(), "nodes": [{"id": 1, "state": 0, "move": None}]}
            Resolution.from_json(data, self.plts)
