import math
from unittest import TestCase

import numpy as np
from scipy import special as sc

from meandim.definitions.inputs import (
    ChiSquare,
    CoordinateMoments,
    FiniteDiscrete,
    InputModel,
    MomentSummary,
    NormalShift,
    StandardNormal,
    beta_constant,
    law_from_dict,
    negative_moment,
    noncentral_chi1_moments,
)
from meandim.exceptions import ConfigError, DimensionError, DomainError, MissingAssumptionError

CHI1_MOMENTS = (1.0, 2.0, 8.0, 60.0, 544.0, 6040.0)


def _moment_tuple(moments: CoordinateMoments) -> tuple[float, ...]:
    return (moments.mean, *(moments.central(k) for k in range(2, 7)))


class LawMomentsTestCase(TestCase):
    def test_chi_square_one(self):
        np.testing.assert_allclose(_moment_tuple(ChiSquare(1).moments()), CHI1_MOMENTS)
        np.testing.assert_allclose(_moment_tuple(NormalShift().moments()), CHI1_MOMENTS)

    def test_noncentral_moments(self):
        self.assertEqual(noncentral_chi1_moments(1.0), (2.0, 6.0, 32.0, 348.0))
        moments = NormalShift(c=1.0).moments()
        self.assertEqual(
            (moments.mean, moments.variance, moments.mu3, moments.mu4), (2.0, 6.0, 32.0, 348.0)
        )

    def test_offset_moves_only_the_mean(self):
        plain = NormalShift(c=0.5).moments()
        shifted = NormalShift(c=0.5, offset=2.0).moments()
        self.assertEqual(shifted.mean, plain.mean + 2.0)
        self.assertEqual(shifted.mu6, plain.mu6)

    def test_matches_gauss_hermite_discretization(self):
        gh = FiniteDiscrete.gauss_hermite(10)
        squared = FiniteDiscrete(tuple(v * v for v in gh.values), gh.probs)
        np.testing.assert_allclose(_moment_tuple(squared.moments()), CHI1_MOMENTS, rtol=1e-9)
        shifted = FiniteDiscrete(tuple((v - 0.7) ** 2 for v in gh.values), gh.probs)
        np.testing.assert_allclose(
            _moment_tuple(shifted.moments()), _moment_tuple(NormalShift(c=0.7).moments()), rtol=1e-9
        )

    def test_standard_normal(self):
        self.assertEqual(_moment_tuple(StandardNormal().moments()), (0.0, 1.0, 0.0, 3.0, 0.0, 15.0))

    def test_chi_square_degrees_of_freedom_add(self):
        three = ChiSquare(3).moments()
        summary = InputModel.iid(ChiSquare(1), 3).summary
        self.assertEqual(summary.mean, three.mean)
        self.assertEqual(summary.variance, three.variance)
        self.assertEqual(summary.mu3, three.mu3)


class FiniteDiscreteTestCase(TestCase):
    def test_validation(self):
        cases = {
            "empty": ((), ()),
            "mismatched": ((1.0, 2.0), (1.0,)),
            "non-finite": ((1.0, math.inf), (0.5, 0.5)),
            "negative": ((1.0, 2.0), (1.5, -0.5)),
            "sum": ((1.0, 2.0), (0.5, 0.6)),
        }
        for label, (values, probs) in cases.items():
            with self.subTest(label), self.assertRaises(DomainError):
                FiniteDiscrete(values, probs)

    def test_transform_ties_go_to_lower_atom(self):
        law = FiniteDiscrete((1.0, 2.0, 3.0), (0.25, 0.5, 0.25))
        u = np.array([0.1, 0.25, 0.2500001, 0.75, 0.9])
        np.testing.assert_array_equal(law.transform(u), [1.0, 1.0, 2.0, 2.0, 3.0])

    def test_gauss_hermite(self):
        law = FiniteDiscrete.gauss_hermite(5)
        self.assertEqual(law.size, 5)
        self.assertEqual(law.values, tuple(-v for v in reversed(law.values)))
        self.assertAlmostEqual(math.fsum(law.probs), 1.0, places=14)
        moments = law.moments()
        self.assertAlmostEqual(moments.mean, 0.0, places=14)
        self.assertAlmostEqual(moments.variance, 1.0, places=13)
        self.assertAlmostEqual(moments.mu4, 3.0, places=12)

    def test_uniform(self):
        law = FiniteDiscrete.uniform([1.0, 3.0])
        self.assertEqual(law.probs, (0.5, 0.5))
        self.assertEqual(law.moments().mean, 2.0)


class NegativeMomentTestCase(TestCase):
    def test_chi_square_closed_form(self):
        self.assertAlmostEqual(negative_moment(ChiSquare(3), 1.0), 1.0, places=14)
        expected = 2.0**-0.25 * math.gamma(0.25) / math.gamma(0.5)
        self.assertAlmostEqual(negative_moment(NormalShift(), 0.25), expected, places=13)

    def test_numerical_integration(self):
        # E[1 / (1 + x^2)] for x ~ N(0, 1)
        expected = math.sqrt(math.pi / 2.0) * math.exp(0.5) * sc.erfc(1.0 / math.sqrt(2.0))
        self.assertAlmostEqual(negative_moment(NormalShift(offset=1.0), 1.0), expected, places=9)

    def test_shifted_normal_is_finite_below_one_half(self):
        value = negative_moment(NormalShift(c=1.0), 0.25)
        self.assertTrue(math.isfinite(value))
        self.assertLess(value, negative_moment(NormalShift(), 0.25))

    def test_finite_discrete(self):
        law = FiniteDiscrete((1.0, 4.0), (0.5, 0.5))
        self.assertEqual(negative_moment(law, 0.5), 0.75)
        with self.assertRaises(DomainError):
            negative_moment(FiniteDiscrete((0.0, 1.0), (0.5, 0.5)), 0.5)

    def test_divergent_and_invalid_orders(self):
        with self.assertRaises(DomainError):
            negative_moment(NormalShift(), 0.5)
        with self.assertRaises(DomainError):
            negative_moment(ChiSquare(2), 1.0)
        with self.assertRaises(DomainError):
            negative_moment(ChiSquare(2), 0.0)
        with self.assertRaises(DomainError):
            negative_moment(StandardNormal(), 0.25)


class MomentSummaryTestCase(TestCase):
    def test_sums(self):
        model = InputModel((NormalShift(), NormalShift(c=1.0)))
        summary = model.summary
        self.assertEqual(summary.d, 2)
        self.assertEqual(summary.mean, 3.0)
        self.assertEqual(summary.variance, 8.0)
        self.assertEqual(summary.mu3, 40.0)
        self.assertEqual(summary.central_sum(4), 408.0)

    def test_concat(self):
        left = InputModel.iid(NormalShift(), 2)
        right = InputModel.iid(ChiSquare(2), 3)
        self.assertEqual((left + right).d, 5)
        self.assertEqual(left.summary.concat(right.summary).mean, 8.0)

    def test_assumption_constants(self):
        summary = InputModel.iid(NormalShift(), 4).assumption_constants(0.25)
        constants = summary.assumptions
        m_alpha = 2.0**-0.25 * math.gamma(0.25) / math.gamma(0.5)
        self.assertAlmostEqual(constants.m_alpha, m_alpha, places=13)
        self.assertEqual(constants.lam, 6040.0)
        self.assertEqual((constants.mu_lower, constants.mu_upper), (1.0, 1.0))
        self.assertEqual(constants.sigma2_upper, 2.0)
        self.assertAlmostEqual(beta_constant(summary), m_alpha**-4, places=12)

    def test_beta_needs_assumptions(self):
        with self.assertRaises(MissingAssumptionError):
            beta_constant(InputModel.iid(NormalShift(), 2).summary)
        with self.assertRaises(MissingAssumptionError):
            beta_constant(InputModel.iid(NormalShift(), 2).summary.with_assumptions(0.25, math.inf))

    def test_validation(self):
        with self.assertRaises(DimensionError):
            MomentSummary(())
        with self.assertRaises(DomainError):
            MomentSummary((CoordinateMoments(1.0, -1.0, 0.0, 0.0, 0.0, 0.0),))


class InputModelTestCase(TestCase):
    def test_transform_per_column(self):
        model = InputModel((FiniteDiscrete.uniform([0.0, 1.0]), StandardNormal(), ChiSquare(2)))
        u = np.array([[0.25, 0.5, 0.5], [0.75, 0.975, 0.5]])
        x = model.transform(u)
        np.testing.assert_array_equal(x[:, 0], [0.0, 1.0])
        self.assertAlmostEqual(x[1, 1], 1.959963984540054, places=12)
        self.assertAlmostEqual(x[0, 2], 2.0 * math.log(2.0), places=12)
        with self.assertRaises(DimensionError):
            model.transform(u[:, :2])

    def test_z_values(self):
        model = InputModel((NormalShift(c=1.0, offset=2.0), StandardNormal()))
        np.testing.assert_array_equal(model.z_values(np.array([[3.0, -1.5]])), [[6.0, -1.5]])

    def test_validation(self):
        with self.assertRaises(DimensionError):
            InputModel(())
        with self.assertRaises(DimensionError):
            InputModel.iid(StandardNormal(), 0)
        with self.assertRaises(DomainError):
            NormalShift(offset=-1.0)
        with self.assertRaises(DomainError):
            ChiSquare(0.0)

    def test_is_finite(self):
        self.assertTrue(InputModel.iid(FiniteDiscrete.gauss_hermite(3), 2).is_finite)
        self.assertFalse(InputModel((FiniteDiscrete.gauss_hermite(3), StandardNormal())).is_finite)

    def test_dict_forms(self):
        model = InputModel((NormalShift(c=0.5, offset=1.0), FiniteDiscrete((1.0, 2.0), (0.3, 0.7))))
        self.assertEqual(InputModel.from_dict(model.to_dict()), model)
        self.assertEqual(InputModel.from_dict(model.to_dict()["laws"]), model)
        iid = InputModel.from_dict({"iid": {"kind": "chi_square", "df": 2}, "d": 3})
        self.assertEqual(iid, InputModel.iid(ChiSquare(2), 3))
        self.assertEqual(
            model.laws[1].to_dict(),
            {"kind": "finite_discrete", "values": [1.0, 2.0], "probs": [0.3, 0.7]},
        )

    def test_dict_errors(self):
        bad = [
            {"kind": "cauchy"},
            {"values": [1.0]},
            {"kind": "chi_square"},
            {"kind": "chi_square", "df": 1, "scale": 2},
        ]
        for data in bad:
            with self.subTest(data=data), self.assertRaises(ConfigError):
                law_from_dict(data)
        with self.assertRaises(ConfigError):
            InputModel.from_dict({"iid": {"kind": "standard_normal"}})
        with self.assertRaises(ConfigError):
            InputModel.from_dict({"something": []})
