import math
from unittest import TestCase

import numpy as np

from meandim.commands.oracle_compare import default_instances
from meandim.definitions.functions import (
    GaussianProduct,
    Keister,
    MultiquadricZ,
    SyntheticAdditive,
    SyntheticProduct,
)
from meandim.definitions.inputs import FiniteDiscrete, InputModel, StandardNormal
from meandim.exceptions import (
    DegenerateVarianceError,
    DimensionError,
    DomainError,
    GridTooLargeError,
)
from meandim.utils.anova import (
    anova_effects,
    evaluate_grid,
    exact_anova,
    exact_jansen_check,
    exact_total_index,
    expected_conditional_variance,
)
from meandim.utils.theory import gaussian_product_nu, sum_central_moments

SIGNS = FiniteDiscrete.uniform([-1.0, 1.0])
ONES_TWOS = FiniteDiscrete.uniform([1.0, 2.0])


class KnownDecompositionTestCase(TestCase):
    def test_additive(self):
        result = exact_anova(SyntheticAdditive(d=4), InputModel.iid(SIGNS, 4))
        self.assertEqual(result.nu, 1.0)
        self.assertEqual(result.variance, 4.0)
        self.assertEqual(result.mean, 0.0)
        for mask, value in result.components.items():
            self.assertEqual(value, 1.0 if mask.bit_count() == 1 else 0.0)
        self.assertEqual(result.non_additive_fraction, 0.0)
        self.assertEqual(result.superposition_dimension(), 1)

    def test_product(self):
        result = exact_anova(SyntheticProduct(d=3), InputModel.iid(SIGNS, 3))
        self.assertEqual(result.nu, 3.0)
        self.assertEqual(result.components[0b111], 1.0)
        self.assertEqual(result.non_additive_fraction, 1.0)
        self.assertEqual(result.superposition_dimension(), 3)
        np.testing.assert_array_equal(result.dimension_distribution(), [0.0, 0.0, 1.0])

    def test_two_dimensional_multiquadric(self):
        inputs = InputModel.iid(ONES_TWOS, 2)
        result = exact_anova(MultiquadricZ.for_inputs(0.5, inputs), inputs)
        # f(1,1), f(1,2) = f(2,1), f(2,2) are sqrt(2), sqrt(3), 2 up to the scale mu^-1/2
        a, b, c = math.sqrt(2.0), math.sqrt(3.0), 2.0
        main = (c - a) / 4.0
        interaction = (a - 2.0 * b + c) / 4.0
        expected = (2 * main**2 + 2 * interaction**2) / (2 * main**2 + interaction**2)
        self.assertAlmostEqual(result.nu, expected, places=12)
        self.assertAlmostEqual(result.nu, 1.003613369518, places=10)
        self.assertEqual(result.grid_size, 4)

    def test_gaussian_product_matches_closed_form(self):
        for theta, law, centers in (
            (1.0, FiniteDiscrete.gauss_hermite(5), (0.0,) * 4),
            (0.7, FiniteDiscrete.gauss_hermite(3), (-1.0, -0.5, 0.0, 0.25, 0.5, 1.0)),
            (3.0, FiniteDiscrete.uniform([0.0, 1.0, 2.0]), (0.5, 1.5, 1.0)),
        ):
            with self.subTest(theta=theta):
                spec = GaussianProduct(theta=theta, centers=centers)
                result = exact_anova(spec, InputModel.iid(law, len(centers)))
                self.assertAlmostEqual(result.nu, gaussian_product_nu(theta, centers, law), places=10)

    def test_indices(self):
        inputs = InputModel.iid(ONES_TWOS, 3)
        result = exact_anova(MultiquadricZ.for_inputs(-1.0, inputs), inputs)
        full = 0b111
        self.assertAlmostEqual(result.lower_index(full), result.variance, places=14)
        self.assertAlmostEqual(result.upper_index(full), result.variance, places=14)
        self.assertAlmostEqual(
            result.lower_index(0b011) + result.upper_index(0b100), result.variance, places=14
        )
        self.assertAlmostEqual(float(result.dimension_distribution().sum()), 1.0, places=14)
        with self.assertRaises(DimensionError):
            result.lower_index(0)
        with self.assertRaises(DimensionError):
            result.upper_index(0b1000)
        with self.assertRaises(DomainError):
            result.superposition_dimension(0.0)


class OracleInvariantsTestCase(TestCase):
    def test_default_instances(self):
        for instance in default_instances():
            with self.subTest(instance=instance.name):
                result = exact_anova(instance.spec, instance.inputs)
                variance = result.variance
                components = np.array(list(result.components.values()))
                self.assertTrue(np.all(components >= 0))
                self.assertEqual(len(components), 2**result.d - 1)
                self.assertAlmostEqual(components.sum() / variance, 1.0, places=10)
                tau = result.total_indices()
                self.assertAlmostEqual(result.nu, tau.sum() / variance, places=12)
                self.assertTrue(1.0 - 1e-12 <= result.nu <= result.d + 1e-12)
                for j in range(result.d):
                    jansen = exact_jansen_check(instance.spec, instance.inputs, j)
                    conditional = expected_conditional_variance(instance.spec, instance.inputs, j)
                    self.assertAlmostEqual(exact_total_index(result, j), tau[j])
                    self.assertLessEqual(abs(jansen - tau[j]), 1e-9 * variance)
                    self.assertLessEqual(abs(conditional - tau[j]), 1e-9 * variance)

    def test_effects_are_orthogonal_and_reconstruct(self):
        for instance in default_instances()[:6]:
            with self.subTest(instance=instance.name):
                grid = evaluate_grid(instance.spec, instance.inputs)
                effects = {
                    mask: np.broadcast_to(effect, grid.values.shape)
                    for mask, effect in anova_effects(grid)
                }
                np.testing.assert_allclose(sum(effects.values()), grid.values, atol=1e-12)
                scale = grid.expectation(grid.values**2)
                masks = sorted(effects)
                for mask in masks[1:]:
                    self.assertLessEqual(abs(grid.expectation(effects[mask])), 1e-12 * math.sqrt(scale))
                for i, u in enumerate(masks):
                    for v in masks[i + 1:]:
                        self.assertLessEqual(
                            abs(grid.expectation(effects[u] * effects[v])), 1e-12 * scale
                        )

    def test_degenerate_coordinate_has_no_effect(self):
        instance = next(i for i in default_instances() if i.name == "mixed_z_d4")
        result = exact_anova(instance.spec, instance.inputs)
        self.assertLessEqual(exact_total_index(result, 3), 1e-14 * result.variance)

    def test_near_additive_multiquadric(self):
        for name in ("multiquadric_z_d2", "multiquadric_z_d3"):
            instance = next(i for i in default_instances() if i.name == name)
            result = exact_anova(instance.spec, instance.inputs)
            self.assertLess(result.nu - 1.0, 0.01)
            self.assertLess(result.non_additive_fraction, 0.01)

    def test_non_additive_fraction_is_below_excess_dimension(self):
        for instance in default_instances():
            with self.subTest(instance=instance.name):
                result = exact_anova(instance.spec, instance.inputs)
                self.assertLessEqual(result.non_additive_fraction, result.nu - 1.0 + 1e-10)


class OracleErrorsTestCase(TestCase):
    def test_non_finite_inputs(self):
        with self.assertRaises(DomainError):
            exact_anova(Keister(d=2), InputModel.iid(StandardNormal(), 2))

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionError):
            exact_anova(Keister(d=3), InputModel.iid(SIGNS, 2))

    def test_too_many_dimensions(self):
        with self.assertRaises(DimensionError):
            exact_anova(SyntheticAdditive(d=21), InputModel.iid(FiniteDiscrete((1.0,), (1.0,)), 21))

    def test_grid_too_large(self):
        law = FiniteDiscrete.gauss_hermite(5)
        with self.assertRaises(GridTooLargeError) as ctx:
            exact_anova(Keister(d=12), InputModel.iid(law, 12))
        self.assertEqual(ctx.exception.size, 5**12)

    def test_constant_integrand(self):
        with self.assertRaises(DegenerateVarianceError):
            exact_anova(Keister(d=2), InputModel.iid(FiniteDiscrete((1.0,), (1.0,)), 2))
        with self.assertRaises(DegenerateVarianceError):
            exact_anova(Keister(d=2), InputModel.iid(SIGNS, 2))

    def test_coordinate_out_of_range(self):
        inputs = InputModel.iid(SIGNS, 2)
        result = exact_anova(SyntheticAdditive(d=2), inputs)
        with self.assertRaises(DimensionError):
            exact_total_index(result, 2)
        with self.assertRaises(DimensionError):
            exact_jansen_check(SyntheticAdditive(d=2), inputs, -1)
        with self.assertRaises(DimensionError):
            expected_conditional_variance(SyntheticAdditive(d=2), inputs, 5)


class SumMomentsTestCase(TestCase):
    def test_cumulant_sums_match_enumeration(self):
        inputs = InputModel((
            FiniteDiscrete((0.5, 1.5, 3.0), (0.2, 0.5, 0.3)),
            FiniteDiscrete.uniform([1.0, 2.0]),
            FiniteDiscrete((1.0, 2.0, 4.0), (0.5, 0.3, 0.2)),
        ))
        grid = evaluate_grid(SyntheticAdditive(d=3), inputs)
        moments = sum_central_moments(inputs.summary)
        self.assertAlmostEqual(moments.mean, grid.expectation(grid.values), places=13)
        centered = grid.values - moments.mean
        for k in range(2, 7):
            with self.subTest(order=k):
                exact = grid.expectation(centered**k)
                self.assertAlmostEqual(moments.central(k), exact, delta=1e-10 * max(1.0, abs(exact)))
