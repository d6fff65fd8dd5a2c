from unittest import TestCase

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import special as sc
from scipy import stats

from meandim.exceptions import ConvergenceError, DomainError
from meandim.utils.special import (
    ToleranceProfile,
    chisq_cdf,
    chisq_quantile,
    gamma_p,
    normal_cdf,
    normal_quantile,
)

PROBABILITIES = np.concatenate(
    [np.geomspace(1e-12, 1e-3, 10), np.linspace(0.01, 0.99, 49), 1.0 - np.geomspace(1e-3, 1e-12, 10)]
)


class NormalQuantileTestCase(TestCase):
    def test_matches_ndtri(self):
        ours = normal_quantile(PROBABILITIES)
        np.testing.assert_allclose(ours, sc.ndtri(PROBABILITIES), rtol=1e-13, atol=1e-14)

    def test_median_and_known_values(self):
        self.assertEqual(normal_quantile(0.5), 0.0)
        self.assertAlmostEqual(normal_quantile(0.975), 1.959963984540054, places=13)

    @settings(max_examples=200)
    @given(v=st.floats(min_value=0.5, max_value=1.0, exclude_max=True))
    def test_odd_symmetry_is_exact(self, v):
        # 1 - v is exact for v >= 1/2
        self.assertEqual(normal_quantile(v), -normal_quantile(1.0 - v))

    def test_symmetry_on_grid(self):
        v = np.linspace(0.501, 0.999, 500)
        np.testing.assert_array_equal(normal_quantile(v), -normal_quantile(1.0 - v))

    def test_monotone(self):
        x = normal_quantile(np.linspace(1e-6, 1 - 1e-6, 10001))
        self.assertTrue(np.all(np.diff(x) > 0))

    def test_cdf_round_trip(self):
        np.testing.assert_allclose(normal_cdf(normal_quantile(PROBABILITIES)), PROBABILITIES, rtol=1e-12)

    def test_domain(self):
        for u in (0.0, 1.0, -0.1, 1.5, np.nan):
            with self.subTest(u=u), self.assertRaises(DomainError):
                normal_quantile(u)

    def test_scalar_and_array_results(self):
        self.assertIsInstance(normal_quantile(0.3), float)
        self.assertEqual(normal_quantile(np.array([[0.3, 0.7]])).shape, (1, 2))


class ChiSquareQuantileTestCase(TestCase):
    def test_round_trip(self):
        for df in (1, 2, 24, 999):
            with self.subTest(df=df):
                x = chisq_quantile(df, PROBABILITIES)
                self.assertTrue(np.all(np.abs(chisq_cdf(df, x) - PROBABILITIES) <= 1e-10))

    def test_matches_scipy(self):
        u = np.linspace(0.001, 0.999, 101)
        for df in (1, 3, 24, 999):
            with self.subTest(df=df):
                np.testing.assert_allclose(chisq_quantile(df, u), stats.chi2.ppf(u, df), rtol=1e-9)

    def test_two_degrees_of_freedom_closed_form(self):
        u = np.linspace(0.01, 0.99, 99)
        np.testing.assert_allclose(chisq_quantile(2, u), -2.0 * np.log1p(-u), rtol=1e-12)

    def test_monotone(self):
        for df in (1, 5, 500):
            x = chisq_quantile(df, np.linspace(1e-6, 1 - 1e-6, 2001))
            self.assertTrue(np.all(np.diff(x) > 0), f"df={df}")

    @settings(max_examples=100, deadline=None)
    @given(
        df=st.integers(min_value=1, max_value=200),
        u=st.floats(min_value=1e-6, max_value=0.999),
        gap=st.floats(min_value=1e-6, max_value=0.5),
    )
    def test_ordered_pairs(self, df, u, gap):
        assume(u + gap < 1.0 - 1e-6)
        self.assertLess(chisq_quantile(df, u), chisq_quantile(df, u + gap))

    def test_lower_tail_of_one_degree(self):
        # P(chi2_1 <= x) ~ sqrt(2x / pi) for small x
        u = 1e-8
        self.assertAlmostEqual(chisq_quantile(1, u) / (np.pi * u * u / 2.0), 1.0, places=6)

    def test_domain(self):
        with self.assertRaises(DomainError):
            chisq_quantile(0, 0.5)
        with self.assertRaises(DomainError):
            chisq_quantile(3, 1.0)
        with self.assertRaises(DomainError):
            gamma_p(-1.0, 1.0)
        with self.assertRaises(DomainError):
            gamma_p(1.0, -1.0)

    def test_convergence_error_keeps_last_iterate(self):
        profile = ToleranceProfile(abs_cdf_roundtrip=1e-300, max_newton_iters=1)
        u = np.linspace(0.05, 0.95, 19)
        with self.assertRaises(ConvergenceError) as ctx:
            chisq_quantile(24, u, tolerance=profile)
        self.assertEqual(np.shape(ctx.exception.last_iterate), u.shape)

    def test_tolerance_profile_validation(self):
        with self.assertRaises(DomainError):
            ToleranceProfile(abs_cdf_roundtrip=0.0)
        with self.assertRaises(DomainError):
            ToleranceProfile(max_newton_iters=0)

    def test_scalar_result(self):
        self.assertIsInstance(chisq_quantile(2, 0.5), float)
        self.assertAlmostEqual(chisq_quantile(2, 0.5), 2.0 * np.log(2.0), places=12)
