"""Channel model tests.

Reference values were computed independently by adaptive quadrature of the
standard normal density (scipy.integrate.quad) and then frozen here.
"""

import math

import numpy as np
import pytest

from ehlink import capacity, capacity_derivative, crossover, q_function


class TestQFunction:
    def test_frozen_quadrature_values(self):
        # quad(normal_pdf, x, inf) for x in {1, sqrt(2), 3}.
        assert q_function(1.0) == pytest.approx(0.15865525393145707, abs=1e-14)
        assert q_function(math.sqrt(2.0)) == pytest.approx(
            0.07864960352514257, abs=1e-14
        )
        assert q_function(3.0) == pytest.approx(0.0013498980316300963, abs=1e-14)

    def test_symmetry_point(self):
        assert q_function(0.0) == pytest.approx(0.5, abs=1e-15)

    def test_reflection_identity(self):
        for x in (0.3, 1.0, 2.5):
            assert q_function(x) + q_function(-x) == pytest.approx(1.0, abs=1e-14)

    def test_array_matches_scalar(self):
        xs = np.array([-1.0, 0.0, 0.5, 2.0])
        np.testing.assert_allclose(
            q_function(xs), [q_function(float(x)) for x in xs], rtol=1e-15
        )

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            q_function(math.nan)
        with pytest.raises(ValueError):
            q_function(np.array([1.0, math.inf]))


class TestCrossover:
    def test_matches_q_of_sqrt_2e(self):
        for e in (0.1, 1.0, 4.0):
            assert crossover(e) == pytest.approx(
                q_function(math.sqrt(2.0 * e)), abs=1e-15
            )

    def test_zero_energy_is_half(self):
        assert crossover(0.0) == pytest.approx(0.5, abs=1e-15)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            crossover(-0.1)
        with pytest.raises(ValueError):
            crossover(np.array([0.5, -1e-9]))


class TestCapacity:
    def test_frozen_quadrature_values(self):
        # 1 + eps*log2(eps) + (1-eps)*log2(1-eps), eps from quadrature.
        assert capacity(1.0) == pytest.approx(0.6025969807153305, abs=1e-12)
        assert capacity(0.25) == pytest.approx(0.2053756073825263, abs=1e-12)
        assert capacity(4.0) == pytest.approx(0.9761880351141595, abs=1e-12)

    def test_limits(self):
        assert capacity(0.0) == 0.0
        assert capacity(50.0) == pytest.approx(1.0, abs=1e-12)

    def test_strictly_increasing(self):
        es = np.linspace(0.0, 10.0, 2001)
        cs = capacity(es)
        assert np.all(np.diff(cs) > 0)

    def test_bounded_in_unit_interval(self):
        es = np.geomspace(1e-9, 1e3, 500)
        cs = capacity(es)
        assert np.all(cs >= 0.0) and np.all(cs <= 1.0)

    def test_concavity_on_grid(self):
        es = np.arange(0.01, 10.0, 1e-3)
        cs = capacity(es)
        second = np.diff(cs, 2)
        assert np.max(second) <= 1e-9

    def test_array_matches_scalar(self):
        es = np.array([0.0, 0.3, 1.0, 6.0])
        np.testing.assert_allclose(
            capacity(es), [capacity(float(e)) for e in es], rtol=1e-14, atol=1e-15
        )


class TestCapacityDerivative:
    def test_matches_finite_differences(self):
        h = 1e-6
        for e in (0.05, 0.5, 1.0, 3.0, 8.0):
            fd = (capacity(e + h) - capacity(e - h)) / (2.0 * h)
            assert capacity_derivative(e) == pytest.approx(fd, rel=1e-7)

    def test_frozen_values(self):
        assert capacity_derivative(1.0) == pytest.approx(0.3684326578823338, rel=1e-8)
        assert capacity_derivative(0.5) == pytest.approx(0.5823755698797228, rel=1e-8)

    def test_positive_and_decreasing_tail(self):
        es = np.linspace(0.5, 10.0, 500)
        ds = capacity_derivative(es)
        assert np.all(ds > 0)
        assert np.all(np.diff(ds) < 0)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            capacity_derivative(0.0)
        with pytest.raises(ValueError):
            capacity_derivative(np.array([1.0, -2.0]))
