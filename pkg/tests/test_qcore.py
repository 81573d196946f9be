from __future__ import annotations

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ascmoment import qcore
from ascmoment.errors import DivergenceError, DomainError, PoleError
from ascmoment.verify import (phi21_difference_residual, qpoch_shift_identities, random_complex, theta_fundamental,
                              theta_quasi_periodicity, theta_splitting)
from conftest import mp_qpoch, mp_theta

Q = 0.5


class TestQpochFinite:
    def test_empty_product(self):
        assert qcore.qpoch_finite(0.3, Q, 0) == 1.0

    def test_vanishes_on_inverse_lattice(self):
        assert qcore.qpoch_finite(2.0, Q, 2) == 0.0

    def test_three_factors(self):
        # 0.7 * 0.85 * 0.925
        assert qcore.qpoch_finite(0.3, Q, 3) == pytest.approx(0.550375, rel=1e-15)
        assert qcore.qpoch_finite(0.3, Q, 3) == pytest.approx(float(mp_qpoch(0.3, Q, 3)), rel=1e-15)

    @pytest.mark.parametrize("n", [-4, -1, 1, 5, 12])
    def test_against_oracle_complex(self, n):
        x = 0.7 - 1.3j
        assert abs(qcore.qpoch_finite(x, Q, n) - complex(mp_qpoch(x, Q, n))) <= 1e-14 * abs(complex(mp_qpoch(x, Q, n)))

    def test_negative_index_quotient(self):
        x, n = 0.37 + 0.2j, 3
        ref = qcore.qpoch_infinite(x, Q) / qcore.qpoch_infinite(x * Q**-n, Q)
        assert abs(qcore.qpoch_finite(x, Q, -n) - ref) <= 1e-13 * abs(ref)

    def test_negative_index_pole(self):
        with pytest.raises(PoleError):
            qcore.qpoch_finite(0.25, Q, -3)

    def test_non_integer_index(self):
        with pytest.raises(DomainError):
            qcore.qpoch_finite(0.3, Q, 1.5)


class TestQpochInfinite:
    def test_zero_argument(self):
        assert qcore.qpoch_infinite(0.0, Q) == 1.0

    def test_unit_argument(self):
        assert qcore.qpoch_infinite(1.0, Q) == 0.0

    def test_half(self):
        ref = float(mp_qpoch(0.5, Q))
        assert ref == pytest.approx(0.288788, abs=1e-6)
        assert qcore.qpoch_infinite(0.5, Q) == pytest.approx(ref, rel=1e-14)

    @pytest.mark.parametrize("x", [1.5e6, -1e6, 3.7e5 + 2e5j, -0.999, 1e-12, 123.4 - 56.7j])
    @pytest.mark.parametrize("q", [0.1, 0.5])
    def test_relative_error_large_arguments(self, x, q):
        ref = complex(mp_qpoch(x, q))
        assert abs(qcore.qpoch_infinite(x, q) - ref) <= 1e-14 * abs(ref)

    @pytest.mark.parametrize("x", [-1e6, 3.7e5 + 2e5j, -523.0])
    def test_log_form_beyond_overflow(self, x):
        # at q = 0.9 and |x| = 1e6 the product itself exceeds the double range
        ref = mp.log(mp_qpoch(x, 0.9))
        got = qcore.log_qpoch_infinite(x, 0.9)
        assert abs(got.real - float(ref.real)) <= 1e-14 * abs(float(ref.real))
        assert abs(np.exp(1j * (got.imag - float(ref.imag))) - 1) <= 1e-11

    def test_vectorised(self):
        x = np.array([0.1, -2.0, 3j])
        got = qcore.qpoch_infinite(x, Q)
        assert got.shape == (3,)
        assert np.allclose(got, [complex(mp_qpoch(v, Q)) for v in x], rtol=1e-14)

    def test_log_form(self):
        x = -250.0 + 10j
        assert abs(np.exp(qcore.log_qpoch_infinite(x, Q)) - qcore.qpoch_infinite(x, Q)) <= 1e-13 * abs(
            qcore.qpoch_infinite(x, Q))

    @pytest.mark.parametrize("q", [0.0, -0.2, 1.0, 0.9995])
    def test_invalid_base(self, q):
        with pytest.raises(DomainError):
            qcore.qpoch_infinite(0.3, q)

    def test_non_finite_argument(self):
        with pytest.raises(DomainError):
            qcore.qpoch_infinite(np.nan, Q)


class TestTheta:
    def test_zero_on_lattice(self):
        assert qcore.theta(Q, Q) == 0.0

    def test_reflection(self):
        x = 0.3 + 0.8j
        assert abs(qcore.theta(x, Q) - qcore.theta(Q / x, Q)) <= 1e-15 * abs(qcore.theta(x, Q))

    def test_minus_one_positive(self):
        v = qcore.theta(-1.0, Q)
        assert v > 0
        assert v == pytest.approx(float(mp_theta(-1, Q)), rel=1e-14)

    def test_zero_argument(self):
        with pytest.raises(DomainError):
            qcore.theta(0.0, Q)

    def test_log_theta(self):
        x = 4.2 - 1j
        assert abs(np.exp(qcore.log_theta(x, Q)) - qcore.theta(x, Q)) <= 1e-13 * abs(qcore.theta(x, Q))

    def test_multi(self):
        assert qcore.theta_multi([2.0, -0.3], Q) == pytest.approx(qcore.theta(2.0, Q) * qcore.theta(-0.3, Q))


class TestIdentities:
    def test_quasi_periodicity_all_k(self, rng):
        x = random_complex(rng, 50)
        for k in range(-3, 4):
            assert theta_quasi_periodicity(Q, x, np.full(50, k)) <= 1e-12

    def test_splitting(self, rng):
        assert theta_splitting(Q, random_complex(rng, 100)) <= 1e-12

    def test_fundamental(self, rng):
        assert theta_fundamental(Q, *[random_complex(rng, 100) for _ in range(4)]) <= 1e-12

    def test_shift_identities(self, rng):
        assert qpoch_shift_identities(Q, random_complex(rng, 100, 0.2, 3.0), rng.integers(0, 8, 100)) <= 1e-12

    @pytest.mark.parametrize("q", [0.2, 0.5, 0.8])
    def test_difference_equation(self, rng, q):
        xs = random_complex(rng, 50, 0.05, 0.95 * q)
        A, B, C = 0.3 + 0.1j, -0.6, 0.45j
        assert phi21_difference_residual(A, B, C, q, xs) <= 1e-12

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.05, 0.95), st.floats(0.2, 5.0), st.floats(0.01, np.pi), st.integers(-3, 3))
    def test_quasi_periodicity_property(self, q, r, arg, k):
        # arguments stay off the real axis, where theta has its zeros
        x = np.array([r * np.exp(1j * arg)])
        assert theta_quasi_periodicity(q, x, np.array([k])) <= 1e-12


class TestSeries:
    def test_zero_argument(self):
        assert qcore.phi21(0.3, 0.4, 0.5, Q, 0.0) == 1.0

    def test_unit_upper_parameter(self):
        assert qcore.phi21(1.0, 0.4, 0.5, Q, 0.7) == pytest.approx(1.0, abs=1e-15)

    def test_terminating_3phi2(self):
        upper = [Q**-2, 0.3 + 0.2j, 1.7]
        lower = [0.45, -0.8]
        x = 0.9
        ref = sum(
            complex(mp_qpoch(upper[0], Q, n) * mp_qpoch(upper[1], Q, n) * mp_qpoch(upper[2], Q, n)
                    / (mp_qpoch(Q, Q, n) * mp_qpoch(lower[0], Q, n) * mp_qpoch(lower[1], Q, n))) * x**n
            for n in range(3))
        assert abs(qcore.rphis(upper, lower, Q, x) - ref) <= 1e-14 * abs(ref)

    def test_terminating_with_large_argument(self):
        # terminating series are summed for any argument
        v = qcore.rphis([Q**-3, 0.2], [0.7], Q, 25.0)
        ref = sum(complex(mp_qpoch(Q**-3, Q, n) * mp_qpoch(0.2, Q, n) / (mp_qpoch(Q, Q, n) * mp_qpoch(0.7, Q, n)))
                  * 25.0**n for n in range(4))
        assert abs(v - ref) <= 1e-13 * abs(ref)

    def test_balanced_factor_for_r_less_than_s_plus_1(self):
        # 1phi1 carries the factor (-1)^n q^{n(n-1)/2}
        A, B, x = 0.3, 0.6, 2.5
        ref = mp.nsum(lambda n: mp_qpoch(A, Q, int(n)) / (mp_qpoch(Q, Q, int(n)) * mp_qpoch(B, Q, int(n)))
                      * (-1) ** n * mp.mpf(Q) ** (n * (n - 1) / 2) * x**n, [0, 80])
        assert qcore.rphis([A], [B], Q, x) == pytest.approx(float(ref), rel=1e-14)

    @pytest.mark.parametrize("x", [0.3, -0.85 + 0.1j, 0.95j])
    def test_2phi1_against_mpmath(self, x):
        A, B, C = 0.2 + 0.5j, -1.3, 0.4
        ref = complex(mp.qhyper([A, B], [C], Q, x))
        assert abs(qcore.phi21(A, B, C, Q, x) - ref) <= 1e-13 * abs(ref)

    def test_compensated_mode(self):
        A, B, C, x = 0.9, 0.8, 0.05, 0.97
        ref = complex(mp.qhyper([A, B], [C], Q, x))
        assert abs(qcore.phi21(A, B, C, Q, x, compensated=True) - ref) <= 1e-13 * abs(ref)

    def test_divergent(self):
        with pytest.raises(DivergenceError):
            qcore.phi21(0.3, 0.4, 0.5, Q, 1.2)

    def test_lower_parameter_pole(self):
        with pytest.raises(PoleError):
            qcore.phi21(0.3, 0.4, Q**-2, Q, 0.5)

    def test_vectorised_argument(self):
        xs = np.array([0.1, 0.2j, -0.4])
        got = qcore.phi21(0.3, 0.4, 0.5, Q, xs)
        assert np.allclose(got, [complex(mp.qhyper([0.3, 0.4], [0.5], Q, v)) for v in xs], rtol=1e-14)
