import math
import unittest
from unittest.mock import patch

import numpy as np
from sympy import isprime, legendre_symbol

from pyfekete.charmod import (PrimeModulus, build_log_table, char_exponent, char_value, eval_f_direct,
                              exponent_dtype, find_primitive_root, gauss_sum, is_prime, make_character,
                              pattern_frequencies, unit_roots)


class TestIsPrime(unittest.TestCase):

    def test_matches_sympy_below_5000(self):
        for n in range(5000):
            self.assertEqual(is_prime(n), isprime(n), n)

    def test_large_primes_and_pseudoprimes(self):
        for p in (10007, 10009, 200003, 1000003, 2147483647):
            self.assertTrue(is_prime(p), p)
        # Carmichael number and a strong pseudoprime to bases 2, 3, 5, 7
        for n in (561, 3215031751, 10006):
            self.assertFalse(is_prime(n), n)


class TestModulus(unittest.TestCase):

    def test_unit_roots_exact_at_quarter_turns(self):
        roots = unit_roots(4)
        self.assertEqual(list(roots), [1, 1j, -1, -1j])
        self.assertEqual(unit_roots(2)[1], -1)

    def test_from_int_factorizes(self):
        modulus = PrimeModulus.from_int(13)
        self.assertEqual(modulus.factorization, ((2, 2), (3, 1)))
        self.assertEqual(modulus.prime_factors, (2, 3))

    def test_rejects_composite_and_bad_factorization(self):
        with self.assertRaises(ValueError):
            PrimeModulus.from_int(15)
        with self.assertRaises(ValueError):
            PrimeModulus.from_int(2)
        with self.assertRaises(ValueError):
            PrimeModulus(13, ((2, 1), (3, 1)))

    def test_primitive_roots(self):
        self.assertEqual(find_primitive_root(7), 3)
        self.assertEqual(find_primitive_root(23), 5)
        self.assertEqual(find_primitive_root(10007), 5)

    def test_log_table(self):
        table = build_log_table(11, 2)
        self.assertEqual(table[0], -1)
        for t in range(10):
            self.assertEqual(table[pow(2, t, 11)], t)

    def test_log_table_is_a_permutation(self):
        p = 10007
        table = build_log_table(p, find_primitive_root(p))
        self.assertEqual(sorted(table[1:].tolist()), list(range(p - 1)))

    def test_log_table_size_limit(self):
        with self.assertRaises(ValueError):
            build_log_table(2 ** 31 + 11, 2)


class TestDirichletCharacter(unittest.TestCase):

    def test_invalid_orders(self):
        with self.assertRaises(ValueError):
            make_character(101, 3)
        with self.assertRaises(ValueError):
            make_character(13, 1)
        with self.assertRaises(ValueError):
            make_character(13, 4, 2)

    def test_quadratic_character_is_legendre_symbol(self):
        chi = make_character(101, 2)
        for n in range(1, 101):
            self.assertEqual(char_value(chi, n), int(legendre_symbol(n, 101)))
        self.assertEqual(char_value(chi, 0), 0)
        self.assertIsNone(char_exponent(chi, 0))

    def test_generator_value(self):
        chi = make_character(13, 4, 3)
        self.assertEqual(char_exponent(chi, chi.generator), 3)
        self.assertEqual(char_value(chi, chi.generator), -1j)

    def test_multiplicative_and_periodic(self):
        chi = make_character(10009, 4)
        rng = np.random.default_rng(0)
        a, b = rng.integers(1, 10009, size=(2, 200))
        lhs = chi.values[(a * b) % 10009]
        rhs = chi.values[a] * chi.values[b]
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)
        self.assertEqual(char_value(chi, 12345 + 10009), char_value(chi, 12345))
        self.assertEqual(char_value(chi, -1), char_value(chi, 10008))

    def test_value_distribution(self):
        chi = make_character(10009, 3)
        counts = np.bincount(chi.exponents[1:], minlength=3)
        self.assertEqual(counts.tolist(), [3336, 3336, 3336])

    def test_powers(self):
        chi = make_character(10009, 6)
        self.assertTrue(chi.is_principal_power(6))
        self.assertFalse(chi.is_principal_power(3))
        self.assertEqual(chi.power_exponents(2)[0], -1)

    def test_exponents_use_small_dtype(self):
        chi = make_character(10009, 4, 3)
        self.assertEqual(chi.exponents.dtype, np.int8)
        expected = (build_log_table(10009, chi.generator).astype(np.int64) * 3) % 4
        np.testing.assert_array_equal(chi.exponents[1:], expected[1:])
        self.assertEqual(exponent_dtype(128), np.int8)
        self.assertEqual(exponent_dtype(129), np.int16)
        self.assertEqual(exponent_dtype(40000), np.int32)

    @patch('pyfekete.charmod.EXPONENT_CHUNK', 1000)
    def test_exponents_built_in_chunks(self):
        chi = make_character(10007, 2)
        table = build_log_table(10007, chi.generator)
        np.testing.assert_array_equal(chi.exponents[1:], table[1:] % 2)
        self.assertEqual(chi.exponents[0], -1)

    def test_power_exponents_do_not_wrap(self):
        chi = make_character(10009, 6)
        e = 10 ** 6 + 1
        expected = (chi.exponents[1:].astype(np.int64) * e) % 6
        np.testing.assert_array_equal(chi.power_exponents(e)[1:], expected)

    def test_shifted_values(self):
        chi = make_character(101, 2)
        self.assertIs(chi.shifted_values(0), chi.values)
        np.testing.assert_array_equal(chi.shifted_values(101), chi.values)
        shifted = chi.shifted_values(3)
        for n in (0, 5, 99, 100):
            self.assertEqual(shifted[n], chi.values[(n + 3) % 101])

    def test_values_are_read_only(self):
        chi = make_character(101, 2)
        with self.assertRaises(ValueError):
            chi.values[1] = 0


class TestGaussSum(unittest.TestCase):

    def test_modulus_is_sqrt_p(self):
        for p, d, m in ((101, 2, 1), (10009, 3, 2), (10009, 4, 3), (10007, 2, 1), (1009, 7, 5)):
            tau = gauss_sum(make_character(p, d, m))
            self.assertAlmostEqual(abs(tau), math.sqrt(p), places=8)

    def test_quadratic_gauss_sum_sign(self):
        self.assertAlmostEqual(gauss_sum(make_character(13, 2)), math.sqrt(13), places=10)
        self.assertAlmostEqual(gauss_sum(make_character(11, 2)), 1j * math.sqrt(11), places=10)

    def test_f_at_roots_of_unity(self):
        chi = make_character(1009, 3)
        tau = gauss_sum(chi)
        for k in (1, 17, 500):
            value = eval_f_direct(chi, k / 1009)
            self.assertAlmostEqual(value, np.conj(chi.values[k]) * tau, places=8)
        self.assertAlmostEqual(abs(eval_f_direct(chi, 0.0)), 0.0, places=8)


class TestPatterns(unittest.TestCase):

    def test_single_values(self):
        chi = make_character(10009, 3)
        freq = pattern_frequencies(chi, 1)
        self.assertEqual(freq.shape, (3,))
        np.testing.assert_allclose(freq, 3336 / 10009)

    def test_pairs_exclude_zero_windows(self):
        chi = make_character(10009, 4)
        freq = pattern_frequencies(chi, 2)
        self.assertEqual(freq.shape, (4, 4))
        self.assertAlmostEqual(freq.sum(), (10009 - 2) / 10009, places=12)
        self.assertLess(np.max(np.abs(freq - 1 / 16)), 5 * 2 / math.sqrt(10009))

    def test_pattern_indexing(self):
        chi = make_character(101, 2)
        freq = pattern_frequencies(chi, 2)
        exps = chi.exponents
        expected = sum(1 for K in range(101)
                       if exps[(K + 1) % 101] == 1 and exps[(K + 2) % 101] == 0) / 101
        self.assertAlmostEqual(freq[1, 0], expected, places=12)

    def test_invalid_length(self):
        with self.assertRaises(ValueError):
            pattern_frequencies(make_character(101, 2), 0)


if __name__ == '__main__':
    unittest.main()
