"""
Dirichlet characters modulo an odd prime.

A character of order d and index m is fixed by chi(g) = e(m/d) where g is the
smallest primitive root.  Values are stored as exact exponents k with
chi(n) = e(k/d) and only turned into complex doubles on demand.
"""
import math
import logging
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Optional, Tuple, Union

import numpy as np
from sympy import factorint

from pyfekete.utils import MILLER_RABIN_WITNESSES

MAX_TABLE_PRIME = 2 ** 31
EXPONENT_CHUNK = 1 << 22


def exponent_dtype(d: int) -> np.dtype:
    """Smallest signed integer dtype holding -1..d-1."""
    for dtype in (np.int8, np.int16, np.int32):
        if d - 1 <= np.iinfo(dtype).max:
            return np.dtype(dtype)
    return np.dtype(np.int64)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin test."""
    n = int(n)
    if n < 2:
        return False
    for q in MILLER_RABIN_WITNESSES:
        if n % q == 0:
            return n == q

    r, t = 0, n - 1
    while t % 2 == 0:
        t //= 2
        r += 1

    for a in MILLER_RABIN_WITNESSES:
        x = pow(a, t, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def unit_roots(d: int) -> np.ndarray:
    """e(k/d) for k = 0..d-1, exact at quarter turns."""
    k = np.arange(d)
    roots = np.exp(2j * np.pi * k / d)
    for quarter, exact in enumerate((1, 1j, -1, -1j)):
        roots[4 * k == quarter * d] = exact
    return roots


@dataclass(frozen=True)
class PrimeModulus:
    p: int
    factorization: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        if self.p < 3 or not is_prime(self.p):
            raise ValueError(f"Modulus {self.p} is not an odd prime")
        product = 1
        for q, e in self.factorization:
            product *= q ** e
        if product != self.p - 1:
            raise ValueError(f"Factorization {self.factorization} does not multiply to p-1 = {self.p - 1}")

    @classmethod
    def from_int(cls, p: int) -> 'PrimeModulus':
        p = int(p)
        if p < 3 or not is_prime(p):
            raise ValueError(f"Modulus {p} is not an odd prime")
        factors = tuple(sorted((int(q), int(e)) for q, e in factorint(p - 1).items()))
        return cls(p, factors)

    @property
    def prime_factors(self) -> Tuple[int, ...]:
        return tuple(q for q, _ in self.factorization)


def as_modulus(p: Union[int, PrimeModulus]) -> PrimeModulus:
    if isinstance(p, PrimeModulus):
        return p
    return PrimeModulus.from_int(p)


def find_primitive_root(p: Union[int, PrimeModulus]) -> int:
    """Smallest g >= 2 whose multiplicative order is p-1."""
    modulus = as_modulus(p)
    n = modulus.p - 1
    g = 2
    while True:
        if all(pow(g, n // q, modulus.p) != 1 for q in modulus.prime_factors):
            return g
        g += 1


def build_log_table(p: int, g: int) -> np.ndarray:
    """
    Discrete logarithms base g: table[g**t % p] = t, table[0] = -1.

    Powers are generated in baby-step/giant-step blocks, so the O(p) work
    happens inside numpy instead of a Python loop over every residue.
    """
    if p >= MAX_TABLE_PRIME:
        raise ValueError(f"Discrete-log tables need p < 2**31, got {p}")

    n = p - 1
    step = math.isqrt(n) + 1
    baby = [1] * step
    for t in range(1, step):
        baby[t] = baby[t - 1] * g % p
    rows = -(-n // step)
    giant_step = pow(g, step, p)
    giant = [1] * rows
    for r in range(1, rows):
        giant[r] = giant[r - 1] * giant_step % p

    baby_arr = np.asarray(baby, dtype=np.int64)
    giant_arr = np.asarray(giant, dtype=np.int64)
    table = np.full(p, -1, dtype=np.int32)
    chunk = max(1, (1 << 22) // step)
    for r0 in range(0, rows, chunk):
        r1 = min(rows, r0 + chunk)
        powers = (giant_arr[r0:r1, None] * baby_arr[None, :]) % p
        exps = np.arange(r0 * step, r1 * step, dtype=np.int64).reshape(r1 - r0, step)
        keep = exps < n
        table[powers[keep]] = exps[keep]
    return table


@lru_cache(maxsize=8)
def _generator_and_table(p: int) -> Tuple[int, np.ndarray]:
    g = find_primitive_root(p)
    table = build_log_table(p, g)
    table.setflags(write=False)
    logging.debug(f"Built discrete-log table for p={p} with generator {g}")
    return g, table


@dataclass(frozen=True, eq=False)
class DirichletCharacter:
    modulus: PrimeModulus
    order: int
    index: int
    generator: int
    log_table: np.ndarray = field(repr=False)

    @property
    def p(self) -> int:
        return self.modulus.p

    @cached_property
    def exponents(self) -> np.ndarray:
        """k with chi(n) = e(k/d); -1 marks n = 0."""
        exps = np.empty(self.p, dtype=exponent_dtype(self.order))
        for start in range(0, self.p, EXPONENT_CHUNK):
            chunk = self.log_table[start:start + EXPONENT_CHUNK].astype(np.int64)
            chunk *= self.index
            chunk %= self.order
            exps[start:start + EXPONENT_CHUNK] = chunk
        exps[0] = -1
        exps.setflags(write=False)
        return exps

    @cached_property
    def values(self) -> np.ndarray:
        vals = unit_roots(self.order)[self.exponents]
        vals[0] = 0
        vals.setflags(write=False)
        return vals

    @cached_property
    def conjugate_values(self) -> np.ndarray:
        vals = np.conj(self.values)
        vals.setflags(write=False)
        return vals

    def shifted_values(self, shift: int = 0) -> np.ndarray:
        """Coefficients chi(n + a) for n = 0..p-1; the read-only table itself when a = 0."""
        shift = int(shift) % self.p
        if shift == 0:
            return self.values
        return np.roll(self.values, -shift)

    def power_exponents(self, e: int) -> np.ndarray:
        """Exponent table of chi**e, -1 at 0."""
        exps = (self.exponents.astype(np.int64) * (int(e) % self.order)) % self.order
        exps[0] = -1
        return exps

    def is_principal_power(self, e: int) -> bool:
        return bool(np.all(self.power_exponents(e)[1:] == 0))


def make_character(p: Union[int, PrimeModulus], d: int, m: int = 1) -> DirichletCharacter:
    modulus = as_modulus(p)
    d, m = int(d), int(m)
    if d < 2:
        raise ValueError(f"Character order must be at least 2, got {d}")
    if (modulus.p - 1) % d != 0:
        raise ValueError(f"Order {d} does not divide p-1 = {modulus.p - 1}")
    if math.gcd(m, d) != 1:
        raise ValueError(f"Index {m} is not coprime to order {d}; the character would have order {d // math.gcd(m, d)}")

    g, table = _generator_and_table(modulus.p)
    return DirichletCharacter(modulus, d, m % d, g, table)


def char_exponent(chi: DirichletCharacter, n: int) -> Optional[int]:
    k = int(chi.exponents[int(n) % chi.p])
    return None if k < 0 else k


def char_value(chi: DirichletCharacter, n: int) -> complex:
    return complex(chi.values[int(n) % chi.p])


def gauss_sum(chi: DirichletCharacter) -> complex:
    """tau(chi) = sum chi(n) e(n/p), by direct summation."""
    n = np.arange(chi.p)
    return complex(np.sum(chi.values * np.exp(2j * np.pi * n / chi.p)))


def eval_f_direct(chi: DirichletCharacter, theta: float, shift: int = 0) -> complex:
    """Reference O(p) evaluation of sum_n chi(n + a) e(n theta)."""
    n = np.arange(chi.p)
    phase = np.exp(2j * np.pi * np.mod(n * float(theta), 1.0))
    return complex(np.dot(chi.shifted_values(shift), phase))


def pattern_frequencies(chi: DirichletCharacter, n: int) -> np.ndarray:
    """
    Frequency over K in F_p of (chi(K+1), ..., chi(K+n)) = (e(a_1/d), ..., e(a_n/d)).

    The result has shape (d,) * n and is indexed as freq[a_1, ..., a_n].
    Windows that hit a zero of chi are counted in no cell.
    """
    n = int(n)
    d = chi.order
    if n < 1:
        raise ValueError(f"Pattern length must be positive, got {n}")
    if d ** n > 10 ** 7:
        raise ValueError(f"{d}**{n} patterns is too many to tabulate")

    windows = np.stack([np.roll(chi.exponents, -i) for i in range(1, n + 1)])
    valid = np.all(windows >= 0, axis=0)
    codes = (d ** np.arange(n, dtype=np.int64)) @ windows[:, valid]
    counts = np.bincount(codes, minlength=d ** n)
    return (counts / chi.p).reshape((d,) * n, order='F')
