"""
The random model

    G = (i/p) sum_{|j| < p/2} X(j) / (e((j + 1/2)/p) - 1),

X(j) i.i.d. uniform on the d-th roots of unity, and its comparison with the
arithmetic values g_{chi,K}(1/2).

Sampling is counter-based: block b of `block_size` samples is drawn from a
Philox stream keyed by SeedSequence(seed, spawn_key=(b,)), so any sample can be
regenerated alone and results do not depend on the number of workers.
"""
import math
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict
from functools import lru_cache
from typing import Any, Dict, NamedTuple, Optional, Tuple

import numpy as np
from scipy.special import comb, logsumexp

from pyfekete.charmod import DirichletCharacter, is_prime, unit_roots
from pyfekete.helpers import PyFeketeHelpers
from pyfekete.spectrum import exceptional_threshold, midpoint_g
from pyfekete.theory import alpha
from pyfekete.utils import BLOCK_SIZE, EXP_LIMIT, log_duration

EXACT_MOMENT_LIMIT = 4
# Cap on the number of table lookups held in memory at once
_GATHER_BUDGET = 1 << 21


@dataclass(frozen=True)
class RandomModelConfig:
    p: int
    d: int
    samples: int = 100000
    seed: int = 0
    truncation: Optional[int] = None
    block_size: int = BLOCK_SIZE

    def __post_init__(self):
        if self.p < 3 or not is_prime(self.p):
            raise ValueError(f"Modulus {self.p} is not an odd prime")
        if self.d < 2:
            raise ValueError(f"Order d must be at least 2, got {self.d}")
        if self.samples < 1:
            raise ValueError(f"Sample count must be positive, got {self.samples}")
        if self.block_size < 1:
            raise ValueError(f"Block size must be positive, got {self.block_size}")
        if self.truncation is not None and not 0 <= self.truncation <= (self.p - 1) // 2:
            raise ValueError(f"Truncation radius must lie in [0, {(self.p - 1) // 2}], got {self.truncation}")

    @property
    def radius(self) -> int:
        return (self.p - 1) // 2 if self.truncation is None else self.truncation

    @property
    def blocks(self) -> int:
        return -(-self.samples // self.block_size)


@dataclass(frozen=True)
class RandomModelEstimate:
    value: float
    std_error: float
    N: int
    seed: int
    p: int
    d: int
    s: Optional[float] = None
    log_value: Optional[float] = None
    overflow: bool = False

    def to_record(self) -> Dict[str, Any]:
        return asdict(self)


def model_coefficients(p: int, truncation: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """(j, c_j) with c_j = i / (p (e((j + 1/2)/p) - 1)) for |j| <= truncation."""
    radius = (p - 1) // 2 if truncation is None else int(truncation)
    j = np.arange(-radius, radius + 1)
    c = 1j / (p * (np.exp(2j * np.pi * (j + 0.5) / p) - 1.0))
    return j, c


def _group_size(d: int) -> int:
    """Most consecutive X(j) whose joint value fits in one byte."""
    g = 1
    while d ** (g + 1) <= 256:
        g += 1
    return g


@lru_cache(maxsize=8)
def _lookup_table(p: int, d: int, radius: int) -> Tuple[np.ndarray, int]:
    """
    Partial sums over groups of g consecutive terms.

    table[grp, code] = sum_i c_{grp*g+i} e(digit_i(code)/d), digits of code
    in base d, so one uniform code per group is g i.i.d. uniform roots.
    """
    g = _group_size(d)
    _, c = model_coefficients(p, radius)
    groups = -(-len(c) // g)
    padded = np.zeros(groups * g, dtype=complex)
    padded[:len(c)] = c
    padded = padded.reshape(groups, g)

    codes = np.arange(d ** g)
    roots = unit_roots(d)
    table = np.zeros((groups, d ** g), dtype=complex)
    for i in range(g):
        digit = (codes // d ** i) % d
        table += padded[:, i, None] * roots[digit][None, :]
    table.setflags(write=False)
    return table, g


def _stream(config: RandomModelConfig, block: int) -> np.random.Generator:
    seq = np.random.SeedSequence(config.seed, spawn_key=(int(block),))
    return np.random.Generator(np.random.Philox(seq))


def sample_block(config: RandomModelConfig, block: int) -> np.ndarray:
    """All block_size draws of G in block `block`."""
    table, g = _lookup_table(config.p, config.d, config.radius)
    groups, ncodes = table.shape
    dtype = np.uint8 if ncodes <= 256 else np.int64
    rng = _stream(config, block)
    rows = max(1, _GATHER_BUDGET // groups)
    index = np.arange(groups)

    out = np.empty(config.block_size, dtype=complex)
    for r0 in range(0, config.block_size, rows):
        r1 = min(config.block_size, r0 + rows)
        codes = rng.integers(0, ncodes, size=(r1 - r0, groups), dtype=dtype)
        out[r0:r1] = table[index, codes].sum(axis=1)
    return out


def sample_G(config: RandomModelConfig, sample_index: int) -> complex:
    sample_index = int(sample_index)
    if not 0 <= sample_index < config.samples:
        raise ValueError(f"Sample index {sample_index} outside [0, {config.samples})")
    block, row = divmod(sample_index, config.block_size)
    return complex(sample_block(config, block)[row])


@log_duration("random model sampling")
def sample_many(config: RandomModelConfig, workers: Optional[int] = None) -> np.ndarray:
    """All config.samples draws of G, in sample-index order."""
    with ThreadPoolExecutor(max_workers=workers) as pool:
        blocks = list(pool.map(lambda b: sample_block(config, b), range(config.blocks)))
    return np.concatenate(blocks)[:config.samples]


def _block_jackknife(weights: np.ndarray, block_size: int) -> float:
    """Standard error of the mean of `weights` by leave-one-block-out jackknife."""
    n = len(weights)
    if n < 2:
        return 0.0
    if n <= block_size:
        return float(np.std(weights, ddof=1) / math.sqrt(n))
    starts = np.arange(0, n, block_size)
    sums = np.add.reduceat(weights, starts)
    sizes = np.diff(np.append(starts, n))
    leave_out = (sums.sum() - sums) / (n - sizes)
    nb = len(sums)
    return float(math.sqrt((nb - 1) / nb * np.sum((leave_out - leave_out.mean()) ** 2)))


def _mean_exp(x: np.ndarray, config: RandomModelConfig, s: float) -> RandomModelEstimate:
    shift = float(x.max())
    weights = np.exp(x - shift)
    log_value = shift + math.log(weights.mean())
    overflow = log_value >= EXP_LIMIT
    scale = math.exp(shift) if shift < EXP_LIMIT else math.inf
    if overflow or not math.isfinite(scale):
        logging.warning(f"exp(2sRe G) overflows at s={s}; only the log value is reported")
        value, std_error, overflow = math.nan, math.nan, True
    else:
        value = math.exp(log_value)
        std_error = _block_jackknife(weights, config.block_size) * scale
    return RandomModelEstimate(value, std_error, config.samples, config.seed, config.p, config.d,
                               float(s), log_value, overflow)


def empirical_laplace(config: RandomModelConfig, s: float, workers: Optional[int] = None,
                      samples: Optional[np.ndarray] = None) -> RandomModelEstimate:
    """Monte Carlo mean of exp(2s Re G)."""
    s = float(s)
    _, c = model_coefficients(config.p, config.radius)
    if 2 * abs(s) * np.sum(np.abs(c)) >= EXP_LIMIT:
        logging.warning(f"2|s| sum|c_j| exceeds the exponent range at s={s}; overflow is possible")
    G = sample_many(config, workers) if samples is None else samples
    return _mean_exp(2.0 * s * G.real, config, s)


def empirical_moment(config: RandomModelConfig, n: int, workers: Optional[int] = None,
                     samples: Optional[np.ndarray] = None) -> RandomModelEstimate:
    """Monte Carlo estimate of E (Re G)^n."""
    G = sample_many(config, workers) if samples is None else samples
    powers = G.real ** int(n)
    return RandomModelEstimate(float(powers.mean()), _block_jackknife(powers, config.block_size),
                               config.samples, config.seed, config.p, config.d)


class LaplaceProduct(NamedTuple):
    log_value: float
    value: float
    log_p1: float
    log_p2: float


def _finish(log_p1: float, log_p2: float) -> LaplaceProduct:
    log_value = log_p1 + log_p2
    value = math.exp(log_value) if log_value < EXP_LIMIT else math.inf
    return LaplaceProduct(log_value, value, log_p1, log_p2)


def theoretical_laplace(p: int, d: int, s: float, split: Optional[float] = None) -> LaplaceProduct:
    """
    log P1 + log P2 for E exp(2s Re G).

    P1 runs over |j| <= (log p)^2 with cot replaced by its leading term,
    P2 over the remaining j in exact cot form.
    """
    s = float(s)
    half = (p - 1) // 2
    split = math.log(p) ** 2 if split is None else split
    j = np.arange(-half, half + 1)
    inner = np.abs(j) <= split
    roots = unit_roots(d)

    log_p1 = float(np.sum(alpha(d, 2.0 * s / (np.pi * (2 * j[inner] + 1)))))

    theta = np.pi * (2 * j[~inner] + 1) / (2.0 * p)
    exponents = (s / p) * (roots.real[None, :] / np.tan(theta)[:, None] + roots.imag[None, :])
    log_p2 = float(np.sum(logsumexp(exponents, axis=1) - math.log(d)))
    return _finish(log_p1, log_p2)


def exact_laplace(p: int, d: int, s: float, truncation: Optional[int] = None) -> LaplaceProduct:
    """E exp(2s Re G) as the exact product over j of (1/d) sum_k exp(2s Re(c_j e(k/d)))."""
    _, c = model_coefficients(p, truncation)
    exponents = 2.0 * float(s) * (c[:, None] * unit_roots(d)[None, :]).real
    return _finish(float(np.sum(logsumexp(exponents, axis=1) - math.log(d))), 0.0)


def arithmetic_laplace(chi: DirichletCharacter, s: float, shift: int = 0,
                       g: Optional[np.ndarray] = None, workers: Optional[int] = None) -> float:
    """(1/p) sum over K outside the exceptional set of exp(2s Re g_{chi,K}(1/2))."""
    s = float(s)
    window = PyFeketeHelpers.laplace_window(chi.p)
    if abs(s) > window:
        logging.warning(f"s={s} is outside the validity window |s| <= {window:.4g} for p={chi.p}")
    g = midpoint_g(chi, shift, workers) if g is None else g
    keep = np.abs(g) < exceptional_threshold(chi.p)
    return float(np.sum(np.exp(2.0 * s * g.real[keep])) / chi.p)


def _raw_to_cumulants(mu):
    m1, m2, m3, m4 = mu
    return (m1,
            m2 - m1 ** 2,
            m3 - 3 * m2 * m1 + 2 * m1 ** 3,
            m4 - 4 * m3 * m1 - 3 * m2 ** 2 + 12 * m2 * m1 ** 2 - 6 * m1 ** 4)


def _cumulants_to_raw(kappa):
    k1, k2, k3, k4 = kappa
    return (k1,
            k2 + k1 ** 2,
            k3 + 3 * k2 * k1 + k1 ** 3,
            k4 + 4 * k3 * k1 + 3 * k2 ** 2 + 6 * k2 * k1 ** 2 + k1 ** 4)


def probabilistic_moment(p: int, d: int, n: int, truncation: Optional[int] = None) -> float:
    """
    Exact E (Re G)^n for n <= 4.

    For Y_j = Re(c_j X(j)), E Y_j^m = 2^-m sum_r C(m,r) c^r conj(c)^(m-r) [d | 2r-m]
    since E X^k vanishes unless k is a multiple of d.  Independent terms add
    cumulants.
    """
    n = int(n)
    if not 1 <= n <= EXACT_MOMENT_LIMIT:
        raise ValueError(f"Exact moments are available for 1 <= n <= {EXACT_MOMENT_LIMIT}, got {n}")
    _, c = model_coefficients(p, truncation)
    raw = []
    for m in range(1, EXACT_MOMENT_LIMIT + 1):
        acc = np.zeros(len(c), dtype=complex)
        for r in range(m + 1):
            if (2 * r - m) % d == 0:
                acc += comb(m, r, exact=True) * c ** r * np.conj(c) ** (m - r)
        raw.append((acc / 2 ** m).real)
    kappa = [np.sum(k) for k in _raw_to_cumulants(raw)]
    return float(_cumulants_to_raw(kappa)[n - 1])


def moment_envelope(p: int, n: int) -> float:
    return 10.0 * (n / math.sqrt(p)) * (math.log(p) / math.pi) ** n


class MomentComparison(NamedTuple):
    n: int
    arithmetic: float
    probabilistic: float
    envelope: float
    method: str
    std_error: float

    @property
    def gap(self) -> float:
        return abs(self.arithmetic - self.probabilistic)

    @property
    def within(self) -> bool:
        return self.gap <= self.envelope + 4.0 * self.std_error


def moment_compare(chi: DirichletCharacter, n: int, samples: int = 100000, seed: int = 0,
                   shift: int = 0, g: Optional[np.ndarray] = None,
                   workers: Optional[int] = None) -> MomentComparison:
    """Arithmetic moment (1/p) sum_K (Re g_{chi,K})^n against E (Re G)^n."""
    n = int(n)
    if n < 1:
        raise ValueError(f"Moment order must be positive, got {n}")
    g = midpoint_g(chi, shift, workers) if g is None else g
    arithmetic = float(np.mean(g.real ** n))
    if n <= EXACT_MOMENT_LIMIT:
        probabilistic, method, std_error = probabilistic_moment(chi.p, chi.order, n), 'exact', 0.0
    else:
        estimate = empirical_moment(RandomModelConfig(chi.p, chi.order, samples, seed), n, workers)
        probabilistic, method, std_error = estimate.value, 'monte_carlo', estimate.std_error
    return MomentComparison(n, arithmetic, probabilistic, moment_envelope(chi.p, n), method, std_error)
