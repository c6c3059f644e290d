"""
Special functions, explicit constants and predicted tail envelopes.

alpha_d(u) is the log of the average of exp(u cos(2 pi k / d)) over the d-th
roots of unity.  Every constant below is an integral of alpha_d (or of log I_0
for the limit d -> infinity) evaluated by adaptive Simpson quadrature.
Improper tails are cut at TAIL_CUTOFF; the remainder is integrated in w = 1/u,
where the integrand is bounded.
"""
import math
import logging
from dataclasses import dataclass, field, asdict
from functools import lru_cache
from typing import Any, Callable, Dict, Optional, Union

import numpy as np
from scipy.special import logsumexp, softmax

from pyfekete.charmod import unit_roots
from pyfekete.quadrature import integrate_adaptive_simpson
from pyfekete.utils import EULER_GAMMA, QUAD_TOL, TAIL_CUTOFF

ArrayLike = Union[float, np.ndarray]

HARMONIC_DIRECT_LIMIT = 10 ** 6
BESSEL_LIMIT = 700.0
REMARK_INTERVAL = (2.4e-6, 0.3207)
ENVELOPE_KINDS = ('lower', 'upper', 'midpoint_lower', 'odd_lower')

# B_2k / 2k for k = 1..7
_DIGAMMA_SERIES = (1 / 12, -1 / 120, 1 / 252, -1 / 240, 1 / 132, -691 / 32760, 1 / 12)


def _check_order(d: int) -> int:
    d = int(d)
    if d < 2:
        raise ValueError(f"Order d must be at least 2, got {d}")
    return d


def _like(out: np.ndarray, u: Any) -> ArrayLike:
    return float(out) if np.ndim(u) == 0 else out


def delta(d: int) -> float:
    d = _check_order(d)
    return 2.0 if d % 2 == 0 else 2.0 * math.cos(math.pi / (2 * d))


# --- digamma and harmonic sums -------------------------------------------------

def digamma(x: float) -> float:
    """psi(x) for x > 0 by upward recurrence and the asymptotic series."""
    x = float(x)
    if not x > 0:
        raise ValueError(f"digamma is only implemented for x > 0, got {x}")
    value = 0.0
    while x < 10.0:
        value -= 1.0 / x
        x += 1.0
    r = 1.0 / (x * x)
    series = 0.0
    for coeff in reversed(_DIGAMMA_SERIES):
        series = series * r + coeff
    return value + math.log(x) - 0.5 / x - r * series


def digamma_harmonic(n: int, x: float) -> float:
    """H_n(x) = sum_{k=0}^{n-1} 1/(k + x)."""
    n, x = int(n), float(x)
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if not 0 < x <= 1:
        raise ValueError(f"x must lie in (0, 1], got {x}")
    if n <= HARMONIC_DIRECT_LIMIT:
        return float(np.sum(1.0 / (np.arange(n) + x)))
    return digamma(n + x) - digamma(x)


# --- modified Bessel functions -------------------------------------------------

def bessel_I(n: int, x: float) -> float:
    """I_n(x) from its power series."""
    n, x = int(n), float(x)
    if n < 0:
        raise ValueError(f"Bessel index must be nonnegative, got {n}")
    if abs(x) > BESSEL_LIMIT:
        raise OverflowError(f"I_{n}({x}) overflows double precision")
    if x == 0.0:
        return 1.0 if n == 0 else 0.0

    half = x / 2.0
    term = math.exp(n * math.log(abs(half)) - math.lgamma(n + 1))
    if half < 0 and n % 2:
        term = -term
    quarter = half * half
    total = term
    k = 0
    while term != 0.0 and abs(term) >= 1e-18 * abs(total):
        term *= quarter / ((k + 1) * (k + 1 + n))
        total += term
        k += 1
    return total


def _bessel_i0_minus_one(x: float) -> float:
    quarter = (x / 2.0) ** 2
    term = quarter
    total = term
    k = 1
    while term != 0.0 and term >= 1e-18 * total:
        term *= quarter / ((k + 1) * (k + 1))
        total += term
        k += 1
    return total


def log_bessel_i0(x: float) -> float:
    x = abs(float(x))
    if x <= 1.0:
        return math.log1p(_bessel_i0_minus_one(x))
    return math.log(bessel_I(0, x))


# --- alpha_d -------------------------------------------------------------------

@lru_cache(maxsize=64)
def root_cosines(d: int) -> np.ndarray:
    c = unit_roots(_check_order(d)).real.copy()
    c.setflags(write=False)
    return c


def alpha(d: int, u: ArrayLike) -> ArrayLike:
    c = root_cosines(d)
    u_arr = np.asarray(u, dtype=float)
    uc = u_arr[..., None] * c
    small = np.abs(u_arr) <= 1.0
    near = np.log1p(np.mean(np.expm1(np.where(small[..., None], uc, 0.0)), axis=-1))
    far = logsumexp(uc, axis=-1) - math.log(len(c))
    return _like(np.where(small, near, far), u)


def alpha_minus_u(d: int, u: ArrayLike) -> ArrayLike:
    """alpha_d(u) - u without cancellation for large u."""
    c = root_cosines(d)
    u_arr = np.asarray(u, dtype=float)
    out = logsumexp(u_arr[..., None] * (c - 1.0), axis=-1) - math.log(len(c))
    return _like(out, u)


def alpha_prime(d: int, u: ArrayLike) -> ArrayLike:
    c = root_cosines(d)
    u_arr = np.asarray(u, dtype=float)
    weights = softmax(u_arr[..., None] * c, axis=-1)
    return _like(np.sum(weights * c, axis=-1), u)


def head_integrand(d: int, u: float) -> float:
    """alpha_d(u)/u**2, continued at 0 by its limit mean(cos**2)/2."""
    if u == 0.0:
        return float(np.mean(root_cosines(d) ** 2)) / 2.0
    return alpha(d, u) / (u * u)


# --- integrals and constants ---------------------------------------------------

@dataclass(frozen=True)
class TailIntegrals:
    head: float
    tail: float
    head_error: float
    tail_error: float


def _integrate_to_infinity(g: Callable[[float], float], limit_at_infinity: float,
                           tol: float, cutoff: float):
    """
    int_1^inf g(u)/u**2 du where g(u) -> limit_at_infinity.

    [1, cutoff] by quadrature, then limit/cutoff plus the bounded remainder
    int_0^{1/cutoff} (g(1/w) - limit) dw.
    """
    body, body_err = integrate_adaptive_simpson(lambda u: g(u) / (u * u), 1.0, cutoff, tol)
    rest, rest_err = integrate_adaptive_simpson(
        lambda w: 0.0 if w == 0.0 else g(1.0 / w) - limit_at_infinity, 0.0, 1.0 / cutoff, tol)
    return body + limit_at_infinity / cutoff + rest, body_err + rest_err


@lru_cache(maxsize=64)
def tail_integrals(d: int, tol: float = QUAD_TOL, cutoff: float = TAIL_CUTOFF) -> TailIntegrals:
    d = _check_order(d)
    if d % 2:
        logging.warning(f"Integrals of alpha_{d} for odd d are exploratory")
    head, head_err = integrate_adaptive_simpson(lambda u: head_integrand(d, u), 0.0, 1.0, tol)
    tail, tail_err = _integrate_to_infinity(lambda u: alpha_minus_u(d, u), -math.log(d), tol, cutoff)
    return TailIntegrals(head, tail, head_err, tail_err)


@dataclass(frozen=True)
class LimitConstant:
    value: float
    lower: float
    head: float
    tail: float
    error: float


@lru_cache(maxsize=4)
def limit_constant(tol: float = QUAD_TOL, cutoff: float = TAIL_CUTOFF) -> LimitConstant:
    """lim C_2d as d -> infinity, where alpha_2d tends to log I_0."""
    head, head_err = integrate_adaptive_simpson(
        lambda u: 0.25 if u == 0.0 else log_bessel_i0(u) / (u * u), 0.0, 1.0, tol)
    body, body_err = integrate_adaptive_simpson(
        lambda u: (log_bessel_i0(u) - u) / (u * u), 1.0, cutoff, tol)
    # log I_0(u) - u = -log(2 pi u)/2 + 1/(8u) + 1/(16u^2) + ...
    rest = (-(math.log(2 * math.pi * cutoff) + 1.0) / (2 * cutoff)
            + 1.0 / (16 * cutoff ** 2) + 1.0 / (48 * cutoff ** 3))
    tail = body + rest
    value = (2 / math.pi) * (EULER_GAMMA + math.log(4 / math.pi) + head + tail)
    lower = (2 / math.pi) * math.exp(-(math.pi / 2) * value - 1.0)
    return LimitConstant(value, lower, head, tail, (2 / math.pi) * (head_err + body_err))


@dataclass(frozen=True)
class TheoryConstants:
    d: int
    delta_d: float
    head_integral: float
    tail_integral: float
    hat_C_d: float
    C_d: float
    C_d_lower: float
    C_d_upper_proof: float
    C_d_upper_displayed: float
    C_tilde_odd: Optional[float]
    exploratory: bool
    C_limit: float
    C_limit_lower: float
    remark_interval: tuple
    errors: Dict[str, float] = field(default_factory=dict)

    def to_record(self) -> Dict[str, Any]:
        record = asdict(self)
        record["remark_interval"] = list(self.remark_interval)
        return record


@lru_cache(maxsize=64)
def constants(d: int, tol: float = QUAD_TOL, cutoff: float = TAIL_CUTOFF) -> TheoryConstants:
    d = _check_order(d)
    delta_d = delta(d)
    ints = tail_integrals(d, tol, cutoff)

    hat_C = (2 / math.pi) * (EULER_GAMMA + math.log(4 / math.pi) + ints.tail)
    C = hat_C + (2 / math.pi) * ints.head
    C_lower = (2 / math.pi) * math.exp(-(math.pi / 2) * C - 1.0)
    C_upper = 7.0 * math.exp(-EULER_GAMMA - 2 * math.log(2) - 5 * math.log(10) - math.pi / delta_d)
    C_upper_displayed = 28e5 * math.exp(-math.pi / delta_d - EULER_GAMMA)
    C_tilde = None
    if d % 2:
        C_tilde = (math.log(d) / 2) * math.exp((7 * math.pi / delta_d) * math.sqrt(math.log(d)) - EULER_GAMMA)

    limit = limit_constant(tol, cutoff)
    C_err = (2 / math.pi) * (ints.head_error + ints.tail_error)
    errors = {
        "head_integral": ints.head_error,
        "tail_integral": ints.tail_error,
        "hat_C_d": (2 / math.pi) * ints.tail_error,
        "C_d": C_err,
        "C_d_lower": (math.pi / 2) * C_lower * C_err,
        "C_limit": limit.error,
    }
    return TheoryConstants(
        d=d,
        delta_d=delta_d,
        head_integral=ints.head,
        tail_integral=ints.tail,
        hat_C_d=hat_C,
        C_d=C,
        C_d_lower=C_lower,
        C_d_upper_proof=C_upper,
        C_d_upper_displayed=C_upper_displayed,
        C_tilde_odd=C_tilde,
        exploratory=bool(d % 2),
        C_limit=limit.value,
        C_limit_lower=limit.lower,
        remark_interval=REMARK_INTERVAL,
        errors=errors,
    )


def _log_cosh_small(u: float) -> float:
    return math.log1p(2.0 * math.sinh(u / 2.0) ** 2)


@lru_cache(maxsize=4)
def c2_lower_direct(tol: float = QUAD_TOL, cutoff: float = TAIL_CUTOFF) -> float:
    """C_2^- from the log cosh and log(1 + e^{-2u}) integrals."""
    head, _ = integrate_adaptive_simpson(
        lambda u: 0.5 if u == 0.0 else _log_cosh_small(u) / (u * u), 0.0, 1.0, tol)
    tail, _ = _integrate_to_infinity(lambda u: math.log1p(math.exp(-2.0 * u)), 0.0, tol, cutoff)
    exponent = -EULER_GAMMA - 1.0 + math.log(math.pi / 2) - head - tail
    return (2 / math.pi) * math.exp(exponent)


# --- saddle point and envelopes ------------------------------------------------

def saddle_s(V: ArrayLike, d: int = 2, C: Optional[float] = None) -> ArrayLike:
    """s(V) = exp((pi/2)(V - C_d) - 1)."""
    if C is None:
        C = constants(d).C_d
    out = np.exp((math.pi / 2) * (np.asarray(V, dtype=float) - C) - 1.0)
    return _like(out, V)


@dataclass(frozen=True)
class PredictionEnvelope:
    d: int
    kind: str
    constant: float
    rate: float

    def __call__(self, V: ArrayLike) -> ArrayLike:
        out = np.exp(-self.constant * np.exp(self.rate * np.asarray(V, dtype=float)))
        return _like(out, V)


def envelope(d: int, kind: str = 'lower') -> PredictionEnvelope:
    d = _check_order(d)
    if kind not in ENVELOPE_KINDS:
        raise ValueError(f"Unknown envelope kind '{kind}', expected one of {ENVELOPE_KINDS}")
    even = d % 2 == 0
    if kind == 'lower' and not even:
        raise ValueError(f"The lower envelope needs even d; use 'odd_lower' for d={d}")
    if kind == 'odd_lower' and even:
        raise ValueError(f"The odd_lower envelope needs odd d, got d={d}")
    if kind == 'midpoint_lower' and d != 2:
        raise ValueError(f"The midpoint_lower envelope is defined for d=2 only, got d={d}")

    rate = math.pi / delta(d)
    if kind == 'midpoint_lower':
        return PredictionEnvelope(d, kind, c2_lower_direct(), rate)

    consts = constants(d)
    C = {
        'lower': consts.C_d_lower,
        'upper': consts.C_d_upper_proof,
        'odd_lower': consts.C_tilde_odd,
    }[kind]
    return PredictionEnvelope(d, kind, C, rate)


def predict_tail(V: ArrayLike, d: int, kind: str = 'lower') -> ArrayLike:
    return envelope(d, kind)(V)


# --- extremal sums ---------------------------------------------------------------

def maxsum_closed_form(n: int, d: int) -> float:
    """Main term of max |sin(pi x) sum_{|j|<=n} a_j/(j+x)| over a_j in U_d, x in (0,1)."""
    n, d = int(n), _check_order(d)
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    if d % 2 == 0:
        return 2 * math.log(n) + 2 * EULER_GAMMA + 4 * math.log(2)
    return 2 * math.cos(math.pi / (2 * d)) * (math.log(n) + EULER_GAMMA + 2 * math.log(2))


def _distance_to_lattice(theta: np.ndarray, d: int) -> np.ndarray:
    step = 2 * math.pi / d
    return np.abs(np.mod(theta + step / 2, step) - step / 2)


def maxsum_bruteforce(n: int, d: int, x_steps: int = 512, theta_steps: int = 512) -> float:
    """
    Grid search for the same maximum.

    Rotating the sum by e(-theta), each term a_j/(j+x) contributes at most
    cos of the distance from its direction to theta, so the optimal a_j is the
    root of unity nearest to theta (j >= 0) or to theta + pi (j < 0).
    """
    n, d = int(n), _check_order(d)
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    if x_steps < 64 or theta_steps < 64:
        raise ValueError("Grids need at least 64 steps")

    x = np.arange(1, x_steps) / x_steps
    j = np.arange(n + 1)
    forward = np.sum(1.0 / (j[None, :] + x[:, None]), axis=1)
    backward = np.sum(1.0 / (j[None, 1:] - x[:, None]), axis=1)

    theta = np.arange(theta_steps + 1) * (2 * math.pi / d) / theta_steps
    cos_forward = np.cos(_distance_to_lattice(theta, d))
    cos_backward = np.cos(_distance_to_lattice(theta + math.pi, d))

    values = np.sin(np.pi * x)[:, None] * (forward[:, None] * cos_forward[None, :]
                                           + backward[:, None] * cos_backward[None, :])
    return float(values.max())
