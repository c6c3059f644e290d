"""
Invariant suite run by `fekete verify`.

Each check returns (passed, detail).  The quick level stays at p <= 10^4 and
small Monte Carlo sizes; the full level uses the acceptance-scale instances.
"""
import json
import math
import time
import logging
import importlib.resources as resources
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from tabulate import tabulate
from termcolor import colored
from tqdm.auto import tqdm

from pyfekete.charmod import gauss_sum, eval_f_direct, make_character, pattern_frequencies
from pyfekete.helpers import PyFeketeHelpers
from pyfekete.randmodel import (RandomModelConfig, arithmetic_laplace, empirical_laplace,
                                moment_compare, theoretical_laplace)
from pyfekete.spectrum import (exceptional_set, fit_double_exponential, midpoint_g, midpoint_spectrum,
                               tail_curve, twisted_dft)
from pyfekete import theory

LEVELS = ('quick', 'full')
CheckOutcome = Tuple[bool, str]


@dataclass(frozen=True)
class Check:
    name: str
    description: str
    func: Callable[[str, Dict], CheckOutcome]
    levels: Tuple[str, ...] = LEVELS


@dataclass
class CheckResult:
    name: str
    description: str
    passed: bool
    detail: str
    seconds: float


def load_fixtures(path: Optional[str] = None) -> Dict[str, Dict[str, float]]:
    if path is None:
        with (resources.files('pyfekete') / 'fixtures.json').open('r', encoding='utf-8') as file:
            fixtures = json.load(file)
    else:
        with open(path, 'r', encoding='utf-8') as file:
            fixtures = json.load(file)
    for key, entry in fixtures.items():
        if not isinstance(entry, dict) or not {"value", "tol"} <= set(entry):
            raise ValueError(f"Fixture '{key}' needs 'value' and 'tol'")
    return fixtures


def _against(fixtures: Dict, key: str, value: float) -> CheckOutcome:
    fixture = fixtures[key]
    passed = abs(value - fixture["value"]) <= fixture["tol"]
    return passed, f"{key}={value:.6g} (expected {fixture['value']} +/- {fixture['tol']})"


def _all(outcomes: List[CheckOutcome]) -> CheckOutcome:
    failed = [detail for ok, detail in outcomes if not ok]
    if failed:
        return False, "; ".join(failed)
    return True, "; ".join(detail for _, detail in outcomes)


def check_gauss_modulus(level: str, fixtures: Dict) -> CheckOutcome:
    rng = np.random.default_rng(1)
    count, hi = (10, 10 ** 4) if level == 'quick' else (50, 10 ** 5)
    worst = 0.0
    for _ in range(count):
        d = int(rng.integers(2, 9))
        p = PyFeketeHelpers.random_prime(rng, 10 ** 3, hi, d)
        m = next(k for k in rng.permutation(np.arange(1, d)) if math.gcd(int(k), d) == 1)
        chi = make_character(p, d, int(m))
        worst = max(worst, abs(abs(gauss_sum(chi)) - math.sqrt(p)) / math.sqrt(p))
    return worst <= 1e-9, f"{count} characters, worst relative deviation {worst:.2e}"


def check_dft_oracle(level: str, fixtures: Dict) -> CheckOutcome:
    rng = np.random.default_rng(2)
    primes, draws = ((101, 1009), 20) if level == 'quick' else ((101, 1009, 10007), 100)
    worst = 0.0
    for p in primes:
        chi = make_character(p, 2)
        x = 0.37
        fast = twisted_dft(chi.values, x, p)
        ks = rng.choice(p, size=min(draws, p), replace=False)
        direct = np.array([eval_f_direct(chi, (k + x) / p) for k in ks])
        worst = max(worst, float(np.max(np.abs(fast[ks] - direct)) / np.max(np.abs(direct))))
    return worst <= 1e-8, f"p in {primes}, worst relative error {worst:.2e}"


def check_tail_slope(level: str, fixtures: Dict) -> CheckOutcome:
    chi = make_character(200003, 2)
    fit = fit_double_exponential(tail_curve(midpoint_spectrum(chi)))
    target = math.pi / 2
    return abs(fit.slope - target) <= 0.15 * target, f"slope {fit.slope:.4f} over {fit.points} points"


def check_constant_c2(level: str, fixtures: Dict) -> CheckOutcome:
    return _against(fixtures, "hat_C_2", theory.constants(2).hat_C_d)


def check_limit_constant(level: str, fixtures: Dict) -> CheckOutcome:
    limit = theory.limit_constant()
    return _all([_against(fixtures, "C_limit", limit.value),
                 _against(fixtures, "C_limit_lower", limit.lower)])


def check_head_integrals(level: str, fixtures: Dict) -> CheckOutcome:
    return _all([_against(fixtures, "head_integral_2", theory.tail_integrals(2).head),
                 _against(fixtures, "head_integral_4", theory.tail_integrals(4).head)])


def check_two_route(level: str, fixtures: Dict) -> CheckOutcome:
    direct = theory.c2_lower_direct()
    via_alpha = theory.constants(2).C_d_lower
    gap = abs(direct - via_alpha)
    return _all([(gap <= 1e-8, f"routes differ by {gap:.2e}"),
                 _against(fixtures, "c2_lower", direct)])


def _moment_cases(level: str) -> List[Tuple[int, int]]:
    bases = (10007,) if level == 'quick' else (10007, 100003)
    return [(PyFeketeHelpers.admissible_prime(p, d), d) for p in bases for d in (2, 3)]


def check_moment_matching(level: str, fixtures: Dict) -> CheckOutcome:
    outcomes = []
    for p, d in _moment_cases(level):
        chi = make_character(p, d)
        g = midpoint_g(chi)
        for n in range(1, 5):
            cmp = moment_compare(chi, n, g=g)
            outcomes.append((cmp.within, f"p={p} d={d} n={n} gap {cmp.gap:.2e} <= {cmp.envelope:.2e}"))
    return _all(outcomes)


def check_laplace_chain(level: str, fixtures: Dict) -> CheckOutcome:
    p, d, s = 10007, 2, 2.0
    samples = 10 ** 5 if level == 'quick' else 10 ** 6
    chi = make_character(p, d)
    arithmetic = arithmetic_laplace(chi, s)
    theoretical = theoretical_laplace(p, d, s).value
    estimate = empirical_laplace(RandomModelConfig(p, d, samples, seed=2024), s)
    return _all([
        (abs(arithmetic - theoretical) <= 0.05, f"arithmetic {arithmetic:.5f} vs theoretical {theoretical:.5f}"),
        (abs(estimate.value - theoretical) <= 4 * estimate.std_error,
         f"empirical {estimate.value:.5f} +/- {estimate.std_error:.1e} (N={samples})"),
    ])


def check_alpha_bessel(level: str, fixtures: Dict) -> CheckOutcome:
    u = np.round(np.arange(-2000, 2001) * 0.01, 10)
    log_i0 = np.array([theory.log_bessel_i0(v) for v in u])
    outcomes = []
    for d in (2, 4, 6, 8):
        a = theory.alpha(d, u)
        nonneg = u >= 0
        outcomes.append((np.allclose(a, a[::-1], atol=1e-12), f"alpha_{d} even"))
        outcomes.append((bool(np.all((0 <= log_i0) & (log_i0 <= a + 1e-12) & (a <= np.abs(u) + 1e-12))),
                         f"0 <= log I_0 <= alpha_{d} <= |u|"))
        outcomes.append((bool(np.all(np.abs(theory.alpha_prime(d, u)) <= 1 + 1e-12)), f"|alpha_{d}'| <= 1"))
        outcomes.append((bool(np.all(np.diff(theory.alpha_minus_u(d, u)) <= 1e-9)), f"alpha_{d} - u nonincreasing"))
        outcomes.append((bool(np.all(np.diff(a[nonneg]) >= -1e-9)), f"alpha_{d} nondecreasing on u >= 0"))

    small = np.linspace(-0.05, 0.05, 101)
    small = small[small != 0]
    outcomes.append((bool(np.all(np.abs(theory.alpha(2, small) / small ** 2 - 0.5) <= 0.01)), "alpha_2 ~ u^2/2"))
    outcomes.append((bool(np.all(np.abs(theory.alpha(4, small) / small ** 2 - 0.25) <= 0.01)), "alpha_4 ~ u^2/4"))

    worst = 0.0
    for d in (2, 3, 4, 6):
        c = theory.root_cosines(d)
        for x in np.linspace(0.0, 10.0, 41):
            average = float(np.mean(np.exp(x * c)))
            series, n = theory.bessel_I(0, x), 1
            while True:
                term = theory.bessel_I(n * d, x)
                series += 2 * term
                if term < 1e-16:
                    break
                n += 1
            worst = max(worst, abs(average - series))
    outcomes.append((worst <= 1e-10, f"Bessel averaging identity, worst {worst:.1e}"))

    grid = np.linspace(0.05, 30.0, 600)
    scaled = np.array([math.exp(-v) * theory.bessel_I(0, v) for v in grid])
    outcomes.append((bool(np.all(np.diff(scaled) < 0)), "e^-u I_0(u) decreasing"))
    bounds = all(math.exp(v) / (2 * math.pi * math.sqrt(v)) <= theory.bessel_I(0, v) <= math.exp(v)
                 for v in (1, 2, 5, 10))
    outcomes.append((bounds, "e^u/(2 pi sqrt u) <= I_0(u) <= e^u"))

    even_constants = [theory.constants(2 * k).C_d for k in range(1, 11)]
    outcomes.append((bool(np.all(np.diff(even_constants) < 0)), "C_2d decreasing for d = 1..10"))
    return _all(outcomes)


def check_maxsum(level: str, fixtures: Dict) -> CheckOutcome:
    outcomes = [_against(fixtures, "maxsum_d2_n1000", theory.maxsum_closed_form(1000, 2))]
    for d in (2, 3, 5):
        brute = theory.maxsum_bruteforce(200, d)
        closed = theory.maxsum_closed_form(200, d)
        outcomes.append((abs(brute - closed) <= 0.05, f"d={d}: brute {brute:.4f} vs closed {closed:.4f}"))
    return _all(outcomes)


def check_patterns(level: str, fixtures: Dict) -> CheckOutcome:
    d = 3
    p = PyFeketeHelpers.admissible_prime(10007, d)
    chi = make_character(p, d)
    worst, allowed = [], []
    for n in (1, 2, 3):
        freq = pattern_frequencies(chi, n)
        worst.append(float(np.max(np.abs(freq - d ** -n))))
        allowed.append(5 * n / math.sqrt(p))
    passed = all(w <= a for w, a in zip(worst, allowed))
    return passed, f"p={p}: worst deviations {[f'{w:.1e}' for w in worst]}"


def check_exceptional_set(level: str, fixtures: Dict) -> CheckOutcome:
    bases = (10007,) if level == 'quick' else (10007, 100003, 1000003)
    outcomes = []
    for base in bases:
        for d in (2, 3, 4):
            p = PyFeketeHelpers.admissible_prime(base, d)
            report = exceptional_set(make_character(p, d))
            outcomes.append((report.count <= p ** 0.75, f"p={p} d={d}: |E|={report.count}"))
    return _all(outcomes)


CHECKS = [
    Check("gauss_modulus", "|tau(chi)| = sqrt(p)", check_gauss_modulus),
    Check("dft_oracle", "chirp-z DFT matches direct summation", check_dft_oracle),
    Check("tail_slope", "log(-log Phi) has slope pi/2 for d=2", check_tail_slope, ('full',)),
    Check("constant_C2", "hat C_2 quadrature value", check_constant_c2),
    Check("limit_constant", "lim C_2d and its lower constant", check_limit_constant),
    Check("head_integrals", "int_0^1 alpha_d(u)/u^2 du", check_head_integrals),
    Check("two_route", "C_2^- by both integral routes", check_two_route),
    Check("moment_matching", "arithmetic vs random-model moments", check_moment_matching),
    Check("laplace_chain", "arithmetic, empirical and theoretical Laplace transforms", check_laplace_chain),
    Check("alpha_bessel", "alpha_d, I_0 and averaging identities", check_alpha_bessel),
    Check("maxsum", "extremal harmonic sum closed forms", check_maxsum),
    Check("patterns", "consecutive value patterns are equidistributed", check_patterns),
    Check("exceptional_set", "|E_p| <= p^(3/4)", check_exceptional_set),
]


def run_checks(level: str = 'quick', fixtures: Optional[Dict] = None,
               only: Optional[List[str]] = None) -> List[CheckResult]:
    if level not in LEVELS:
        raise ValueError(f"Unknown level '{level}', expected one of {LEVELS}")
    fixtures = load_fixtures() if fixtures is None else fixtures
    selected = [c for c in CHECKS if level in c.levels and (only is None or c.name in only)]

    results = []
    for check in tqdm(selected, desc=f"verify ({level})", disable=None):
        start = time.perf_counter()
        try:
            passed, detail = check.func(level, fixtures)
        except Exception as e:
            logging.error(f"Check {check.name} raised {e!r}")
            passed, detail = False, f"error: {e}"
        results.append(CheckResult(check.name, check.description, bool(passed), detail,
                                   time.perf_counter() - start))
    return results


def format_report(results: List[CheckResult]) -> str:
    rows = [[r.name, r.description, colored("OK", "green") if r.passed else colored("FAILED", "red"),
             f"{r.seconds:.2f}", r.detail] for r in results]
    table = tabulate(rows, headers=["check", "property", "status", "seconds", "detail"], tablefmt="simple")
    failed = [r.name for r in results if not r.passed]
    summary = (colored(f"{len(results)} checks passed", "green") if not failed
               else colored(f"FAILED: {', '.join(failed)}", "red"))
    return f"{table}\n\n{summary}"
