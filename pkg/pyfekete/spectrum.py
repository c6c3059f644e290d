"""
Evaluation of f_chi(z) = sum_n chi(n + a) z^n at z = e((K + x)/p) for every
residue K at once, and the statistics built on top of it.

A single pass is a length-p DFT of the twisted coefficients chi(n + a) e(n x/p).
p is prime, so the DFT is computed with Bluestein's chirp-z embedding into a
power-of-two FFT of length >= 2p - 1.
"""
import math
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import scipy.fft
from tqdm.auto import tqdm

from pyfekete.charmod import DirichletCharacter, eval_f_direct, gauss_sum
from pyfekete.theory import digamma
from pyfekete.utils import ARC_GRID, REFINE_TOL, REFINE_TOP, VSTEP, TAIL_COLUMNS, log_duration

SPECTRUM_KINDS = ('midpoint', 'arcmax')
# Padded FFT lengths above this are not kept in the chirp cache
CACHED_FFT_SIZE = 1 << 22
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def fft_size(n: int) -> int:
    return 1 << (2 * n - 2).bit_length()


def _chirp_tables(n: int) -> Tuple[np.ndarray, np.ndarray, int]:
    """Chirp w[m] = e(m^2/(2n)) and the FFT of the conjugate chirp filter."""
    # m^2 reduced mod 2n keeps the phase exact; m < 2**31 so m^2 fits in int64
    m = np.arange(n, dtype=np.int64)
    m *= m
    m %= 2 * n
    phase = m.astype(float)
    del m
    phase *= np.pi / n
    w = np.exp(1j * phase)
    del phase

    size = fft_size(n)
    filt = np.zeros(size, dtype=complex)
    np.conjugate(w, out=filt[:n])
    if n > 1:
        filt[size - n + 1:] = filt[n - 1:0:-1]
    filt_hat = scipy.fft.fft(filt, overwrite_x=True)
    w.setflags(write=False)
    filt_hat.setflags(write=False)
    return w, filt_hat, size


_cached_chirp = lru_cache(maxsize=4)(_chirp_tables)


def _chirp(n: int) -> Tuple[np.ndarray, np.ndarray, int]:
    if fft_size(n) <= CACHED_FFT_SIZE:
        return _cached_chirp(n)
    logging.debug(f"Chirp filter of length {fft_size(n)} for n={n} is built per call")
    return _chirp_tables(n)


def prime_length_dft(a: np.ndarray, workers: Optional[int] = None) -> np.ndarray:
    """
    out[K] = sum_n a[n] e(nK/n_total), using nK = (n^2 + K^2 - (K-n)^2)/2.

    Besides the filter, one padded work buffer is allocated and every
    product is taken in place in it.
    """
    n = len(a)
    w, filt_hat, size = _chirp(n)
    work = np.zeros(size, dtype=complex)
    np.multiply(a, w, out=work[:n])
    work = scipy.fft.fft(work, overwrite_x=True, workers=workers)
    work *= filt_hat
    del filt_hat
    work = scipy.fft.ifft(work, overwrite_x=True, workers=workers)
    return np.multiply(work[:n], w)


def twisted_dft(coeffs: np.ndarray, x: float, p: Optional[int] = None,
                workers: Optional[int] = None) -> np.ndarray:
    """output[K] = sum_n coeffs[n] e(n x/p) e(nK/p)."""
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.ndim != 1 or len(coeffs) == 0:
        raise ValueError("Coefficients must be a non-empty 1-d array")
    n = len(coeffs)
    if p is not None and n != p:
        raise ValueError(f"Coefficient length {n} does not match p = {p}")
    if float(x) == 0.0:
        return prime_length_dft(coeffs, workers)
    phase = np.arange(n, dtype=float)
    phase *= 2.0 * np.pi * float(x) / n
    twisted = np.exp(1j * phase)
    del phase
    twisted *= coeffs
    return prime_length_dft(twisted, workers)


@dataclass(frozen=True, eq=False)
class Spectrum:
    p: int
    d: int
    m: int
    shift: int
    kind: str
    values: np.ndarray = field(repr=False)
    grid: Optional[int] = None
    refine_tol: Optional[float] = None

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"K": np.arange(self.p), "value": self.values})


def _normalized(chi: DirichletCharacter, shift: int, x: float, workers: Optional[int]) -> np.ndarray:
    return twisted_dft(chi.shifted_values(shift), x, workers=workers)


@log_duration("midpoint spectrum")
def midpoint_spectrum(chi: DirichletCharacter, shift: int = 0, workers: Optional[int] = None) -> Spectrum:
    values = np.abs(_normalized(chi, shift, 0.5, workers))
    values /= math.sqrt(chi.p)
    return Spectrum(chi.p, chi.order, chi.index, shift % chi.p, 'midpoint', values)


def midpoint_g(chi: DirichletCharacter, shift: int = 0, workers: Optional[int] = None,
               tau: Optional[complex] = None) -> np.ndarray:
    """g_{chi,K}(1/2) for every K; z^p = -1 at the midpoints."""
    tau = gauss_sum(chi) if tau is None else tau
    return -1j * _normalized(chi, shift, 0.5, workers) / (2.0 * tau)


def gauss_point_magnitudes(chi: DirichletCharacter, shift: int = 0, workers: Optional[int] = None) -> np.ndarray:
    """|f_{chi,a}(e(k/p))|/sqrt(p); equals 1 for k != 0 whatever the shift."""
    return np.abs(_normalized(chi, shift, 0.0, workers)) / math.sqrt(chi.p)


class AuxValue(NamedTuple):
    value: complex
    tail_bound: float


def truncation_tail_bound(p: int, window: int) -> float:
    """Bound on the terms W < |j| < p/2 dropped from the Lagrange expansion."""
    half = (p - 1) // 2
    if window >= half:
        return 0.0
    return digamma(half) - digamma(window)


def g_aux(chi: DirichletCharacter, K: int, x: float, window: Optional[int] = None,
          mode: str = 'exact', shift: int = 0, tau: Optional[complex] = None) -> AuxValue:
    """
    g_{chi,K}(x) = i f_{chi,a}(z) / ((z^p - 1) tau(chi)) at z = e((K + x)/p).

    The truncated mode sums the Lagrange expansion
    e(-Ka/p) (i/p) sum_{|j|<=W} e(ja/p) conj(chi)(K-j) / (e((j+x)/p) - 1).
    """
    x = float(x)
    if not 0.0 < x < 1.0:
        raise ValueError(f"x must lie strictly inside (0, 1), got {x}")
    p = chi.p
    K, a = int(K) % p, int(shift) % p
    tau = gauss_sum(chi) if tau is None else tau

    if mode == 'exact':
        f = eval_f_direct(chi, (K + x) / p, a)
        return AuxValue(1j * f / ((np.exp(2j * np.pi * x) - 1.0) * tau), 0.0)
    if mode != 'truncated':
        raise ValueError(f"Unknown mode '{mode}', expected 'exact' or 'truncated'")

    half = (p - 1) // 2
    window = half if window is None else int(window)
    if not 1 <= window <= half:
        raise ValueError(f"Window must satisfy 1 <= W < p/2, got {window} for p={p}")
    j = np.arange(-window, window + 1)
    terms = (np.exp(2j * np.pi * ((j * a) % p) / p) * chi.conjugate_values[(K - j) % p]
             / (np.exp(2j * np.pi * (j + x) / p) - 1.0))
    value = np.exp(-2j * np.pi * ((K * a) % p) / p) * 1j * np.sum(terms) / p
    return AuxValue(complex(value), truncation_tail_bound(p, window))


def _refine_arc(chi: DirichletCharacter, K: int, x0: float, radius: float, tol: float,
                start: float, shift: int, tau: complex) -> float:
    """Golden-section search for max_x 2 sin(pi x)|g_{chi,K}(x)| near x0."""
    def height(x: float) -> float:
        return 2.0 * math.sin(math.pi * x) * abs(g_aux(chi, K, x, shift=shift, tau=tau).value)

    lo, hi = max(0.0, x0 - radius), min(1.0, x0 + radius)
    best = start
    c, d = hi - GOLDEN * (hi - lo), lo + GOLDEN * (hi - lo)
    hc, hd = height(c), height(d)
    while hi - lo > tol:
        best = max(best, hc, hd)
        if hc >= hd:
            hi, d, hd = d, c, hc
            c = hi - GOLDEN * (hi - lo)
            hc = height(c)
        else:
            lo, c, hc = c, d, hd
            d = lo + GOLDEN * (hi - lo)
            hd = height(d)
    return max(best, hc, hd)


@log_duration("arc-max spectrum")
def arc_max_spectrum(chi: DirichletCharacter, shift: int = 0, grid: int = ARC_GRID,
                     refine_tol: Optional[float] = REFINE_TOL, refine_top: Optional[int] = REFINE_TOP,
                     workers: Optional[int] = None) -> Spectrum:
    """
    Estimate M(K) = max_{x in [0,1]} |f(e((K + x)/p))|/sqrt(p) for every K.

    Each of the `grid` passes evaluates all K at x = t/grid.  With refine_tol
    set, the `refine_top` largest entries (all entries when refine_top is None)
    are refined by golden-section search; refinement only ever raises a value.
    """
    grid = int(grid)
    if grid < 2:
        raise ValueError(f"Arc grid needs at least 2 points, got {grid}")
    p = chi.p
    coeffs = chi.shifted_values(shift)
    root_p = math.sqrt(p)

    def one_pass(t: int) -> np.ndarray:
        return np.abs(twisted_dft(coeffs, t / grid, workers=1)) / root_p

    best = np.zeros(p)
    best_t = np.zeros(p, dtype=np.int64)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        passes = pool.map(one_pass, range(grid))
        for t, vals in enumerate(tqdm(passes, total=grid, desc="arc passes", disable=None)):
            better = vals > best
            best[better] = vals[better]
            best_t[better] = t

        if refine_tol is not None:
            tau = gauss_sum(chi)
            order = np.argsort(-best, kind='stable')
            targets = order if refine_top is None else order[:int(refine_top)]
            logging.info(f"Refining {len(targets)} arcs to tolerance {refine_tol}")
            refined = pool.map(
                lambda K: _refine_arc(chi, int(K), best_t[K] / grid, 1.0 / grid, refine_tol,
                                      float(best[K]), shift, tau),
                targets)
            best[targets] = np.fromiter(refined, dtype=float, count=len(targets))

    return Spectrum(p, chi.order, chi.index, shift % p, 'arcmax', best, grid, refine_tol)


@dataclass(frozen=True, eq=False)
class TailCurve:
    V_grid: np.ndarray
    phi: np.ndarray
    counts: np.ndarray
    p: int
    d: int
    m: int
    kind: str
    shift: int

    def to_frame(self) -> pd.DataFrame:
        n = len(self.V_grid)
        frame = pd.DataFrame({
            "V": self.V_grid,
            "phi": self.phi,
            "order": np.full(n, self.d),
            "p": np.full(n, self.p),
            "kind": [self.kind] * n,
            "shift": np.full(n, self.shift),
        })
        return frame[TAIL_COLUMNS]


def default_v_grid(max_value: float, step: float = VSTEP) -> np.ndarray:
    """0 to ceil(max_value) in steps of `step`."""
    if step <= 0:
        raise ValueError(f"V step must be positive, got {step}")
    count = int(round(math.ceil(max_value) / step)) + 1
    return np.round(np.arange(count) * step, 12)


def tail_curve(spec: Spectrum, V_grid: Optional[Sequence[float]] = None, vstep: float = VSTEP) -> TailCurve:
    """phi[i] = #{K : values[K] >= V_grid[i]} / p."""
    if V_grid is None:
        V_grid = default_v_grid(float(spec.values.max()), vstep)
    V = np.asarray(V_grid, dtype=float)
    if V.ndim != 1 or np.any(np.diff(V) <= 0):
        raise ValueError("V_grid must be a strictly increasing 1-d sequence")
    counts = spec.p - np.searchsorted(np.sort(spec.values), V, side='left')
    return TailCurve(V, counts / spec.p, counts, spec.p, spec.d, spec.m, spec.kind, spec.shift)


class DoubleExponentialFit(NamedTuple):
    slope: float
    intercept: float
    points: int


def fit_double_exponential(curve: TailCurve, lo: Optional[float] = None, hi: float = 0.1) -> DoubleExponentialFit:
    """Least-squares line through log(-log phi) against V where lo <= phi <= hi."""
    lo = 10.0 / curve.p if lo is None else lo
    mask = (curve.phi >= lo) & (curve.phi <= hi) & (curve.phi > 0) & (curve.phi < 1)
    if mask.sum() < 2:
        raise ValueError(f"Only {int(mask.sum())} grid points have {lo} <= phi <= {hi}")
    slope, intercept = np.polyfit(curve.V_grid[mask], np.log(-np.log(curve.phi[mask])), 1)
    return DoubleExponentialFit(float(slope), float(intercept), int(mask.sum()))


def tail_moments(spec: Spectrum, ks: Sequence[int] = (1, 2, 3, 4)) -> Dict[int, float]:
    """Mean of values**(2k) over K."""
    return {int(k): float(np.mean(spec.values ** (2 * int(k)))) for k in ks}


@dataclass(frozen=True, eq=False)
class ExceptionalSetReport:
    p: int
    threshold: float
    count: int
    members: Optional[np.ndarray] = None


def exceptional_threshold(p: int) -> float:
    return math.log(math.log(p))


def exceptional_set(chi: DirichletCharacter, include_members: bool = False, shift: int = 0,
                    spectrum: Optional[Spectrum] = None, workers: Optional[int] = None) -> ExceptionalSetReport:
    """Residues K with |g_{chi,K}(1/2)| >= log log p."""
    if spectrum is None:
        spectrum = midpoint_spectrum(chi, shift, workers)
    elif spectrum.kind != 'midpoint':
        raise ValueError(f"The exceptional set is read from a midpoint spectrum, got '{spectrum.kind}'")
    threshold = exceptional_threshold(chi.p)
    mask = spectrum.values / 2.0 >= threshold
    members = np.flatnonzero(mask) if include_members else None
    return ExceptionalSetReport(chi.p, threshold, int(mask.sum()), members)
