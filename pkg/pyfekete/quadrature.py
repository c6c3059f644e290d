import logging
from typing import Callable, Tuple

from pyfekete.utils import QUAD_TOL


def _simpson(fa: float, fm: float, fb: float, h: float) -> float:
    return h / 3.0 * (fa + 4.0 * fm + fb)


def integrate_adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = QUAD_TOL,
    max_depth: int = 50,
    min_depth: int = 4,
) -> Tuple[float, float]:
    """
    Adaptive Simpson rule with Richardson correction.

    :param f: scalar integrand, finite on the closed interval [a, b]
    :param tol: absolute error tolerance for the whole interval
    :param min_depth: subdivisions forced before the error test is trusted
    :return: (value, error estimate)
    """
    if a == b:
        return 0.0, 0.0
    if a > b:
        value, error = integrate_adaptive_simpson(f, b, a, tol, max_depth, min_depth)
        return -value, error

    hit_depth = []

    def _adaptive(a: float, b: float, fa: float, fm: float, fb: float,
                  s_whole: float, depth: int, tol: float) -> Tuple[float, float]:
        m = (a + b) / 2.0
        h = (b - a) / 2.0
        flm = f((a + m) / 2.0)
        frm = f((m + b) / 2.0)

        s_left = _simpson(fa, flm, fm, h / 2.0)
        s_right = _simpson(fm, frm, fb, h / 2.0)
        s_combined = s_left + s_right
        error = (s_combined - s_whole) / 15.0

        if depth >= max_depth:
            hit_depth.append((a, b))
            return s_combined + error, abs(error)
        if depth >= min_depth and abs(error) < tol:
            return s_combined + error, abs(error)

        left, left_err = _adaptive(a, m, fa, flm, fm, s_left, depth + 1, tol / 2.0)
        right, right_err = _adaptive(m, b, fm, frm, fb, s_right, depth + 1, tol / 2.0)
        return left + right, left_err + right_err

    fa, fm, fb = f(a), f((a + b) / 2.0), f(b)
    value, error = _adaptive(a, b, fa, fm, fb, _simpson(fa, fm, fb, (b - a) / 2.0), 0, tol)
    if hit_depth:
        logging.warning(f"Quadrature on [{a}, {b}] reached depth {max_depth} on {len(hit_depth)} subintervals")
    return value, error
