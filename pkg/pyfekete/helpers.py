import math
from typing import List, Optional

import numpy as np

from pyfekete.charmod import is_prime


class PyFeketeHelpers:

    @staticmethod
    def iterated_log(x: float, times: int = 1) -> float:
        """log applied `times` times; -inf once the argument drops to 1 or below."""
        value = float(x)
        for _ in range(times):
            if value <= 0:
                return -math.inf
            value = math.log(value)
        return value

    @staticmethod
    def laplace_window(p: int) -> float:
        """|s| <= log p / (100 (log log p)^2), where the Laplace transforms are compared."""
        return math.log(p) / (100.0 * PyFeketeHelpers.iterated_log(p, 2) ** 2)

    @staticmethod
    def saddle_window(p: int) -> float:
        """|s| <= log p / log log log p, the range used for the saddle-point estimates."""
        log3 = PyFeketeHelpers.iterated_log(p, 3)
        return math.inf if log3 <= 0 else math.log(p) / log3

    @staticmethod
    def tail_window(p: int, d: int) -> float:
        """Largest V covered uniformly: (delta_d/pi)(log log p - 2 log log log p)."""
        delta_d = 2.0 if d % 2 == 0 else 2.0 * math.cos(math.pi / (2 * d))
        return (delta_d / math.pi) * (PyFeketeHelpers.iterated_log(p, 2) - 2 * PyFeketeHelpers.iterated_log(p, 3))

    @staticmethod
    def parse_orders(text: str) -> List[int]:
        """'2,3,6' or '2-7' or a mix like '2-4,6'."""
        orders = []
        for part in str(text).split(','):
            part = part.strip()
            if not part:
                continue
            if '-' in part:
                lo, hi = (int(v) for v in part.split('-', 1))
                if lo > hi:
                    raise ValueError(f"Empty order range '{part}'")
                orders.extend(range(lo, hi + 1))
            else:
                orders.append(int(part))
        if not orders:
            raise ValueError(f"No orders in '{text}'")
        return orders

    @staticmethod
    def admissible_prime(p: int, d: int) -> int:
        """Smallest prime q >= p with d | q - 1."""
        q = max(3, int(p))
        while (q - 1) % d != 0 or not is_prime(q):
            q += 1
        return q

    @staticmethod
    def random_prime(rng: np.random.Generator, lo: int, hi: int, d: Optional[int] = None,
                     max_tries: int = 100000) -> int:
        """Uniform draw of a prime in [lo, hi] with d | p - 1."""
        for _ in range(max_tries):
            candidate = int(rng.integers(lo, hi + 1))
            if candidate % 2 == 0:
                continue
            if d is not None and (candidate - 1) % d != 0:
                continue
            if is_prime(candidate):
                return candidate
        raise ValueError(f"No prime p in [{lo}, {hi}] with {d} | p-1 found after {max_tries} draws")
