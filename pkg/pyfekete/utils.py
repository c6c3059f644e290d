import time
import logging
from functools import wraps
from typing import Any, Callable, TypeVar

import numpy as np

VERSION = "1.0.0"

# Deterministic for every n < 3.3 * 10**24
MILLER_RABIN_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)

EULER_GAMMA = float(np.euler_gamma)

DEFAULT_P = 200003
ARC_GRID = 32
REFINE_TOL = 1e-4
REFINE_TOP = 256
VSTEP = 0.01
QUAD_TOL = 1e-10
TAIL_CUTOFF = 50.0
BLOCK_SIZE = 1024

# Largest argument accepted by exp() before overflow
EXP_LIMIT = float(np.log(np.finfo(float).max))

CSV_FLOAT_FORMAT = '%.9g'
TAIL_COLUMNS = ["V", "phi", "order", "p", "kind", "shift"]

CONSTANTS = {
    "VERSION": VERSION,
    "MILLER_RABIN_WITNESSES": MILLER_RABIN_WITNESSES,
    "EULER_GAMMA": EULER_GAMMA,
    "DEFAULT_P": DEFAULT_P,
    "ARC_GRID": ARC_GRID,
    "REFINE_TOL": REFINE_TOL,
    "REFINE_TOP": REFINE_TOP,
    "VSTEP": VSTEP,
    "QUAD_TOL": QUAD_TOL,
    "TAIL_CUTOFF": TAIL_CUTOFF,
    "BLOCK_SIZE": BLOCK_SIZE,
    "EXP_LIMIT": EXP_LIMIT,
    "CSV_FLOAT_FORMAT": CSV_FLOAT_FORMAT,
    "TAIL_COLUMNS": TAIL_COLUMNS,
}

F = TypeVar('F', bound=Callable[..., Any])


def log_duration(label: str = None, level: int = logging.INFO) -> Callable[[F], F]:
    """Decorator that logs how long the wrapped computation took."""
    def decorator(func: F) -> F:
        name = label or func.__name__

        @wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            start = time.perf_counter()
            try:
                return func(*args, **kwargs)
            finally:
                elapsed = time.perf_counter() - start
                logging.log(level, f"{name} finished in {elapsed:.2f} seconds")
        return wrapper  # type: ignore
    return decorator
