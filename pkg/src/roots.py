"""Bracketed root finding on positive axes (lengths, energies).

Brackets grow geometrically from an analytic guess; the solve is a bisection
in log space, so the relative tolerance applies uniformly over many decades.
"""
import logging
import math
from typing import Callable

from scipy.optimize import bisect

logger = logging.getLogger(__name__)

DEFAULT_RTOL = 1e-10
MAX_BRACKET_STEPS = 200
MAX_BISECTIONS = 500


def bracket_by_scaling(
    f: Callable[[float], float],
    guess: float,
    factor: float = 2.0,
    max_steps: int = MAX_BRACKET_STEPS,
) -> tuple[float, float]:
    """Widen [guess/factor, guess*factor] until f changes sign across it."""
    if not guess > 0:
        raise ValueError(f"bracket guess must be positive, got {guess}")
    lo, hi = guess / factor, guess * factor
    f_lo, f_hi = f(lo), f(hi)
    for step in range(max_steps):
        if f_lo == 0 or f_hi == 0 or (f_lo < 0) != (f_hi < 0):
            logger.debug(f"bracket [{lo:.6e}, {hi:.6e}] after {step} widenings")
            return lo, hi
        lo, hi = lo / factor, hi * factor
        f_lo, f_hi = f(lo), f(hi)
    raise RuntimeError(
        f"no sign change found within a factor {factor}**{max_steps} of {guess:.6e}"
    )


def solve_bracketed(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    rtol: float = DEFAULT_RTOL,
) -> float:
    """Root of f in [lo, hi] (both positive) to relative tolerance rtol."""
    if not 0 < lo < hi:
        raise ValueError(f"bracket must satisfy 0 < lo < hi, got [{lo}, {hi}]")
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    if (f_lo < 0) == (f_hi < 0):
        raise RuntimeError(f"f does not change sign on [{lo:.6e}, {hi:.6e}]")
    s = bisect(
        lambda s: f(math.exp(s)),
        math.log(lo),
        math.log(hi),
        xtol=rtol / 2,
        rtol=4 * 2.220446049250313e-16,
        maxiter=MAX_BISECTIONS,
    )
    return math.exp(s)


def find_root(
    f: Callable[[float], float],
    guess: float,
    rtol: float = DEFAULT_RTOL,
    factor: float = 2.0,
) -> float:
    lo, hi = bracket_by_scaling(f, guess, factor)
    return solve_bracketed(f, lo, hi, rtol)
