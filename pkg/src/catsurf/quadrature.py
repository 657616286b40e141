"""Adaptive Simpson quadrature with forced breakpoints."""

from __future__ import annotations

import math
from typing import Callable, Iterable


class QuadratureError(RuntimeError):
    pass


def _simpson(fa: float, fm: float, fb: float, h: float) -> float:
    return h * (fa + 4.0 * fm + fb) / 6.0


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 50,
) -> float:
    """Integrate ``f`` over ``[a, b]`` to absolute tolerance ``tol``.

    Uses the classical recursive scheme with Richardson correction; ``a > b``
    gives the negated integral. Raises :class:`QuadratureError` when the
    recursion depth is exhausted before the local error test passes.
    """
    if a == b:
        return 0.0
    if a > b:
        return -adaptive_simpson(f, b, a, tol, max_depth)
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = _simpson(fa, fm, fb, b - a)

    # explicit stack instead of recursion; entries are (a, b, fa, fm, fb, whole, tol, depth)
    # below this the error test is limited by rounding, not by the rule
    floor = 4 * 2.0**-52 * abs(whole)
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, est, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = _simpson(flo, flm, fmid, mid - lo)
        right = _simpson(fmid, frm, fhi, hi - mid)
        delta = left + right - est
        if abs(delta) <= max(15.0 * eps, floor) or hi - lo <= 4 * math.ulp(max(abs(lo), abs(hi))):
            total += left + right + delta / 15.0
            continue
        if depth >= max_depth:
            raise QuadratureError(
                f"adaptive Simpson did not converge on [{lo!r}, {hi!r}] (error {delta:.3g})"
            )
        stack.append((mid, hi, fmid, frm, fhi, right, eps / 2.0, depth + 1))
        stack.append((lo, mid, flo, flm, fmid, left, eps / 2.0, depth + 1))
    return total


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    breakpoints: Iterable[float] = (),
) -> float:
    """Adaptive Simpson over ``[a, b]`` split at every breakpoint strictly inside it."""
    sign = 1.0
    if a > b:
        a, b, sign = b, a, -1.0
    cuts = sorted(x for x in breakpoints if a < x < b)
    nodes = [a, *cuts, b]
    pieces = len(nodes) - 1
    total = 0.0
    for lo, hi in zip(nodes[:-1], nodes[1:]):
        total += adaptive_simpson(f, lo, hi, tol / pieces)
    return sign * total
