"""Adaptive Simpson integration used by the quadrature oracles."""

from __future__ import annotations

from .errors import ConvergenceError

__all__ = ["adaptive_simpson"]


def adaptive_simpson(func, a: float, b: float, tol: float = 1e-10, max_depth: int = 48) -> float:
    """Integrate ``func`` on [a, b] by adaptive Simpson with Richardson correction.

    The interval is bisected wherever the two-level Simpson comparison
    exceeds the locally allotted tolerance. Intervals that still miss their
    tolerance at ``max_depth`` raise ConvergenceError instead of returning a
    silently degraded value.
    """
    if a == b:
        return 0.0
    if b < a:
        return -adaptive_simpson(func, b, a, tol=tol, max_depth=max_depth)

    fa, fb = func(a), func(b)
    m = 0.5 * (a + b)
    fm = func(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    total = 0.0
    stack = [(a, m, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        x0, x1, x2, f0, f1, f2, s_whole, eps, depth = stack.pop()
        lm = 0.5 * (x0 + x1)
        rm = 0.5 * (x1 + x2)
        flm, frm = func(lm), func(rm)
        s_left = (x1 - x0) / 6.0 * (f0 + 4.0 * flm + f1)
        s_right = (x2 - x1) / 6.0 * (f1 + 4.0 * frm + f2)
        err = (s_left + s_right - s_whole) / 15.0
        if abs(err) <= eps or lm <= x0 or rm >= x2:
            total += s_left + s_right + err
            continue
        if depth >= max_depth:
            raise ConvergenceError(
                f"adaptive Simpson hit depth {max_depth} on [{x0}, {x2}] "
                f"with error estimate {abs(err):.3e}",
                residual=abs(err),
            )
        stack.append((x0, lm, x1, f0, flm, f1, s_left, 0.5 * eps, depth + 1))
        stack.append((x1, rm, x2, f1, frm, f2, s_right, 0.5 * eps, depth + 1))
    return total
