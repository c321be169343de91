"""Scalar search primitives: golden-section minimization and predicate bisection."""

from __future__ import annotations

import math

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_min(f, lo: float, hi: float, tol: float = 1e-12, max_iter: int = 200):
    """Minimize a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x))``.

    The endpoints are compared against the interior result so a monotone ``f``
    returns its boundary minimizer.
    """
    a, b = float(lo), float(hi)
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a <= tol * (1.0 + abs(a) + abs(b)):
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = f(x2)
    x, fx = (x1, f1) if f1 <= f2 else (x2, f2)
    for xe in (float(lo), float(hi)):
        fe = f(xe)
        if fe < fx:
            x, fx = xe, fe
    return x, fx


def golden_section_max(f, lo: float, hi: float, tol: float = 1e-12, max_iter: int = 200):
    x, fx = golden_section_min(lambda t: -f(t), lo, hi, tol, max_iter)
    return x, -fx


def bisect_predicate(pred, good: float, bad: float, tol: float = 1e-10, max_iter: int = 400) -> float:
    """Shrink ``[good, bad]`` (either orientation) around the switch of ``pred``.

    ``pred(good)`` is assumed true and ``pred(bad)`` false; returns the last
    point at which ``pred`` held.
    """
    for _ in range(max_iter):
        if abs(bad - good) <= tol:
            break
        mid = 0.5 * (good + bad)
        if pred(mid):
            good = mid
        else:
            bad = mid
    return good
