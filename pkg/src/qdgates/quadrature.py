"""One-dimensional quadrature used by the phonon rates."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import ConvergenceError


def _simpson(a, b, fa, fm, fb):
    return (b - a) * (fa + 4 * fm + fb) / 6


def adaptive_simpson(f: Callable[[float], float], a: float, b: float, *, rtol: float = 1e-10,
                     points=None, max_depth: int = 50, min_depth: int = 3) -> float:
    """Adaptive Simpson rule with Richardson correction.

    ``points`` are interior breakpoints; placing them where the integrand
    varies fastest lets the first estimate see every feature.  The error
    budget ``rtol * |I|`` uses a composite-Simpson estimate of ``I`` over
    the breakpoints and is shared among panels in proportion to their
    contribution.  Raises :class:`ConvergenceError` if ``max_depth`` is
    reached.
    """
    if b == a:
        return 0.0
    edges = np.unique(np.concatenate([[a, b], [p for p in (points or ()) if a < p < b]]))
    panels = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        lo, hi = float(lo), float(hi)
        x = np.linspace(lo, hi, 9)
        y = [f(float(v)) for v in x]
        est = sum(_simpson(x[k], x[k + 2], y[k], y[k + 1], y[k + 2]) for k in range(0, 8, 2))
        panels.append((lo, hi, y[0], y[4], y[8], est))
    weights = np.array([abs(p[5]) for p in panels])
    scale = weights.sum()
    if scale == 0.0:
        scale = 1.0
        weights = np.full(len(panels), 1.0 / len(panels))
    else:
        weights = weights / scale
    floor = 1.0 / (100 * len(panels))

    total = 0.0
    for (lo, hi, flo, fmid, fhi, _), w in zip(panels, weights):
        eps = rtol * scale * max(w, floor)
        stack = [(lo, hi, flo, fmid, fhi, _simpson(lo, hi, flo, fmid, fhi), eps, 0)]
        while stack:
            a0, b0, fa0, fm0, fb0, S, e, depth = stack.pop()
            m = 0.5 * (a0 + b0)
            flm, frm = f(0.5 * (a0 + m)), f(0.5 * (m + b0))
            left = _simpson(a0, m, fa0, flm, fm0)
            right = _simpson(m, b0, fm0, frm, fb0)
            err = left + right - S
            if depth >= min_depth and abs(err) <= 15 * e:
                total += left + right + err / 15
                continue
            if depth >= max_depth:
                raise ConvergenceError(f"adaptive Simpson did not reach rtol={rtol:g} on [{a}, {b}]")
            stack.append((m, b0, fm0, frm, fb0, right, 0.5 * e, depth + 1))
            stack.append((a0, m, fa0, flm, fm0, left, 0.5 * e, depth + 1))
    return total


def trapezoid_sine(g: Callable[[np.ndarray], np.ndarray], n: int = 100_000) -> float:
    """Integral of g(u) over [-1, 1] by the trapezoid rule in u = sin(t).

    For integrands carrying a factor (1 - u^2), g(sin t) cos t behaves like
    cos^3 t at the end points, so the leading Euler-Maclaurin corrections
    vanish and the error drops far below the O(h^2) endpoint error of a
    trapezoid in u itself.  ``g`` must accept arrays.
    """
    t = np.linspace(-0.5 * math.pi, 0.5 * math.pi, n)
    return float(np.trapezoid(g(np.sin(t)) * np.cos(t), t))
