"""Vectorised adaptive Simpson quadrature."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np


def adaptive_simpson(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
                     tol: float = 1e-10, max_step: float | None = None,
                     max_depth: int = 40) -> float:
    """Integrate ``f`` over ``[a, b]`` to absolute tolerance ``tol``.

    The interval is first cut into panels no wider than ``max_step``; every
    panel is then bisected until the Richardson estimate of its Simpson error
    falls below its share of ``tol``. ``f`` must accept arrays.
    """
    if b <= a:
        return 0.0
    length = b - a
    panels = 1 if not max_step else max(1, math.ceil(length / max_step))
    edges = np.linspace(a, b, panels + 1)
    lo, hi = edges[:-1], edges[1:]
    mid = 0.5 * (lo + hi)
    flo, fmid, fhi = f(lo), f(mid), f(hi)
    whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)
    ptol = np.full(panels, tol / panels)
    total = 0.0
    for _ in range(max_depth):
        q1, q3 = 0.5 * (lo + mid), 0.5 * (mid + hi)
        fq1, fq3 = f(q1), f(q3)
        left = (mid - lo) / 6.0 * (flo + 4.0 * fq1 + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * fq3 + fhi)
        err = left + right - whole
        done = np.abs(err) <= 15.0 * ptol
        total += float(np.sum((left + right + err / 15.0)[done]))
        todo = ~done
        if not todo.any():
            return total
        lo, mid, hi, q1, q3 = lo[todo], mid[todo], hi[todo], q1[todo], q3[todo]
        flo, fmid, fhi = flo[todo], fmid[todo], fhi[todo]
        fq1, fq3 = fq1[todo], fq3[todo]
        left, right, ptol = left[todo], right[todo], ptol[todo] / 2.0
        # children: [lo, mid] with midpoint q1 and [mid, hi] with midpoint q3
        lo, mid, hi = np.concatenate([lo, mid]), np.concatenate([q1, q3]), np.concatenate([mid, hi])
        flo, fmid, fhi = (np.concatenate([flo, fmid]), np.concatenate([fq1, fq3]),
                          np.concatenate([fmid, fhi]))
        whole = np.concatenate([left, right])
        ptol = np.concatenate([ptol, ptol])
    # depth exhausted: accept the finest estimates
    return total + float(whole.sum())
