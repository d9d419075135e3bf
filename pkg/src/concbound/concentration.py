"""Concentration function ``Q(F, b) = sup_x F([x, x + b])``.

Exact for discrete and lattice carriers, by a sweep over left endpoints placed
at atoms. Sampled laws go through ``q_monte_carlo``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .measures import MERGE_TOL, DiscreteDist, LatticeDist, Measure

# above this many summed terms, window sums switch from exact reduceat to prefix differences
_EXACT_WORK_LIMIT = 2**25


@dataclass(frozen=True)
class QResult:
    value: float
    certified_error: float
    argmax_x: float

    def as_dict(self) -> dict:
        return {"value": self.value, "certified_error": self.certified_error,
                "argmax_x": self.argmax_x}


def _window_sums(masses: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """``masses[lo[i]:hi[i]].sum()`` for every i (each window nonempty)."""
    work = int((hi - lo).sum())
    if work <= _EXACT_WORK_LIMIT:
        padded = np.append(masses, 0.0)
        idx = np.empty(2 * lo.size, dtype=np.int64)
        idx[0::2] = lo
        idx[1::2] = hi
        return np.add.reduceat(padded, idx)[0::2]
    csum = np.concatenate([[0.0], np.cumsum(masses)])
    return csum[hi] - csum[lo]


def q_exact(F: Measure, b: float) -> QResult:
    """Exact concentration function at scale ``b >= 0`` (closed windows).

    Ties between equally heavy windows go to the smallest left endpoint.
    """
    if not b >= 0:
        raise ValueError(f"window length b={b!r} must be nonnegative")
    err = F.budget.total
    if isinstance(F, LatticeDist):
        w = F.weights
        span = int(math.floor((b + MERGE_TOL) / F.step))
        if span == 0:
            i = int(np.argmax(w))
            value = float(w[i])
        else:
            lo = np.arange(w.size)
            hi = np.minimum(lo + span + 1, w.size)
            sums = _window_sums(w, lo, hi)
            i = int(np.argmax(sums))
            value = float(sums[i])
        x = F.offset + F.step * i
    else:
        xs, ms = F.positions, F.masses
        if b == 0:
            i = int(np.argmax(ms))
            value = float(ms[i])
        else:
            lo = np.arange(xs.size)
            hi = np.searchsorted(xs, xs + b + MERGE_TOL, side="right")
            if np.all(hi - lo == 1):
                i = int(np.argmax(ms))
                value = float(ms[i])
            else:
                sums = _window_sums(ms, lo, hi)
                i = int(np.argmax(sums))
                value = float(sums[i])
        x = float(xs[i])
    return QResult(min(value, 1.0), err, float(x))


def empirical_measure(samples: np.ndarray) -> DiscreteDist:
    samples = np.asarray(samples, dtype=np.float64).reshape(-1)
    values, counts = np.unique(samples, return_counts=True)
    return DiscreteDist(values, counts / samples.size)


def dkw_halfwidth(N: int, level: float = 0.05) -> float:
    return math.sqrt(math.log(2.0 / level) / (2.0 * N))


def q_monte_carlo(sampler: Callable[[np.random.Generator, int], np.ndarray], b: float,
                  N: int, seed: int) -> tuple[float, float]:
    """Estimate ``Q(F, b)`` from ``N`` draws of ``sampler(rng, N)``.

    Returns the concentration function of the empirical measure together with
    the 95% Dvoretzky-Kiefer-Wolfowitz half-width.
    """
    if N < 100:
        raise ValueError("N must be at least 100")
    rng = np.random.default_rng(seed)
    draws = np.asarray(sampler(rng, N), dtype=np.float64)
    if draws.shape != (N,):
        raise ValueError(f"sampler returned shape {draws.shape}, expected ({N},)")
    return q_exact(empirical_measure(draws), b).value, dkw_halfwidth(N)


def q_regularity_gap(F: Measure, g1: float, g2: float) -> tuple[float, float]:
    """``(Q(F, g1), (1 + int(g1 / g2)) Q(F, g2))``; the first never exceeds the second."""
    if not (g1 > 0 and g2 > 0):
        raise ValueError("scales must be positive")
    factor = 1 + math.floor(g1 / g2)
    return q_exact(F, g1).value, factor * q_exact(F, g2).value
