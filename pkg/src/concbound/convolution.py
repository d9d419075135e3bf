"""Convolution, convolution powers and the binomial mixture expansion.

Dense ``DiscreteDist`` products enumerate atom pairs and merge coincident sums.
``LatticeDist`` products run on the weight vectors, directly for small inputs
and through a real FFT otherwise. Powers use square-and-multiply.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.fft

from .errors import ConcBoundError, InvalidMeasure, SupportExplosion
from .measures import (
    DEFAULT_MAX_PAIRS,
    ZERO_BUDGET,
    DiscreteDist,
    ErrorBudget,
    LatticeDist,
    Measure,
    MixtureSpec,
    convolve_atoms,
    infer_step,
    to_lattice,
)

MAX_FFT_LEN = 2**25
DIRECT_WORK_LIMIT = 2**20
FFT_NEG_TOL = 1e-14
STEP_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class BinomialWeights:
    n: int
    p: float
    pmf: np.ndarray

    def below(self, r: int) -> float:
        """``P(mu < r)``."""
        if r <= 0:
            return 0.0
        return float(self.pmf[:r].sum())


def binomial_pmf(n: int, p: float) -> BinomialWeights:
    """Binomial(n, p) weights via the ratio recurrence anchored at the mode."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if not (0.0 <= p < 1.0):
        raise ValueError(f"p={p!r} must lie in [0, 1)")
    pmf = np.zeros(n + 1)
    if p == 0.0 or n == 0:
        pmf[0] = 1.0
    else:
        q = 1.0 - p
        mode = min(n, int(math.floor((n + 1) * p)))
        k = np.arange(n + 1, dtype=np.float64)
        pmf[mode] = 1.0
        if mode < n:
            up = (n - k[mode:n]) / (k[mode:n] + 1.0) * (p / q)
            pmf[mode + 1:] = np.cumprod(up)
        if mode > 0:
            down = k[1:mode + 1] / (n - k[1:mode + 1] + 1.0) * (q / p)
            pmf[:mode] = np.cumprod(down[::-1])[::-1]
        pmf /= pmf.sum()
    pmf.setflags(write=False)
    return BinomialWeights(n, p, pmf)


def _same_step(a: float, b: float) -> bool:
    return abs(a - b) <= STEP_RTOL * max(a, b)


def _fft_product(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, float]:
    """Linear convolution through a power-of-two real FFT.

    Returns the clamped product and the TV charge: clamped negative mass plus
    the rounding drift of the total.
    """
    out_len = a.size + b.size - 1
    if out_len > MAX_FFT_LEN:
        raise SupportExplosion(f"FFT length {out_len} exceeds the cap {MAX_FFT_LEN}")
    size = 1 << (out_len - 1).bit_length()
    fa = scipy.fft.rfft(a, size)
    fb = fa if b is a else scipy.fft.rfft(b, size)
    c = scipy.fft.irfft(fa * fb, size)[:out_len]
    drift = abs(float(c.sum()) - float(a.sum()) * float(b.sum()))
    neg = c < 0
    clamped = 0.0
    if neg.any():
        worst = -float(c[neg].min())
        if worst > FFT_NEG_TOL * out_len:
            raise ConcBoundError(f"FFT produced a negative weight {-worst:.3g} beyond rounding level")
        clamped = -float(c[neg].sum())
        c[neg] = 0.0
    return c, clamped + drift


def _prune_dense(w: np.ndarray, eps: float) -> tuple[np.ndarray, float]:
    if eps <= 0:
        return w, 0.0
    small = (w < eps) & (w > 0)
    if not small.any():
        return w, 0.0
    dropped = float(w[small].sum())
    w = w.copy()
    w[small] = 0.0
    return w, dropped


def _lattice_product(F: LatticeDist, G: LatticeDist, prune_eps: float, method: str) -> LatticeDist:
    a, b = F.weights, G.weights
    residual = 0.0
    if method == "direct" or (method == "auto" and a.size * b.size <= DIRECT_WORK_LIMIT):
        c = np.convolve(a, b)
    elif method in ("fft", "auto"):
        c, residual = _fft_product(a, b if G is not F else a)
    else:
        raise ValueError(f"unknown convolution method {method!r}")
    c, pruned = _prune_dense(c, prune_eps)
    budget = (F.budget + G.budget + ErrorBudget(pruned, residual)).checked()
    return LatticeDist.trimmed(F.offset + G.offset, F.step, c, budget)


def _prune_atoms(F: DiscreteDist, eps: float) -> DiscreteDist:
    if eps <= 0:
        return F
    keep = F.masses >= eps
    if keep.all():
        return F
    if not keep.any():
        raise InvalidMeasure(f"pruning at {eps:g} would remove every atom")
    dropped = float(F.masses[~keep].sum())
    budget = (F.budget + ErrorBudget(dropped, 0.0)).checked()
    return DiscreteDist(F.positions[keep], F.masses[keep], budget)


def _shift(F: Measure, a: float) -> Measure:
    if isinstance(F, LatticeDist):
        return LatticeDist(F.offset + a, F.step, F.weights, F.budget)
    return DiscreteDist(F.positions + a, F.masses, F.budget)


def convolve(F: Measure, G: Measure, max_pairs: int = DEFAULT_MAX_PAIRS,
             prune_eps: float = 0.0, method: str = "auto") -> Measure:
    """``F * G``; lattice inputs with a common step stay on the lattice."""
    if isinstance(F, LatticeDist) and isinstance(G, LatticeDist) and _same_step(F.step, G.step):
        return _lattice_product(F, G, prune_eps, method)
    if len(G) == 1 and isinstance(G, DiscreteDist):
        out = _shift(F, float(G.positions[0]))
        return _with_budget(out, out.budget + G.budget)
    if len(F) == 1 and isinstance(F, DiscreteDist):
        out = _shift(G, float(F.positions[0]))
        return _with_budget(out, out.budget + F.budget)
    out = convolve_atoms(F.to_discrete(), G.to_discrete(), max_pairs)
    return _prune_atoms(out, prune_eps)


def _with_budget(F: Measure, budget: ErrorBudget) -> Measure:
    if budget == F.budget:
        return F
    if isinstance(F, LatticeDist):
        return LatticeDist(F.offset, F.step, F.weights, budget)
    return DiscreteDist(F.positions, F.masses, budget)


def identity_like(F: Measure) -> Measure:
    if isinstance(F, LatticeDist):
        return LatticeDist(0.0, F.step, np.array([1.0]))
    return DiscreteDist.point(0.0)


def conv_power(F: Measure, n: int, prune_eps: float = 0.0,
               max_pairs: int = DEFAULT_MAX_PAIRS, method: str = "auto") -> Measure:
    """``F^n`` by square-and-multiply.

    Each intermediate ``F^m`` is pruned at ``prune_eps * m / n``: mass dropped
    from ``F^m`` reappears up to ``n / m`` times in the final power, so this
    keeps the propagated budget comparable to pruning the result once at
    ``prune_eps``.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if prune_eps < 0:
        raise ValueError("prune_eps must be nonnegative")
    if n == 0:
        return identity_like(F)
    if n == 1:
        return F
    if isinstance(F, DiscreteDist) and len(F) == 1:
        return DiscreteDist(F.positions * n, F.masses, F.budget.scaled(n))

    acc: Measure | None = None
    acc_exp = 0
    base, base_exp = F, 1
    k = n
    while k:
        if k & 1:
            if acc is None:
                acc, acc_exp = base, base_exp
            else:
                acc_exp += base_exp
                acc = convolve(acc, base, max_pairs, prune_eps * acc_exp / n, method)
        k >>= 1
        if k:
            base_exp *= 2
            base = convolve(base, base, max_pairs, prune_eps * base_exp / n, method)
    return acc


def common_lattice(*dists: Measure) -> list[LatticeDist] | None:
    """Re-express all inputs on one lattice step, or None if they share none."""
    steps = []
    for d in dists:
        if isinstance(d, LatticeDist):
            steps.append(d.step)
        elif len(d) > 1:
            h = infer_step(d)
            if h is None:
                return None
            steps.append(h)
    if not steps:
        return None
    g = steps[0]
    for h in steps[1:]:
        a, b = max(g, h), min(g, h)
        while b > 1e-9:
            a, b = b, math.fmod(a, b)
            if b > 0 and a - b <= 1e-9:
                b = 0.0
        g = a
    if g <= 1e-9:
        return None
    # a sparse grid costs more than the dense atom path it replaces
    cells = atoms = 0
    for d in dists:
        lo, hi = (d.offset, d.offset + d.step * (len(d) - 1)) if isinstance(d, LatticeDist) \
            else (d.positions[0], d.positions[-1])
        cells += (hi - lo) / g + 1
        atoms += len(d)
    if cells > 64 * atoms + 1024:
        return None
    out = []
    for d in dists:
        if isinstance(d, LatticeDist) and _same_step(d.step, g):
            out.append(d)
            continue
        try:
            out.append(to_lattice(d, g))
        except ConcBoundError:
            return None
    return out


def power(F: Measure, n: int, prune_eps: float = 0.0, max_pairs: int = DEFAULT_MAX_PAIRS) -> Measure:
    """``F^n`` on the cheapest carrier: lattice-aligned inputs are promoted first."""
    if isinstance(F, DiscreteDist) and len(F) > 1 and n > 1:
        lat = common_lattice(F)
        if lat is not None:
            F = lat[0]
    return conv_power(F, n, prune_eps, max_pairs)


def product(*factors: Measure, max_pairs: int = DEFAULT_MAX_PAIRS) -> Measure:
    """Convolution of several measures, kept on a lattice whenever possible."""
    factors = [f for f in factors if not _is_unit(f)] or [factors[0]]
    if len(factors) == 1:
        return factors[0]
    lat = common_lattice(*factors)
    items: Sequence[Measure] = lat if lat is not None else factors
    out = items[0]
    for f in items[1:]:
        out = convolve(out, f, max_pairs)
    return out


def _is_unit(F: Measure) -> bool:
    """True for an exact point mass at 0 with no error budget."""
    if F.budget.total != 0 or len(F) != 1:
        return False
    x = F.offset if isinstance(F, LatticeDist) else float(F.positions[0])
    return x == 0.0


def power_table(F: Measure, n: int, max_pairs: int = DEFAULT_MAX_PAIRS) -> list[Measure]:
    """``[F^0, F^1, ..., F^n]`` by repeated multiplication."""
    table = [identity_like(F)]
    for _ in range(n):
        table.append(convolve(table[-1], F, max_pairs))
    return table


def mixture_expand(spec: MixtureSpec, H: Measure, n: int, prune_eps: float = 0.0,
                   max_pairs: int = DEFAULT_MAX_PAIRS) -> list[tuple[float, Measure]]:
    """``[(P(mu = k), H U^(n-k) V^k) for k = 0..n]`` with ``mu ~ Binomial(n, p)``.

    The weighted components sum to ``H F^n`` exactly.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    weights = binomial_pmf(n, spec.p).pmf
    U, V = spec.U, spec.V
    lat = common_lattice(U, V, H)
    if lat is not None:
        U, V, H = lat
    u_pows = power_table(U, n, max_pairs)
    v_pows = power_table(V, n, max_pairs)
    out = []
    for k in range(n + 1):
        comp = convolve(convolve(H, u_pows[n - k], max_pairs), v_pows[k], max_pairs, prune_eps)
        out.append((float(weights[k]), comp))
    return out
