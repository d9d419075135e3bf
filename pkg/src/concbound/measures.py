"""Finitely supported probability measures on the real line.

Two carriers are provided. ``DiscreteDist`` stores sorted ``(position, mass)``
atoms and is the general representation. ``LatticeDist`` stores a dense weight
vector on ``offset + step * k`` and is the fast path for FFT convolution powers.

Every measure carries an ``ErrorBudget``: a certified bound, in total-variation
units, on the distance between the stored measure and the exact one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import (
    BudgetExceeded,
    InvalidMeasure,
    NonCenteredInput,
    NonPositiveScale,
    NotLatticeAligned,
    SupportExplosion,
    ZeroVariance,
)

MERGE_TOL = 1e-9
MASS_TOL = 1e-12
CENTER_TOL = 1e-10
BUDGET_ABORT = 0.5
DEFAULT_MAX_PAIRS = 2**24


@dataclass(frozen=True)
class ErrorBudget:
    pruned_mass: float = 0.0
    fft_residual: float = 0.0

    def __post_init__(self):
        if self.pruned_mass < 0 or self.fft_residual < 0:
            raise InvalidMeasure("error budget components must be nonnegative")

    @property
    def total(self) -> float:
        return self.pruned_mass + self.fft_residual

    def __add__(self, other: "ErrorBudget") -> "ErrorBudget":
        return ErrorBudget(self.pruned_mass + other.pruned_mass,
                           self.fft_residual + other.fft_residual)

    def scaled(self, factor: float) -> "ErrorBudget":
        return ErrorBudget(self.pruned_mass * factor, self.fft_residual * factor)

    def checked(self) -> "ErrorBudget":
        if self.total >= BUDGET_ABORT:
            raise BudgetExceeded(f"total error budget {self.total:.3g} >= {BUDGET_ABORT}")
        return self

    def as_dict(self) -> dict:
        return {"pruned_mass": self.pruned_mass, "fft_residual": self.fft_residual}


ZERO_BUDGET = ErrorBudget()


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.float64, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


def _check_total(total: float, budget: ErrorBudget) -> None:
    if abs(total - 1.0) > budget.total + MASS_TOL:
        raise InvalidMeasure(
            f"total mass {total!r} differs from 1 by more than the error budget {budget.total:.3g}")


@dataclass(frozen=True, eq=False)
class DiscreteDist:
    """Probability measure with finitely many atoms.

    ``positions`` are strictly increasing, ``masses`` strictly positive and sum
    to one within ``budget.total + 1e-12``.
    """

    positions: np.ndarray
    masses: np.ndarray
    budget: ErrorBudget = field(default=ZERO_BUDGET)

    def __post_init__(self):
        x = _frozen(self.positions)
        m = _frozen(self.masses)
        object.__setattr__(self, "positions", x)
        object.__setattr__(self, "masses", m)
        if x.shape != m.shape or x.size == 0:
            raise InvalidMeasure("positions and masses must be nonempty and of equal length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(m))):
            raise InvalidMeasure("positions and masses must be finite")
        if np.any(m <= 0):
            raise InvalidMeasure("atom masses must be strictly positive")
        if x.size > 1 and np.any(np.diff(x) <= 0):
            raise InvalidMeasure("atom positions must be strictly increasing")
        self.budget.checked()
        _check_total(float(m.sum()), self.budget)

    @classmethod
    def from_atoms(cls, atoms: Iterable[Sequence[float]], budget: ErrorBudget = ZERO_BUDGET,
                   merge_tol: float = MERGE_TOL) -> "DiscreteDist":
        """Build from unsorted ``(x, m)`` pairs; near-coincident atoms are merged, zero masses dropped."""
        pairs = np.asarray(list(atoms), dtype=np.float64).reshape(-1, 2)
        if np.any(pairs[:, 1] < 0):
            raise InvalidMeasure("atom masses must be nonnegative")
        x, m = merge_atoms(pairs[:, 0], pairs[:, 1], merge_tol)
        return cls(x, m, budget)

    @classmethod
    def point(cls, a: float = 0.0) -> "DiscreteDist":
        return cls(np.array([float(a)]), np.array([1.0]))

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.positions.tolist(), self.masses.tolist()))

    @property
    def error_budget(self) -> float:
        return self.budget.total

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    def __len__(self) -> int:
        return self.positions.size

    def __repr__(self) -> str:
        if len(self) <= 6:
            body = ", ".join(f"({x:g}, {m:g})" for x, m in self.atoms)
        else:
            body = f"{len(self)} atoms on [{self.positions[0]:g}, {self.positions[-1]:g}]"
        return f"DiscreteDist({body})"

    def to_discrete(self) -> "DiscreteDist":
        return self

    def max_abs(self) -> float:
        return float(max(abs(self.positions[0]), abs(self.positions[-1])))


@dataclass(frozen=True, eq=False)
class LatticeDist:
    """Measure on the grid ``offset + step * k`` for ``k = 0 .. len(weights) - 1``."""

    offset: float
    step: float
    weights: np.ndarray
    budget: ErrorBudget = field(default=ZERO_BUDGET)

    def __post_init__(self):
        w = _frozen(self.weights)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "offset", float(self.offset))
        object.__setattr__(self, "step", float(self.step))
        if not (math.isfinite(self.step) and self.step > 0):
            raise InvalidMeasure("lattice step must be positive and finite")
        if not math.isfinite(self.offset):
            raise InvalidMeasure("lattice offset must be finite")
        if w.size == 0 or not np.all(np.isfinite(w)) or np.any(w < 0):
            raise InvalidMeasure("lattice weights must be a nonempty nonnegative finite vector")
        if w[0] == 0 or w[-1] == 0:
            raise InvalidMeasure("lattice support must be trimmed (nonzero end weights)")
        self.budget.checked()
        _check_total(float(w.sum()), self.budget)

    @classmethod
    def trimmed(cls, offset: float, step: float, weights: np.ndarray,
                budget: ErrorBudget = ZERO_BUDGET) -> "LatticeDist":
        w = np.asarray(weights, dtype=np.float64)
        nz = np.flatnonzero(w)
        if nz.size == 0:
            raise InvalidMeasure("lattice weights are identically zero")
        lo, hi = int(nz[0]), int(nz[-1])
        return cls(offset + lo * step, step, w[lo:hi + 1], budget)

    @property
    def positions(self) -> np.ndarray:
        return self.offset + self.step * np.arange(self.weights.size)

    @property
    def error_budget(self) -> float:
        return self.budget.total

    def __len__(self) -> int:
        return self.weights.size

    def __repr__(self) -> str:
        return (f"LatticeDist(offset={self.offset:g}, step={self.step:g}, "
                f"{self.weights.size} cells)")

    def to_discrete(self) -> DiscreteDist:
        w = self.weights
        keep = w > 0
        return DiscreteDist(self.positions[keep], w[keep], self.budget)

    def max_abs(self) -> float:
        return float(max(abs(self.offset), abs(self.offset + self.step * (self.weights.size - 1))))


Measure = DiscreteDist | LatticeDist


class MomentSummary(NamedTuple):
    sigma2: float
    kappa_n: float
    beta: float
    B: float
    n: int


@dataclass(frozen=True, eq=False)
class MixtureSpec:
    """Decomposition ``F = (1 - p) U + p V`` with ``U`` centered and nondegenerate."""

    p: float
    U: DiscreteDist
    V: DiscreteDist

    def __post_init__(self):
        if not (0.0 <= self.p < 1.0):
            raise InvalidMeasure(f"mixture weight p={self.p!r} must lie in [0, 1)")
        mean, sigma2 = moments(self.U)
        if abs(mean) > CENTER_TOL:
            raise NonCenteredInput(f"U has mean {mean!r}; expected 0 within {CENTER_TOL}")
        if sigma2 <= 0:
            raise ZeroVariance("U must have positive variance")

    @property
    def sigma2(self) -> float:
        return moments(self.U)[1]

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    def mixed(self) -> DiscreteDist:
        """The measure ``F`` itself; ``p = 0`` returns ``U`` unchanged."""
        if self.p == 0.0:
            return self.U
        q = 1.0 - self.p
        x = np.concatenate([self.U.positions, self.V.positions])
        m = np.concatenate([q * self.U.masses, self.p * self.V.masses])
        x, m = merge_atoms(x, m, MERGE_TOL)
        budget = self.U.budget.scaled(q) + self.V.budget.scaled(self.p)
        return DiscreteDist(x, m, budget)


def merge_atoms(x: np.ndarray, m: np.ndarray, tol: float = MERGE_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Sort atoms and merge chains of positions closer than ``tol``.

    A merged group sits at the midpoint of its extreme positions, so a
    mirror-symmetric input yields a mirror-symmetric output.
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    m = np.asarray(m, dtype=np.float64).reshape(-1)
    keep = m > 0
    x, m = x[keep], m[keep]
    if x.size == 0:
        raise InvalidMeasure("measure has no atoms with positive mass")
    order = np.argsort(x, kind="stable")
    x, m = x[order], m[order]
    if x.size == 1:
        return x, m
    starts = np.concatenate([[0], np.flatnonzero(np.diff(x) > tol) + 1])
    if starts.size == x.size:
        return x, m
    ends = np.concatenate([starts[1:], [x.size]]) - 1
    pos = 0.5 * (x[starts] + x[ends])
    mass = np.add.reduceat(m, starts)
    return pos, mass


def convolve_atoms(F: DiscreteDist, G: DiscreteDist, max_pairs: int = DEFAULT_MAX_PAIRS) -> DiscreteDist:
    """Exact atom-by-atom product measure ``F * G``."""
    pairs = len(F) * len(G)
    if pairs > max_pairs:
        raise SupportExplosion(
            f"{len(F)} x {len(G)} atom product exceeds the cap of {max_pairs} pairs")
    x = np.add.outer(F.positions, G.positions).ravel()
    m = np.multiply.outer(F.masses, G.masses).ravel()
    x, m = merge_atoms(x, m, MERGE_TOL)
    return DiscreteDist(x, m, F.budget + G.budget)


def reflect(F: DiscreteDist) -> DiscreteDist:
    return DiscreteDist(-F.positions[::-1], F.masses[::-1], F.budget)


def symmetrize(F: DiscreteDist, max_pairs: int = DEFAULT_MAX_PAIRS) -> DiscreteDist:
    """Law of ``xi - xi'`` for independent copies; exactly symmetric about 0."""
    r = convolve_atoms(F, reflect(F), max_pairs)
    # pairwise differences are exact negations, so positions already mirror;
    # averaging masses with their mirror removes summation-order noise
    x = 0.5 * (r.positions - r.positions[::-1])
    m = 0.5 * (r.masses + r.masses[::-1])
    return DiscreteDist(x, m, r.budget)


def moments(F: DiscreteDist) -> tuple[float, float]:
    """Raw first and second moments ``(E X, E X^2)``."""
    x, m = F.positions, F.masses
    return float(np.dot(m, x)), float(np.dot(m, x * x))


def _centered_sigma2(U: DiscreteDist) -> float:
    mean, s2 = moments(U)
    if abs(mean) > CENTER_TOL:
        raise NonCenteredInput(f"distribution has mean {mean!r}; expected 0 within {CENTER_TOL}")
    if s2 <= 0:
        raise ZeroVariance("distribution has zero variance")
    return s2


def kappa(U: DiscreteDist, n: int) -> float:
    """Truncated third moment ``E X^2 min(|X|, sigma sqrt(n))``."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    sigma2 = _centered_sigma2(U)
    cap = math.sqrt(sigma2) * math.sqrt(n)
    x = U.positions
    return float(np.dot(U.masses, x * x * np.minimum(np.abs(x), cap)))


def third_abs_moment(U: DiscreteDist) -> float:
    x = U.positions
    return float(np.dot(U.masses, np.abs(x) ** 3))


def d_functional(F: DiscreteDist, b: float) -> float:
    """``D(F, b) = E min(X^2 / b^2, 1)``; lies in [0, 1]."""
    if not b > 0:
        raise NonPositiveScale(f"scale b={b!r} must be positive")
    x = F.positions
    return float(np.dot(F.masses, np.minimum((x / b) ** 2, 1.0)))


def beta_B(xi: DiscreteDist, n: int) -> MomentSummary:
    sigma2 = _centered_sigma2(xi)
    k = kappa(xi, n)
    B = math.sqrt(sigma2) * math.sqrt(n)
    return MomentSummary(sigma2=sigma2, kappa_n=k, beta=n * k, B=B, n=n)


def charfn_modulus(F: Measure, t):
    """``|sum_j m_j exp(i t x_j)|`` for scalar or array ``t``."""
    if isinstance(F, LatticeDist):
        F = F.to_discrete()
    t_arr = np.asarray(t, dtype=np.float64)
    flat = t_arr.reshape(-1)
    x, m = F.positions, F.masses
    out = np.empty(flat.size)
    # chunk to bound the (len(t), len(x)) phase matrix
    chunk = max(1, 2**22 // max(1, x.size))
    for lo in range(0, flat.size, chunk):
        ph = np.multiply.outer(flat[lo:lo + chunk], x)
        out[lo:lo + chunk] = np.hypot(np.cos(ph) @ m, np.sin(ph) @ m)
    if t_arr.ndim == 0:
        return float(out[0])
    return out.reshape(t_arr.shape)


def to_lattice(F: Measure, step: float, snap_tol: float = MERGE_TOL) -> LatticeDist:
    """Snap ``F`` onto the grid ``x_min + step * k``; atoms in one cell are merged."""
    if isinstance(F, LatticeDist):
        F = F.to_discrete()
    if not step > 0:
        raise NonPositiveScale(f"lattice step {step!r} must be positive")
    x = F.positions
    offset = float(x[0])
    k = np.rint((x - offset) / step)
    miss = np.abs(x - (offset + k * step))
    if np.any(miss > snap_tol):
        bad = int(np.argmax(miss))
        raise NotLatticeAligned(
            f"atom at {x[bad]!r} misses the grid offset={offset!r}, step={step!r} by {miss[bad]:.3g}")
    k = k.astype(np.int64)
    weights = np.bincount(k, weights=F.masses, minlength=int(k[-1]) + 1)
    return LatticeDist(offset, step, weights, F.budget)


def infer_step(F: DiscreteDist, tol: float = MERGE_TOL, max_cells: int = 2**22) -> float | None:
    """Largest step ``h`` with every atom on ``x_min + h * Z`` (within ``tol``), or None.

    Returns None for single atoms and when the implied grid would need more
    than ``max_cells`` cells.
    """
    x = F.positions
    if x.size < 2:
        return None
    diffs = np.unique(x[1:] - x[0])
    g = 0.0
    for d in diffs:
        a, b = float(d), g
        while b > tol:
            a, b = b, math.fmod(a, b)
            if b > 0 and a - b <= tol:
                b = 0.0
        g = a
        if g <= tol:
            return None
    span = x[-1] - x[0]
    if span / g > max_cells:
        return None
    # float gcd drifts; accept only if every atom snaps
    k = np.rint((x - x[0]) / g)
    if np.any(np.abs(x - x[0] - k * g) > tol):
        return None
    return g


def total_variation(F: Measure, G: Measure, tol: float = MERGE_TOL) -> float:
    """``sum |F{x} - G{x}|`` with positions matched within ``tol``."""
    F, G = F.to_discrete(), G.to_discrete()
    x = np.concatenate([F.positions, G.positions])
    m = np.concatenate([F.masses, -G.masses])
    order = np.argsort(x, kind="stable")
    x, m = x[order], m[order]
    starts = np.concatenate([[0], np.flatnonzero(np.diff(x) > tol) + 1])
    return float(np.abs(np.add.reduceat(m, starts)).sum())


def mixture_sum(weights: Sequence[float], components: Sequence[Measure]) -> DiscreteDist:
    """``sum_k w_k C_k`` as a single discrete measure (weights must sum to one)."""
    xs, ms = [], []
    budget = ZERO_BUDGET
    for w, c in zip(weights, components):
        if w == 0:
            continue
        d = c.to_discrete()
        xs.append(d.positions)
        ms.append(w * d.masses)
        budget = budget + d.budget.scaled(w)
    x, m = merge_atoms(np.concatenate(xs), np.concatenate(ms), MERGE_TOL)
    return DiscreteDist(x, m, budget)
