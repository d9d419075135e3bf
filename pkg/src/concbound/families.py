"""Built-in distribution families used by the CLI and the verification suites."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .measures import DiscreteDist, MixtureSpec


def two_point(a: float = 1.0) -> DiscreteDist:
    """Symmetric coin ``(E_{-a} + E_a) / 2``."""
    if not a > 0:
        raise ValueError("two_point needs a > 0")
    return DiscreteDist(np.array([-a, a], dtype=float), np.array([0.5, 0.5]))


def fair_coin() -> DiscreteDist:
    return two_point(1.0)


def counterexample(n: int) -> DiscreteDist:
    """``F_n = (E_{-n} + E_n) / 2``: Q(F_n^n, 1) decays like n^(-1/2)."""
    if n < 1:
        raise ValueError("counterexample needs n >= 1")
    return two_point(float(n))


def uniform_lattice(m: int, h: float = 1.0) -> DiscreteDist:
    """Uniform law on ``m`` points with spacing ``h``, centered at 0."""
    if m < 1 or not h > 0:
        raise ValueError("uniform_lattice needs m >= 1 and h > 0")
    x = (np.arange(m) - (m - 1) / 2.0) * h
    return DiscreteDist(x, np.full(m, 1.0 / m))


def zero_mean_three_point(p: float, a: float) -> DiscreteDist:
    """``(1 - p) E + (p / 2)(E_{-a} + E_a)``; variance ``p a^2``."""
    if not (0 < p <= 1) or not a > 0:
        raise ValueError("zero_mean_three_point needs 0 < p <= 1 and a > 0")
    if p == 1:
        return two_point(a)
    return DiscreteDist(np.array([-a, 0.0, a]), np.array([p / 2, 1 - p, p / 2]))


def lattice_gap(n: int, alpha: float) -> DiscreteDist:
    """Unit-variance law on a lattice of step ``2 sqrt(n alpha)``.

    Windows no longer than ``sqrt(n alpha)`` can cover only one atom of any
    power of this law.
    """
    m = n * alpha
    return zero_mean_three_point(1.0 / (4.0 * m), 2.0 * math.sqrt(m))


FAMILIES: dict[str, Callable[..., DiscreteDist]] = {
    "two_point": two_point,
    "fair_coin": fair_coin,
    "counterexample": counterexample,
    "uniform_lattice": uniform_lattice,
    "zero_mean_three_point": zero_mean_three_point,
    "lattice_gap": lattice_gap,
}


def trivial_mixture(U: DiscreteDist) -> MixtureSpec:
    """``F = U`` written as a mixture with ``p = 0``."""
    return MixtureSpec(0.0, U, DiscreteDist.point(0.0))
