"""Verification suites: the checkable identities, constant stability and the counterexample.

Each check returns a ``CheckResult``; ``run_suite`` collects them in order.
The random corpus is drawn from a fixed seed so every run sees the same cases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bounds import (
    cor1_rhs,
    esseen_rhs_1_11,
    estimate_constant,
    holder_lhs_2_9,
    lemma1_rhs,
    mult_rhs_1_7,
    sharpened_rhs_1_13,
)
from .concentration import q_exact, q_regularity_gap
from .convolution import conv_power, convolve, mixture_expand, power
from .families import counterexample, fair_coin, lattice_gap, trivial_mixture
from .measures import DiscreteDist, MixtureSpec, kappa, mixture_sum, moments, total_variation

SEED = 20_240_517
Q_FLOAT_SLACK = 1e-12
STABILITY_NS = (16, 64, 256, 1024)
P_GRID = tuple(round(0.01 * i, 2) for i in range(1, 100))
N_GRID = tuple(range(1, 1001))

# implied constants for the fair coin at b = 1, n in STABILITY_NS
GOLDEN_CONSTANTS: dict[str, tuple[float, ...]] = {
    "lemma1": (0.7855224609375, 0.7947740299837351, 0.7971057589782424, 0.7976897885753456),
    "cor1": (0.7855224609375, 0.7947740299837351, 0.7971057589782424, 0.7976897885753456),
    "mult_1_7": (1.128529795866923, 1.3931850738575042, 1.4002928748602756, 1.3971526391341378),
    "esseen_1_11": (0.5554482589032511, 0.5619901061124595, 0.5636388874963649, 0.5640518587848902),
}
GOLDEN_TOL = 1e-9


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    failure: dict = field(default_factory=dict)


def loglog_slope(ns, values) -> float:
    return float(np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(values, float)), 1)[0])


def random_dist(rng: np.random.Generator, max_atoms: int = 5, lattice: bool | None = None) -> DiscreteDist:
    k = int(rng.integers(1, max_atoms + 1))
    if lattice is None:
        lattice = bool(rng.random() < 0.5)
    if lattice:
        x = rng.choice(np.arange(-6, 7), size=k, replace=False) * float(rng.choice([0.5, 1.0, 2.0]))
    else:
        x = rng.uniform(-4.0, 4.0, size=k)
    m = rng.dirichlet(np.ones(k))
    return DiscreteDist.from_atoms(zip(x, m))


def random_centered(rng: np.random.Generator, max_atoms: int = 5) -> DiscreteDist:
    """Random discrete law with mean 0 and positive variance."""
    while True:
        k = int(rng.integers(2, max_atoms + 1))
        x = rng.uniform(-3.0, 3.0, size=k)
        m = rng.dirichlet(np.ones(k))
        x = x - np.dot(m, x)
        F = DiscreteDist.from_atoms(zip(x, m))
        mean, s2 = moments(F)
        if abs(mean) <= 1e-12 and s2 > 1e-6:
            return F


def check_convolution_monotone(cases: int = 1000, seed: int = SEED) -> CheckResult:
    """``Q(FH, g) <= min(Q(F, g), Q(H, g))``."""
    rng = np.random.default_rng(seed)
    for i in range(cases):
        F, H = random_dist(rng), random_dist(rng)
        g = float(rng.uniform(0.0, 6.0))
        lhs = q_exact(convolve(F, H), g).value
        rhs = min(q_exact(F, g).value, q_exact(H, g).value)
        if lhs > rhs + Q_FLOAT_SLACK:
            return CheckResult("Q(FH) <= min(Q(F), Q(H))", False, f"case {i}: {lhs!r} > {rhs!r}",
                               {"case": i, "F": F.atoms, "H": H.atoms, "gamma": g})
    return CheckResult("Q(FH) <= min(Q(F), Q(H))", True, f"{cases} cases")


def check_regularity(cases: int = 1000, seed: int = SEED + 1) -> CheckResult:
    """``Q(F, g1) <= (1 + int(g1/g2)) Q(F, g2)`` and the ratio form ``(1 + g1/g2)``."""
    rng = np.random.default_rng(seed)
    for i in range(cases):
        F = random_dist(rng, max_atoms=8)
        g1, g2 = (float(v) for v in rng.uniform(0.01, 6.0, size=2))
        lhs, rhs = q_regularity_gap(F, g1, g2)
        ratio_rhs = (1.0 + g1 / g2) * q_exact(F, g2).value
        if lhs > rhs + Q_FLOAT_SLACK or lhs > ratio_rhs + Q_FLOAT_SLACK:
            return CheckResult("Q(F,g1) <= (1+[g1/g2]) Q(F,g2)", False,
                               f"case {i}: {lhs!r} > {min(rhs, ratio_rhs)!r}",
                               {"case": i, "F": F.atoms, "g1": g1, "g2": g2})
    return CheckResult("Q(F,g1) <= (1+[g1/g2]) Q(F,g2)", True, f"{cases} cases, both factor forms")


def check_mixture_identity(cases: int = 20, seed: int = SEED + 2, tol: float = 1e-9) -> CheckResult:
    """``sum_k P(mu=k) H U^(n-k) V^k`` equals ``H F^n``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(cases):
        U = random_centered(rng, 5)
        V = random_dist(rng, 5)
        H = random_dist(rng, 3)
        p = float(rng.choice([0.1, 0.3, 0.7]))
        n = int(rng.integers(1, 9))
        spec = MixtureSpec(p, U, V)
        parts = mixture_expand(spec, H, n)
        lhs = mixture_sum([w for w, _ in parts], [c for _, c in parts])
        rhs = convolve(H, conv_power(spec.mixed(), n))
        tv = total_variation(lhs, rhs)
        worst = max(worst, tv)
        if tv > tol:
            return CheckResult("binomial mixture identity", False, f"case {i}: TV {tv:.3g} > {tol:g}",
                               {"case": i, "p": p, "n": n})
    return CheckResult("binomial mixture identity", True, f"{cases} cases, max TV {worst:.3g}")


def check_holder(tol: float = 3.0) -> CheckResult:
    worst, where = 0.0, None
    for n in N_GRID:
        for p in P_GRID:
            _, normalized = holder_lhs_2_9(n, p, 0)
            if normalized > worst:
                worst, where = normalized, (n, p)
    ok = worst <= tol
    return CheckResult("Hoelder step normalized <= 3", ok, f"max {worst:.6f} at (n, p) = {where}",
                       {} if ok else {"n": where[0], "p": where[1], "normalized": worst})


def check_power_exponential() -> CheckResult:
    for n in N_GRID:
        for p in P_GRID:
            if p**n > math.exp(-n * (1.0 - p)):
                return CheckResult("p^n <= exp(-n(1-p))", False, f"n={n}, p={p}", {"n": n, "p": p})
    return CheckResult("p^n <= exp(-n(1-p))", True, f"{len(N_GRID) * len(P_GRID)} grid points")


def check_kappa_lower(cases: int = 1000, seed: int = SEED + 3) -> CheckResult:
    rng = np.random.default_rng(seed)
    for i in range(cases):
        U = random_centered(rng, 6)
        s2 = moments(U)[1]
        k1 = kappa(U, 1)
        if k1 < s2**1.5 / math.sqrt(2.0):
            return CheckResult("kappa_1 >= sigma^3 / sqrt(2)", False, f"case {i}",
                               {"case": i, "U": U.atoms, "kappa_1": k1, "sigma2": s2})
    return CheckResult("kappa_1 >= sigma^3 / sqrt(2)", True, f"{cases} centered laws")


def lattice_equality_values(n: int = 64, alpha: float = 0.25) -> dict[float, float]:
    F = lattice_gap(n, alpha)
    m = round(n * alpha)
    scale = math.sqrt(moments(F)[1]) * math.sqrt(m)
    X = power(F, n - m)
    return {b: q_exact(X, b).value for b in (0.0, scale / 2.0, scale)}


def check_lattice_equality(n: int = 64, alpha: float = 0.25) -> CheckResult:
    values = lattice_equality_values(n, alpha)
    ok = len(set(values.values())) == 1
    return CheckResult("lattice equality below half step", ok,
                       ", ".join(f"Q(b={b:g})={v!r}" for b, v in values.items()),
                       {} if ok else {"values": {str(k): v for k, v in values.items()}})


def counterexample_scaled_q(n: int = 500) -> float:
    F = counterexample(n)
    return q_exact(power(F, n), 1.0).value * math.sqrt(n)


def check_counterexample_decay(n: int = 500, tol: float = 0.01) -> CheckResult:
    v = counterexample_scaled_q(n)
    target = math.sqrt(2.0 / math.pi)
    ok = abs(v - target) <= tol
    return CheckResult("sqrt(n) Q(F_n^n, 1) -> sqrt(2/pi)", ok, f"n={n}: {v:.6f} vs {target:.6f}",
                       {} if ok else {"n": n, "value": v})


def counterexample_constants(ns=STABILITY_NS) -> list[float]:
    return [sharpened_rhs_1_13(counterexample(n), n, 1.0).implied_c for n in ns]


def check_counterexample_growth(ns=STABILITY_NS) -> CheckResult:
    cs = counterexample_constants(ns)
    slope = loglog_slope(ns, cs)
    ok = abs(slope - 0.5) <= 0.1
    return CheckResult("c(F_n, 1) grows like sqrt(n)", ok, f"slope {slope:.4f}",
                       {} if ok else {"ns": list(ns), "implied_c": cs, "slope": slope})


def fair_coin_constants(ns=STABILITY_NS, b: float = 1.0) -> dict[str, list[float]]:
    fc = fair_coin()
    spec = trivial_mixture(fc)
    d0 = DiscreteDist.point(0.0)
    evals: dict[str, Callable[[int], float]] = {
        "lemma1": lambda n: lemma1_rhs(fc, n, d0, b).implied_c,
        "cor1": lambda n: cor1_rhs(spec, d0, n, b).implied_c,
        "mult_1_7": lambda n: mult_rhs_1_7(spec, n, 0.5, b).implied_c,
        "esseen_1_11": lambda n: esseen_rhs_1_11(fc, n, b).implied_c,
    }
    return {k: [f(n) for n in ns] for k, f in evals.items()}


def check_constant_stability(ns=STABILITY_NS) -> list[CheckResult]:
    out = []
    for name, cs in fair_coin_constants(ns).items():
        slope = loglog_slope(ns, cs)
        golden = GOLDEN_CONSTANTS[name]
        drift = max(abs(a - g) for a, g in zip(cs, golden))
        ok = abs(slope) <= 0.1 and drift <= GOLDEN_TOL
        out.append(CheckResult(f"{name}: n-independent constant", ok,
                               f"slope {slope:+.4f}, golden drift {drift:.2g}",
                               {} if ok else {"bound": name, "implied_c": cs, "slope": slope}))
    return out


def check_lemma1_family_constant() -> CheckResult:
    fc = fair_coin()
    d0 = DiscreteDist.point(0.0)
    family = [lemma1_rhs(fc, n, d0, 1.0) for n in range(4, 257)]
    c_hat, witness = estimate_constant(family, "lemma1")
    ok = math.isfinite(c_hat) and c_hat < 3.0
    return CheckResult("lemma1 c_hat over fair coin n=4..256", ok,
                       f"c_hat {c_hat:.6f} at n={witness['n']}", {} if ok else witness)


SUITES: dict[str, Callable[[], list[CheckResult]]] = {
    "identities": lambda: [
        check_convolution_monotone(),
        check_regularity(),
        check_mixture_identity(),
        check_holder(),
        check_kappa_lower(),
        check_power_exponential(),
        check_lattice_equality(),
    ],
    "constants": lambda: [*check_constant_stability(), check_lemma1_family_constant()],
    "counterexample": lambda: [check_counterexample_decay(), check_counterexample_growth()],
}


def run_suite(name: str) -> list[CheckResult]:
    if name == "all":
        return [r for key in ("identities", "constants", "counterexample") for r in SUITES[key]()]
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name]()
