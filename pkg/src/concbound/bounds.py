"""Right-hand sides of the concentration inequalities, with the constant factored out.

Every evaluator returns a ``BoundReport`` holding the exact left side
``Q(., b)``, the right side evaluated with ``c = 1`` (``rhs_unit``) and the
implied constant ``lhs / rhs_unit``. Scenarios outside a bound's hypotheses are
still evaluated but flagged; pass ``strict=True`` to raise instead.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

import numpy as np

from .concentration import q_exact
from .convolution import binomial_pmf, common_lattice, convolve, power, power_table, product
from .errors import (
    BadRange,
    DegenerateSymmetrization,
    EmptyFamily,
    HypothesisViolated,
    NonIntegerSplit,
)
from .measures import (
    ZERO_BUDGET,
    DiscreteDist,
    ErrorBudget,
    Measure,
    MixtureSpec,
    beta_B,
    charfn_modulus,
    d_functional,
    kappa,
    symmetrize,
    third_abs_moment,
)
from .quadrature import adaptive_simpson
from .specio import dist_to_spec, mixture_to_spec

BOUND_IDS = ("th1_general", "th1_simple", "cor1", "mult_1_7", "cor2", "esseen_1_11",
             "sharpened_1_13", "cf_1_15", "cf_1_16", "lemma1")

HYP_RTOL = 1e-12
QUAD_TOL = 1e-10


@dataclass
class BoundReport:
    bound_id: str
    lhs: float
    rhs_unit: float
    params: dict[str, Any]
    budgets: ErrorBudget = ZERO_BUDGET
    hypothesis_ok: bool = True
    violations: list[str] = field(default_factory=list)
    terms: dict[str, float] = field(default_factory=dict)
    extras: dict[str, float] = field(default_factory=dict)

    @property
    def implied_c(self) -> float:
        if self.rhs_unit == 0:
            return math.inf
        return self.lhs / self.rhs_unit

    def as_dict(self) -> dict:
        return {
            "bound_id": self.bound_id,
            "lhs": self.lhs,
            "rhs_unit": self.rhs_unit,
            "implied_c": _json_float(self.implied_c),
            "hypothesis_ok": self.hypothesis_ok,
            "violations": list(self.violations),
            "terms": dict(self.terms),
            "extras": dict(self.extras),
            "params": self.params,
            "budgets": self.budgets.as_dict(),
        }

    def flat_params(self) -> dict[str, Any]:
        """Scalar columns for CSV output; distribution params become compact JSON."""
        out: dict[str, Any] = {}
        for k in sorted(self.params):
            v = self.params[k]
            out[f"param.{k}"] = json.dumps(v, separators=(",", ":")) if isinstance(v, (dict, list)) else v
        for k in sorted(self.terms):
            out[f"term.{k}"] = self.terms[k]
        for k in sorted(self.extras):
            out[f"extra.{k}"] = self.extras[k]
        out["budget.pruned_mass"] = self.budgets.pruned_mass
        out["budget.fft_residual"] = self.budgets.fft_residual
        return out


def _json_float(x: float):
    return x if math.isfinite(x) else "inf"


def _unit(b: float, sigma: float, m: float) -> float:
    """``b / (sigma sqrt(m))``; infinite when ``m == 0``."""
    if m <= 0:
        return math.inf
    return b / (sigma * math.sqrt(m))


def _flag(report: BoundReport, ok: bool, message: str, strict: bool) -> None:
    if not ok:
        report.hypothesis_ok = False
        report.violations.append(message)
        if strict:
            raise HypothesisViolated(f"{report.bound_id}: {message}")


def _scale_ok(b: float, threshold: float) -> bool:
    return b >= threshold * (1.0 - HYP_RTOL)


class _Budget:
    """Sums the error budgets of every measure a report touches."""

    def __init__(self):
        self.total = ZERO_BUDGET

    def q(self, X: Measure, b: float) -> float:
        self.total = self.total + X.budget
        return q_exact(X, b).value


def _lhs(acc: _Budget, H: Measure | None, F: Measure, n: int, b: float, prune_eps: float) -> float:
    """``Q(H F^n, b)``."""
    X = power(F, n, prune_eps)
    if H is not None:
        X = product(H, X)
    return acc.q(X, b)


def _check_n(n: int) -> None:
    if int(n) != n or n < 1:
        raise ValueError(f"n={n!r} must be a positive integer")


def _split(n: int, alpha: float) -> int:
    if not (0 < alpha < 1):
        raise ValueError(f"alpha={alpha!r} must lie in (0, 1)")
    m = n * alpha
    k = round(m)
    if abs(m - k) > 1e-9 or k < 1 or k >= n:
        raise NonIntegerSplit(f"n * alpha = {m!r} is not an integer in [1, n - 1]")
    return int(k)


def lemma1_rhs(W_base: DiscreteDist, n: int, G: Measure, b: float, *,
               prune_eps: float = 0.0, strict: bool = False) -> BoundReport:
    """``Q(W G, b) <= c (b / B) Q(G, B)`` with ``W = W_base^n``, ``B = sigma sqrt(n)``."""
    _check_n(n)
    ms = beta_B(W_base, n)
    sigma = math.sqrt(ms.sigma2)
    acc = _Budget()
    lhs = _lhs(acc, G, W_base, n, b, prune_eps)
    rhs = _unit(b, sigma, n * (1.0 - 0.0)) * acc.q(G, sigma * math.sqrt(n))
    report = BoundReport("lemma1", lhs, rhs,
                         {"n": n, "b": b, "W_base": dist_to_spec(W_base), "G": dist_to_spec(G),
                          "B": ms.B, "beta": ms.beta})
    threshold = ms.beta / ms.B**2
    _flag(report, _scale_ok(b, threshold), f"b={b!r} < beta/B^2={threshold!r}", strict)
    report.budgets = acc.total
    return report


def _first_term(acc: _Budget, spec: MixtureSpec, H: Measure, n: int, r: int, b: float) -> float:
    """``b / (sigma sqrt(n (1 - p))) Q(H V^r, sigma sqrt(n))``."""
    sigma = spec.sigma
    HV = product(H, power(spec.V, r))
    return _unit(b, sigma, n * (1.0 - spec.p)) * acc.q(HV, sigma * math.sqrt(n))


def _tail_term(acc: _Budget, spec: MixtureSpec, H: Measure, n: int, r: int, b: float,
               pmf) -> float:
    """``min(1, b / (sigma sqrt(n - r)) Q(H, sigma sqrt(n))) P(mu < r)``."""
    below = pmf.below(r)
    if below == 0.0:
        return 0.0
    sigma = spec.sigma
    return min(1.0, _unit(b, sigma, n - r) * acc.q(H, sigma * math.sqrt(n))) * below


def _theorem_hypothesis(report: BoundReport, spec: MixtureSpec, n: int, b: float, strict: bool) -> None:
    threshold = kappa(spec.U, n) / spec.sigma2
    report.params["kappa_over_sigma2"] = threshold
    _flag(report, _scale_ok(b, threshold), f"b={b!r} < kappa_n/sigma^2={threshold!r}", strict)


def _mixture_params(spec: MixtureSpec, H: Measure | None, **scalars) -> dict:
    params = dict(scalars)
    params["p"] = spec.p
    params["mixture"] = mixture_to_spec(spec)
    if H is not None:
        params["H"] = dist_to_spec(H)
    return params


def cor1_rhs(spec: MixtureSpec, H: Measure, n: int, b: float, *,
             prune_eps: float = 0.0, strict: bool = False) -> BoundReport:
    """``Q(H F^n, b) <= c b / (sigma sqrt(n (1 - p))) Q(H, sigma sqrt(n))``."""
    _check_n(n)
    acc = _Budget()
    lhs = _lhs(acc, H, spec.mixed(), n, b, prune_eps)
    rhs = _first_term(acc, spec, H, n, 0, b)
    report = BoundReport("cor1", lhs, rhs, _mixture_params(spec, H, n=n, b=b))
    _theorem_hypothesis(report, spec, n, b, strict)
    report.budgets = acc.total
    return report


def th1_simple_rhs(spec: MixtureSpec, H: Measure, n: int, r: int, b: float, *,
                   prune_eps: float = 0.0, strict: bool = False) -> BoundReport:
    """Two-term mixture bound, reported addend by addend."""
    _check_n(n)
    if not (0 <= r <= n):
        raise BadRange(f"need 0 <= r <= n, got r={r}, n={n}")
    acc = _Budget()
    pmf = binomial_pmf(n, spec.p)
    lhs = _lhs(acc, H, spec.mixed(), n, b, prune_eps)
    t1 = _first_term(acc, spec, H, n, r, b)
    t2 = _tail_term(acc, spec, H, n, r, b, pmf)
    report = BoundReport("th1_simple", lhs, t1 + t2, _mixture_params(spec, H, n=n, r=r, b=b),
                         terms={"main": t1, "tail": t2})
    _theorem_hypothesis(report, spec, n, b, strict)
    report.budgets = acc.total
    return report


def th1_general_rhs(spec: MixtureSpec, H: Measure, n: int, r: int, s: int, b: float, *,
                    prune_eps: float = 0.0, strict: bool = False) -> BoundReport:
    """Three-term form: CLT-scale middle range, exact upper range, binomial lower tail."""
    _check_n(n)
    if not (0 <= r < s <= n):
        raise BadRange(f"need 0 <= r < s <= n, got r={r}, s={s}, n={n}")
    acc = _Budget()
    pmf = binomial_pmf(n, spec.p)
    w = pmf.pmf
    sigma = spec.sigma
    lhs = _lhs(acc, H, spec.mixed(), n, b, prune_eps)

    U, V, Hc = spec.U, spec.V, H
    lat = common_lattice(U, V, H)
    if lat is not None:
        U, V, Hc = lat
    v_pows = power_table(V, n)
    u_pows = power_table(U, n - s)

    middle = 0.0
    for k in range(r, s):
        if w[k] == 0.0:
            continue
        HVk = convolve(Hc, v_pows[k])
        middle += w[k] * _unit(b, sigma, n - k) * acc.q(HVk, sigma * math.sqrt(n - k))
    upper = 0.0
    for k in range(s, n + 1):
        if w[k] == 0.0:
            continue
        comp = convolve(convolve(Hc, u_pows[n - k]), v_pows[k])
        upper += w[k] * acc.q(comp, b)
    tail = _tail_term(acc, spec, H, n, r, b, pmf)

    report = BoundReport("th1_general", lhs, middle + upper + tail,
                         _mixture_params(spec, H, n=n, r=r, s=s, b=b),
                         terms={"middle": middle, "upper": upper, "tail": tail})
    _theorem_hypothesis(report, spec, n, b, strict)
    report.budgets = acc.total
    return report


def _resolve_F(spec: MixtureSpec, F: Measure | None) -> Measure:
    return spec.mixed() if F is None else F


def mult_rhs_1_7(spec: MixtureSpec, n: int, alpha: float, b: float, F: Measure | None = None, *,
                 prune_eps: float = 0.0, strict: bool = False) -> BoundReport:
    """``Q(F^n, b) <= c b / (sigma sqrt(n alpha (1 - p))) Q(F^(n(1-alpha)), sigma sqrt(n alpha))``."""
    _check_n(n)
    m = _split(n, alpha)
    F = _resolve_F(spec, F)
    sigma = spec.sigma
    acc = _Budget()
    lhs = _lhs(acc, None, F, n, b, prune_eps)
    rest = power(F, n - m, prune_eps)
    rhs = _unit(b, sigma, m * (1.0 - spec.p)) * acc.q(rest, sigma * math.sqrt(m))
    report = BoundReport("mult_1_7", lhs, rhs,
                         _mixture_params(spec, None, n=n, alpha=alpha, b=b, F=dist_to_spec(F)))
    threshold = kappa(spec.U, m) / spec.sigma2
    report.params["kappa_over_sigma2"] = threshold
    _flag(report, _scale_ok(b, threshold), f"b={b!r} < kappa_(n alpha)/sigma^2={threshold!r}", strict)
    report.budgets = acc.total
    return report


def cor2_rhs(spec: MixtureSpec, n: int, b: float, delta: float, *,
             prune_eps: float = 0.0, strict: bool = False) -> BoundReport:
    """``Q(F^n, b) <= c b (delta + sigma) / (delta sigma n sqrt((1 - p) D(F~, delta sqrt(n))))``."""
    _check_n(n)
    if not delta > 0:
        raise ValueError("delta must be positive")
    F = spec.mixed()
    sigma = spec.sigma
    D = d_functional(symmetrize(F), delta * math.sqrt(n))
    if D == 0:
        raise DegenerateSymmetrization("D(F~, delta sqrt(n)) = 0: F is a point mass")
    acc = _Budget()
    lhs = _lhs(acc, None, F, n, b, prune_eps)
    rhs = b * (delta + sigma) / (delta * sigma * n * math.sqrt((1.0 - spec.p) * D))
    report = BoundReport("cor2", lhs, rhs, _mixture_params(spec, None, n=n, b=b, delta=delta, D=D))
    _theorem_hypothesis(report, spec, n, b, strict)
    report.budgets = acc.total
    return report


def _truncated_second_moment(Ft: DiscreteDist, b: float, cap: float) -> float:
    x = Ft.positions
    return float(np.dot(Ft.masses, np.minimum((x / b) ** 2, cap)))


def esseen_rhs_1_11(F: DiscreteDist, n: int, b: float, *, prune_eps: float = 0.0) -> BoundReport:
    """``Q(F^n, b) <= c (n D(F~, b))^(-1/2)``."""
    _check_n(n)
    Ft = symmetrize(F)
    D = d_functional(Ft, b)
    if D == 0:
        raise DegenerateSymmetrization("D(F~, b) = 0: F is a point mass")
    acc = _Budget()
    lhs = _lhs(acc, None, F, n, b, prune_eps)
    rhs = (n * D) ** -0.5
    integral_form = (n * _truncated_second_moment(Ft, b, 1.0)) ** -0.5
    report = BoundReport("esseen_1_11", lhs, rhs, {"n": n, "b": b, "F": dist_to_spec(F), "D": D},
                         extras={"rhs_1_12": integral_form})
    report.budgets = acc.total
    return report


def sharpened_rhs_1_13(F: DiscreteDist, n: int, b: float, *, prune_eps: float = 0.0) -> BoundReport:
    """``Q(F^n, b) <= c(F, b) (n E_{F~} min(x^2 / b^2, n))^(-1/2)``.

    The implied constant here depends on ``F`` and ``b``; it cannot be bounded
    uniformly.
    """
    _check_n(n)
    if not b > 0:
        raise ValueError("b must be positive")
    Ft = symmetrize(F)
    integral = _truncated_second_moment(Ft, b, float(n))
    if integral == 0:
        raise DegenerateSymmetrization("F~ is degenerate: F is a point mass")
    acc = _Budget()
    lhs = _lhs(acc, None, F, n, b, prune_eps)
    rhs = (n * integral) ** -0.5
    report = BoundReport("sharpened_1_13", lhs, rhs,
                         {"n": n, "b": b, "F": dist_to_spec(F), "capped_integral": integral})
    report.budgets = acc.total
    return report


def charfn_integral(F: Measure, power_n: int, half_width: float, step_scale: float,
                    tol: float = QUAD_TOL) -> float:
    """``int_{|t| <= half_width} |F^(t)|^power_n dt``.

    Panels are capped at ``min(pi * step_scale, pi / (4 max|x| sqrt(power_n)))``
    so that the oscillation of the characteristic function is resolved.
    """
    if power_n == 0:
        return 2.0 * half_width
    xmax = F.max_abs()
    cap = math.pi * step_scale
    if xmax > 0:
        cap = min(cap, math.pi / (4.0 * xmax * math.sqrt(power_n)))
    Fd = F.to_discrete()

    def integrand(t):
        return charfn_modulus(Fd, t) ** power_n

    # |F^| is even in t
    return 2.0 * adaptive_simpson(integrand, 0.0, half_width, tol / 2.0, cap)


def cf_bound_1_15(F: DiscreteDist, n: int, b: float, *, prune_eps: float = 0.0,
                  with_lhs: bool = True) -> BoundReport:
    """``Q(F^n, b) <= c b int_{|t| <= 1/b} |F^(t)|^n dt``; ``n = 1`` is the single-measure bound."""
    _check_n(n)
    if not b > 0:
        raise ValueError("b must be positive")
    rhs = b * charfn_integral(F, n, 1.0 / b, b)
    acc = _Budget()
    lhs = _lhs(acc, None, F, n, b, prune_eps) if with_lhs else math.nan
    report = BoundReport("cf_1_15", lhs, rhs, {"n": n, "b": b, "F": dist_to_spec(F)})
    report.budgets = acc.total
    return report


def cf_bound_1_16(spec: MixtureSpec, n: int, alpha: float, b: float, F: Measure | None = None, *,
                  prune_eps: float = 0.0, strict: bool = False) -> BoundReport:
    """``Q(F^n, b) <= c b / sqrt(1 - p) int_{|t| sigma sqrt(n alpha) <= 1} |F^(t)|^(n(1-alpha)) dt``."""
    _check_n(n)
    m = _split(n, alpha)
    F = _resolve_F(spec, F)
    sigma = spec.sigma
    scale = sigma * math.sqrt(m)
    rhs = b / math.sqrt(1.0 - spec.p) * charfn_integral(F, n - m, 1.0 / scale, scale)
    acc = _Budget()
    lhs = _lhs(acc, None, F, n, b, prune_eps)
    compare = cf_bound_1_15(F.to_discrete(), n, b, with_lhs=False).rhs_unit
    report = BoundReport("cf_1_16", lhs, rhs,
                         _mixture_params(spec, None, n=n, alpha=alpha, b=b, F=dist_to_spec(F)),
                         extras={"cf_1_15_rhs_unit": compare, "window_length": 2.0 / scale})
    threshold = third_abs_moment(spec.U) / spec.sigma2
    report.params["third_moment_over_sigma2"] = threshold
    _flag(report, _scale_ok(b, threshold), f"b={b!r} < E|X|^3/sigma^2={threshold!r}", strict)
    report.budgets = acc.total
    return report


def holder_lhs_2_9(n: int, p: float, r: int = 0) -> tuple[float, float]:
    """``(E (n - mu)^(-1/2) 1{r <= mu < n}, same * sqrt(n (1 - p)))`` for ``mu ~ Bin(n, p)``."""
    if not (0 <= r <= n):
        raise BadRange(f"need 0 <= r <= n, got r={r}, n={n}")
    w = binomial_pmf(n, p).pmf
    k = np.arange(r, n)
    lhs = float(np.dot(w[r:n], 1.0 / np.sqrt(n - k))) if k.size else 0.0
    return lhs, lhs * math.sqrt(n * (1.0 - p))


EVALUATORS: dict[str, Callable[..., BoundReport]] = {
    "lemma1": lemma1_rhs,
    "cor1": cor1_rhs,
    "th1_simple": th1_simple_rhs,
    "th1_general": th1_general_rhs,
    "mult_1_7": mult_rhs_1_7,
    "cor2": cor2_rhs,
    "esseen_1_11": esseen_rhs_1_11,
    "sharpened_1_13": sharpened_rhs_1_13,
    "cf_1_15": cf_bound_1_15,
    "cf_1_16": cf_bound_1_16,
}


def evaluate(bound_id: str, **kwargs) -> BoundReport:
    if bound_id not in EVALUATORS:
        raise ValueError(f"unknown bound {bound_id!r}; known: {sorted(EVALUATORS)}")
    return EVALUATORS[bound_id](**kwargs)


def estimate_constant(family: Iterable[dict | BoundReport], bound_id: str | None = None
                      ) -> tuple[float, dict]:
    """Largest implied constant over the hypothesis-satisfying scenarios of a family.

    ``family`` yields either ready ``BoundReport`` objects or keyword dicts for
    the evaluator named by ``bound_id``. Ties go to the earliest scenario.
    """
    best, witness = -math.inf, None
    for item in family:
        report = item if isinstance(item, BoundReport) else evaluate(bound_id, **item)
        if not report.hypothesis_ok:
            continue
        c = report.implied_c
        if c > best:
            best, witness = c, dict(report.params, implied_c=c)
    if witness is None:
        raise EmptyFamily(f"no scenario of the family satisfies the hypotheses of {bound_id!r}")
    return best, witness
