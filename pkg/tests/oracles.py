"""Brute-force reference computations, deliberately independent of concbound internals."""

import itertools
import math
from fractions import Fraction


def key(x):
    return round(x, 9) + 0.0


def brute_convolve(a, b):
    """Atoms lists ``[(x, m)]`` -> dict position -> mass, by explicit double loop."""
    out = {}
    for x, m in a:
        for y, w in b:
            k = key(x + y)
            out[k] = out.get(k, 0.0) + m * w
    return out


def brute_power(atoms, n):
    acc = {0.0: 1.0}
    for _ in range(n):
        acc = brute_convolve(list(acc.items()), atoms)
    return acc


def enumerate_power(atoms, n):
    """Distribution of the sum of n iid draws by listing every outcome tuple."""
    out = {}
    for combo in itertools.product(atoms, repeat=n):
        x = key(sum(c[0] for c in combo))
        m = math.prod(c[1] for c in combo)
        out[x] = out.get(x, 0.0) + m
    return out


def brute_q(dist, b):
    """Naive O(N^2) scan: every atom as a left endpoint, closed window."""
    items = sorted(dist.items()) if isinstance(dist, dict) else sorted(dist)
    best = 0.0
    for x, _ in items:
        s = sum(m for y, m in items if x - 1e-9 <= y <= x + b + 1e-9)
        best = max(best, s)
    return best


def exact_binomial(n, p):
    p = Fraction(p).limit_denominator(10**6)
    return [float(math.comb(n, k) * p**k * (1 - p) ** (n - k)) for k in range(n + 1)]


def central_binomial(n):
    """max_k C(n, k) / 2^n."""
    return float(Fraction(math.comb(n, n // 2), 2**n))


def tv(a, b):
    keys = set(a) | set(b)
    return sum(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in keys)


def as_dict(measure):
    d = measure.to_discrete()
    return {key(x): m for x, m in d.atoms}
