"""Convolution, powers, binomial weights and the mixture expansion."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from concbound.convolution import (
    binomial_pmf,
    common_lattice,
    conv_power,
    convolve,
    mixture_expand,
    power,
    product,
)
from concbound.errors import BudgetExceeded, SupportExplosion
from concbound.measures import (
    DiscreteDist,
    ErrorBudget,
    LatticeDist,
    MixtureSpec,
    mixture_sum,
    to_lattice,
    total_variation,
)

import oracles
from conftest import centered_dists, discrete_dists

TOL = 1e-12


def dict_tv(measure, ref):
    return oracles.tv(oracles.as_dict(measure), ref)


class TestConvolve:
    @given(st.floats(-100, 100), st.floats(-100, 100))
    def test_point_masses(self, a, b):
        out = convolve(DiscreteDist.point(a), DiscreteDist.point(b))
        assert len(out) == 1 and out.positions[0] == pytest.approx(a + b)

    def test_two_bernoullis(self, bernoulli):
        out = convolve(bernoulli, bernoulli)
        assert out.atoms == [(0.0, 0.25), (1.0, 0.5), (2.0, 0.25)]

    @given(discrete_dists(), discrete_dists())
    def test_matches_brute_force(self, F, G):
        ref = oracles.brute_convolve(F.atoms, G.atoms)
        assert dict_tv(convolve(F, G), ref) <= 1e-12

    @given(discrete_dists(), discrete_dists())
    def test_mass_conservation(self, F, G):
        assert convolve(F, G).total_mass == pytest.approx(F.total_mass * G.total_mass, abs=TOL)

    @given(discrete_dists(), discrete_dists())
    def test_commutative(self, F, G):
        assert total_variation(convolve(F, G), convolve(G, F)) <= TOL

    @settings(max_examples=50)
    @given(discrete_dists(), discrete_dists(), discrete_dists())
    def test_associative(self, F, G, H):
        left = convolve(convolve(F, G), H)
        right = convolve(F, convolve(G, H))
        assert total_variation(left, right) <= TOL

    def test_budgets_add(self, coin):
        F = DiscreteDist(coin.positions, coin.masses, ErrorBudget(1e-9, 0.0))
        G = DiscreteDist(coin.positions, coin.masses, ErrorBudget(0.0, 2e-9))
        assert convolve(F, G).budget.total == pytest.approx(3e-9)

    def test_support_explosion(self):
        F = DiscreteDist(np.sqrt(np.arange(1, 101)), np.full(100, 0.01))
        with pytest.raises(SupportExplosion):
            convolve(F, F, max_pairs=5000)

    def test_lattice_path_matches_dense(self, bernoulli):
        L = to_lattice(bernoulli, 1.0)
        dense = convolve(bernoulli, bernoulli)
        lat = convolve(L, L)
        assert isinstance(lat, LatticeDist)
        assert total_variation(dense, lat) <= TOL


class TestPower:
    def test_zero_is_identity(self, coin):
        assert conv_power(coin, 0).atoms == [(0.0, 1.0)]

    def test_one_is_unchanged(self, coin):
        assert conv_power(coin, 1) is coin

    @given(discrete_dists(max_atoms=4))
    def test_square_matches_convolve(self, F):
        a, b = conv_power(F, 2), convolve(F, F)
        np.testing.assert_allclose(a.positions, b.positions, atol=1e-12)
        np.testing.assert_allclose(a.masses, b.masses, atol=1e-12)

    @settings(max_examples=30)
    @given(discrete_dists(max_atoms=3, lattice=True), st.integers(2, 6))
    def test_matches_outcome_enumeration(self, F, n):
        ref = oracles.enumerate_power(F.atoms, n)
        assert dict_tv(conv_power(F, n), ref) <= 1e-12

    @settings(max_examples=30)
    @given(discrete_dists(max_atoms=3), st.integers(1, 6), st.integers(1, 6))
    def test_exponents_add(self, F, a, b):
        lhs = conv_power(F, a + b)
        rhs = convolve(conv_power(F, a), conv_power(F, b))
        assert total_variation(lhs, rhs) <= 1e-12 + lhs.budget.total + rhs.budget.total

    def test_fft_and_direct_agree(self, bernoulli):
        L = to_lattice(bernoulli, 1.0)
        fft = conv_power(L, 8, method="fft")
        direct = conv_power(L, 8, method="direct")
        ref = oracles.brute_power(bernoulli.atoms, 8)
        assert total_variation(fft, direct) <= 1e-10
        assert dict_tv(direct, ref) <= 1e-12
        expected = [math.comb(8, k) / 256 for k in range(9)]
        np.testing.assert_allclose(fft.weights, expected, atol=1e-12)

    def test_fft_residual_charged(self):
        rng = np.random.default_rng(5)
        w = rng.random(2000)
        L = LatticeDist(0.0, 1.0, w / w.sum())
        out = conv_power(L, 4, method="fft")
        assert 0.0 <= out.budget.fft_residual < 1e-10
        assert out.budget.pruned_mass == 0.0

    def test_pruning_is_charged(self, coin):
        L = to_lattice(coin, 2.0)
        out = conv_power(L, 200, prune_eps=1e-12)
        assert out.budget.pruned_mass > 0
        assert abs(out.weights.sum() - 1.0) <= out.budget.total + 1e-12

    def test_budget_abort(self, coin):
        L = to_lattice(coin, 2.0)
        with pytest.raises(BudgetExceeded):
            conv_power(L, 400, prune_eps=0.2)

    def test_point_mass_power(self):
        assert conv_power(DiscreteDist.point(1.5), 10).atoms == [(15.0, 1.0)]

    def test_power_promotes_to_lattice(self, coin):
        assert isinstance(power(coin, 10), LatticeDist)

    def test_negative_exponent(self, coin):
        with pytest.raises(ValueError):
            conv_power(coin, -1)


class TestCommonLattice:
    def test_shared_grid(self):
        a = DiscreteDist.from_atoms([(0, 0.5), (1, 0.5)])
        b = DiscreteDist.from_atoms([(0, 0.5), (1.5, 0.5)])
        out = common_lattice(a, b)
        assert out is not None and out[0].step == pytest.approx(0.5)

    def test_incommensurate(self):
        a = DiscreteDist.from_atoms([(0, 0.5), (1, 0.5)])
        b = DiscreteDist.from_atoms([(0, 0.5), (math.sqrt(2), 0.5)])
        assert common_lattice(a, b) is None

    def test_product_drops_unit_factor(self, coin, delta0):
        assert product(delta0, coin) is coin


class TestBinomial:
    def test_half(self):
        assert binomial_pmf(2, 0.5).pmf.tolist() == [0.25, 0.5, 0.25]

    def test_degenerate(self):
        assert binomial_pmf(5, 0.0).pmf.tolist() == [1.0, 0, 0, 0, 0, 0]

    def test_large_n_normalized(self):
        w = binomial_pmf(1000, 0.3).pmf
        assert abs(w.sum() - 1.0) <= 1e-12 and (w >= 0).all()

    @pytest.mark.parametrize("n, p", [(1, 0.4), (7, 0.01), (30, 0.5), (200, 0.93)])
    def test_matches_exact(self, n, p):
        np.testing.assert_allclose(binomial_pmf(n, p).pmf, oracles.exact_binomial(n, p),
                                   rtol=1e-11, atol=1e-300)

    def test_below(self):
        w = binomial_pmf(4, 0.5)
        assert w.below(0) == 0.0 and w.below(2) == pytest.approx(5 / 16)

    @pytest.mark.parametrize("p", [1.0, -0.1])
    def test_bad_p(self, p):
        with pytest.raises(ValueError):
            binomial_pmf(3, p)


class TestMixtureExpand:
    def test_single_step_is_the_mixture(self, coin):
        V = DiscreteDist.from_atoms([(0, 0.5), (3, 0.5)])
        comps = mixture_expand(MixtureSpec(0.3, coin, V), DiscreteDist.point(0.0), 1)
        assert [w for w, _ in comps] == pytest.approx([0.7, 0.3])
        assert total_variation(comps[0][1], coin) == 0
        assert total_variation(comps[1][1], V) == 0

    def test_two_step_weights(self, coin):
        comps = mixture_expand(MixtureSpec(0.3, coin, coin), DiscreteDist.point(0.0), 2)
        assert [w for w, _ in comps] == pytest.approx([0.49, 0.42, 0.09], abs=TOL)

    @settings(max_examples=25, deadline=None)
    @given(centered_dists(max_atoms=3), discrete_dists(max_atoms=3), discrete_dists(max_atoms=3),
           st.integers(1, 8))
    def test_components_sum_to_power(self, U, V, H, n):
        spec = MixtureSpec(0.3, U, V)
        comps = mixture_expand(spec, H, n)
        total = mixture_sum([w for w, _ in comps], [c for _, c in comps])
        ref = convolve(H, conv_power(spec.mixed(), n))
        assert total_variation(total, ref) <= 1e-9
