"""Exact concentration functions of n-fold convolutions and evaluators for their bounds."""

from .bounds import (
    BOUND_IDS,
    BoundReport,
    cf_bound_1_15,
    cf_bound_1_16,
    cor1_rhs,
    cor2_rhs,
    esseen_rhs_1_11,
    estimate_constant,
    evaluate,
    holder_lhs_2_9,
    lemma1_rhs,
    mult_rhs_1_7,
    sharpened_rhs_1_13,
    th1_general_rhs,
    th1_simple_rhs,
)
from .concentration import QResult, q_exact, q_monte_carlo, q_regularity_gap
from .convolution import (
    BinomialWeights,
    binomial_pmf,
    conv_power,
    convolve,
    mixture_expand,
    power,
)
from .families import (
    counterexample,
    fair_coin,
    lattice_gap,
    trivial_mixture,
    two_point,
    uniform_lattice,
    zero_mean_three_point,
)
from .measures import (
    DiscreteDist,
    ErrorBudget,
    LatticeDist,
    MixtureSpec,
    MomentSummary,
    beta_B,
    charfn_modulus,
    d_functional,
    kappa,
    moments,
    reflect,
    symmetrize,
    to_lattice,
    total_variation,
)

__version__ = "0.1.0"
