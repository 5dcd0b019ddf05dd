"""Numerical laboratory for random multiplicative functions and random Euler products."""

__version__ = "0.1.0"

from .coefficients import CoefficientSpec
from .errors import BudgetExceeded, DomainError
from .moments import (
    MomentEstimate,
    diagonal_energy,
    energy_bruteforce,
    energy_fast,
    estimate_abs_moment,
    exact_second_moment,
    holder_chain_check,
    offdiag_energy,
)
from .ntcore import (
    RoughSpec,
    build_spf,
    count_rough,
    count_smooth,
    iter_rough,
    legendre_rough_count,
    prime_sum,
    primes_upto,
)
from .sampler import Model, RmfSample, SeedDerivation, derive_seed, f_at, partial_sum, sample, simulate_sums

__all__ = [
    "__version__",
    "BudgetExceeded",
    "CoefficientSpec",
    "DomainError",
    "Model",
    "MomentEstimate",
    "RmfSample",
    "RoughSpec",
    "SeedDerivation",
    "build_spf",
    "count_rough",
    "count_smooth",
    "derive_seed",
    "diagonal_energy",
    "energy_bruteforce",
    "energy_fast",
    "estimate_abs_moment",
    "exact_second_moment",
    "f_at",
    "holder_chain_check",
    "iter_rough",
    "legendre_rough_count",
    "offdiag_energy",
    "partial_sum",
    "prime_sum",
    "primes_upto",
    "sample",
    "simulate_sums",
]
