"""Monte Carlo moments of sum a(n) f(n) and exact multiplicative-energy oracles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .coefficients import CoefficientSpec
from .errors import DomainError
from .sampler import Model, simulate_sums

BRUTEFORCE_CAP = 5000
FAST_CAP = 10**6
MIN_TRIALS = 100


@dataclass(frozen=True)
class MomentEstimate:
    value: float
    stderr: float
    trials: int
    two_q: float
    seed: int


def summarize(values: np.ndarray, two_q: float, seed: int) -> MomentEstimate:
    """Mean and standard error of per-trial values, summed with fsum so the result
    does not depend on how trials were split across workers."""
    n = values.size
    if n < 2:
        raise DomainError("need at least two trials")
    mean = math.fsum(values) / n
    var = math.fsum((values - mean) ** 2) / (n - 1)
    return MomentEstimate(mean, math.sqrt(var / n), n, float(two_q), int(seed))


def abs_moments(sums: np.ndarray, two_qs, seed: int) -> dict[float, MomentEstimate]:
    mod = np.abs(sums)
    return {float(e): summarize(mod**e, e, seed) for e in two_qs}


def estimate_abs_moment(coeffs: CoefficientSpec, two_q: float, trials: int,
                        master_seed: int, workers: int | None = None,
                        model: Model | str = Model.STEINHAUS) -> MomentEstimate:
    """Estimate E|sum a(n) f(n)|^{2q}."""
    if not 0 < two_q <= 4:
        raise DomainError(f"two_q must lie in (0, 4], got {two_q}")
    if trials < MIN_TRIALS:
        raise DomainError(f"need at least {MIN_TRIALS} trials, got {trials}")
    sums = simulate_sums(coeffs, trials, master_seed, workers, model)
    return summarize(np.abs(sums) ** two_q, two_q, master_seed)


def exact_second_moment(coeffs: CoefficientSpec) -> float:
    a = coeffs.materialize()
    return math.fsum(np.abs(a) ** 2)


def energy_bruteforce(coeffs: CoefficientSpec) -> float:
    """E_x(a) = sum_P |c_P|^2 with c_P = sum_{mn = P} a(m) a(n)."""
    a = coeffs.materialize()
    N = a.size - 1
    if N > BRUTEFORCE_CAP:
        raise DomainError(f"brute-force oracle is limited to N <= {BRUTEFORCE_CAP}")
    n = np.arange(1, N + 1, dtype=np.int64)
    v = a[1:]
    # N^2 <= 2.5e7 at the cap, so int64 product keys are exact
    c_re = np.zeros(N * N + 1)
    c_im = np.zeros(N * N + 1)
    rows = max(1, 2_000_000 // N)
    for lo in range(0, N, rows):
        hi = min(N, lo + rows)
        keys = (n[lo:hi, None] * n[None, :]).ravel()
        w = (v[lo:hi, None] * v[None, :]).ravel()
        c_re += np.bincount(keys, weights=w.real, minlength=N * N + 1)
        c_im += np.bincount(keys, weights=w.imag, minlength=N * N + 1)
    return math.fsum(c_re * c_re + c_im * c_im)


def energy_fast(coeffs: CoefficientSpec) -> float:
    """Same quantity via m1 = de, n1 = df, m2 = gf, n2 = ge with gcd(e, f) = 1;
    O(N^2) work, no product-indexed storage."""
    a = np.ascontiguousarray(coeffs.materialize())
    N = a.size - 1
    if N > FAST_CAP:
        raise DomainError(f"energy_fast is limited to N <= {FAST_CAP}")
    rows = np.zeros(N + 1)
    _kernels.energy_pairs(a, rows)
    return math.fsum(rows)


def diagonal_energy(coeffs: CoefficientSpec) -> float:
    """Contribution of quadruples with {m1, m2} = {n1, n2} as multisets."""
    sq = np.abs(coeffs.materialize()) ** 2
    s2 = math.fsum(sq)
    return 2.0 * s2 * s2 - math.fsum(sq * sq)


def offdiag_energy(coeffs: CoefficientSpec) -> float:
    return energy_fast(coeffs) - diagonal_energy(coeffs)


def holder_chain_check(e2, e4, e1) -> bool:
    """Check E|S|^2 <= (E|S|^4)^{1/3} (E|S|)^{2/3}.

    Arguments are floats (checked exactly) or MomentEstimates, in which case the
    right side gets a slack of five combined relative standard errors."""
    vals = []
    rel = []
    for e in (e2, e4, e1):
        v = e.value if isinstance(e, MomentEstimate) else float(e)
        if not v > 0:
            raise DomainError("moment estimates must be positive")
        vals.append(v)
        rel.append(e.stderr / v if isinstance(e, MomentEstimate) else 0.0)
    v2, v4, v1 = vals
    eps = 5.0 * math.sqrt(rel[0] ** 2 + (rel[1] / 3) ** 2 + (2 * rel[2] / 3) ** 2)
    rhs = v4 ** (1 / 3) * v1 ** (2 / 3)
    # exact equality (e.g. S = 1) must survive pow round-off
    return v2 <= rhs * (1 + eps) * (1 + 1e-12)
