import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rmflab import CoefficientSpec, DomainError
from rmflab.moments import (
    MomentEstimate,
    abs_moments,
    diagonal_energy,
    energy_bruteforce,
    energy_fast,
    estimate_abs_moment,
    exact_second_moment,
    holder_chain_check,
    offdiag_energy,
)
from rmflab.sampler import simulate_sums


def quadruple_energy(a):
    """Direct sum over m1 m2 = n1 n2."""
    N = len(a) - 1
    tot = 0j
    r = range(1, N + 1)
    for m1, m2, n1 in itertools.product(r, r, r):
        q, rem = divmod(m1 * m2, n1)
        if rem == 0 and q <= N:
            tot += a[m1] * a[m2] * np.conj(a[n1] * a[q])
    return tot


def random_coeffs(rng, N):
    return CoefficientSpec.dense(rng.normal(size=N) + 1j * rng.normal(size=N))


def test_all_ones_small_values():
    assert [energy_fast(CoefficientSpec.all_ones(N)) for N in (1, 2, 3)] == [1, 6, 15]
    assert offdiag_energy(CoefficientSpec.all_ones(2)) == 0
    assert offdiag_energy(CoefficientSpec.all_ones(3)) == 0


@pytest.mark.parametrize("N", [4, 9, 14])
def test_energy_vs_quadruples(N):
    c = random_coeffs(np.random.default_rng(N), N)
    want = quadruple_energy(c.materialize())
    assert abs(want.imag) < 1e-9
    assert energy_fast(c) == pytest.approx(want.real, rel=1e-12)
    assert energy_bruteforce(c) == pytest.approx(want.real, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 120), st.integers(0, 2**32))
def test_fast_equals_bruteforce(N, seed):
    c = random_coeffs(np.random.default_rng(seed), N)
    assert energy_fast(c) == pytest.approx(energy_bruteforce(c), rel=1e-9)


@pytest.mark.parametrize("K", [1, 2, 5, 10])
def test_geometric_energy_closed_form(K):
    # E|sum_{k<=K} z^k|^4 over the circle = (2K^3 + K)/3
    assert energy_fast(CoefficientSpec.geometric(2, K)) == pytest.approx((2 * K**3 + K) / 3, rel=1e-12)


def test_energy_dominates_diagonal_for_all_ones():
    c = CoefficientSpec.all_ones(200)
    assert offdiag_energy(c) > 0
    assert diagonal_energy(c) == 2 * 200**2 - 200


def test_bruteforce_cap():
    with pytest.raises(DomainError):
        energy_bruteforce(CoefficientSpec.all_ones(5001))


def test_exact_second_moment():
    assert exact_second_moment(CoefficientSpec.rough(100, 10)) == 22
    assert exact_second_moment(CoefficientSpec.additive_char(37, 0.2)) == pytest.approx(37)


def test_mc_moments_small():
    c = CoefficientSpec.all_ones(60)
    est = abs_moments(simulate_sums(c, 4000, 123), [1, 2, 4], 123)
    assert abs(est[2.0].value - 60) < 4 * est[2.0].stderr
    assert abs(est[4.0].value - energy_fast(c)) < 5 * est[4.0].stderr
    assert est[1.0].value <= math.sqrt(60)
    assert holder_chain_check(est[2.0], est[4.0], est[1.0])


def test_estimate_is_worker_independent():
    c = CoefficientSpec.additive_char(300, math.sqrt(2))
    a = estimate_abs_moment(c, 1.0, 200, 5, workers=1)
    b = estimate_abs_moment(c, 1.0, 200, 5, workers=4)
    assert a == b


def test_estimate_domain():
    c = CoefficientSpec.all_ones(10)
    with pytest.raises(DomainError):
        estimate_abs_moment(c, 5, 1000, 0)
    with pytest.raises(DomainError):
        estimate_abs_moment(c, 0, 1000, 0)
    with pytest.raises(DomainError):
        estimate_abs_moment(c, 2, 99, 0)


def test_holder_exact_equality_and_violation():
    assert holder_chain_check(1.0, 1.0, 1.0)
    assert not holder_chain_check(2.0, 1.0, 1.0)
    tight = MomentEstimate(1.04, 0.01, 1000, 2, 0)
    assert holder_chain_check(tight, 1.0, 1.0)
    assert not holder_chain_check(MomentEstimate(1.06, 0.01, 1000, 2, 0), 1.0, 1.0)
    with pytest.raises(DomainError):
        holder_chain_check(0.0, 1.0, 1.0)
