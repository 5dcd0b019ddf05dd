import cmath
import math

import numpy as np
import pytest
from scipy import integrate

from rmflab import CoefficientSpec, DomainError
from rmflab.euler import (
    EulerParams,
    grid_floor,
    integral_sq,
    log_euler_sum,
    log_increment,
    increment_primes,
    mean_sq_closed_form,
    parseval_both_sides,
    product_grid,
    product_primes,
    trapezoid_exp,
    two_point_closed_form,
    two_point_factor,
)
from rmflab.ntcore import primes_upto
from rmflab.sampler import sample


def two_point_oracle(p, sigma, t):
    """sum_s rho^s |1 - w^{s+1}|^2 / |1 - w|^2 in closed form."""
    rho = p ** (-1 - 2 * sigma)
    w = cmath.exp(-1j * t * math.log(p))
    if abs(1 - w) < 1e-12:
        return (1 + rho) / (1 - rho) ** 3
    return (2 / (1 - rho) - 2 * (w / (1 - rho * w)).real) / abs(1 - w) ** 2


@pytest.mark.parametrize("p", [2, 5, 401, 997])
@pytest.mark.parametrize("sigma", [0.0, 0.05, 0.3])
@pytest.mark.parametrize("t", [0.0, 0.3, 1.0, 7.5])
def test_two_point_vs_closed_form(p, sigma, t):
    got = two_point_factor(p, sigma, t)[0]
    assert got == pytest.approx(two_point_oracle(p, sigma, t), rel=1e-13)


def test_two_point_at_zero_frozen():
    # 1 + 4/5 + 9/25 + ... = (1 + 1/5)/(1 - 1/5)^3
    assert two_point_factor(5, 0.0, 0.0)[0] == pytest.approx(2.34375, rel=1e-15)


def test_two_point_by_circle_quadrature():
    p, sigma, t = 7, 0.1, 0.8
    r = p ** (-0.5 - sigma)
    w = cmath.exp(-1j * t * math.log(p))

    def g(th):
        z = cmath.exp(2j * math.pi * th) * r
        return 1 / abs(1 - z) ** 2 / abs(1 - z * w) ** 2

    val, _ = integrate.quad(g, 0, 1, epsabs=1e-13, epsrel=1e-13)
    assert two_point_factor(p, sigma, t)[0] == pytest.approx(val, rel=1e-11)


def test_mean_sq_closed_form():
    exact, approx = mean_sq_closed_form(10, 100, 0.0)
    ps = [p for p in primes_upto(100) if p > 10]
    assert exact == pytest.approx(math.prod(1 / (1 - 1 / p) for p in ps), rel=1e-13)
    assert approx == pytest.approx(math.exp(sum(1 / p for p in ps)), rel=1e-13)
    assert exact > approx


def test_two_point_closed_form_approx():
    exact, approx = two_point_closed_form(100, 2000, 0.0, 2.0)
    assert abs(math.log(exact) - math.log(approx)) < 0.05
    assert two_point_closed_form(10, 10, 0.0, 1.0) == (1.0, 1.0)


def test_log_euler_sum_vs_direct_product():
    s = sample(500, seed=4)
    ps = [int(p) for p in primes_upto(500) if p >= 11]
    t, sigma = 0.37, 0.02
    prod = 1.0 + 0j
    for p in ps:
        prod /= 1 - s.phase_of(p) * p ** (-0.5 - sigma - 1j * t)
    got = log_euler_sum(s, np.array(ps), sigma, t)
    assert got.real == pytest.approx(math.log(abs(prod)), rel=1e-12)
    assert cmath.exp(got) == pytest.approx(prod, rel=1e-11)


def test_log_euler_sum_guards_sample_range():
    s = sample(100, seed=0)
    with pytest.raises(DomainError):
        log_euler_sum(s, primes_upto(200), 0.0, 0.0)


def test_increment_primes_partition():
    x = 1e8
    got = np.concatenate([increment_primes(x, ell) for ell in range(3, -1, -1)])
    lo, hi = x ** math.exp(-5), x ** math.exp(-1)
    want = primes_upto(hi)
    assert np.array_equal(got, want[want > lo])


def test_log_increment_defaults_to_sample_limit():
    s = sample(10**4, seed=2)
    a = log_increment(s, 0, 0.0, 0.5)
    b = log_euler_sum(s, increment_primes(10**4, 0), 0.0, 0.5)
    assert a == b
    with pytest.raises(DomainError):
        log_increment(s, -1, 0.0, 0.0)


def test_params_and_grid():
    p = EulerParams(R=11, x=1e4, sigma=0.0, k=0)
    assert p.cap == pytest.approx(1e4 ** math.exp(-1))
    assert product_primes(p)[0] == 11
    assert grid_floor(1e4) == 74
    assert grid_floor(10) == 64
    with pytest.raises(DomainError):
        EulerParams(R=1, x=100)
    with pytest.raises(DomainError):
        EulerParams(R=11, x=100, sigma=-0.5)
    with pytest.raises(DomainError):
        integral_sq(sample(100, seed=0), EulerParams(11, 1e4), M=10)


def test_trapezoid_exp_exact_on_constants():
    t = np.linspace(-0.5, 0.5, 101)
    assert trapezoid_exp(np.full(101, math.log(3.0)), t) == pytest.approx(3.0, rel=1e-14)
    mask = t >= 0
    assert trapezoid_exp(np.zeros(101), t, mask) == pytest.approx(0.5 + 0.005, rel=1e-12)


def test_integral_grid_doubling_stable():
    s = sample(10**4, seed=8)
    p = EulerParams(R=11, x=1e4, sigma=0.0)
    a = integral_sq(s, p)
    b = integral_sq(s, p, M=2 * grid_floor(1e4))
    assert a == pytest.approx(b, rel=1e-2)
    g = product_grid(s, p)
    assert g.t.size == grid_floor(1e4)


def test_parseval_single_term():
    lhs, rhs = parseval_both_sides(CoefficientSpec.dense([1.0]), 0.5)
    assert lhs == pytest.approx(1.0, abs=1e-12)
    assert rhs == pytest.approx(1.0, abs=1e-10)


def test_parseval_random_vector():
    rng = np.random.default_rng(3)
    c = CoefficientSpec.dense(rng.normal(size=12) + 1j * rng.normal(size=12))
    lhs, rhs = parseval_both_sides(c, 0.25)
    assert abs(lhs - rhs) / lhs < 1e-8


def test_parseval_domain():
    with pytest.raises(DomainError):
        parseval_both_sides(CoefficientSpec.dense([1.0]), 0.0)
    with pytest.raises(DomainError):
        parseval_both_sides(CoefficientSpec.all_ones(1001), 0.5)
