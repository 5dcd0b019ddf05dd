"""Random Euler products over rough primes, their increments, squared-modulus
integrals over |t| <= 1/2, exact per-prime mean-square formulas, and a
Parseval checker for Dirichlet series."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate

from . import _kernels
from .coefficients import CoefficientSpec
from .errors import DomainError
from .ntcore import primes_between
from .sampler import RmfSample

MIN_GRID = 64


@dataclass(frozen=True)
class EulerParams:
    """F_k^{(R)}(1/2 + sigma + it) over R <= p <= x^{e^{-(k+1)}}, or over
    R <= p <= x when ``k`` is None."""

    R: float
    x: float
    sigma: float = 0.0
    k: int | None = None

    def __post_init__(self):
        if self.R < 2:
            raise DomainError(f"R must be >= 2, got {self.R}")
        if self.x < 2:
            raise DomainError(f"x must be >= 2, got {self.x}")
        if self.sigma <= -1.0 / math.log(self.x):
            raise DomainError("need sigma > -1/log x")
        if self.k is not None and self.k < 0:
            raise DomainError("k must be >= 0")

    @property
    def cap(self) -> float:
        if self.k is None:
            return float(self.x)
        return self.x ** math.exp(-(self.k + 1))


@dataclass(frozen=True)
class ProductGrid:
    t: np.ndarray
    log_values: np.ndarray


def grid_floor(x: float) -> int:
    return max(MIN_GRID, math.ceil(8 * math.log(x)))


def log_euler_sum(s: RmfSample, primes: np.ndarray, sigma: float, t,
                  real_only: bool = False):
    """sum over ``primes`` of -log(1 - f(p) p^{-1/2-sigma-it}), principal branch per
    factor; ``t`` scalar or array."""
    primes = np.asarray(primes)
    scalar = np.ndim(t) == 0
    tt = np.atleast_1d(np.asarray(t, dtype=np.float64))
    out_re = np.zeros(tt.size)
    out_im = np.zeros(tt.size)
    if primes.size:
        # primes form a contiguous block of the sample's prime list
        start = int(np.searchsorted(s.primes, primes[0]))
        ph = s.phases[start : start + primes.size]
        if primes[-1] > s.limit:
            raise DomainError(f"primes up to {primes[-1]} needed, sample covers {s.limit}")
        logp = np.log(primes.astype(np.float64))
        amp = np.exp(-(0.5 + sigma) * logp)
        _kernels.log_euler_grid(logp, amp, np.ascontiguousarray(ph.real),
                                np.ascontiguousarray(ph.imag), tt, real_only,
                                out_re, out_im)
    res = out_re if real_only else out_re + 1j * out_im
    return res[0] if scalar else res


def increment_primes(x: float, ell: int) -> np.ndarray:
    """Primes in (x^{e^{-(ell+2)}}, x^{e^{-(ell+1)}}]."""
    lo = x ** math.exp(-(ell + 2))
    hi = x ** math.exp(-(ell + 1))
    return primes_between(lo, hi)


def log_increment(s: RmfSample, ell: int, sigma: float, t, x: float | None = None):
    """log I_ell(1/2 + sigma + it); ``x`` defaults to the sample limit."""
    x = s.limit if x is None else x
    if ell < 0:
        raise DomainError("ell must be >= 0")
    return log_euler_sum(s, increment_primes(x, ell), sigma, t)


def product_primes(params: EulerParams) -> np.ndarray:
    return primes_between(params.R, params.cap, closed_low=True) if params.cap >= params.R \
        else np.zeros(0, dtype=np.int64)


def log_product_F(s: RmfSample, params: EulerParams, t):
    return log_euler_sum(s, product_primes(params), params.sigma, t)


def product_grid(s: RmfSample, params: EulerParams, M: int | None = None) -> ProductGrid:
    M = grid_floor(params.x) if M is None else int(M)
    if M < MIN_GRID:
        raise DomainError(f"grid needs at least {MIN_GRID} points")
    t = np.linspace(-0.5, 0.5, M)
    return ProductGrid(t, log_product_F(s, params, t))


def trapezoid_exp(log_integrand: np.ndarray, t: np.ndarray, mask: np.ndarray | None = None) -> float:
    """Trapezoid rule for exp(log_integrand) on a uniform grid, optionally
    multiplied by an indicator ``mask``."""
    h = t[1] - t[0]
    top = float(np.max(log_integrand))
    w = np.exp(log_integrand - top)
    if mask is not None:
        w = np.where(mask, w, 0.0)
    w[0] *= 0.5
    w[-1] *= 0.5
    return h * math.fsum(w) * math.exp(top)


def integral_sq(s: RmfSample, params: EulerParams, M: int | None = None) -> float:
    """Trapezoid approximation of the integral of |F|^2 over [-1/2, 1/2]."""
    floor = grid_floor(params.x)
    M = floor if M is None else int(M)
    if M < floor:
        raise DomainError(f"grid of {M} points under-resolves F; need >= {floor}")
    t = np.linspace(-0.5, 0.5, M)
    re = log_euler_sum(s, product_primes(params), params.sigma, t, real_only=True)
    return trapezoid_exp(2.0 * re, t)


def _check_sigma(sigma: float):
    if sigma <= -0.5:
        raise DomainError("need sigma > -1/2")


def mean_sq_closed_form(a: float, b: float, sigma: float) -> tuple[float, float]:
    """(exact, approx) for E prod_{a<p<=b} |1 - f(p) p^{-1/2-sigma}|^{-2}.

    exact = prod (1 - p^{-1-2 sigma})^{-1}; approx = exp(sum p^{-1-2 sigma})."""
    _check_sigma(sigma)
    ps = primes_between(a, b).astype(np.float64)
    rho = np.exp(-(1 + 2 * sigma) * np.log(ps))
    return math.exp(-math.fsum(np.log1p(-rho))), math.exp(math.fsum(rho))


def two_point_factor(p, sigma: float, t: float, rtol: float = 1e-14) -> np.ndarray:
    """Per-prime E[|1 - f r|^{-2} |1 - f r p^{-it}|^{-2}] = sum_s r^{2s} |sum_{l<=s} p^{-itl}|^2,
    r = p^{-1/2-sigma}, summed until terms fall below ``rtol`` of the partial sum."""
    p = np.atleast_1d(np.asarray(p, dtype=np.float64))
    rho = np.exp(-(1 + 2 * sigma) * np.log(p))
    w = np.exp(-1j * t * np.log(p))
    geo = np.ones_like(w)
    wpow = np.ones_like(w)
    rpow = np.ones_like(rho)
    total = np.ones_like(rho)
    active = np.ones(p.size, dtype=bool)
    for _ in range(100_000):
        wpow = wpow * w
        geo = geo + wpow
        rpow = rpow * rho
        term = rpow * np.abs(geo) ** 2
        total = np.where(active, total + term, total)
        # |geo|^2 can dip to 0 at isolated s, so stop on the envelope (s+1)^2 rho^s
        active &= rpow * (np.abs(geo) + 1) ** 2 >= rtol * total
        if not active.any():
            break
    return total


def two_point_closed_form(a: float, b: float, sigma: float, t: float) -> tuple[float, float]:
    """(exact, approx) for E prod_{a<p<=b} |1-f(p)p^{-1/2-sigma}|^{-2} |1-f(p)p^{-1/2-sigma-it}|^{-2};
    approx = exp(sum (2 + 2 cos(t log p)) p^{-1-2 sigma})."""
    _check_sigma(sigma)
    ps = primes_between(a, b).astype(np.float64)
    if ps.size == 0:
        return 1.0, 1.0
    exact = math.exp(math.fsum(np.log(two_point_factor(ps, sigma, t))))
    rho = np.exp(-(1 + 2 * sigma) * np.log(ps))
    approx = math.exp(math.fsum((2 + 2 * np.cos(t * np.log(ps))) * rho))
    return exact, approx


def parseval_lhs(coeffs: CoefficientSpec, sigma: float) -> float:
    """Integral over x > 0 of |sum_{n<=x} a_n|^2 x^{-1-2 sigma}, exact for the step function."""
    a = coeffs.materialize()
    N = a.size - 1
    S2 = np.abs(np.cumsum(a[1:])) ** 2
    k = np.arange(1, N + 1, dtype=np.float64)
    upper = np.append(k[1:], np.inf)
    w = (k ** (-2 * sigma) - np.where(np.isinf(upper), 0.0, upper ** (-2 * sigma))) / (2 * sigma)
    return math.fsum(S2 * w)


def parseval_rhs(coeffs: CoefficientSpec, sigma: float, T0: float = 60.0) -> float:
    """(1/2 pi) integral of |A(sigma+it)/(sigma+it)|^2 dt by adaptive quadrature.

    |t| <= T0 is integrated directly; the two tails are folded into cosine
    integrals (one per distinct ratio m/n) and done by QUADPACK's Fourier routine."""
    a = coeffs.materialize()
    n = np.flatnonzero(a)
    n = n[n >= 1]
    b = a[n] * n.astype(np.float64) ** (-sigma)
    logn = np.log(n.astype(np.float64))

    def integrand(t):
        A = np.sum(b * np.exp(-1j * t * logn))
        return (A.real**2 + A.imag**2) / (sigma * sigma + t * t)

    pieces = []
    edges = np.linspace(-T0, T0, int(2 * T0) + 1)
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(integrand, lo, hi, epsabs=0, epsrel=1e-12, limit=200)
        pieces.append(val)

    def lorentz(t):
        return 1.0 / (sigma * sigma + t * t)

    dc = math.fsum(np.abs(b) ** 2)
    val, _ = integrate.quad(lorentz, T0, np.inf, epsabs=0, epsrel=1e-12)
    pieces.append(2 * dc * val)
    # pairs m < n: 2 Re(b_m conj b_n) cos(t log(n/m)), both tails, grouped by n/m
    by_ratio: dict[Fraction, float] = {}
    for i in range(n.size):
        for j in range(i + 1, n.size):
            key = Fraction(int(n[j]), int(n[i]))
            c = (b[i] * np.conj(b[j])).real
            by_ratio[key] = by_ratio.get(key, 0.0) + c
    for key, c in by_ratio.items():
        if c == 0.0:
            continue
        omega = math.log(key.numerator) - math.log(key.denominator)
        val, _ = integrate.quad(lorentz, T0, np.inf, weight="cos", wvar=omega,
                                limlst=200)
        pieces.append(2 * 2 * c * val)
    return math.fsum(pieces) / (2 * math.pi)


def parseval_both_sides(coeffs: CoefficientSpec, sigma: float) -> tuple[float, float]:
    if sigma <= 0:
        raise DomainError("need sigma > 0")
    if coeffs.N > 1000:
        raise DomainError("Parseval checker is limited to N <= 1000")
    return parseval_lhs(coeffs, sigma), parseval_rhs(coeffs, sigma)
