"""Barrier events on partial Euler products, Gaussian ballot walks, and the
tilted (importance-weighted) measure."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError
from .euler import increment_primes, log_euler_sum
from .ntcore import primes_upto
from .sampler import Model, RmfSample, SeedDerivation, sample

DEFAULT_B = 2
_GRID_TOL = 1e-9


def _zero(j: int) -> float:
    return 0.0


@dataclass(frozen=True)
class WalkConfig:
    """Gaussian walk G_1..G_n with the given variances and barrier a + h(j)."""

    n: int
    variances: np.ndarray
    a: float
    h: Callable[[int], float] = field(default=_zero)

    def __post_init__(self):
        v = np.asarray(self.variances, dtype=np.float64)
        if v.ndim == 0:
            v = np.full(self.n, float(v))
        object.__setattr__(self, "variances", v)
        if self.n < 1:
            raise DomainError("n must be >= 1")
        if v.shape != (self.n,):
            raise DomainError(f"need {self.n} variances, got {v.shape}")
        if np.any(v < 1 / 20) or np.any(v > 20):
            raise DomainError("variances must lie in [1/20, 20]")
        if self.a < 1:
            raise DomainError("a must be >= 1")
        for j in range(1, self.n + 1):
            if abs(self.h(j)) > 10 * math.log(j) + 1e-12:
                raise DomainError(f"|h({j})| exceeds 10 log {j}")


@dataclass(frozen=True)
class ProbEstimate:
    p: float
    stderr: float
    n: int


def _binomial(hits: int, n: int) -> ProbEstimate:
    p = hits / n
    return ProbEstimate(p, math.sqrt(p * (1 - p) / n), n)


def ballot_survival(config: WalkConfig, walks: int, seed: int,
                    chunk: int = 8192) -> np.ndarray:
    """Number of walks with sum_{m<=j} G_m <= a + h(j) for all j <= n', for every n' = 1..n.

    Steps are drawn step-major per chunk, so the walk prefixes are the same for
    every n and the counts are exactly nested."""
    if walks < 1000:
        raise DomainError("need at least 1000 walks")
    sd = np.sqrt(config.variances)[:, None]
    barrier = config.a + np.array([config.h(j) for j in range(1, config.n + 1)])[:, None]
    alive_counts = np.zeros(config.n, dtype=np.int64)
    seeds = SeedDerivation(seed)
    for c, lo in enumerate(range(0, walks, chunk)):
        m = min(chunk, walks - lo)
        rng = np.random.Generator(np.random.Philox(seeds.seed(c)))
        paths = np.cumsum(sd * rng.standard_normal((config.n, m)), axis=0)
        alive = np.logical_and.accumulate(paths <= barrier, axis=0)
        alive_counts += alive.sum(axis=1)
    return alive_counts


def ballot_mc(config: WalkConfig, walks: int, seed: int) -> ProbEstimate:
    return _binomial(int(ballot_survival(config, walks, seed)[-1]), walks)


def mesh(x: float, j: int) -> float:
    """((log x)/e^{j+1}) log((log x)/e^{j+1}): reciprocal spacing at level j."""
    L = math.log(x) / math.exp(j + 1)
    if L <= 1:
        raise DomainError(f"x = {x} too small for discretisation level {j}")
    m = L * math.log(L)
    if m <= 1:
        raise DomainError(f"x = {x} too small for discretisation level {j}")
    return m


def _floor_to_mesh(u: float, m: float) -> float:
    v = u * m
    k = round(v)
    if abs(v - k) > _GRID_TOL:
        k = math.floor(v)
    return k / m


def discretize_levels(t: float, j: int, x: float) -> list[float]:
    """[t(0), ..., t(j)] with t(-1) = t and t(i) the largest point of level i's mesh <= t(i-1)."""
    out = []
    u = t
    for i in range(j + 1):
        u = _floor_to_mesh(u, mesh(x, i))
        out.append(u)
    return out


def discretize_t(t: float, j: int, x: float) -> float:
    if j < 0:
        raise DomainError("j must be >= 0")
    return discretize_levels(t, j, x)[-1]


def t_grid(x: float, j: int) -> np.ndarray:
    """T(x, j) = {n / mesh : |n| <= mesh}."""
    m = mesh(x, j)
    top = math.floor(m)
    return np.arange(-top, top + 1) / m


def _loglog(v: float) -> float:
    return math.log(math.log(v))


@dataclass(frozen=True)
class BarrierSpecG:
    x: float
    R: float
    k: int = 0
    B: int = DEFAULT_B
    Cx: float | None = None

    def __post_init__(self):
        if self.x <= math.exp(math.e) or self.R < 2:
            raise DomainError("need x > e^e and R >= 2")
        if not 0 <= self.k <= math.floor(math.log(_loglog(self.x))):
            raise DomainError("need 0 <= k <= floor(log log log x)")
        if self.Cx is None:
            object.__setattr__(self, "Cx", _loglog(self.R) + 100 * math.log(_loglog(self.x)))

    @property
    def top(self) -> int:
        """Largest increment index in the products."""
        return math.floor(_loglog(self.x) - _loglog(self.R)) - self.B - 2

    @property
    def levels(self) -> range:
        return range(self.k, self.top + 1)

    def log_barrier(self, j: int) -> float:
        return _loglog(self.x) - (j + 1) - _loglog(self.R) + self.Cx


@dataclass(frozen=True)
class BarrierSpecL:
    x: float
    R: float
    V: float
    B: int = DEFAULT_B
    Dx: float | None = None

    def __post_init__(self):
        gap = _loglog(self.x) - _loglog(self.R) if self.R > math.e else None
        if gap is None or gap <= 0:
            raise DomainError("need e < R and log log R < log log x")
        if self.V < 1:
            raise DomainError("V must be >= 1")
        if self.Dx is None:
            object.__setattr__(self, "Dx", self.c * math.sqrt(gap))

    @property
    def c(self) -> float:
        gap = _loglog(self.x) - _loglog(self.R)
        return 0.25 * min(_loglog(self.R) / math.sqrt(gap), 1.0)

    @property
    def sigma(self) -> float:
        return 4 * self.V / math.log(self.x)

    @property
    def top(self) -> int:
        return math.floor(_loglog(self.x) - _loglog(self.R)) - self.B - 2

    @property
    def levels(self) -> range:
        return range(math.floor(math.log(self.V)) + 3, self.top + 1)

    def log_barrier(self, j: int) -> float:
        return _loglog(self.x) - (j + 1) - _loglog(self.R) + self.Dx


def _sample_limit(x: float) -> int:
    return max(2, math.floor(x ** math.exp(-1)))


def _check_limit(s: RmfSample, x: float):
    if s.limit < _sample_limit(x):
        raise DomainError(f"sample covers primes <= {s.limit}, need {_sample_limit(x)}")


def _suffix_ok(logs: np.ndarray, levels: range, upper, lower) -> np.ndarray:
    """logs[i, m] = log|I_{levels[i]}| at the m-th t. True where every suffix sum
    P_j = sum_{l >= j} lies in [lower(j), upper(j)]."""
    ok = np.ones(logs.shape[1], dtype=bool)
    suffix = np.zeros(logs.shape[1])
    for i in range(len(levels) - 1, -1, -1):
        j = levels[i]
        suffix = suffix + logs[i]
        ok &= (suffix <= upper(j)) & (suffix >= lower(j))
    return ok


def event_G_many(s: RmfSample, spec: BarrierSpecG, ts) -> np.ndarray:
    ts = np.atleast_1d(np.asarray(ts, dtype=np.float64))
    levels = spec.levels
    if len(levels) == 0 or math.isinf(spec.Cx):
        return np.ones(ts.size, dtype=bool)
    _check_limit(s, spec.x)
    sigma = -spec.k / math.log(spec.x)
    disc = np.array([discretize_levels(t, spec.top, spec.x) for t in ts])
    logs = np.empty((len(levels), ts.size))
    for i, ell in enumerate(levels):
        uniq, inv = np.unique(disc[:, ell], return_inverse=True)
        vals = log_euler_sum(s, increment_primes(spec.x, ell), sigma, uniq, real_only=True)
        logs[i] = vals[inv]
    return _suffix_ok(logs, levels, spec.log_barrier, lambda j: -spec.log_barrier(j))


def event_G(s: RmfSample, spec: BarrierSpecG, t: float) -> bool:
    """All levels k <= j <= top keep prod_{l=j}^{top} |I_l(1/2 - k/log x + i t(l))|
    within a factor e^{Cx} log x/(e^{j+1} log R) of 1 (in both directions)."""
    return bool(event_G_many(s, spec, [t])[0])


def event_L_many(s: RmfSample, spec: BarrierSpecL, ts) -> np.ndarray:
    ts = np.atleast_1d(np.asarray(ts, dtype=np.float64))
    levels = spec.levels
    if len(levels) == 0 or math.isinf(spec.Dx):
        return np.ones(ts.size, dtype=bool)
    _check_limit(s, spec.x)
    logs = np.array([
        log_euler_sum(s, increment_primes(spec.x, ell), spec.sigma, ts, real_only=True)
        for ell in levels
    ])
    return _suffix_ok(logs, levels, spec.log_barrier, lambda j: -spec.B * spec.log_barrier(j))


def event_L(s: RmfSample, spec: BarrierSpecL, t: float) -> bool:
    """L(t) at s = 1/2 + 4V/log x + it: every suffix product lies between
    (e^{Dx} log x/(e^{j+1} log R))^{-B} and e^{Dx} log x/(e^{j+1} log R)."""
    return bool(event_L_many(s, spec, [t])[0])


@dataclass(frozen=True)
class TiltedEstimate:
    value: float
    ess: float
    samples: int
    low_ess: bool


def tilt_log_weight(s: RmfSample, sigma: float, x: float) -> float:
    """log prod_{p <= x^{1/e}} |1 - f(p) p^{-1/2-sigma}|^{-2}."""
    ps = primes_upto(x ** math.exp(-1))
    return 2.0 * float(log_euler_sum(s, ps, sigma, 0.0, real_only=True))


def tilted_expectation(payoff: Callable[[RmfSample], float], sigma: float, x: float,
                       samples: int, seed: int, limit: int | None = None,
                       model: Model | str = Model.STEINHAUS) -> TiltedEstimate:
    """Self-normalised importance-sampling estimate of the tilted mean of ``payoff``.

    Sample i is drawn with seed derive_seed(seed, i) over primes <= ``limit``
    (default x^{1/e}). Fewer than 10 effective samples (sum w / max w) sets ``low_ess``."""
    if samples < 500:
        raise DomainError("need at least 500 samples")
    if abs(sigma) > 0.01:
        raise DomainError("tilted measure is used with |sigma| <= 1/100")
    limit = _sample_limit(x) if limit is None else int(limit)
    seeds = SeedDerivation(seed)
    logw = np.empty(samples)
    vals = np.empty(samples)
    for i in range(samples):
        s = sample(limit, model, seeds.seed(i))
        logw[i] = tilt_log_weight(s, sigma, x)
        vals[i] = payoff(s)
    w = np.exp(logw - logw.max())
    total = math.fsum(w)
    value = math.fsum(w * vals) / total
    ess = total / w.max()
    if ess < 10:
        warnings.warn(f"tilted estimate rests on {ess:.1f} effective samples", RuntimeWarning)
    return TiltedEstimate(value, ess, samples, ess < 10)


def g_fail_prob_mc(spec: BarrierSpecG, n_samples: int, seed: int) -> ProbEstimate:
    """Fraction of samples on which G(k) fails at some t of the grid T(x, k)."""
    if n_samples < 100:
        raise DomainError("need at least 100 samples")
    grid = t_grid(spec.x, spec.k)
    seeds = SeedDerivation(seed)
    limit = _sample_limit(spec.x)
    fails = 0
    for i in range(n_samples):
        if len(spec.levels) == 0 or math.isinf(spec.Cx):
            continue
        s = sample(limit, Model.STEINHAUS, seeds.seed(i))
        if not event_G_many(s, spec, grid).all():
            fails += 1
    return _binomial(fails, n_samples)


def increment_walk(s: RmfSample, x: float, R: float, n: int, B: int = DEFAULT_B,
                   sigma: float = 0.0, ts=None) -> np.ndarray:
    """Partial sums sum_{m<=j} log|I_{l_m}(1/2 + sigma + i t_m)| for j = 1..n,
    with l_j = floor(log log x - log log R) - (B + 1) - j."""
    base = math.floor(_loglog(x) - _loglog(R)) - (B + 1)
    if n < 1 or base - n < 0:
        raise DomainError("need 1 <= n <= floor(log log x - log log R) - (B + 1)")
    ts = np.zeros(n) if ts is None else np.asarray(ts, dtype=np.float64)
    steps = [float(log_euler_sum(s, increment_primes(x, base - j), sigma, ts[j - 1], real_only=True))
             for j in range(1, n + 1)]
    return np.cumsum(steps)


def tilted_increment_ballot(x: float, R: float, n: int, a: float, samples: int, seed: int,
                            B: int = DEFAULT_B, sigma: float = 0.0) -> TiltedEstimate:
    """Tilted probability that -a - Bj <= walk_j <= a + j for all j <= n."""
    def inside(s):
        w = increment_walk(s, x, R, n, B, sigma)
        j = np.arange(1, n + 1)
        return float(np.all((w >= -a - B * j) & (w <= a + j)))

    return tilted_expectation(inside, sigma, x, samples, seed)
