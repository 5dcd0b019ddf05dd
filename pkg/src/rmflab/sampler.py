"""Steinhaus and Rademacher random multiplicative functions with counter-based,
thread-count independent seeding."""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .coefficients import CoefficientSpec
from .errors import DomainError
from .ntcore import SIEVE_CAP, primes_upto, spf_table

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


class Model(str, enum.Enum):
    STEINHAUS = "steinhaus"
    RADEMACHER = "rademacher"

    @property
    def code(self) -> int:
        return _kernels.STEINHAUS if self is Model.STEINHAUS else _kernels.RADEMACHER


def splitmix64(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class SeedDerivation:
    """Per-trial seeds ``splitmix64(master + i * golden_gamma)``. The finalizer is
    a bijection on 64-bit words, so distinct trial indices give distinct seeds."""

    master_seed: int

    def seed(self, trial_index: int) -> int:
        return splitmix64(self.master_seed + trial_index * GOLDEN_GAMMA)

    def seeds(self, start: int, stop: int) -> np.ndarray:
        i = np.arange(start, stop, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.master_seed & _MASK64) + i * np.uint64(GOLDEN_GAMMA)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))

    def substream(self, tag: int) -> SeedDerivation:
        """Independent master seed for a separately-seeded stage of an experiment."""
        return SeedDerivation(splitmix64(self.master_seed ^ splitmix64(tag + 1)))


def derive_seed(master_seed: int, trial_index: int) -> int:
    return SeedDerivation(master_seed).seed(trial_index)


def resolve_workers(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get("RMFLAB_WORKERS", "1"))
    if workers < 1:
        raise DomainError(f"workers must be >= 1, got {workers}")
    return workers


@dataclass(frozen=True, eq=False)
class RmfSample:
    """One realisation of f: ``phases[i]`` is f(p_i) for the i-th prime p_i <= limit."""

    limit: int
    model: Model
    phases: np.ndarray
    seed: int

    @property
    def primes(self) -> np.ndarray:
        return primes_upto(self.limit)

    def phase_of(self, p: int) -> complex:
        ps = self.primes
        i = int(np.searchsorted(ps, p))
        if i >= ps.size or ps[i] != p:
            raise DomainError(f"{p} is not a prime <= {self.limit}")
        return complex(self.phases[i])


def _phase_arrays(seed: int, nprimes: int, model: Model) -> tuple[np.ndarray, np.ndarray]:
    re = np.empty(max(nprimes, 1))
    im = np.empty(max(nprimes, 1))
    _kernels.fill_phases(np.uint64(seed & _MASK64), nprimes, model.code, re, im)
    return re[:nprimes], im[:nprimes]


def sample(x: int, model: Model | str = Model.STEINHAUS, seed: int = 0) -> RmfSample:
    """Draw f(p) for every prime p <= x."""
    x = int(x)
    if x < 2:
        raise DomainError(f"need x >= 2, got {x}")
    if x > SIEVE_CAP:
        raise DomainError(f"x = {x} exceeds the sieve cap")
    model = Model(model)
    nprimes = primes_upto(x).size
    re, im = _phase_arrays(seed, nprimes, model)
    phases = re + 1j * im
    phases.setflags(write=False)
    return RmfSample(limit=x, model=model, phases=phases, seed=int(seed) & _MASK64)


def f_at(s: RmfSample, n: int) -> complex:
    n = int(n)
    if not 1 <= n <= s.limit:
        raise DomainError(f"n = {n} outside [1, {s.limit}]")
    value = 1.0 + 0.0j
    table = spf_table(n)
    ps = s.primes
    for p, alpha in table.factorize(n).items():
        if s.model is Model.RADEMACHER and alpha > 1:
            return 0.0j
        value *= complex(s.phases[int(np.searchsorted(ps, p))]) ** alpha
    return value


def f_values(s: RmfSample, N: int | None = None) -> np.ndarray:
    """f(1..N) as an array of length N + 1 (entry 0 unused), by f(n) = f(n/spf(n)) f(spf(n))."""
    N = s.limit if N is None else int(N)
    if N > s.limit:
        raise DomainError(f"N = {N} exceeds sample limit {s.limit}")
    table = spf_table(N)
    nprimes = int(np.searchsorted(table.primes, N, side="right"))
    ph = np.ascontiguousarray(s.phases[:nprimes])
    f = np.zeros(N + 1, dtype=np.complex128)
    idx = np.arange(1, N + 1, dtype=np.int64)
    _kernels.evaluate_f(table.cofactor, table.spf_index, _squareful(table, s.model), ph, idx, f)
    return f


def _squareful(table, model: Model) -> np.ndarray:
    if model is Model.RADEMACHER:
        return table.squareful
    return np.zeros(0, dtype=np.bool_)


def partial_sum(s: RmfSample, coeffs: CoefficientSpec) -> complex:
    """sum_{n <= N} a(n) f(n)."""
    a = coeffs.materialize()
    N = a.size - 1
    if N > s.limit:
        raise DomainError(f"coefficients run to N = {N} > sample limit {s.limit}")
    f = f_values(s, N)
    v = a[1:] * f[1:]
    return complex(math.fsum(v.real), math.fsum(v.imag))


def twist(coeffs: CoefficientSpec, t: float) -> CoefficientSpec:
    """a(n) -> a(n) n^{it}."""
    a = coeffs.materialize()
    n = np.arange(1, a.size, dtype=np.float64)
    return CoefficientSpec.dense(a[1:] * np.exp(1j * t * np.log(n)))


def _evaluation_order(a: np.ndarray, cofactor: np.ndarray) -> np.ndarray:
    """Support of ``a`` when it is closed under n -> n/spf(n) and sparse enough
    to pay off; otherwise an empty array meaning "all of 1..N"."""
    support = np.flatnonzero(a)
    support = support[support >= 1]
    N = a.size - 1
    if support.size == 0 or support.size > N // 2:
        return np.zeros(0, dtype=np.int64)
    present = np.zeros(N + 1, dtype=np.bool_)
    present[support] = True
    present[1] = True
    parents = cofactor[support[support >= 2]]
    if not present[parents].all():
        return np.zeros(0, dtype=np.int64)
    if support[0] != 1:
        support = np.concatenate(([1], support))
    return support.astype(np.int64)


def simulate_sums(coeffs: CoefficientSpec, trials: int, master_seed: int,
                  workers: int | None = None,
                  model: Model | str = Model.STEINHAUS) -> np.ndarray:
    """Per-trial values of sum a(n) f_i(n), f_i seeded by ``derive_seed(master_seed, i)``.

    Result i depends only on (coeffs, master_seed, i), never on ``workers``."""
    model = Model(model)
    workers = resolve_workers(workers)
    a = coeffs.materialize()
    N = a.size - 1
    if N > SIEVE_CAP:
        raise DomainError(f"N = {N} exceeds sieve cap")
    out = np.empty(trials, dtype=np.complex128)
    if N == 1:
        out[:] = a[1]
        return out
    table = spf_table(N)
    nprimes = int(np.searchsorted(table.primes, N, side="right"))
    idx = _evaluation_order(a, table.cofactor)
    sq = _squareful(table, model)
    seeds = SeedDerivation(master_seed).seeds(0, trials)
    args = (table.cofactor, table.spf_index, sq, nprimes, idx, np.ascontiguousarray(a), model.code)

    def run(lo_hi):
        lo, hi = lo_hi
        _kernels.trial_sums(seeds[lo:hi], *args, out[lo:hi])

    nchunks = 1 if workers == 1 else min(trials, 4 * workers)
    bounds = np.linspace(0, trials, nchunks + 1).astype(int)
    chunks = list(zip(bounds[:-1], bounds[1:]))
    if workers == 1:
        for c in chunks:
            run(c)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, chunks))
    return out
