"""Deterministic number-theoretic substrate: sieves, factorisation, rough and
smooth counting, and finite prime sums."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import DomainError

SIEVE_CAP = 2**31 - 1
# inclusion-exclusion is only run over this many sieving primes
LEGENDRE_MAX_PRIMES = 25
LEGENDRE_MAX_X = 10**7


@dataclass(frozen=True, eq=False)
class SpfTable:
    """Smallest-prime-factor table on [0, limit] (entries 0 and 1 are 0)."""

    limit: int
    spf: np.ndarray
    primes: np.ndarray
    _derived: dict = field(default_factory=dict, repr=False, compare=False)

    def __getitem__(self, n):
        return self.spf[n]

    @property
    def cofactor(self) -> np.ndarray:
        """n // spf[n], with 0 at n < 2."""
        if "cofactor" not in self._derived:
            cof = np.zeros(self.limit + 1, dtype=np.int32)
            n = np.arange(2, self.limit + 1, dtype=np.int64)
            cof[2:] = n // self.spf[2:]
            cof.setflags(write=False)
            self._derived["cofactor"] = cof
        return self._derived["cofactor"]

    @property
    def spf_index(self) -> np.ndarray:
        """Position of spf[n] in ``primes``."""
        if "spf_index" not in self._derived:
            pos = np.zeros(self.limit + 1, dtype=np.int32)
            pos[self.primes] = np.arange(self.primes.size, dtype=np.int32)
            out = np.zeros(self.limit + 1, dtype=np.int32)
            out[2:] = pos[self.spf[2:]]
            out.setflags(write=False)
            self._derived["spf_index"] = out
        return self._derived["spf_index"]

    @property
    def squareful(self) -> np.ndarray:
        """True where spf(n)^2 divides n."""
        if "squareful" not in self._derived:
            sq = np.zeros(self.limit + 1, dtype=np.bool_)
            cof = self.cofactor
            sq[2:] = self.spf[cof[2:]] == self.spf[2:]
            sq.setflags(write=False)
            self._derived["squareful"] = sq
        return self._derived["squareful"]

    def factorize(self, n: int) -> dict[int, int]:
        if not 1 <= n <= self.limit:
            raise DomainError(f"n={n} outside table range [1, {self.limit}]")
        out: dict[int, int] = {}
        while n > 1:
            p = int(self.spf[n])
            out[p] = out.get(p, 0) + 1
            n //= p
        return out


def build_spf(x: int) -> SpfTable:
    """Linear (Euler) sieve; O(x) time."""
    x = int(x)
    if x < 2:
        raise DomainError(f"sieve limit must be >= 2, got {x}")
    if x > SIEVE_CAP:
        raise DomainError(f"sieve limit {x} exceeds cap {SIEVE_CAP}")
    spf, primes = _kernels.linear_sieve(x)
    spf.setflags(write=False)
    primes.setflags(write=False)
    return SpfTable(limit=x, spf=spf, primes=primes)


_table_lock = threading.Lock()
_largest_table: SpfTable | None = None


def spf_table(x: int) -> SpfTable:
    """Shared table covering at least [0, x]; reuses the largest one built so far."""
    global _largest_table
    x = max(int(x), 2)
    with _table_lock:
        big = _largest_table
        if big is None or big.limit < x:
            big = build_spf(max(x, 1024))
            _largest_table = big
    return big


@lru_cache(maxsize=4)
def _prime_sieve(limit: int) -> np.ndarray:
    is_p = np.ones(limit + 1, dtype=np.bool_)
    is_p[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_p[p]:
            is_p[p * p :: p] = False
    primes = np.flatnonzero(is_p).astype(np.int64)
    primes.setflags(write=False)
    return primes


def primes_upto(x: float) -> np.ndarray:
    """All primes p <= x, ascending (read-only array)."""
    limit = int(math.floor(x))
    if limit > SIEVE_CAP:
        raise DomainError(f"prime range {limit} exceeds cap {SIEVE_CAP}")
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    # round the sieve size up so nearby requests share one cached sieve
    size = max(1 << 12, 1 << (limit - 1).bit_length())
    size = min(size, SIEVE_CAP)
    primes = _prime_sieve(size)
    return primes[: int(np.searchsorted(primes, limit, side="right"))]


def primes_between(lo: float, hi: float, *, closed_low: bool = False) -> np.ndarray:
    """Primes in (lo, hi], or [lo, hi] when ``closed_low``."""
    ps = primes_upto(hi)
    side = "left" if closed_low else "right"
    return ps[int(np.searchsorted(ps, lo, side=side)) :] if lo > 0 else ps


@dataclass(frozen=True)
class RoughSpec:
    """Integers n <= x all of whose prime factors are >= R (n = 1 included)."""

    x: int
    R: float

    def __post_init__(self):
        if self.x < 0:
            raise DomainError("x must be non-negative")
        if self.R < 2:
            raise DomainError(f"roughness threshold must be >= 2, got {self.R}")


def _rough_mask(spec: RoughSpec) -> np.ndarray:
    x = int(spec.x)
    mask = np.ones(x + 1, dtype=np.bool_)
    mask[0] = False
    for p in primes_upto(min(math.ceil(spec.R) - 1, x)):
        if p < spec.R:
            mask[p::p] = False
    return mask


def iter_rough(spec: RoughSpec) -> np.ndarray:
    """Members of A_R(x) in increasing order."""
    return np.flatnonzero(_rough_mask(spec))


def count_rough(spec: RoughSpec) -> int:
    return int(np.count_nonzero(_rough_mask(spec)))


def legendre_rough_count(spec: RoughSpec) -> int:
    """|A_R(x)| by Legendre inclusion-exclusion over squarefree products of
    the primes below R. Past LEGENDRE_MAX_PRIMES sieving primes it falls back
    to a segmented sieve count."""
    x = int(spec.x)
    if x > LEGENDRE_MAX_X:
        raise DomainError(f"oracle is limited to x <= {LEGENDRE_MAX_X}")
    if x < 1:
        return 0
    small = [int(p) for p in primes_upto(math.ceil(spec.R) - 1) if p < spec.R]
    if len(small) > LEGENDRE_MAX_PRIMES:
        return _segmented_rough_count(x, small)

    # depth-first over squarefree d; a branch dies once d > x since every
    # extension contributes floor(x / d) = 0
    total = 0
    stack = [(1, 0, 1)]
    while stack:
        d, start, sign = stack.pop()
        total += sign * (x // d)
        for i in range(start, len(small)):
            nd = d * small[i]
            if nd > x:
                break
            stack.append((nd, i + 1, -sign))
    return total


def _segmented_rough_count(x: int, small: list[int], block: int = 1 << 16) -> int:
    count = 0
    for lo in range(1, x + 1, block):
        hi = min(lo + block - 1, x)
        keep = np.ones(hi - lo + 1, dtype=np.bool_)
        for p in small:
            first = ((lo + p - 1) // p) * p
            if first <= hi:
                keep[first - lo :: p] = False
        count += int(np.count_nonzero(keep))
    return count


def count_smooth(x: int, y: float) -> int:
    """Psi(x, y): number of n <= x with no prime factor exceeding y."""
    x = int(x)
    if x < 1:
        return 0
    if y >= x:
        return x
    if y < 2:
        return 1
    largest = np.zeros(x + 1, dtype=np.int64)
    largest[1] = 1
    for p in primes_upto(x):
        largest[p::p] = p
    return int(np.count_nonzero(largest[1:] <= y))


def prime_sum(a: float, b: float, sigma: float, t: float) -> tuple[float, float]:
    """(sum p^{-(1+2 sigma)}, sum 2 cos(t log p) p^{-(1+2 sigma)}) over a < p <= b."""
    if b > SIEVE_CAP:
        raise DomainError(f"upper end {b} exceeds sieve cap")
    if b <= a:
        return 0.0, 0.0
    if sigma <= -1.0 / math.log(b):
        raise DomainError("need sigma > -1/log b")
    ps = primes_between(a, b).astype(np.float64)
    w = np.exp(-(1.0 + 2.0 * sigma) * np.log(ps))
    return math.fsum(w), math.fsum(2.0 * np.cos(t * np.log(ps)) * w)
