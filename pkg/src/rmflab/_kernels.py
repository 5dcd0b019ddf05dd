"""Compiled inner loops (numba). Everything here is nogil so that worker threads
run truly in parallel; higher-level modules own validation and bookkeeping."""

import numpy as np
from numba import njit

GOLDEN_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO_PI = 2.0 * np.pi
_INV_2_53 = 1.0 / 9007199254740992.0

STEINHAUS = 0
RADEMACHER = 1


@njit(cache=True, nogil=True)
def mix64(z):
    # SplitMix64 finalizer
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True)
def linear_sieve(limit):
    spf = np.zeros(limit + 1, dtype=np.int32)
    primes = np.empty(max(16, int(1.3 * limit / max(1.0, np.log(limit))) + 16), dtype=np.int32)
    count = 0
    for i in range(2, limit + 1):
        if spf[i] == 0:
            spf[i] = i
            primes[count] = i
            count += 1
        si = spf[i]
        for j in range(count):
            p = primes[j]
            if p > si or p * i > limit:
                break
            spf[p * i] = p
    return spf, primes[:count].copy()


@njit(cache=True, nogil=True)
def fill_phases(seed, nprimes, model, re, im):
    """Phase of the i-th prime is drawn from counter (i + 1) of a SplitMix64
    stream keyed by ``seed``, so any prefix of primes is reproducible."""
    s = np.uint64(seed)
    for i in range(nprimes):
        u = mix64(s + np.uint64(i + 1) * GOLDEN_GAMMA)
        if model == STEINHAUS:
            ang = _TWO_PI * (float(u >> np.uint64(11)) * _INV_2_53)
            re[i] = np.cos(ang)
            im[i] = np.sin(ang)
        else:
            re[i] = 1.0 if (u >> np.uint64(63)) == np.uint64(0) else -1.0
            im[i] = 0.0


@njit(cache=True, nogil=True)
def fill_phases_complex(seed, nprimes, model, re, im, ph):
    fill_phases(seed, nprimes, model, re, im)
    for j in range(nprimes):
        ph[j] = complex(re[j], im[j])


@njit(cache=True, nogil=True)
def evaluate_f(cof, sidx, squareful, ph, idx, f):
    """Fill f(n) for n in ``idx`` (increasing and closed under n -> n/spf(n));
    an empty ``squareful`` means completely multiplicative."""
    f[1] = 1.0
    rad = squareful.shape[0] > 0
    for k in range(idx.shape[0]):
        n = idx[k]
        if n < 2:
            continue
        if rad and squareful[n]:
            f[n] = 0.0
        else:
            f[n] = f[cof[n]] * ph[sidx[n]]


@njit(cache=True, nogil=True)
def _sum_full(cof, sidx, ph, a, f):
    # one complex array for f keeps the f[n / spf(n)] lookup to a single cache line
    f[1] = 1.0
    s = a[1]
    for n in range(2, a.shape[0]):
        v = f[cof[n]] * ph[sidx[n]]
        f[n] = v
        s += a[n] * v
    return s


@njit(cache=True, nogil=True)
def _sum_full_squarefree(cof, sidx, squareful, ph, a, f):
    f[1] = 1.0
    s = a[1]
    for n in range(2, a.shape[0]):
        if squareful[n]:
            f[n] = 0.0
        else:
            v = f[cof[n]] * ph[sidx[n]]
            f[n] = v
            s += a[n] * v
    return s


@njit(cache=True, nogil=True)
def _sum_support(cof, sidx, squareful, ph, idx, a, f):
    f[1] = 1.0
    s = 0j
    rad = squareful.shape[0] > 0
    for k in range(idx.shape[0]):
        n = idx[k]
        if n < 2:
            s += a[n]
            continue
        if rad and squareful[n]:
            f[n] = 0.0
            continue
        v = f[cof[n]] * ph[sidx[n]]
        f[n] = v
        s += a[n] * v
    return s


@njit(cache=True, nogil=True)
def trial_sums(seeds, cof, sidx, squareful, nprimes, idx, a, model, out):
    """out[i] = sum_n a(n) f_i(n), f_i seeded by seeds[i].

    f is built by f(n) = f(n / spf(n)) f(spf(n)) over the index list ``idx``;
    an empty ``idx`` means the full range 1..N."""
    f = np.zeros(a.shape[0], dtype=np.complex128)
    m = max(nprimes, 1)
    re = np.empty(m)
    im = np.empty(m)
    ph = np.zeros(m, dtype=np.complex128)
    for i in range(seeds.shape[0]):
        fill_phases_complex(seeds[i], nprimes, model, re, im, ph)
        if idx.shape[0] > 0:
            out[i] = _sum_support(cof, sidx, squareful, ph, idx, a, f)
        elif squareful.shape[0] > 0:
            out[i] = _sum_full_squarefree(cof, sidx, squareful, ph, a, f)
        else:
            out[i] = _sum_full(cof, sidx, ph, a, f)


@njit(cache=True, nogil=True)
def energy_pairs(a, out_by_e):
    """Multiplicative energy via the parametrisation m1=de, n1=df, m2=gf, n2=ge
    with gcd(e, f) = 1: E = sum_{(e,f) coprime} |sum_d a(de) conj(a(df))|^2.
    out_by_e[e] collects the contribution of row e (summed later with fsum)."""
    N = a.shape[0] - 1
    for e in range(1, N + 1):
        row = 0.0
        for fv in range(1, N + 1):
            # gcd(e, fv)
            u = e
            v = fv
            while v:
                u, v = v, u % v
            if u != 1:
                continue
            top = N // max(e, fv)
            xr = 0.0
            xi = 0.0
            for d in range(1, top + 1):
                z = a[d * e] * np.conj(a[d * fv])
                xr += z.real
                xi += z.imag
            row += xr * xr + xi * xi
        out_by_e[e] = row


@njit(cache=True, nogil=True)
def log_euler_grid(logp, amp, pr, pi, t, real_only, out_re, out_im):
    """out[m] = sum_p -log(1 - f(p) p^{-1/2-sigma} p^{-i t_m}); amp = p^{-1/2-sigma}."""
    M = t.shape[0]
    for m in range(M):
        out_re[m] = 0.0
        out_im[m] = 0.0
    for j in range(logp.shape[0]):
        lp = logp[j]
        a = amp[j]
        zr0 = a * pr[j]
        zi0 = a * pi[j]
        for m in range(M):
            c = np.cos(t[m] * lp)
            s = -np.sin(t[m] * lp)
            zr = zr0 * c - zi0 * s
            zi = zr0 * s + zi0 * c
            # 1 - z
            ur = 1.0 - zr
            ui = -zi
            out_re[m] -= 0.5 * np.log1p(-2.0 * zr + zr * zr + zi * zi)
            if not real_only:
                out_im[m] -= np.arctan2(ui, ur)
