"""Hot numeric kernels, each in a numba and a pure-numpy flavour.

The public names at the bottom of the module dispatch on
:data:`goldbach_ap._backend.USE_NUMBA`.  Both flavours are always importable
as ``<name>_numba`` / ``<name>_numpy`` so they can be benchmarked and
cross-checked against each other.
"""
import math

import numpy as np

from ._backend import USE_NUMBA, njit

# B_{2k} / (2k)! for k = 1..13 (B_2 .. B_26).
_BERNOULLI = [
    (1, 6), (-1, 30), (1, 42), (-1, 30), (5, 66), (-691, 2730), (7, 6),
    (-3617, 510), (43867, 798), (-174611, 330), (854513, 138),
    (-236364091, 2730), (8553103, 6),
]
EM_COEFFS = np.array(
    [num / den / math.factorial(2 * k) for k, (num, den) in enumerate(_BERNOULLI, start=1)]
)
EM_TERMS = 12  # corrections through B_24; the B_26 slot feeds the error bound
EM_MAX_SHIFT = 1 << 22


# ---------------------------------------------------------------- sieve


@njit
def _mark_composites_numba(lo, hi, base_primes):
    mask = np.ones(hi - lo, dtype=np.bool_)
    for p in base_primes:
        pp = p * p
        if pp >= hi:
            break
        start = max(pp, ((lo + p - 1) // p) * p)
        for n in range(start, hi, p):
            mask[n - lo] = False
    if lo <= 0:
        mask[0 - lo] = False
    if lo <= 1 < hi:
        mask[1 - lo] = False
    return mask


def _mark_composites_numpy(lo, hi, base_primes):
    mask = np.ones(hi - lo, dtype=np.bool_)
    for p in base_primes:
        p = int(p)
        pp = p * p
        if pp >= hi:
            break
        start = max(pp, ((lo + p - 1) // p) * p)
        mask[start - lo :: p] = False
    if lo <= 0:
        mask[0 - lo] = False
    if lo <= 1 < hi:
        mask[1 - lo] = False
    return mask


def prime_mask_segment_numba(lo, hi, base_primes):
    """Boolean primality mask of ``[lo, hi)`` given all primes up to sqrt(hi)."""
    return _mark_composites_numba(int(lo), int(hi), np.asarray(base_primes, dtype=np.int64))


def prime_mask_segment_numpy(lo, hi, base_primes):
    return _mark_composites_numpy(int(lo), int(hi), np.asarray(base_primes, dtype=np.int64))


# ------------------------------------------------- Euler-Maclaurin Hurwitz
#
# Phases t*log(n + a) reach ~1e4 radians at |t| = 1e3, so plain double
# products lose ~1e-12 absolute.  Logs come in as double-double tables and
# the phase is reduced mod 2*pi with an error-free product.

TWO_PI_HI = 6.283185307179586
TWO_PI_LO = 2.4492935982947064e-16
_SPLIT = 134217729.0


@njit
def _two_prod(a, b):
    p = a * b
    c = _SPLIT * a
    ah = c - (c - a)
    al = a - ah
    c = _SPLIT * b
    bh = c - (c - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


@njit
def _cpow_neg(s, lhi, llo):
    """(exp(lhi + llo)) ** (-s) with the imaginary phase reduced in double-double."""
    p, e = _two_prod(s.imag, lhi)
    e += s.imag * llo
    k = np.floor(p / TWO_PI_HI + 0.5)
    kp, ke = _two_prod(k, TWO_PI_HI)
    r = ((p - kp) - ke) + e - k * TWO_PI_LO
    mag = math.exp(-s.real * (lhi + llo))
    return complex(mag * math.cos(r), -mag * math.sin(r))


def _two_prod_np(a, b):
    p = a * b
    c = _SPLIT * a
    ah = c - (c - a)
    al = a - ah
    c = _SPLIT * b
    bh = c - (c - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def cpow_neg_numpy(s, lhi, llo):
    """Vectorised twin of the numba helper; broadcasts ``s`` against the log table."""
    s = np.asarray(s, dtype=np.complex128)
    p, e = _two_prod_np(s.imag, lhi)
    e = e + s.imag * llo
    k = np.floor(p / TWO_PI_HI + 0.5)
    kp, ke = _two_prod_np(k, TWO_PI_HI)
    r = ((p - kp) - ke) + e - k * TWO_PI_LO
    mag = np.exp(-s.real * (lhi + llo))
    return mag * np.cos(r) - 1j * mag * np.sin(r)


def em_shifts(svals, amin, cabs, tol):
    """Per-point shift M and the remainder bound after B_24 corrections.

    The shift starts at max(20, ceil(|Im s| / 2)) and doubles until the
    bound (next correction term times |s + 2K + 1| / (Re s + 2K + 1)) drops
    below ``tol``.
    """
    K = EM_TERMS
    svals = np.asarray(svals, dtype=np.complex128)
    sig = svals.real
    M = np.maximum(20, np.ceil(np.abs(svals.imag) / 2.0)).astype(np.int64)
    poch = np.ones_like(svals)
    for r in range(2 * K + 1):
        poch = poch * (svals + r)
    while True:
        N = M + amin
        bound = (
            np.abs(poch) * abs(EM_COEFFS[K]) * N ** (-sig - 2 * K - 1)
            * np.abs(svals + 2 * K + 1) / (sig + 2 * K + 1)
        ) * cabs
        grow = (bound > tol) & (M < EM_MAX_SHIFT)
        if not grow.any():
            return M, bound
        M = np.where(grow, 2 * M, M)


@njit
def _em_series_numba(svals, shifts, coeffs, loghi, loglo, nvals, em):
    ns = svals.shape[0]
    out = np.zeros(ns, dtype=np.complex128)
    K = EM_TERMS
    for i in range(ns):
        s = svals[i]
        M = shifts[i]
        total = 0.0 + 0.0j
        for j in range(coeffs.shape[0]):
            acc = 0.0 + 0.0j
            for n in range(M):
                acc += _cpow_neg(s, loghi[j, n], loglo[j, n])
            N = nvals[j] + M
            Npow = _cpow_neg(s, loghi[j, M], loglo[j, M])
            if s == 1.0:
                # pole parts cancel across j when sum(coeffs) == 0
                acc += -(loghi[j, M] + loglo[j, M]) + 0.5 * Npow
            else:
                acc += N * Npow / (s - 1.0) + 0.5 * Npow
            fact = s
            Nk = Npow / N
            inv2 = 1.0 / (N * N)
            for k in range(1, K + 1):
                acc += em[k - 1] * fact * Nk
                fact *= (s + 2 * k - 1) * (s + 2 * k)
                Nk *= inv2
            total += coeffs[j] * acc
        out[i] = total
    return out


def em_series_numba(svals, shifts, alphas, coeffs, loghi, loglo):
    """``sum_j coeffs[j] * zeta(s, alphas[j])`` at every s.

    ``loghi``/``loglo`` hold log(n + alphas[j]) as double-double for
    n = 0..max(shifts).
    """
    return _em_series_numba(
        np.ascontiguousarray(svals, dtype=np.complex128),
        np.ascontiguousarray(shifts, dtype=np.int64),
        np.ascontiguousarray(coeffs, dtype=np.complex128),
        np.ascontiguousarray(loghi), np.ascontiguousarray(loglo),
        np.ascontiguousarray(alphas, dtype=np.float64),
        EM_COEFFS,
    )


def em_series_numpy(svals, shifts, alphas, coeffs, loghi, loglo, chunk=64):
    svals = np.asarray(svals, dtype=np.complex128)
    K = EM_TERMS
    out = np.zeros(svals.shape[0], dtype=np.complex128)
    for lo in range(0, svals.shape[0], chunk):
        s = svals[lo : lo + chunk]
        m = np.asarray(shifts[lo : lo + chunk], dtype=np.int64)
        mmax = int(m.max())
        n = np.arange(mmax)
        live = n[None, :] < m[:, None]
        total = np.zeros(s.shape[0], dtype=np.complex128)
        for j, (a, c) in enumerate(zip(alphas, coeffs)):
            terms = cpow_neg_numpy(s[:, None], loghi[j, None, :mmax], loglo[j, None, :mmax])
            acc = np.where(live, terms, 0.0).sum(axis=1)
            N = m + a
            Npow = cpow_neg_numpy(s, loghi[j, m], loglo[j, m])
            pole = s == 1.0
            tail = np.where(pole, -(loghi[j, m] + loglo[j, m]),
                            N * Npow / np.where(pole, 2.0, s - 1.0))
            acc = acc + tail + 0.5 * Npow
            fact = s.copy()
            Nk = Npow / N
            for k in range(1, K + 1):
                acc = acc + EM_COEFFS[k - 1] * fact * Nk
                fact = fact * (s + 2 * k - 1) * (s + 2 * k)
                Nk = Nk / (N * N)
            total += c * acc
        out[lo : lo + chunk] = total
    return out


# ------------------------------------------------------ pair convolution


@njit
def _pair_convolution_numba(m_idx, m_w, l_idx, l_w, nmax):
    out = np.zeros(nmax + 1, dtype=np.float64)
    for i in range(m_idx.shape[0]):
        m = m_idx[i]
        if m >= nmax:
            break
        wm = m_w[i]
        for j in range(l_idx.shape[0]):
            n = m + l_idx[j]
            if n > nmax:
                break
            out[n] += wm * l_w[j]
    return out


def pair_convolution_numba(m_idx, m_w, l_idx, l_w, nmax):
    """``out[n] = sum_{m + l = n} w1(m) w2(l)`` over the given sorted supports."""
    return _pair_convolution_numba(
        np.ascontiguousarray(m_idx, dtype=np.int64), np.ascontiguousarray(m_w, dtype=np.float64),
        np.ascontiguousarray(l_idx, dtype=np.int64), np.ascontiguousarray(l_w, dtype=np.float64),
        int(nmax),
    )


def pair_convolution_numpy(m_idx, m_w, l_idx, l_w, nmax, chunk=256):
    m_idx = np.asarray(m_idx, dtype=np.int64)
    l_idx = np.asarray(l_idx, dtype=np.int64)
    m_w = np.asarray(m_w, dtype=np.float64)
    l_w = np.asarray(l_w, dtype=np.float64)
    out = np.zeros(nmax + 1, dtype=np.float64)
    for lo in range(0, m_idx.shape[0], chunk):
        n = m_idx[lo : lo + chunk, None] + l_idx[None, :]
        w = m_w[lo : lo + chunk, None] * l_w[None, :]
        keep = n <= nmax
        out += np.bincount(n[keep], weights=w[keep], minlength=nmax + 1)
    return out


@njit
def _pair_sum_numba(m_idx, m_w, l_idx, l_w, X):
    s = 0.0
    c = 0.0
    for i in range(m_idx.shape[0]):
        m = m_idx[i]
        for j in range(l_idx.shape[0]):
            if m + l_idx[j] > X:
                break
            v = m_w[i] * l_w[j]
            t = s + v
            if abs(s) >= abs(v):
                c += (s - t) + v
            else:
                c += (v - t) + s
            s = t
    return s + c


def pair_sum_numba(m_idx, m_w, l_idx, l_w, X):
    """Brute double loop ``sum_{m + l <= X} w1(m) w2(l)`` (Neumaier-compensated)."""
    return float(_pair_sum_numba(
        np.ascontiguousarray(m_idx, dtype=np.int64), np.ascontiguousarray(m_w, dtype=np.float64),
        np.ascontiguousarray(l_idx, dtype=np.int64), np.ascontiguousarray(l_w, dtype=np.float64),
        float(X),
    ))


def pair_sum_numpy(m_idx, m_w, l_idx, l_w, X, chunk=256):
    m_idx = np.asarray(m_idx, dtype=np.int64)
    l_idx = np.asarray(l_idx, dtype=np.int64)
    parts = []
    for lo in range(0, m_idx.shape[0], chunk):
        n = m_idx[lo : lo + chunk, None] + l_idx[None, :]
        w = np.asarray(m_w)[lo : lo + chunk, None] * np.asarray(l_w)[None, :]
        parts.append(w[n <= X])
    if not parts:
        return 0.0
    return math.fsum(np.concatenate(parts))


# ------------------------------------------------- compensated prefix sum


@njit
def _cumsum_numba(x):
    out = np.empty(x.shape[0], dtype=np.float64)
    s = 0.0
    c = 0.0
    for i in range(x.shape[0]):
        v = x[i]
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
        out[i] = s + c
    return out


def compensated_cumsum_numba(x):
    """Running sums with Neumaier compensation."""
    return _cumsum_numba(np.ascontiguousarray(x, dtype=np.float64))


def compensated_cumsum_numpy(x):
    """Running sums via an exact split: x = hi + lo with hi on a 2**-k grid.

    The hi parts are summed as int64 (exact), the tiny lo parts in float, so
    each output is within about one rounding of the exact prefix sum.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    amax = float(np.max(np.abs(x))) if n else 0.0
    if amax == 0.0:
        return np.zeros(n)
    bits = 62 - int(math.ceil(math.log2(amax * n + 1.0)))
    hi = np.rint(np.ldexp(x, bits))
    lo = x - np.ldexp(hi, -bits)
    return np.ldexp(np.cumsum(hi.astype(np.int64)).astype(np.float64), -bits) + np.cumsum(lo)


IMPLEMENTATIONS = {
    "prime_mask_segment": {"numba": prime_mask_segment_numba, "numpy": prime_mask_segment_numpy},
    "em_series": {"numba": em_series_numba, "numpy": em_series_numpy},
    "pair_convolution": {"numba": pair_convolution_numba, "numpy": pair_convolution_numpy},
    "pair_sum": {"numba": pair_sum_numba, "numpy": pair_sum_numpy},
    "compensated_cumsum": {"numba": compensated_cumsum_numba, "numpy": compensated_cumsum_numpy},
}

_flavour = "numba" if USE_NUMBA else "numpy"
prime_mask_segment = IMPLEMENTATIONS["prime_mask_segment"][_flavour]
em_series = IMPLEMENTATIONS["em_series"][_flavour]
pair_convolution = IMPLEMENTATIONS["pair_convolution"][_flavour]
pair_sum = IMPLEMENTATIONS["pair_sum"][_flavour]
compensated_cumsum = IMPLEMENTATIONS["compensated_cumsum"][_flavour]
