"""Sieved von Mangoldt values, Euler phi, CRT and progression prefix sums.

Prefix sums of Lambda are accumulated exactly: every Lambda(n) is rounded
once to a 64-bit fixed-point integer (scale ``2**-frac_bits``) and all
progression sums are integer sums.  Consequently any regrouping of the
same terms, e.g. summing psi(t, q, a) over the residues a, reproduces
psi(t) bit for bit.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import kernels

SEGMENT = 10_000_000
DEFAULT_MEMORY_BUDGET = 2 * 1024**3  # bytes; float64 values + int64 fixed point
MAGIC = b"LTBL1"


def small_primes(limit: int) -> np.ndarray:
    """All primes <= limit (plain Eratosthenes, used for sieving bases)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return np.flatnonzero(mask).astype(np.int64)


def _fixed_point_bits(N: int) -> int:
    # psi(N) < 1.04 N for every N >= 1, so any progression sum stays below 2**62.
    top = 1.04 * max(N, 2) + 64.0
    return int(62 - math.ceil(math.log2(top)))


@dataclass(frozen=True, eq=False)
class LambdaTable:
    """Lambda(n) for 1 <= n <= N.

    ``values[n]`` is a float64 (``values[0]`` is an unused 0 slot) and
    ``fixed[n]`` the same number as an exact multiple of ``2**-frac_bits``.
    """

    N: int
    values: np.ndarray
    fixed: np.ndarray
    frac_bits: int
    _pp: np.ndarray = field(repr=False, default=None)

    @property
    def prime_powers(self) -> np.ndarray:
        """Sorted indices n with Lambda(n) > 0."""
        return self._pp

    def prime_power_pairs(self) -> list[tuple[int, float]]:
        return [(int(n), float(self.values[n])) for n in self._pp]

    @property
    def scale(self) -> float:
        return math.ldexp(1.0, -self.frac_bits)

    def __getitem__(self, n: int) -> float:
        return float(self.values[n])

    def __eq__(self, other) -> bool:
        if not isinstance(other, LambdaTable):
            return NotImplemented
        return self.N == other.N and np.array_equal(self.values, other.values)

    def progression_support(self, q: int, a: int, upto: int | None = None):
        """(indices, Lambda values) of prime powers n <= upto with n = a mod q."""
        upto = self.N if upto is None else min(int(upto), self.N)
        pp = self._pp[self._pp <= upto]
        if q > 1:
            pp = pp[pp % q == a % q]
        return pp, self.values[pp]

    def psi_fixed(self, t: float, q: int = 1, a: int = 0) -> int:
        """Exact fixed-point psi(t, q, a) as a Python int."""
        t = int(math.floor(t))
        if t > self.N:
            raise ValueError(f"t={t} exceeds sieve limit {self.N}")
        if t < 1:
            return 0
        first = a % q or q
        return int(self.fixed[first : t + 1 : q].sum())

    def psi(self, t: float, q: int = 1, a: int = 0) -> float:
        return self.psi_fixed(t, q, a) * self.scale


def build_lambda_table(N: int, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> LambdaTable:
    """Sieve Lambda(n) for n <= N (segmented above 10**7)."""
    N = int(N)
    if N < 1:
        raise ValueError("N must be >= 1")
    need = 16 * (N + 1)
    if need > memory_budget:
        raise MemoryError(f"N={N} needs ~{need} bytes, budget is {memory_budget}")
    values = np.zeros(N + 1, dtype=np.float64)
    base = small_primes(math.isqrt(N))
    chunks = []
    for lo in range(0, N + 1, SEGMENT):
        hi = min(lo + SEGMENT, N + 1)
        mask = kernels.prime_mask_segment(lo, hi, base)
        chunks.append(np.flatnonzero(mask) + lo)
    primes = np.concatenate(chunks).astype(np.int64)
    # log p is computed once per prime, in numpy, on both backends.
    values[primes] = np.log(primes.astype(np.float64))
    for p in base:
        lp = values[p]
        pk = int(p) * int(p)
        while pk <= N:
            values[pk] = lp
            pk *= int(p)
    bits = _fixed_point_bits(N)
    fixed = np.rint(np.ldexp(values, bits)).astype(np.int64)
    pp = np.flatnonzero(values > 0).astype(np.int64)
    return LambdaTable(N=N, values=values, fixed=fixed, frac_bits=bits, _pp=pp)


def dump_lambda_table(table: LambdaTable, path) -> None:
    """Binary dump: b"LTBL1", N as little-endian u64, then N little-endian float64."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", table.N))
        fh.write(table.values[1:].astype("<f8").tobytes())


def load_lambda_table(path) -> LambdaTable:
    raw = Path(path).read_bytes()
    if raw[:5] != MAGIC:
        raise ValueError("not an LTBL1 file")
    (N,) = struct.unpack("<Q", raw[5:13])
    body = np.frombuffer(raw[13:], dtype="<f8")
    if body.shape[0] != N:
        raise ValueError(f"header says N={N} but body holds {body.shape[0]} values")
    values = np.concatenate([[0.0], body.astype(np.float64)])
    bits = _fixed_point_bits(N)
    fixed = np.rint(np.ldexp(values, bits)).astype(np.int64)
    pp = np.flatnonzero(values > 0).astype(np.int64)
    return LambdaTable(N=N, values=values, fixed=fixed, frac_bits=bits, _pp=pp)


@lru_cache(maxsize=None)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorisation of n >= 1 as ((p, e), ...) by trial division."""
    if n < 1:
        raise ValueError("factorize needs n >= 1")
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def euler_phi(q: int) -> int:
    if q < 1:
        raise ValueError("euler_phi needs q >= 1")
    r = q
    for p, _ in factorize(q):
        r = r // p * (p - 1)
    return r


def crt_combine(a1: int, q1: int, a2: int, q2: int) -> int:
    """Unique A mod q1*q2 with A = a1 (q1) and A = a2 (q2).

    Built as a1*m1*q2 + a2*m2*q1 with m1*q2 + m2*q1 = 1.
    """
    if q1 < 1 or q2 < 1:
        raise ValueError("moduli must be positive")
    if math.gcd(q1, q2) != 1:
        raise ValueError(f"moduli {q1} and {q2} are not coprime")
    if q1 == 1 or q2 == 1:
        return (a2 if q1 == 1 else a1) % (q1 * q2)
    m1 = pow(q2, -1, q1)
    m2 = pow(q1, -1, q2)
    return (a1 * m1 * q2 + a2 * m2 * q1) % (q1 * q2)


def canonical_residue(q: int, a: int) -> int:
    """Map a to [0, q); q = 1 always gives 0."""
    if q < 1:
        raise ValueError("modulus must be >= 1")
    return a % q


@dataclass(frozen=True, eq=False)
class ProgressionPrefix:
    """psi(t, q, a) sampled at integers 0..N.

    ``fixed`` holds the exact integer sums, ``cumulative`` the float view.
    """

    q: int
    a: int
    fixed: np.ndarray
    scale: float

    @property
    def cumulative(self) -> np.ndarray:
        return self.fixed * self.scale

    @property
    def N(self) -> int:
        return self.fixed.shape[0] - 1

    def __call__(self, t) -> np.ndarray | float:
        """psi at real t (right-continuous step function, zero for t < 1)."""
        idx = np.floor(np.asarray(t, dtype=np.float64))
        if np.any(idx > self.N):
            raise ValueError("t beyond sieve limit")
        idx = np.clip(idx, 0, None).astype(np.int64)
        out = self.fixed[idx] * self.scale
        return float(out) if np.ndim(out) == 0 else out


def progression_prefix(table: LambdaTable, q: int, a: int) -> ProgressionPrefix:
    if q < 1:
        raise ValueError("modulus must be >= 1")
    if not 0 <= a < q:
        raise ValueError(f"residue must lie in [0, {q}), got {a}")
    masked = np.zeros_like(table.fixed)
    first = a or q
    masked[first::q] = table.fixed[first::q]
    return ProgressionPrefix(q=q, a=a, fixed=np.cumsum(masked), scale=table.scale)
