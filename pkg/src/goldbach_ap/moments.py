"""Character-twisted Chebyshev sums, second moments and auxiliary power sums.

The second moments integrate step functions of t, so without Siegel data
every piece is a polynomial of degree <= 2 and is integrated in closed form.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import quad

from . import kernels
from .arith import LambdaTable, euler_phi, factorize
from .characters import DirichletCharacter, char_value, enumerate_characters
from .goldbach import check_residue
from .zeros import SiegelDatum, ZeroSet, gamma_pair_terms, weighted_zero_terms, zero_sum_H

QUAD_RTOL = 1e-12


def _units(q: int):
    return [r for r in range(q) if math.gcd(r, q) == 1] if q > 1 else [0]


def psi_chi(t: float, chi: DirichletCharacter, table: LambdaTable) -> complex:
    """sum_{n <= t} chi(n) Lambda(n), from exact residue-class sums."""
    if t < 2:
        return 0j
    q = chi.q
    re, im = [], []
    for r in _units(q):
        v = table.psi(t, q, r)
        c = char_value(chi, r) if q > 1 else 1 + 0j
        re.append(c.real * v)
        im.append(c.imag * v)
    return complex(math.fsum(re), math.fsum(im))


@dataclass
class ExplicitResult:
    t: float
    T: float
    approximation: complex
    actual: complex

    @property
    def residual(self) -> complex:
        return self.approximation - self.actual


def imprimitive_correction(t: float, chi: DirichletCharacter) -> complex:
    """psi(t, chi*) - psi(t, chi): Lambda(n) chi*(n) over prime powers n <= t with (n, q) > 1."""
    chi_star = enumerate_characters(chi.conductor).by_label(chi.induced_from)
    total = 0j
    for p, _ in factorize(chi.q) if chi.q > 1 else ():
        lp = math.log(p)
        pk = p
        while pk <= t:
            total += char_value(chi_star, pk) * lp
            pk *= p
    return total


def explicit_psi_chi(t: float, T: float, chi: DirichletCharacter, zeros: ZeroSet,
                     table: LambdaTable) -> ExplicitResult:
    """delta_0 t - sum_{1<|g|<=T} t^rho/rho - sum_{|g|<=1} (t^rho - 1)/rho, adjusted to chi.

    ``zeros`` are those of the primitive character inducing chi.
    """
    if t < 2:
        raise ValueError("t must be >= 2")
    if zeros.T < T:
        raise ValueError(f"zero set reaches only T={zeros.T}, below requested {T}")
    zs = zeros.truncate(T)
    rho = zs.rhos
    lt = math.log(t)
    tr = np.exp(rho * lt)
    low = np.abs(zs.gammas) <= 1
    terms = np.where(low, (tr - 1) / rho, tr / rho)
    s = complex(math.fsum(terms.real), math.fsum(terms.imag))
    delta = 1.0 if chi.is_principal else 0.0
    approx = delta * t - s - imprimitive_correction(t, chi)
    return ExplicitResult(float(t), float(T), approx, psi_chi(t, chi, table))


# ------------------------------------------------------------ second moments


@dataclass
class MomentResult:
    value: float
    x: float
    h: float | None
    q: int
    a: int
    siegel_active: bool
    bound_ratio: float
    segment_count: int

    CSV_FIELDS = ("x", "h", "q", "a", "value", "bound_ratio", "segment_count")

    def csv_row(self) -> list:
        return [self.x, "" if self.h is None else self.h, self.q, self.a, self.value,
                self.bound_ratio, self.segment_count]

    def to_dict(self) -> dict:
        return asdict(self)


def _siegel_weight(siegel: SiegelDatum | None, q: int, a: int):
    if siegel is None or siegel.q != q:
        return None
    return char_value(siegel.character, a).real


def _progression_steps(table: LambdaTable, q: int, a: int, upto: float):
    """Jump points n <= upto and psi(t, q, a) just after each jump."""
    pp, _ = table.progression_support(q, a, int(math.floor(upto)))
    levels = np.cumsum(table.fixed[pp]) * table.scale
    return pp.astype(np.float64), levels


def _ratio(value, bound):
    # log(qx) vanishes at qx = 1, where the bound is degenerate
    return value / bound if bound > 0 else math.nan


def _log2_bound(q, x):
    lg = math.log(q * x)
    return lg * lg


def second_moment_H(x: float, q: int, a: int, table: LambdaTable,
                    siegel: SiegelDatum | None = None, b_star: float = 0.5) -> MomentResult:
    """Integral over [0, x] of (psi(t,q,a) - t/phi(q) [+ chi~(a) t^b/(phi(q) b)])^2."""
    a = check_residue(q, a)
    if x > table.N:
        raise ValueError("x beyond sieve limit")
    if x <= 0:
        raise ValueError("x must be positive")
    phi = euler_phi(q)
    jumps, levels = _progression_steps(table, q, a, x)
    edges = np.concatenate([[0.0], jumps, [float(x)]])
    c = np.concatenate([[0.0], levels])
    u, v = edges[:-1], edges[1:]
    keep = v > u
    u, v, c = u[keep], v[keep], c[keep]
    w = _siegel_weight(siegel, q, a)
    if w is None:
        A = c - u / phi
        B = c - v / phi
        pieces = (v - u) / 3.0 * (A * A + A * B + B * B)
        value = math.fsum(pieces)
    else:
        beta = siegel.beta
        k = w / (phi * beta)
        value = math.fsum(
            quad(lambda t, cc=cc: (cc - t / phi + k * t**beta) ** 2, uu, vv,
                 epsabs=0.0, epsrel=QUAD_RTOL, limit=200)[0]
            for uu, vv, cc in zip(u, v, c)
        )
    bound = x ** (2 * b_star + 1) * _log2_bound(q, x)
    return MomentResult(value, float(x), None, q, a, w is not None, _ratio(value, bound), int(u.size))


def second_moment_K(x: float, h: float, q: int, a: int, table: LambdaTable,
                    siegel: SiegelDatum | None = None, b_star: float = 0.5) -> MomentResult:
    """Integral over [0, x] of (psi(t+h) - psi(t) - h/phi(q) [+ Siegel correction])^2."""
    a = check_residue(q, a)
    if not 1 <= h <= x:
        raise ValueError("need 1 <= h <= x")
    if x + h > table.N:
        raise ValueError("x + h beyond sieve limit")
    phi = euler_phi(q)
    jumps, _ = _progression_steps(table, q, a, x + h)
    shifted = jumps - h
    inner = np.concatenate([jumps[jumps < x], shifted[(shifted > 0) & (shifted < x)]])
    edges = np.unique(np.concatenate([[0.0, float(x)], inner]))
    u, v = edges[:-1], edges[1:]
    mid = 0.5 * (u + v)
    # right-continuous step values inside each piece, exact in fixed point
    pref_hi = _prefix_fixed(table, q, a, np.floor(mid + h).astype(np.int64))
    pref_lo = _prefix_fixed(table, q, a, np.floor(mid).astype(np.int64))
    g = (pref_hi - pref_lo) * table.scale - h / phi
    w = _siegel_weight(siegel, q, a)
    if w is None:
        value = math.fsum((v - u) * g * g)
    else:
        beta = siegel.beta
        k = w / (phi * beta)
        value = math.fsum(
            quad(lambda t, gg=gg: (gg + k * ((t + h) ** beta - t**beta)) ** 2, uu, vv,
                 epsabs=0.0, epsrel=QUAD_RTOL, limit=200)[0]
            for uu, vv, gg in zip(u, v, g)
        )
    bound = h * x ** (2 * b_star) * _log2_bound(q, x)
    return MomentResult(value, float(x), float(h), q, a, w is not None, _ratio(value, bound), int(u.size))


def _prefix_fixed(table: LambdaTable, q: int, a: int, idx: np.ndarray) -> np.ndarray:
    """Fixed-point psi(n, q, a) at integer points idx (vectorised)."""
    pp, _ = table.progression_support(q, a, int(idx.max()) if idx.size else 0)
    cum = np.concatenate([[0], np.cumsum(table.fixed[pp])])
    return cum[np.searchsorted(pp, idx, side="right")]


# ----------------------------------------------------------- auxiliary sums


@dataclass
class IdentityReport:
    X: float
    q: int
    a: int
    lhs: float
    rhs: float
    residual: float
    ratio: float
    imag_residue: float = 0.0


def power_prefix(beta: float, N: int) -> np.ndarray:
    """P[K] = sum_{k=1}^{K} k^(beta-1) for K = 0..N (compensated running sum)."""
    k = np.arange(1, N + 1, dtype=np.float64)
    return np.concatenate([[0.0], kernels.compensated_cumsum(k ** (beta - 1.0))])


def sum_psi_progression(X: float, q: int, a: int, zeros: dict, table: LambdaTable,
                        siegel: SiegelDatum | None = None) -> IdentityReport:
    """sum_{n <= X} psi(n-1, q, a) against X^2/(2 phi(q)) + H(X, q, a)."""
    a = check_residue(q, a)
    N = int(math.floor(X))
    if N > table.N:
        raise ValueError("X beyond sieve limit")
    pp, _ = table.progression_support(q, a, N - 1)
    lhs = sum(int(f) * (N - int(m)) for f, m in zip(table.fixed[pp], pp)) * table.scale
    H, imag = zero_sum_H(X, q, a, zeros, siegel, return_imag=True)
    rhs = X * X / (2 * euler_phi(q)) + H
    res = lhs - rhs
    return IdentityReport(float(X), q, a, lhs, rhs, res,
                       res / (X * math.log(2 * q) * math.log(X)), imag)


def weighted_beta_lhs(N: int, q: int, a: int, beta: float, table: LambdaTable) -> float:
    """sum_{n <= N} sum_{m <= n-1, m = a (q)} Lambda(m) (n - m)^(beta - 1)."""
    N = int(N)
    if N > table.N:
        raise ValueError("N beyond sieve limit")
    if N < 2:
        return 0.0
    P = power_prefix(beta, N)
    pp, lam = table.progression_support(q, a, N - 1)
    return math.fsum(lam * P[N - pp])


def weighted_beta_sum(X: float, q: int, a: int, beta: float, zeros: dict, table: LambdaTable,
                      siegel: SiegelDatum | None = None) -> IdentityReport:
    """Lambda-weighted (n-m)^(beta-1) sum against its zero-sum main terms."""
    if not 0.5 < beta < 1:
        raise ValueError("beta must lie in (1/2, 1)")
    a = check_residue(q, a)
    lhs = weighted_beta_lhs(int(math.floor(X)), q, a, beta, table)
    lx = math.log(X)
    terms = weighted_zero_terms(q, a, zeros, siegel, lambda r: gamma_pair_terms(beta, r, lx))
    zs = complex(math.fsum(terms.real), math.fsum(terms.imag))
    rhs = (X ** (beta + 1) / (beta * (beta + 1)) - zs.real) / euler_phi(q)
    res = lhs - rhs
    return IdentityReport(float(X), q, a, lhs, rhs, res,
                       res / (X * math.log(2 * q) * math.log(X)), abs(zs.imag) / euler_phi(q))


@dataclass
class PowerSumReport:
    X: float
    beta: float
    beta1: float
    beta2: float
    lhs1: float
    main1: float
    lhs2: float
    main2: float

    @property
    def dev1(self) -> float:
        return abs(self.lhs1 - self.main1) / self.X

    @property
    def dev2(self) -> float:
        return abs(self.lhs2 - self.main2) / self.X


def power_sum_identities(X: float, beta: float, beta1: float, beta2: float) -> PowerSumReport:
    """sum_{n<=X} sum_{k<=n-1} k^(b-1) and sum_{n<=X} sum_{m+k=n} m^(b2-1) k^(b1-1)."""
    for b in (beta, beta1, beta2):
        if not 0.5 < b < 1:
            raise ValueError("exponents must lie in (1/2, 1)")
    if X < 2:
        raise ValueError("X must be >= 2")
    N = int(math.floor(X))
    P = power_prefix(beta, N)
    lhs1 = math.fsum(P[1:N])
    main1 = X ** (beta + 1) / (beta * (beta + 1))
    P1 = power_prefix(beta1, N)
    m = np.arange(1, N, dtype=np.float64)
    lhs2 = math.fsum(m ** (beta2 - 1.0) * P1[N - m.astype(np.int64)])
    main2 = math.exp(math.lgamma(beta1) + math.lgamma(beta2) - math.lgamma(beta1 + beta2 + 1)) \
        * X ** (beta1 + beta2)
    return PowerSumReport(float(X), beta, beta1, beta2, lhs1, main1, lhs2, main2)
