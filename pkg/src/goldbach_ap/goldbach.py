"""Weighted Goldbach sums in progressions and their zero-sum decomposition."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .arith import LambdaTable, crt_combine, euler_phi, small_primes
from .characters import char_value, enumerate_characters
from .zeros import ExponentConfig, SiegelDatum, zero_sum_H, zterm

OMEGA_START = 16
MAX_OMEGA_UNITS = 10**7


def check_residue(q: int, a: int) -> int:
    """Canonical residue in [0, q); rejects a that is not a unit (q = 1 maps to 0)."""
    if q < 1:
        raise ValueError("modulus must be >= 1")
    if q == 1:
        return 0
    if math.gcd(a, q) != 1:
        raise ValueError(f"residue {a} is not coprime to {q}")
    return a % q


@dataclass(frozen=True)
class GoldbachConfig:
    X: float
    q1: int = 1
    q2: int = 1
    a1: int = 0
    a2: int = 0
    T: float = 100.0
    exponents: ExponentConfig = field(default_factory=ExponentConfig)
    siegel1: SiegelDatum | None = None
    siegel2: SiegelDatum | None = None

    def __post_init__(self):
        if self.X < 2:
            raise ValueError("X must be >= 2")
        if self.T < 0:
            raise ValueError("T must be nonnegative")
        object.__setattr__(self, "a1", check_residue(self.q1, self.a1))
        object.__setattr__(self, "a2", check_residue(self.q2, self.a2))
        for s, q in ((self.siegel1, self.q1), (self.siegel2, self.q2)):
            if s is not None and s.q != q:
                raise ValueError(f"Siegel datum modulus {s.q} does not match {q}")


def _support(table: LambdaTable, q: int, a: int, upto: int):
    return table.progression_support(q, a, upto)


def goldbach_G(n: int, q1: int, q2: int, a1: int, a2: int, table: LambdaTable) -> float:
    """sum over m + l = n, m = a1 (q1), l = a2 (q2) of Lambda(m) Lambda(l); 0 for n < 2."""
    a1, a2 = check_residue(q1, a1), check_residue(q2, a2)
    n = int(n)
    if n < 2:
        return 0.0
    if n > table.N:
        raise ValueError(f"n={n} beyond sieve limit {table.N}")
    m = np.arange(a1 or q1, n, q1)
    l = n - m
    keep = (l % q2) == a2
    return math.fsum(table.values[m[keep]] * table.values[l[keep]])


def goldbach_G_all(N: int, q1: int, q2: int, a1: int, a2: int, table: LambdaTable) -> np.ndarray:
    """G(n) for n = 0..N via one pair convolution over the two supports."""
    a1, a2 = check_residue(q1, a1), check_residue(q2, a2)
    m_idx, m_w = _support(table, q1, a1, N)
    l_idx, l_w = _support(table, q2, a2, N)
    return kernels.pair_convolution(m_idx, m_w, l_idx, l_w, int(N))


def float_prefix(table: LambdaTable, q: int, a: int, upto: int) -> np.ndarray:
    """psi(t, q, a) for t = 0..upto as a compensated float running sum."""
    masked = np.zeros(upto + 1)
    first = a or q
    masked[first::q] = table.values[first : upto + 1 : q]
    return kernels.compensated_cumsum(masked)


def summatory_S(config: GoldbachConfig, table: LambdaTable, method: str = "fast") -> float:
    """S = sum_{n <= X} G(n).

    ``fast``: sum_{m = a1 (q1)} Lambda(m) psi(X - m, q2, a2) with psi from a
    compensated running sum of the float Lambda values.
    ``brute``: double loop over both supports.
    """
    X = int(math.floor(config.X))
    if X > table.N:
        raise ValueError(f"X={X} beyond sieve limit {table.N}")
    q1, q2, a1, a2 = config.q1, config.q2, config.a1, config.a2
    m_idx, m_w = _support(table, q1, a1, X)
    if method == "fast":
        pref = float_prefix(table, q2, a2, X)
        return math.fsum(m_w * pref[X - m_idx])
    if method == "brute":
        l_idx, l_w = _support(table, q2, a2, X)
        return kernels.pair_sum(m_idx, m_w, l_idx, l_w, X)
    raise ValueError(f"unknown method {method!r}")


# ----------------------------------------------------------- decomposition


@dataclass
class DecompositionReport:
    X: float
    q1: int
    q2: int
    a1: int
    a2: int
    T: float
    S_exact: float
    main_term: float
    h1_term: float
    h2_term: float
    z_term: float
    residual: float
    bound: float
    bound_ratio: float
    b_star1: float
    b_star2: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def terms(self) -> tuple:
        return (self.main_term, self.h1_term, self.h2_term, self.z_term, self.residual)

    def reassembled(self) -> float:
        """main + h1 + h2 + z + residual, in that order; equals S_exact bit for bit."""
        return (((self.main_term + self.h1_term) + self.h2_term) + self.z_term) + self.residual

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)


def exact_residual(total: float, partial: float) -> float:
    """r with partial + r == total exactly in floating point (when such an r exists)."""
    r = total - partial
    for _ in range(64):
        got = partial + r
        if got == total:
            return float(r)
        r = np.nextafter(r, np.inf if got < total else -np.inf)
    raise ArithmeticError("no floating residual reproduces the total")


def _provenance(zeros: dict) -> list:
    return sorted({zs.source for zs in zeros.values()})


def assemble_report(config: GoldbachConfig, zeros1: dict, zeros2: dict,
                    table: LambdaTable) -> DecompositionReport:
    """S and every analytic term of the asymptotic formula; residual by subtraction."""
    X = float(config.X)
    q1, q2, a1, a2 = config.q1, config.q2, config.a1, config.a2
    p1, p2 = euler_phi(q1), euler_phi(q2)
    S = summatory_S(config, table)
    main = X * X / (2 * p1 * p2)
    H1, im1 = zero_sum_H(X, q1, a1, zeros1, config.siegel1, return_imag=True)
    H2, im2 = zero_sum_H(X, q2, a2, zeros2, config.siegel2, return_imag=True)
    h1, h2 = H1 / p2, H2 / p1
    z, imz = zterm(X, q1, a1, q2, a2, config.siegel1, config.siegel2, zeros1, zeros2,
                   return_imag=True)
    partial = ((main + h1) + h2) + z
    E = exact_residual(S, partial)
    b1, b2 = config.exponents.b_star(q1), config.exponents.b_star(q2)
    lx = math.log(X)
    bound = X ** (b1 + b2) * lx * math.log(q1 * X) * math.log(q2 * X)
    heights = sorted({zs.T for zs in list(zeros1.values()) + list(zeros2.values())})
    diag = {
        "zero_heights": heights,
        "zero_counts_q1": int(sum(len(z_) for z_ in zeros1.values())),
        "zero_counts_q2": int(sum(len(z_) for z_ in zeros2.values())),
        "imag_residue_h1": im1,
        "imag_residue_h2": im2,
        "imag_residue_z": imz,
        "zero_sources_q1": _provenance(zeros1),
        "zero_sources_q2": _provenance(zeros2),
        "siegel1": None if config.siegel1 is None else asdict(config.siegel1),
        "siegel2": None if config.siegel2 is None else asdict(config.siegel2),
        "z_truncation": "pairs with a Siegel zero truncated at the partner zero set's height",
    }
    if config.siegel1 is not None or config.siegel2 is not None:
        diag["siegel_sums"] = siegel_auxiliary_sums(config, table)
    return DecompositionReport(
        X=X, q1=q1, q2=q2, a1=a1, a2=a2, T=float(config.T), S_exact=S, main_term=main,
        h1_term=h1, h2_term=h2, z_term=z, residual=E, bound=bound,
        bound_ratio=E / bound, b_star1=b1, b_star2=b2, diagnostics=diag,
    )


def siegel_auxiliary_sums(config: GoldbachConfig, table: LambdaTable) -> dict:
    """The Siegel-character sums that enter the exact identity for S.

    Only those whose exponents are supplied are computed; keys name the sums.
    """
    from .moments import power_prefix, weighted_beta_lhs

    N = int(math.floor(config.X))
    out = {}
    s1, s2 = config.siegel1, config.siegel2
    mods = {1: (config.q1, config.a1, s1), 2: (config.q2, config.a2, s2)}
    for i, j in ((1, 2), (2, 1)):
        qi, ai, _ = mods[i]
        sj = mods[j][2]
        if sj is None:
            continue
        out[f"lambda_weighted_{i}{j}"] = weighted_beta_lhs(N, qi, ai, sj.beta, table)
        k = np.arange(1, N)
        out[f"power_{j}"] = math.fsum(k ** (sj.beta - 1.0) * (N - k))
    if s1 is not None and s2 is not None:
        P1 = power_prefix(s1.beta, N)
        m = np.arange(1, N)
        out["pair_power"] = math.fsum(m ** (s2.beta - 1.0) * P1[N - m])
    return out


# ------------------------------------------------- lower-bound construction


@dataclass
class GallagherResult:
    x: float
    q: int
    lhs: float
    passed: bool

    @property
    def ratio(self) -> float:
        return self.lhs / self.x


def interval_class_sums(table: LambdaTable, q: int, lo: float, hi: float) -> dict:
    """{b: sum_{lo <= n <= hi, n = b (q)} Lambda(n)} over units b mod q."""
    a = int(math.ceil(lo)) - 1
    b = int(math.floor(hi))
    units = [r for r in range(q) if math.gcd(r, q) == 1] if q > 1 else [0]
    return {r: (table.psi_fixed(b, q, r) - table.psi_fixed(a, q, r)) * table.scale for r in units}


def gallagher_check(x: float, q: int, table: LambdaTable) -> GallagherResult:
    """|x - sum Lambda chi_0| + sum_{chi != chi_0} |sum Lambda chi| over [x, 2x], against x/2."""
    if x < 2 or 2 * x > table.N:
        raise ValueError("need 2 <= x and 2x within the sieve")
    cls = interval_class_sums(table, q, x, 2 * x)
    lhs_parts = []
    for chi in enumerate_characters(q):
        s = complex(math.fsum((char_value(chi, r) * v).real for r, v in cls.items()),
                    math.fsum((char_value(chi, r) * v).imag for r, v in cls.items()))
        lhs_parts.append(abs(x - s.real) if chi.is_principal else abs(s))
    lhs = math.fsum(lhs_parts)
    return GallagherResult(float(x), q, lhs, lhs <= x / 2)


@dataclass
class OmegaResult:
    x: float
    y: float
    Q: int
    lhs: float
    rhs: float
    passed: bool

    @property
    def margin(self) -> float:
        return self.lhs / self.rhs if self.rhs else math.inf


def omega_modulus(y: float, q1: int, q2: int, p1: int | None = None) -> int:
    """Product of primes p <= y with p not dividing q1 q2 and p != p1."""
    Q = 1
    for p in small_primes(int(math.floor(y))):
        p = int(p)
        if (q1 * q2) % p == 0 or p == p1:
            continue
        Q *= p
        if Q > 2**62:
            raise OverflowError(f"modulus Q exceeds 2**62 at prime {p}")
    return Q


def omega_construction(x: float, y: float, q1: int, q2: int, a1: int, a2: int,
                       table: LambdaTable, p1: int | None = None) -> OmegaResult:
    """sum_{b mod Q, (b,Q)=1} psi(2x, q1 Q, A_b) psi(2x, q2 Q, B_b) against x^2 / (4 phi phi phi(Q))."""
    a1, a2 = check_residue(q1, a1), check_residue(q2, a2)
    if 2 * x > table.N:
        raise ValueError("2x beyond sieve limit")
    Q = omega_modulus(y, q1, q2, p1)
    phiQ = euler_phi(Q)
    if phiQ > MAX_OMEGA_UNITS:
        raise OverflowError(f"phi(Q) = {phiQ} residues is beyond the supported size")
    t = int(math.floor(2 * x))
    terms = []
    for b in range(1, Q + 1):
        if math.gcd(b, Q) != 1:
            continue
        A = crt_combine(a1, q1, b % Q, Q)
        B = crt_combine(a2, q2, (Q - b) % Q, Q)
        pa = table.psi_fixed(t, q1 * Q, A)
        pb = table.psi_fixed(t, q2 * Q, B)
        terms.append(pa * pb)
    lhs = float(sum(terms)) * table.scale * table.scale
    rhs = x * x / (4 * euler_phi(q1) * euler_phi(q2) * phiQ)
    return OmegaResult(float(x), float(y), Q, lhs, rhs, lhs >= rhs)


@dataclass
class OmegaRow:
    x: int
    best_ratio: float
    best_n: int
    max_G: float


def omega_scan(N: int, q1: int, q2: int, a1: int, a2: int, table: LambdaTable) -> list:
    """Running maxima of G(n) / (n log log n) for 16 <= n <= x on x = 2, 4, 8, ... <= N."""
    N = int(N)
    if N > table.N:
        raise ValueError("N beyond sieve limit")
    G = goldbach_G_all(N, q1, q2, a1, a2, table)
    n = np.arange(N + 1, dtype=np.float64)
    ratio = np.zeros(N + 1)
    ok = n >= OMEGA_START
    ratio[ok] = G[ok] / (n[ok] * np.log(np.log(n[ok])))
    rows = []
    kmax = int(math.floor(math.log2(N / 2))) if N >= 2 else -1
    for k in range(kmax + 1):
        x = 2 ** (k + 1)
        seg = ratio[: x + 1]
        best = int(np.argmax(seg))
        rows.append(OmegaRow(x, float(seg[best]), best if seg[best] > 0 else 0,
                             float(G[: x + 1].max())))
    return rows
