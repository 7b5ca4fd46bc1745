"""Nontrivial zeros of Dirichlet L-functions and the sums built from them.

Zeros are located on the critical line only: sign changes of the rotated
function Z(t) (see :func:`goldbach_ap.lfunctions.rotated_L`) on an adaptive
grid, plus a local-minimum probe for close pairs, refined with Brent's
method.  Imprimitive characters share the zeros of their primitive
inducer (the extra Euler-factor zeros lie on Re s = 0).
"""
from __future__ import annotations

import logging
import math
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .arith import euler_phi
from .characters import DirichletCharacter, char_value, enumerate_characters
from .lfunctions import loggamma, rotated_L

log = logging.getLogger(__name__)

T_CEILING = 1.0e3
XTOL = 1e-12
RESIDUAL_LIMIT = 1e-8
HEADER_RE = re.compile(
    r"^ZSET1 q=(?P<q>\d+) conrey=(?P<label>\d+) T=(?P<T>\S+) grh=(?P<grh>[01])\s*$"
)


class ZeroCountError(RuntimeError):
    """Zero count outside the smooth-count window; ``gap`` is the suspect interval."""

    def __init__(self, msg, gap=None, found=None, expected=None):
        super().__init__(msg)
        self.gap = gap
        self.found = found
        self.expected = expected


class ZeroFileError(ValueError):
    pass


class PairingError(ArithmeticError):
    pass


def smooth_count(T: float, q: int) -> float:
    """(T/pi) log(qT / (2 pi e)): expected number of zeros with |gamma| <= T."""
    if T <= 0:
        return 0.0
    return T / math.pi * math.log(q * T / (2 * math.pi * math.e))


def count_window(T: float, q: int) -> float:
    return 0.05 * T * math.log(q * (T + 2)) + 10.0


@dataclass(frozen=True, eq=False)
class ZeroSet:
    """Zeros beta + i*gamma of L(s, chi), |gamma| <= T, sorted by gamma.

    ``q`` and ``label`` name the character the set belongs to; for an
    imprimitive character these are the zeros of its primitive inducer.
    """

    q: int
    label: int
    T: float
    betas: np.ndarray
    gammas: np.ndarray
    grh: bool = True
    source: str = "computed"

    def __post_init__(self):
        b = np.asarray(self.betas, dtype=np.float64)
        g = np.asarray(self.gammas, dtype=np.float64)
        object.__setattr__(self, "betas", b)
        object.__setattr__(self, "gammas", g)
        if b.shape != g.shape or b.ndim != 1:
            raise ValueError("betas and gammas must be 1-d arrays of equal length")
        if g.size and np.any(np.diff(g) < 0):
            raise ValueError("ordinates are not sorted")
        if g.size and np.max(np.abs(g)) > self.T:
            raise ValueError(f"ordinate beyond truncation height T={self.T}")
        if np.any((b <= 0) | (b >= 1)):
            raise ValueError("real parts must lie in (0, 1)")
        if self.grh and np.any(b != 0.5):
            raise ValueError("grh set but some beta != 1/2")

    @property
    def rhos(self) -> np.ndarray:
        return self.betas + 1j * self.gammas

    def __len__(self) -> int:
        return self.gammas.shape[0]

    @property
    def positive(self) -> np.ndarray:
        return self.gammas[self.gammas > 0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ZeroSet):
            return NotImplemented
        return (
            self.q == other.q and self.label == other.label and self.T == other.T
            and self.grh == other.grh and np.array_equal(self.betas, other.betas)
            and np.array_equal(self.gammas, other.gammas)
        )

    def slice(self, lo: float, hi: float) -> "ZeroSet":
        """Zeros with lo < |gamma| <= hi (heights stay labelled by T)."""
        a = np.abs(self.gammas)
        keep = (a > lo) & (a <= hi)
        return ZeroSet(self.q, self.label, self.T, self.betas[keep], self.gammas[keep],
                       self.grh, self.source)

    def truncate(self, T: float) -> "ZeroSet":
        keep = np.abs(self.gammas) <= T
        return ZeroSet(self.q, self.label, min(T, self.T), self.betas[keep],
                       self.gammas[keep], self.grh, self.source)

    def conjugate(self, label: int) -> "ZeroSet":
        """Zeros of the conjugate character: (beta, -gamma)."""
        return ZeroSet(self.q, label, self.T, self.betas[::-1], -self.gammas[::-1],
                       self.grh, self.source)

    def relabel(self, q: int, label: int, source: str | None = None) -> "ZeroSet":
        return ZeroSet(q, label, self.T, self.betas, self.gammas, self.grh,
                       source or self.source)

    def count_check(self, conductor: int | None = None) -> None:
        """Raise ZeroCountError unless the count sits inside the smooth window."""
        f = conductor or self.q
        n = len(self)
        expect = smooth_count(self.T, f)
        if abs(n - expect) > count_window(self.T, f):
            raise ZeroCountError(
                f"found {n} zeros with |gamma| <= {self.T}, expected about {expect:.1f}",
                gap=_largest_gap(self.gammas, self.T), found=n, expected=expect,
            )


def _largest_gap(gammas, T):
    pts = np.concatenate([[-T], np.asarray(gammas), [T]])
    k = int(np.argmax(np.diff(pts)))
    return float(pts[k]), float(pts[k + 1])


@dataclass(frozen=True)
class SiegelDatum:
    """Synthetic exceptional zero beta of L(s, chi~), chi~ real and non-principal."""

    beta: float
    q: int
    label: int

    def __post_init__(self):
        if not 0.5 < self.beta < 1.0:
            raise ValueError("Siegel beta must lie in (1/2, 1)")
        chi = self.character
        if not chi.is_real or chi.is_principal:
            raise ValueError("Siegel character must be real and non-principal")

    @property
    def character(self) -> DirichletCharacter:
        return enumerate_characters(self.q).by_label(self.label)


@dataclass(frozen=True)
class ExponentConfig:
    """b* per modulus (default 1/2, the GRH value)."""

    default: float = 0.5
    per_modulus: dict = field(default_factory=dict)

    def __post_init__(self):
        for v in [self.default, *self.per_modulus.values()]:
            if not 0.5 <= v <= 1.0:
                raise ValueError("b* must lie in [1/2, 1]")

    def b_star(self, q: int) -> float:
        return self.per_modulus.get(q, self.default)


# ------------------------------------------------------------ zero search


def _grid(lo: float, hi: float, q: int) -> np.ndarray:
    """Scan points with step 1/(4 max(1, density)) between lo and hi."""
    pts = [lo]
    t = lo
    while t < hi:
        d = math.log(max(abs(t), 1.0) * q / (2 * math.pi)) / (2 * math.pi)
        t = min(hi, t + 0.25 / max(1.0, d))
        pts.append(t)
    return np.array(pts)


def _scan_window(chi, lo, hi):
    t = _grid(lo, hi, chi.q)
    z = rotated_L(t, chi)
    roots = []
    f = lambda x: rotated_L(x, chi)  # noqa: E731
    sgn = np.sign(z)
    for k in range(len(t) - 1):
        if z[k] == 0.0:
            if k > 0 or lo == 0.0:
                roots.append(float(t[k]))
            continue
        if sgn[k] * sgn[k + 1] < 0:
            roots.append(brentq(f, t[k], t[k + 1], xtol=XTOL, rtol=4 * np.finfo(float).eps))
    if z[-1] == 0.0:
        roots.append(float(t[-1]))
    # Close pairs hidden between grid points: |Z| dips without a sign change.
    for k in range(1, len(t) - 1):
        if sgn[k - 1] == sgn[k] == sgn[k + 1] != 0 and abs(z[k]) < abs(z[k - 1]) and abs(z[k]) < abs(z[k + 1]):
            s = sgn[k]
            res = minimize_scalar(lambda x: s * f(x), bounds=(t[k - 1], t[k + 1]),
                                  method="bounded", options={"xatol": 1e-10})
            if res.fun < 0:
                log.info("close pair near t=%.6f for q=%d label=%d", res.x, chi.q, chi.label)
                roots.append(brentq(f, t[k - 1], res.x, xtol=XTOL))
                roots.append(brentq(f, res.x, t[k + 1], xtol=XTOL))
    return roots


def find_zeros(chi: DirichletCharacter, T: float, threads: int = 1,
               ceiling: float = T_CEILING, validate: bool = True) -> ZeroSet:
    """All critical-line zeros of L(s, chi) with |gamma| <= T (chi primitive)."""
    if not chi.is_primitive:
        raise ValueError("find_zeros needs a primitive character")
    if not 0 < T <= ceiling:
        raise ValueError(f"T must lie in (0, {ceiling}]")
    lo = 0.0 if chi.is_real else -float(T)
    edges = np.linspace(lo, T, max(1, int(threads)) + 1)
    windows = list(zip(edges[:-1], edges[1:]))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda w: _scan_window(chi, *w), windows))
    else:
        parts = [_scan_window(chi, *w) for w in windows]
    g = np.unique(np.round(np.concatenate([np.asarray(p, dtype=float) for p in parts] or [[]]), 11))
    g = g[(np.abs(g) <= T)]
    if chi.is_real:
        g = g[g > 0]
        g = np.concatenate([-g[::-1], g])
    zs = ZeroSet(chi.q, chi.label, float(T), np.full(g.shape, 0.5), g)
    if validate:
        zs.count_check()
    return zs


def zero_residuals(zs: ZeroSet, chi: DirichletCharacter) -> np.ndarray:
    """|L(rho, chi)| at every stored zero (chi primitive, zeros on the line)."""
    if len(zs) == 0:
        return np.zeros(0)
    return np.abs(rotated_L(zs.gammas, chi))


# --------------------------------------------------------- file handling


def format_zeros(zs: ZeroSet) -> str:
    """Header line then positive ordinates as "beta gamma", ascending."""
    pos = zs.gammas > 0
    lines = [f"ZSET1 q={zs.q} conrey={zs.label} T={float(zs.T)!r} grh={int(zs.grh)}"]
    lines += [f"{float(b)!r} {float(g)!r}" for b, g in zip(zs.betas[pos], zs.gammas[pos])]
    return "\n".join(lines) + "\n"


def save_zeros(zs: ZeroSet, path) -> None:
    Path(path).write_text(format_zeros(zs))


def _read_half(path):
    text = Path(path).read_text().splitlines()
    if not text:
        raise ZeroFileError(f"{path}: empty file")
    m = HEADER_RE.match(text[0])
    if not m:
        raise ZeroFileError(f"{path}: malformed header {text[0]!r}")
    rows = []
    for i, line in enumerate(text[1:], 2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ZeroFileError(f"{path}:{i}: expected 'beta gamma'")
        rows.append((float(parts[0]), float(parts[1])))
    arr = np.array(rows, dtype=np.float64).reshape(-1, 2)
    if arr.size and (np.any(np.diff(arr[:, 1]) <= 0) or arr[0, 1] <= 0):
        raise ZeroFileError(f"{path}: ordinates must be positive and strictly increasing")
    return int(m["q"]), int(m["label"]), float(m["T"]), m["grh"] == "1", arr


def load_zeros(path, conjugate_path=None, q: int | None = None, label: int | None = None,
               validate: bool = True) -> ZeroSet:
    """Read a ZSET1 file; complex characters need the conjugate's file for gamma < 0."""
    fq, flabel, T, grh, arr = _read_half(path)
    if q is not None and fq != q:
        raise ZeroFileError(f"{path}: header modulus {fq} != requested {q}")
    if label is not None and flabel != label:
        raise ZeroFileError(f"{path}: header label {flabel} != requested {label}")
    chi = enumerate_characters(fq).by_label(flabel)
    if chi.is_real:
        neg = arr[::-1]
    else:
        if conjugate_path is None:
            raise ZeroFileError(f"{path}: complex character needs the conjugate's zero file")
        cq, clabel, cT, cgrh, neg = _read_half(conjugate_path)
        if cq != fq or clabel != chi.conj_label:
            raise ZeroFileError(f"{conjugate_path}: not the conjugate of {fq}.{flabel}")
        T = min(T, cT)
        neg = neg[neg[:, 1] <= T][::-1]
        arr = arr[arr[:, 1] <= T]
    betas = np.concatenate([neg[:, 0], arr[:, 0]])
    gammas = np.concatenate([-neg[:, 1], arr[:, 1]])
    try:
        zs = ZeroSet(fq, flabel, T, betas, gammas, grh, f"file({path})")
    except ValueError as exc:
        raise ZeroFileError(f"{path}: {exc}") from exc
    if validate:
        zs.count_check()
    return zs


def zero_file_name(q: int, label: int) -> str:
    return f"zeros_q{q}_c{label}.zset"


# ------------------------------------------------------ per-modulus access

_CACHE: dict = {}


def primitive_zeros(f: int, label: int, T: float, threads: int = 1, directory=None) -> ZeroSet:
    """Zeros of the primitive character f.label up to T, memoised.

    With ``directory`` set, files there are reused when they reach height T
    and fresh computations are written back.
    """
    key = (f, label)
    hit = _CACHE.get(key)
    if hit is not None and hit.T >= T:
        return hit.truncate(T) if hit.T > T else hit
    chi = enumerate_characters(f).by_label(label)
    if directory is not None:
        d = Path(directory)
        p = d / zero_file_name(f, label)
        cp = d / zero_file_name(f, chi.conj_label)
        if p.exists() and (chi.is_real or cp.exists()):
            zs = load_zeros(p, None if chi.is_real else cp, validate=False)
            if zs.T >= T:
                _CACHE[key] = zs
                return zs.truncate(T) if zs.T > T else zs
    zs = find_zeros(chi, T, threads=threads)
    _CACHE[key] = zs
    if not chi.is_real:
        _CACHE[(f, chi.conj_label)] = zs.conjugate(chi.conj_label)
    if directory is not None:
        os.makedirs(directory, exist_ok=True)
        save_zeros(zs, Path(directory) / zero_file_name(f, label))
        if not chi.is_real:
            save_zeros(zs.conjugate(chi.conj_label),
                       Path(directory) / zero_file_name(f, chi.conj_label))
    return zs


def zeros_for_modulus(q: int, T: float, threads: int = 1, directory=None) -> dict:
    """{label: ZeroSet} for every character mod q at common height T."""
    out = {}
    for chi in enumerate_characters(q):
        zs = primitive_zeros(chi.conductor, chi.induced_from, T, threads, directory)
        out[chi.label] = zs.relabel(q, chi.label, source=f"{zs.source} via {chi.conductor}.{chi.induced_from}")
    return out


def empty_zeros(q: int, T: float = 0.0) -> dict:
    return {chi.label: ZeroSet(q, chi.label, T, np.zeros(0), np.zeros(0))
            for chi in enumerate_characters(q)}


# ----------------------------------------------------------- zero sums


def _complex_fsum(z) -> complex:
    z = np.asarray(z, dtype=np.complex128).ravel()
    return complex(math.fsum(z.real), math.fsum(z.imag))


def weighted_zero_terms(q: int, a: int, zeros: dict, siegel: SiegelDatum | None, term):
    """Per-character arrays chi_bar(a) * term(rhos), Siegel zero appended to chi~."""
    parts = []
    for chi in enumerate_characters(q):
        zs = zeros.get(chi.label)
        if zs is None:
            raise KeyError(f"no zero set for character {q}.{chi.label}")
        rhos = zs.rhos
        if siegel is not None and siegel.q == q and siegel.label == chi.label:
            rhos = np.concatenate([rhos, [siegel.beta + 0j]])
        if rhos.size == 0:
            continue
        w = char_value(chi, a).conjugate()
        if w == 0:
            continue
        parts.append(w * term(rhos))
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.complex128)


def zero_sum_H(X: float, q: int, a: int, zeros: dict, siegel: SiegelDatum | None = None,
               return_imag: bool = False):
    """-(1/phi(q)) sum_chi chi_bar(a) sum_rho X^{rho+1} / (rho (rho + 1)).

    Conjugate terms are summed exactly (fsum on real and imaginary parts);
    the leftover imaginary part is a pairing diagnostic.
    """
    if X <= 0:
        raise ValueError("X must be positive")
    lx = math.log(X)
    terms = weighted_zero_terms(q, a, zeros, siegel,
                            lambda r: np.exp((r + 1) * lx) / (r * (r + 1)))
    total = -_complex_fsum(terms) / euler_phi(q)
    value, imag = total.real, abs(total.imag)
    if imag > 1e-8 * abs(value) and imag > 1e-300:
        raise PairingError(f"imaginary residue {imag:.3g} against value {value:.6g}")
    return (value, imag) if return_imag else value


def gamma_pair_terms(r1, r2, lx: float):
    """Gamma(r1) Gamma(r2) / Gamma(r1 + r2 + 1) * X^{r1 + r2} with lx = log X."""
    r1 = np.asarray(r1, dtype=np.complex128)
    r2 = np.asarray(r2, dtype=np.complex128)
    return np.exp(loggamma(r1) + loggamma(r2) - loggamma(r1 + r2 + 1) + (r1 + r2) * lx)


def zterm(X: float, q1: int, a1: int, q2: int, a2: int,
          siegel1: SiegelDatum | None, siegel2: SiegelDatum | None,
          zeros1: dict, zeros2: dict, return_imag: bool = False):
    """Pairs of zeros where at least one member is a Siegel zero.

    Counted once each: (beta1, every zero of every chi2 incl. beta2) and
    (every ordinary zero of chi1, beta2).
    """
    if siegel1 is None and siegel2 is None:
        return (0.0, 0.0) if return_imag else 0.0
    lx = math.log(X)
    terms = []
    if siegel1 is not None:
        w1 = char_value(siegel1.character, a1).conjugate()
        if w1 != 0:
            rest = weighted_zero_terms(q2, a2, zeros2, siegel2,
                                   lambda r: gamma_pair_terms(siegel1.beta, r, lx))
            terms.append(w1 * rest)
    if siegel2 is not None:
        w2 = char_value(siegel2.character, a2).conjugate()
        if w2 != 0:
            rest = weighted_zero_terms(q1, a1, zeros1, None,
                                   lambda r: gamma_pair_terms(r, siegel2.beta, lx))
            terms.append(w2 * rest)
    flat = np.concatenate(terms) if terms else np.zeros(0, dtype=np.complex128)
    total = _complex_fsum(flat) / (euler_phi(q1) * euler_phi(q2))
    return (total.real, abs(total.imag)) if return_imag else total.real
