"""Dirichlet L-functions: Hurwitz-zeta evaluation, log-Gamma, rotated Z(t).

L(s, chi) = q**-s * sum_{a=1}^{q} chi(a) zeta(s, a/q), with the Hurwitz
zeta summed by Euler-Maclaurin in :mod:`goldbach_ap.kernels`.
"""
from __future__ import annotations

import cmath
import math
from functools import lru_cache

import mpmath
import numpy as np

from . import kernels
from .characters import DirichletCharacter, char_value, gauss_sum

IMAG_CEILING = 1.0e4
L_TOL = 1e-13

# Lanczos coefficients, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])
_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)


class PoleError(ValueError):
    pass


class AccuracyError(ValueError):
    pass


def loggamma(z):
    """log Gamma(z) for complex z (scalar or array), Lanczos approximation.

    Values with Re z < 1/2 are shifted up with log Gamma(z) = log Gamma(z+1) - log z,
    so the result is a log of Gamma(z) but not necessarily the principal
    branch; exponentiated ratios are unaffected.
    """
    z = np.asarray(z, dtype=np.complex128)
    scalar = z.ndim == 0
    z = np.atleast_1d(z).copy()
    bad = (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))
    if bad.any():
        raise PoleError("Gamma has a pole at non-positive integers")
    corr = np.zeros_like(z)
    low = z.real < 0.5
    while low.any():
        corr[low] -= np.log(z[low])
        z[low] += 1.0
        low = z.real < 0.5
    zm = z - 1.0
    x = np.full_like(zm, _LANCZOS[0])
    for k in range(1, len(_LANCZOS)):
        x = x + _LANCZOS[k] / (zm + k)
    t = zm + _LANCZOS_G + 0.5
    out = _HALF_LOG_2PI + (zm + 0.5) * np.log(t) - t + np.log(x) + corr
    return complex(out[0]) if scalar else out


def gamma_ratio(num, den):
    """prod Gamma(num_i) / prod Gamma(den_j) via log-Gamma differences.

    ``num`` and ``den`` are sequences of broadcastable complex arrays.
    """
    acc = 0
    for z in num:
        acc = acc + loggamma(z)
    for z in den:
        acc = acc - loggamma(z)
    return np.exp(acc)


@lru_cache(maxsize=None)
def _dd_log_table(r: int, q: int, length: int):
    """log(n + r/q) for n = 0..length-1 as (hi, lo) float64 arrays."""
    hi = np.empty(length)
    lo = np.empty(length)
    with mpmath.workprec(120):
        lq = mpmath.log(q)
        for n in range(length):
            v = mpmath.log(n * q + r) - lq
            h = float(v)
            hi[n] = h
            lo[n] = float(v - h)
    return hi, lo


def _dd_log(x: int, q: int = 1):
    with mpmath.workprec(120):
        v = mpmath.log(x) - mpmath.log(q)
        h = float(v)
        return h, float(v - h)


def _table_length(m: int) -> int:
    return 1 << max(6, int(m).bit_length())


def hurwitz_combination(svals, residues, coeffs, q: int, tol: float = L_TOL):
    """sum_j coeffs[j] * zeta(s, residues[j]/q) at every s; returns (values, error bounds)."""
    svals = np.atleast_1d(np.asarray(svals, dtype=np.complex128))
    alphas = np.array([r / q for r in residues], dtype=np.float64)
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    if np.any(svals == 1) and abs(coeffs.sum()) > 1e-9:
        raise PoleError("zeta(s, a) has a pole at s = 1")
    shifts, err = kernels.em_shifts(svals, alphas.min(), np.abs(coeffs).sum(), tol)
    length = _table_length(int(shifts.max()) + 1)
    tabs = [_dd_log_table(int(r), int(q), length) for r in residues]
    loghi = np.stack([t[0] for t in tabs])
    loglo = np.stack([t[1] for t in tabs])
    vals = kernels.em_series(svals, shifts, alphas, coeffs, loghi, loglo)
    return vals, err


def hurwitz_zeta(s, a_num: int, a_den: int = 1):
    """zeta(s, a_num / a_den)."""
    vals, _ = hurwitz_combination(np.atleast_1d(s), [a_num], [1.0], a_den)
    return vals if np.ndim(s) else complex(vals[0])


def evaluate_L(s, chi: DirichletCharacter, tol: float = L_TOL, return_error: bool = False):
    """L(s, chi) for scalar or array s."""
    s_arr = np.atleast_1d(np.asarray(s, dtype=np.complex128))
    if np.any(np.abs(s_arr.imag) > IMAG_CEILING):
        raise AccuracyError(f"|Im s| above the configured ceiling {IMAG_CEILING}")
    if chi.is_principal and np.any(s_arr == 1):
        raise PoleError("L(s, chi_0) has a pole at s = 1")
    q = chi.q
    residues = [a for a in range(1, q + 1) if math.gcd(a, q) == 1]
    coeffs = [char_value(chi, a) for a in residues]
    vals, err = hurwitz_combination(s_arr, residues, coeffs, q, tol)
    if q > 1:
        hi, lo = _dd_log(q)
        vals = vals * kernels.cpow_neg_numpy(s_arr, hi, lo)
        err = err * q ** (-s_arr.real)
    if np.any(err > max(tol, 1e-12)):
        raise AccuracyError("Euler-Maclaurin remainder bound exceeds tolerance")
    if np.ndim(s) == 0:
        vals, err = complex(vals[0]), float(err[0])
    return (vals, err) if return_error else vals


def root_number(chi: DirichletCharacter) -> complex:
    """epsilon(chi) = tau(chi) / (i**kappa * sqrt(q)) for primitive chi."""
    if not chi.is_primitive:
        raise ValueError("root number needs a primitive character")
    if chi.q == 1:
        return 1 + 0j
    tau = gauss_sum(chi)
    return tau / ((1j) ** chi.parity * math.sqrt(chi.q))


def theta(t, chi: DirichletCharacter):
    """Phase making exp(i*theta) * eps**-1/2 * L(1/2 + it) real."""
    t = np.asarray(t, dtype=np.float64)
    kappa = chi.parity
    lg = loggamma((0.5 + kappa + 1j * t) / 2.0)
    return 0.5 * t * math.log(chi.q / math.pi) + np.imag(lg)


def rotated_L(t, chi: DirichletCharacter, return_imag: bool = False):
    """Real-valued Z(t) = eps**-1/2 e^{i theta(t)} L(1/2 + it, chi) for primitive chi.

    |Z(t)| = |L(1/2 + it, chi)|; sign changes of Z are the ordinates of
    critical-line zeros.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
    eps = root_number(chi)
    rot = np.exp(1j * theta(t_arr, chi)) / cmath.sqrt(eps)
    z = rot * evaluate_L(0.5 + 1j * t_arr, chi)
    re = z.real
    if np.ndim(t) == 0:
        re, z = float(re[0]), z[:1]
        return (re, float(abs(z.imag[0]))) if return_imag else re
    return (re, np.abs(z.imag)) if return_imag else re
