"""Dirichlet characters with exact root-of-unity exponents and Conrey labels.

A character of order n is stored as its exponent map e: for every unit m,
chi(m) = exp(2*pi*i * e(m) / n).  Complex values are a derived view.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .arith import euler_phi, factorize

_QUARTER = (1 + 0j, 1j, -1 + 0j, -1j)


def root_of_unity(e: int, n: int) -> complex:
    e %= n
    if (4 * e) % n == 0:
        return _QUARTER[4 * e // n]
    ang = 2 * math.pi * e / n
    return complex(math.cos(ang), math.sin(ang))


@dataclass(frozen=True)
class DirichletCharacter:
    q: int
    label: int
    order: int
    exponents: tuple  # e(m) for m = 0..q-1, -1 where gcd(m, q) > 1
    conductor: int
    induced_from: int  # Conrey label of the primitive character mod conductor

    @property
    def is_principal(self) -> bool:
        return self.order == 1

    @property
    def is_real(self) -> bool:
        return self.order <= 2

    @property
    def is_primitive(self) -> bool:
        return self.conductor == self.q

    @property
    def parity(self) -> int:
        """0 if chi(-1) = 1, else 1."""
        e = self.exponents[(self.q - 1) % self.q] if self.q > 1 else 0
        return 0 if e == 0 else 1

    @property
    def conj_label(self) -> int:
        return pow(self.label, -1, self.q) if self.q > 1 else 1

    def exponent(self, m: int) -> int | None:
        """e(m) in Z/order, or None when gcd(m, q) > 1."""
        e = self.exponents[m % self.q]
        return None if e < 0 else e

    def __call__(self, m: int) -> complex:
        return char_value(self, m)

    def values(self) -> np.ndarray:
        """chi(m) for m = 0..q-1 as a complex array."""
        return np.array([char_value(self, m) for m in range(self.q)], dtype=np.complex128)


def char_value(chi: DirichletCharacter, m: int) -> complex:
    e = chi.exponents[m % chi.q]
    if e < 0:
        return 0j
    return root_of_unity(e, chi.order)


@dataclass(frozen=True)
class CharacterGroup:
    q: int
    characters: tuple
    generators: tuple  # ((g mod q, order of g), ...) one per cyclic factor

    def __len__(self) -> int:
        return len(self.characters)

    def __iter__(self):
        return iter(self.characters)

    def by_label(self, label: int) -> DirichletCharacter:
        label %= self.q
        if self.q == 1:
            label = 1
        for chi in self.characters:
            if chi.label == label:
                return chi
        raise KeyError(f"no character with label {label} mod {self.q}")

    @property
    def principal(self) -> DirichletCharacter:
        return self.characters[0]

    def conjugate(self, chi: DirichletCharacter) -> DirichletCharacter:
        return self.by_label(chi.conj_label)


# ------------------------------------------------------------------ Conrey


def _is_primitive_root(g: int, m: int) -> bool:
    phi = euler_phi(m)
    if math.gcd(g, m) != 1:
        return False
    return all(pow(g, phi // p, m) != 1 for p, _ in factorize(phi))


@lru_cache(maxsize=None)
def conrey_generator(p: int) -> int:
    """Least g that is a primitive root modulo p and p**2 (odd p)."""
    g = 2
    while not (_is_primitive_root(g, p) and _is_primitive_root(g, p * p)):
        g += 1
    return g


def _local_logs(p: int, e: int):
    """Discrete-log data for (Z/p^e)^*.

    Returns (denominator, logfn) with logfn(m) -> tuple of component logs,
    and pairing(la, lb) -> exponent numerator over ``denominator``.
    """
    pe = p**e
    if p == 2:
        if e == 1:
            return 1, {1: (0, 0)}, lambda la, lb: 0
        logs = {}
        mod_pow = 1
        a_order = 1 << max(e - 2, 0)
        for a in range(a_order):
            for eps_idx, eps in enumerate((1, pe - 1)):
                logs[(eps * mod_pow) % pe] = (eps_idx, a)
            mod_pow = (mod_pow * 5) % pe
        den = 2 * a_order if e >= 3 else 2

        def pair(la, lb):
            num = (la[0] * lb[0]) * (den // 2)
            if e >= 3:
                num += la[1] * lb[1] * (den // a_order)
            return num

        return den, logs, pair
    g = conrey_generator(p)
    phi = pe - pe // p
    logs = {}
    x = 1
    for k in range(phi):
        logs[x] = (k,)
        x = (x * g) % pe
    return phi, logs, lambda la, lb: la[0] * lb[0]


def _group_generators(q: int) -> tuple:
    fac = factorize(q)
    gens = []
    for p, e in fac:
        pe = p**e
        rest = q // pe
        local = []
        if p == 2:
            if e == 2:
                local.append((3, 2))
            elif e >= 3:
                local += [(pe - 1, 2), (5, 1 << (e - 2))]
        else:
            local.append((conrey_generator(p) % pe, pe - pe // p))
        for g, order in local:
            gens.append((_lift(g, pe, 1, rest), order))
    return tuple(gens)


def _lift(x: int, m: int, y: int, n: int) -> int:
    if n == 1:
        return x % m
    if m == 1:
        return y % n
    return (x * n * pow(n, -1, m) + y * m * pow(m, -1, n)) % (m * n)


def _conrey_exponents(q: int):
    """Exponent numerators over a common denominator D for every label."""
    fac = factorize(q)
    local = [(p**e, *_local_logs(p, e)) for p, e in fac]
    D = 1
    for _, den, _, _ in local:
        D = D * den // math.gcd(D, den)
    units = [m for m in range(1, q + 1) if math.gcd(m, q) == 1] if q > 1 else [1]
    table = {}
    for label in units:
        row = [-1] * q
        for m in units:
            num = 0
            for pe, den, logs, pair in local:
                num += pair(logs[label % pe], logs[m % pe]) * (D // den)
            row[m % q] = num % D
        table[label % q if q > 1 else 1] = row
    return D, table


def _reduce(row, D):
    g = D
    for v in row:
        if v > 0:
            g = math.gcd(g, v)
    order = D // g
    return order, tuple(v // g if v >= 0 else -1 for v in row)


def _conductor(q: int, order: int, exps) -> int:
    for f in sorted(d for d in range(1, q + 1) if q % d == 0):
        if all(exps[m] in (0, -1) for m in range(1, q, f) if math.gcd(m, q) == 1):
            return f
    return q


@lru_cache(maxsize=None)
def enumerate_characters(q: int) -> CharacterGroup:
    """All phi(q) characters mod q, in ascending Conrey label order."""
    if q < 1:
        raise ValueError("modulus must be >= 1")
    if q == 1:
        chi = DirichletCharacter(1, 1, 1, (0,), 1, 1)
        return CharacterGroup(1, (chi,), ())
    D, table = _conrey_exponents(q)
    chars = []
    for label in sorted(table):
        order, exps = _reduce(table[label], D)
        f = _conductor(q, order, exps)
        induced = label if f == q else _primitive_label(q, order, exps, f)
        chars.append(DirichletCharacter(q, label, order, exps, f, induced))
    return CharacterGroup(q, tuple(chars), _group_generators(q))


def _primitive_label(q: int, order: int, exps, f: int) -> int:
    if f == 1:
        return 1
    target = []
    for b in range(f):
        if math.gcd(b, f) != 1:
            target.append(None)
            continue
        m = b
        while math.gcd(m, q) != 1:
            m += f
        target.append((exps[m % q], order))
    for cand in enumerate_characters(f):
        if cand.conductor != f or cand.order != order:
            continue
        if all(t is None or cand.exponents[b] == t[0] for b, t in enumerate(target)):
            return cand.label
    raise RuntimeError(f"no primitive character mod {f} induces this character mod {q}")


def conductor_and_primitive(chi: DirichletCharacter) -> tuple[int, DirichletCharacter]:
    """Conductor f of chi and the primitive character mod f inducing it."""
    return chi.conductor, enumerate_characters(chi.conductor).by_label(chi.induced_from)


# ---------------------------------------------------------- orthogonality


@lru_cache(maxsize=None)
def _cyclotomic(n: int) -> tuple:
    """Coefficients (low degree first) of the n-th cyclotomic polynomial."""
    poly = [-1] + [0] * (n - 1) + [1]  # x^n - 1
    for d in range(1, n):
        if n % d == 0:
            poly = _poly_divexact(poly, list(_cyclotomic(d)))
    return tuple(poly)


def _poly_divexact(num, den):
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1] // den[-1]
        out[i] = c
        for j, dj in enumerate(den):
            num[i + j] -= c * dj
    assert not any(num), "inexact cyclotomic division"
    return out


def _poly_rem(num, den):
    num = list(num)
    for i in range(len(num) - len(den), -1, -1):
        c = num[i + len(den) - 1]
        if c:
            for j, dj in enumerate(den):
                num[i + j] -= c * dj
    return num[: len(den) - 1]


def exact_root_sum(counts: dict, D: int) -> int:
    """Evaluate sum_k counts[k] * zeta_D**k exactly; it must be a rational integer."""
    poly = [0] * D
    for k, c in counts.items():
        poly[k % D] += c
    rem = _poly_rem(poly, list(_cyclotomic(D))) if D > 1 else [sum(poly)]
    if any(rem[1:]):
        raise ArithmeticError("root-of-unity sum is not a rational integer")
    return rem[0] if rem else 0


def orthogonality_sum(q: int, a: int, m: int, exact: bool = False):
    """sum over chi mod q of conj(chi(a)) * chi(m).

    ``exact=True`` evaluates in Z[zeta_D] and returns an int; otherwise a
    complex float.
    """
    if math.gcd(a, q) != 1:
        raise ValueError(f"a={a} is not a unit mod {q}")
    group = enumerate_characters(q)
    if math.gcd(m, q) != 1:
        return 0 if exact else 0j
    if exact:
        D = 1
        for chi in group:
            D = D * chi.order // math.gcd(D, chi.order)
        counts = {}
        for chi in group:
            k = (chi.exponents[m % q] - chi.exponents[a % q]) * (D // chi.order)
            counts[k % D] = counts.get(k % D, 0) + 1
        return exact_root_sum(counts, D)
    total = 0j
    for chi in group:
        total += char_value(chi, a).conjugate() * char_value(chi, m)
    return total


def gauss_sum(chi: DirichletCharacter) -> complex:
    q = chi.q
    return sum(
        char_value(chi, a) * complex(math.cos(2 * math.pi * a / q), math.sin(2 * math.pi * a / q))
        for a in range(1, q + 1)
    )


def character_table_csv(group: CharacterGroup) -> str:
    """CSV rows: label, order, conductor, flags, exponents (x marks non-units)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label", "order", "conductor", "is_principal", "is_real", "is_primitive",
                "induced_from", "exponents"])
    for chi in group:
        exps = " ".join("x" if e < 0 else str(e) for e in chi.exponents)
        w.writerow([chi.label, chi.order, chi.conductor, int(chi.is_principal),
                    int(chi.is_real), int(chi.is_primitive), chi.induced_from, exps])
    return buf.getvalue()
