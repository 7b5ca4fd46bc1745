import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from goldbach_ap.characters import char_value, enumerate_characters
from goldbach_ap.zeros import (
    ExponentConfig,
    PairingError,
    SiegelDatum,
    ZeroCountError,
    ZeroFileError,
    ZeroSet,
    count_window,
    empty_zeros,
    find_zeros,
    load_zeros,
    save_zeros,
    smooth_count,
    zero_residuals,
    zero_sum_H,
    zeros_for_modulus,
    zterm,
)

ZETA = enumerate_characters(1).principal


def coarse_scan_zeros(T, step=0.05):
    """Independent oracle: sign changes of mpmath.siegelz on a 0.05 grid, then bisection."""
    f = lambda t: float(mpmath.siegelz(t))  # noqa: E731
    out = []
    t0, f0 = 1.0, f(1.0)
    n = int((T - 1.0) / step)
    for k in range(1, n + 1):
        t1 = 1.0 + k * step
        f1 = f(t1)
        if f0 * f1 < 0:
            a, b, fa = t0, t1, f0
            for _ in range(60):
                m = 0.5 * (a + b)
                fm = f(m)
                if fa * fm <= 0:
                    b = m
                else:
                    a, fa = m, fm
            out.append(0.5 * (a + b))
        t0, f0 = t1, f1
    return out


@pytest.fixture(scope="module")
def zeta50():
    return find_zeros(ZETA, 50.0)


def test_zeta_to_50(zeta50):
    oracle = coarse_scan_zeros(50.0)
    assert len(zeta50.positive) == 10 == len(oracle)
    assert zeta50.positive[0] == pytest.approx(14.1347251, abs=1e-6)
    np.testing.assert_allclose(zeta50.positive, oracle, atol=1e-9)
    assert np.all(zeta50.betas == 0.5)
    # symmetric for a real character
    np.testing.assert_array_equal(np.sort(-zeta50.gammas), zeta50.gammas)


def test_residuals_independent(zeta50):
    assert np.all(zero_residuals(zeta50, ZETA) < 1e-8)
    for g in zeta50.positive[:4]:
        assert abs(complex(mpmath.zeta(mpmath.mpc(0.5, g)))) < 1e-8


@pytest.mark.parametrize("q,label", [(5, 2), (7, 3), (11, 2)])
def test_complex_character_zeros(q, label):
    chi = enumerate_characters(q).by_label(label)
    assert not chi.is_real
    zs = find_zeros(chi, 40.0)
    vals = [complex(char_value(chi, a)) for a in range(q)]
    for g in zs.gammas[::3]:
        assert abs(complex(mpmath.dirichlet(mpmath.mpc(0.5, g), vals))) < 1e-8
    conj = find_zeros(enumerate_characters(q).conjugate(chi), 40.0)
    np.testing.assert_allclose(np.sort(-zs.gammas), conj.gammas, atol=1e-9)


@pytest.mark.parametrize("T", [25.0, 50.0, 100.0])
@pytest.mark.parametrize("q", [3, 4, 7, 8, 12])
def test_count_window(q, T):
    for label, zs in zeros_for_modulus(q, T).items():
        chi = enumerate_characters(q).by_label(label)
        f = chi.conductor
        zs.count_check(conductor=f)
        assert abs(len(zs) - smooth_count(T, f)) <= count_window(T, f)


def test_count_check_detects_gap(zeta50):
    # claims height 200 but only carries the zeros below 50
    holes = ZeroSet(1, 1, 200.0, zeta50.betas, zeta50.gammas)
    with pytest.raises(ZeroCountError) as info:
        holes.count_check()
    lo, hi = info.value.gap
    assert hi - lo == pytest.approx(200.0 - zeta50.gammas[-1])


def test_zeroset_invariants():
    with pytest.raises(ValueError):
        ZeroSet(1, 1, 10.0, np.array([0.5]), np.array([11.0]))
    with pytest.raises(ValueError):
        ZeroSet(1, 1, 10.0, np.array([0.5, 0.5]), np.array([3.0, 2.0]))
    with pytest.raises(ValueError):
        ZeroSet(1, 1, 10.0, np.array([0.6]), np.array([3.0]))
    ZeroSet(1, 1, 10.0, np.array([0.6]), np.array([3.0]), grh=False)


def test_save_load_roundtrip(tmp_path, zeta50):
    p = tmp_path / "z.zset"
    save_zeros(zeta50, p)
    lines = p.read_text().splitlines()
    assert lines[0] == "ZSET1 q=1 conrey=1 T=50.0 grh=1"
    assert len(lines) == 11
    back = load_zeros(p)
    assert back == zeta50


def test_complex_roundtrip_needs_conjugate(tmp_path):
    g = enumerate_characters(5)
    chi = g.by_label(2)
    zs = find_zeros(chi, 30.0)
    p, c = tmp_path / "a", tmp_path / "b"
    save_zeros(zs, p)
    save_zeros(zs.conjugate(chi.conj_label), c)
    assert load_zeros(p, c) == zs
    with pytest.raises(ZeroFileError):
        load_zeros(p)


def test_bad_files(tmp_path, zeta50):
    p = tmp_path / "z"
    p.write_text("ZSET1 q=1 conrey=1 T=50.0 grh=1\n0.5 21.0\n0.5 14.1\n")
    with pytest.raises(ZeroFileError):
        load_zeros(p)
    p.write_text("ZSET2 q=1\n")
    with pytest.raises(ZeroFileError):
        load_zeros(p)
    save_zeros(zeta50, p)
    with pytest.raises(ZeroFileError):
        load_zeros(p, q=3)


def test_siegel_datum_validation():
    SiegelDatum(0.9, 4, 3)
    with pytest.raises(ValueError):
        SiegelDatum(0.4, 4, 3)
    with pytest.raises(ValueError):
        SiegelDatum(0.9, 5, 2)  # complex
    with pytest.raises(ValueError):
        SiegelDatum(0.9, 4, 1)  # principal


def test_exponent_config():
    e = ExponentConfig(0.5, {7: 0.8})
    assert e.b_star(7) == 0.8 and e.b_star(3) == 0.5
    with pytest.raises(ValueError):
        ExponentConfig(0.4)


# ------------------------------------------------------------- zero sums


def test_H_empty_is_zero():
    assert zero_sum_H(1e4, 5, 2, empty_zeros(5)) == 0.0


def test_H_single_pair():
    g = 14.1347251
    zs = {1: ZeroSet(1, 1, 20.0, np.array([0.5, 0.5]), np.array([-g, g]))}
    rho = complex(0.5, g)
    ref = -2 * (100 ** (rho + 1) / (rho * (rho + 1))).real
    assert zero_sum_H(100.0, 1, 0, zs) == pytest.approx(ref, rel=1e-13)


@pytest.fixture(scope="module")
def z12():
    return zeros_for_modulus(12, 100.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(2.0, 1e6), st.sampled_from([1, 5, 7, 11]), st.floats(1.0, 99.0))
def test_H_additive_over_slices(X, a, cut):
    zs = zeros_for_modulus(12, 100.0)
    lo = {k: v.slice(-1.0, cut) for k, v in zs.items()}
    hi = {k: v.slice(cut, 100.0) for k, v in zs.items()}
    whole, imag = zero_sum_H(X, 12, a, zs, return_imag=True)
    parts = zero_sum_H(X, 12, a, lo) + zero_sum_H(X, 12, a, hi)
    assert whole == pytest.approx(parts, rel=1e-11, abs=1e-9 * X ** 1.5)
    assert imag <= 1e-10 * max(abs(whole), 1e-300) + 1e-300


def test_H_at_one_matches_direct(z12):
    total = 0j
    for chi in enumerate_characters(12):
        rho = z12[chi.label].rhos
        total += char_value(chi, 5).conjugate() * np.sum(1 / (rho * (rho + 1)))
    assert zero_sum_H(1.0, 12, 5, z12) == pytest.approx(-total.real / 4, rel=1e-12)


def test_H_pairing_error():
    bad = {1: ZeroSet(1, 1, 20.0, np.array([0.5]), np.array([14.13]))}
    with pytest.raises(PairingError):
        zero_sum_H(100.0, 1, 0, bad)


def test_zterm_absent_siegel(z12):
    assert zterm(1e4, 12, 5, 12, 7, None, None, z12, z12) == 0.0


def test_zterm_scalar_oracle():
    q = 4
    sd = SiegelDatum(0.9, q, 3)
    X = 1e5
    val = zterm(X, q, 1, q, 1, sd, sd, empty_zeros(q), empty_zeros(q))
    ref = math.gamma(0.9) ** 2 / math.gamma(2.8) * X ** 1.8 / 4
    assert val == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("a1,a2", [(1, 1), (1, 3), (3, 5)])
def test_zterm_swap_symmetry(a1, a2):
    z4 = zeros_for_modulus(4, 60.0)
    z8 = zeros_for_modulus(8, 60.0)
    s4 = SiegelDatum(0.85, 4, 3)
    s8 = SiegelDatum(0.7, 8, 5)
    X = 3e4
    v = zterm(X, 4, a1, 8, a2 if a2 % 2 else 1, s4, s8, z4, z8)
    w = zterm(X, 8, a2 if a2 % 2 else 1, 4, a1, s8, s4, z8, z4)
    assert v == pytest.approx(w, rel=1e-12)
    # one-sided Siegel term
    assert zterm(X, 4, a1, 8, 1, s4, None, z4, z8) != 0.0


def test_zterm_pairs_direct_sum():
    z4 = zeros_for_modulus(4, 40.0)
    sd = SiegelDatum(0.8, 4, 3)
    X = 1e4
    got = zterm(X, 4, 3, 1, 0, sd, None, z4, zeros_for_modulus(1, 40.0))
    rhos = zeros_for_modulus(1, 40.0)[1].rhos
    mp = mpmath.mpf
    ref = sum(mpmath.gamma(mp("0.8")) * mpmath.gamma(mpmath.mpc(r)) / mpmath.gamma(mp("1.8") + mpmath.mpc(r))
              * mpmath.power(X, mp("0.8") + mpmath.mpc(r)) for r in rhos)
    ref = -float(mpmath.re(ref)) / 2  # chi~(3) = -1, phi(4) = 2, phi(1) = 1
    assert got == pytest.approx(ref, rel=1e-9)
