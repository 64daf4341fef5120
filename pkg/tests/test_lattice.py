import math

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from poincare_zeros.lattice import (
    NotCoprimeError,
    TermIndex,
    bezout_complete,
    enumerate_pairs,
    tail_bound,
    term_geometry,
    term_sigma,
    term_sigma_deriv,
)
from poincare_zeros.logcx import Precision

P106 = Precision(106)


@pytest.fixture(autouse=True)
def high_mp():
    # test-side arithmetic must not round the 106-bit results back to 53 bits
    with mpmath.workprec(200):
        yield


def direct_sigma(z, k, m, a, b, c, d):
    """exp(2 pi i m gz) / (cz+d)^k in plain mpmath complex arithmetic."""
    with mpmath.workprec(200):
        z = mpmath.mpc(z)
        gz = (a * z + b) / (c * z + d)
        return mpmath.exp(2j * mpmath.pi * m * gz) / (c * z + d) ** k


def wrap(ph):
    """Distance of a phase difference from the nearest multiple of 2 pi."""
    two_pi = 2 * mpmath.pi
    return abs(ph - two_pi * mpmath.nint(ph / two_pi))


def as_mpc(v):
    return mpmath.exp(v.logmag) * mpmath.expj(v.phase)


def close_rel(a, b, tol):
    return abs(a - b) <= tol * abs(b)


def test_bezout_examples():
    assert bezout_complete(0, 1) == (1, 0)
    assert bezout_complete(1, 0) == (0, -1)
    assert bezout_complete(2, 1) == (1, 0)
    with pytest.raises(NotCoprimeError):
        bezout_complete(2, 4)
    with pytest.raises(NotCoprimeError):
        bezout_complete(0, -1)


@given(st.integers(1, 500), st.integers(-500, 500))
def test_bezout_canonical(c, d):
    if math.gcd(c, d) != 1:
        return
    a, b = bezout_complete(c, d)
    assert a * d - b * c == 1 and 0 <= a < c
    assert TermIndex.of(c, d).is_canonical


def brute(z, radius):
    out = set()
    for c in range(0, 12):
        for d in range(-30, 31):
            if math.gcd(c, d) != 1 or (c == 0 and d != 1):
                continue
            if abs(c * z + d) <= radius:
                out.add((c, d))
    return out


def test_enumerate_examples():
    got = [(t.c, t.d, t.a, t.b) for t in enumerate_pairs(1j, 1.0)]
    assert got == [(0, 1, 1, 0), (1, 0, 0, -1)]
    assert enumerate_pairs(2j, 0.5) == []


@given(st.floats(-0.5, 0.5), st.floats(0.8, 3.0), st.floats(1.0, 6.0))
def test_enumerate_matches_brute_force(x, y, r):
    z = complex(x, y)
    got = enumerate_pairs(z, r)
    pairs = [t.pair for t in got]
    assert len(set(pairs)) == len(pairs)
    assert set(pairs) == brute(z, r)
    keys = [(abs(c * z + d) ** 2, c, d) for c, d in pairs]
    assert all(keys[i][0] <= keys[i + 1][0] + 1e-12 for i in range(len(keys) - 1))


def test_term_sigma_examples():
    k, m = 24, 3
    s01 = term_sigma(1j, k, m, TermIndex.of(0, 1), P106)
    assert float(s01.logmag) == pytest.approx(-2 * math.pi * m, rel=1e-15)
    assert float(s01.phase) == pytest.approx(0.0, abs=1e-25)
    s10 = term_sigma(1j, k, m, TermIndex.of(1, 0), P106)
    assert float(s10.logmag) == pytest.approx(-2 * math.pi * m, rel=1e-15)
    assert float(s10.phase) == pytest.approx(math.remainder(-k * math.pi / 2, 2 * math.pi), abs=1e-25)


@given(
    st.floats(-0.5, 0.5), st.floats(0.9, 3.0), st.integers(1, 6), st.integers(-8, 8),
    st.sampled_from([12, 24, 1200]), st.integers(0, 150),
)
def test_term_sigma_matches_direct_oracle(x, y, c, d, k, m):
    if math.gcd(c, d) != 1:
        return
    idx = TermIndex.of(c, d)
    z = mpmath.mpc(x, y)
    got = term_sigma(z, k, m, idx, P106)
    ref = direct_sigma(z, k, m, idx.a, idx.b, idx.c, idx.d)
    with mpmath.workprec(106):
        assert abs(got.logmag - mpmath.log(abs(ref))) < 1e-25 * max(1, abs(got.logmag))
        assert wrap(got.phase - mpmath.arg(ref)) < 1e-20 * (1 + k)


@given(st.integers(1, 40), st.integers(-40, 40), st.integers(-5, 5), st.floats(-0.5, 0.5), st.floats(0.9, 3.0))
def test_bezout_choice_invariance(c, d, j, x, y):
    if math.gcd(c, d) != 1:
        return
    idx = TermIndex.of(c, d)
    alt = TermIndex(c, d, idx.a + j * c, idx.b + j * d)
    z = mpmath.mpc(x, y)
    a = term_sigma(z, 1200, 90, idx, P106)
    b = term_sigma(z, 1200, 90, alt, P106)
    with mpmath.workprec(106):
        assert abs(a.logmag - b.logmag) < 1e-26
        assert wrap(a.phase - b.phase) < 1e-20


@given(st.floats(0.87, 5.0), st.integers(1, 6), st.integers(-8, 8))
def test_conjugation_symmetry_lrho(t, c, d):
    if math.gcd(c, d) != 1 or math.gcd(c, -c - d) != 1:
        return
    z = mpmath.mpc(0.5, t)
    a = as_mpc(term_sigma(z, 1200, 90, TermIndex.of(c, d), P106))
    b = as_mpc(term_sigma(z, 1200, 90, TermIndex.of(c, -c - d), P106))
    assert close_rel(a, mpmath.conj(b), 1e-20)


@given(st.floats(1.0, 5.0), st.integers(1, 6), st.integers(-8, 8))
def test_conjugation_symmetry_li(t, c, d):
    if math.gcd(c, d) != 1:
        return
    z = mpmath.mpc(0, t)
    a = as_mpc(term_sigma(z, 1200, 150, TermIndex.of(c, d), P106))
    b = as_mpc(term_sigma(z, 1200, 150, TermIndex.of(c, -d), P106))
    assert close_rel(a, mpmath.conj(b), 1e-20)


def test_term_derivative_examples():
    k, m = 24, 2
    z = mpmath.mpc(0.3, 1.5)
    s = term_sigma(z, k, m, TermIndex.of(0, 1), P106)
    ds = term_sigma_deriv(z, k, m, TermIndex.of(0, 1), P106)
    assert close_rel(as_mpc(ds), 2j * mpmath.pi * m * as_mpc(s), 1e-25)
    idx = TermIndex.of(1, 0)
    ratio = as_mpc(term_sigma_deriv(1j, k, m, idx, P106)) / as_mpc(term_sigma(1j, k, m, idx, P106))
    assert close_rel(ratio, -2j * mpmath.pi * m + k * 1j, 1e-25)


@given(st.integers(1, 5), st.integers(-5, 5), st.sampled_from([(24, 2), (120, 9), (1200, 90)]))
def test_term_derivative_vs_finite_difference(c, d, km):
    if math.gcd(c, d) != 1:
        return
    k, m = km
    idx = TermIndex.of(c, d)
    z = mpmath.mpc(0.3, 1.5)
    h = mpmath.mpf("1e-6")
    with mpmath.workprec(106):
        fd = (as_mpc(term_sigma(z + h, k, m, idx, P106)) - as_mpc(term_sigma(z - h, k, m, idx, P106))) / (2 * h)
        exact = as_mpc(term_sigma_deriv(z, k, m, idx, P106))
        # the central difference error is h^2 |sigma'''| / 6; scale by the log-derivative size
        ld = abs(exact / as_mpc(term_sigma(z, k, m, idx, P106)))
        assert abs(fd - exact) <= max(1e-8, float(ld) ** 2 * 1e-12) * abs(exact)


def test_term_derivative_vs_finite_difference_spec_point():
    z = mpmath.mpc(0.3, 1.5)
    h = mpmath.mpf("1e-6")
    idx = TermIndex.of(1, -1)
    with mpmath.workprec(106):
        fd = (as_mpc(term_sigma(z + h, 12, 1, idx, P106)) - as_mpc(term_sigma(z - h, 12, 1, idx, P106))) / (2 * h)
        exact = as_mpc(term_sigma_deriv(z, 12, 1, idx, P106))
        assert abs(fd - exact) <= 1e-8 * abs(exact)


def test_geometry_examples():
    g = term_geometry(complex(0.3, 1.7), 0.075, TermIndex.of(0, 1))
    assert g.w == pytest.approx(1.7)
    assert term_geometry(1j, 0.075, TermIndex.of(1, 0)).w == pytest.approx(1.0)
    alpha = 0.075
    w_star = 1 / (4 * math.pi * alpha)
    best = max(-2 * math.pi * alpha * w + 0.5 * math.log(w) for w in [w_star * (1 + 0.001 * i) for i in range(-500, 501)])
    peak = -0.5 + 0.5 * math.log(w_star)
    assert best == pytest.approx(peak, abs=1e-9)
    from poincare_zeros.lattice import i_of_w

    assert i_of_w(w_star, alpha) == pytest.approx(peak, abs=1e-15)


@given(st.floats(-0.5, 0.5), st.floats(0.9, 4.0), st.integers(0, 5), st.integers(-6, 6), st.floats(0.01, 0.3))
def test_log_r_identity(x, y, c, d, alpha):
    if math.gcd(c, d) != 1 or (c == 0 and d != 1):
        return
    g = term_geometry(complex(x, y), alpha, TermIndex.of(c, d))
    assert abs(g.log_r + 0.5 * math.log(y) - g.I) <= 1e-13 * (1 + abs(g.I))


@given(st.floats(-0.5, 0.5), st.floats(0.9, 4.0), st.integers(0, 5), st.integers(-6, 6))
def test_sigma_is_r_e_itheta_to_the_k(x, y, c, d):
    if math.gcd(c, d) != 1 or (c == 0 and d != 1):
        return
    k, m = 1200, 90
    idx = TermIndex.of(c, d)
    with mpmath.workprec(106):
        g = term_geometry(mpmath.mpc(x, y), mpmath.mpf(m) / k, idx, prec=P106)
    s = term_sigma(mpmath.mpc(x, y), k, m, idx, P106)
    with mpmath.workprec(106):
        assert abs(k * g.log_r - s.logmag) < 1e-20 * k
        assert wrap(k * g.theta - s.phase) < 1e-18 * k


@given(st.floats(-0.5, 0.5), st.floats(0.9, 4.0), st.integers(0, 5), st.integers(-6, 6), st.sampled_from([12, 100, 1200]))
def test_sigma_below_norm_power(x, y, c, d, k):
    if math.gcd(c, d) != 1 or (c == 0 and d != 1) or x * x + y * y < 1:
        return
    s = term_sigma(complex(x, y), k, 7, TermIndex.of(c, d))
    assert s.logmag <= -k * math.log(abs(c * complex(x, y) + d)) + 1e-9


def test_tail_bound_examples():
    rs = [2, 2.5, 3, 5, 10, 50, 200]
    vals = [tail_bound(1j, 1200, r) for r in rs]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    assert tail_bound(1j, 1200, 3) < -1300
    with pytest.raises(ValueError):
        tail_bound(1j, 1200, 1.5)


@pytest.mark.parametrize("z", [complex(0.1, 0.9), complex(0.5, 0.87), complex(-0.3, 2.0), complex(0.0, 5.0)])
@pytest.mark.parametrize("k", [12, 24])
def test_tail_bound_dominates_brute_force_tail(z, k):
    r = 3.0
    tail = 0.0
    for c in range(0, 60):
        for d in range(-400, 401):
            if math.gcd(c, d) != 1 or (c == 0 and d != 1):
                continue
            n = abs(c * z + d)
            if n > r:
                tail += n ** (-k)
    assert math.log(tail) <= tail_bound(z, k, r)
