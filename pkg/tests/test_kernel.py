import math

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from poincare_zeros import kernel
from poincare_zeros.lattice import TermIndex, term_sigma
from poincare_zeros.logcx import Precision

compiled = pytest.mark.skipif(kernel.compiled_evaluate is None, reason="compiled kernel not built")

LOG_TOL = math.log(1e-20)
MODES = [kernel.MODE_FULL, kernel.MODE_DERIV, kernel.MODE_LRHO, kernel.MODE_LI]


def test_backend_selected():
    assert kernel.BACKEND in ("compiled", "python")
    if kernel.compiled_evaluate is not None and kernel.BACKEND == "compiled":
        assert kernel.evaluate is kernel.compiled_evaluate


@compiled
@given(
    st.floats(-0.5, 0.5),
    st.floats(0.87, 6.0),
    st.sampled_from([(24, 2), (120, 9), (1200, 90), (1200, 150)]),
    st.sampled_from(MODES),
)
def test_backends_bit_identical(x, y, km, mode):
    k, m = km
    if mode == kernel.MODE_LRHO:
        x = 0.5
    elif mode == kernel.MODE_LI:
        x = 0.0
    a = kernel.python_evaluate(x, y, k, m, mode, LOG_TOL, 2.0, 4096.0)
    b = kernel.compiled_evaluate(x, y, k, m, mode, LOG_TOL, 2.0, 4096.0)
    assert a == b


@pytest.mark.parametrize("y", [1.5, 3.0, 5.0, 12.0])
def test_radius_starts_at_dominant_row(y):
    # for large y the c = 1 terms dominate; they must be inside the first radius
    out = kernel.evaluate(0.1, y, 1200, 90, kernel.MODE_FULL, LOG_TOL, 2.0, 4096.0)
    status, lmax, radius = out[0], out[1], out[8]
    assert status == 0
    assert radius >= y + 1.0
    dom = term_sigma(complex(0.1, y), 1200, 90, TermIndex.of(1, 0), Precision(53))
    other = term_sigma(complex(0.1, y), 1200, 90, TermIndex.of(0, 1), Precision(53))
    assert lmax == pytest.approx(max(float(dom.logmag), float(other.logmag)), abs=1e-9)


def test_cap_reported():
    out = kernel.evaluate(0.0, 1.2, 6, 0, kernel.MODE_FULL, LOG_TOL, 2.0, 64.0)
    assert out[0] == 1


def test_kernel_sum_matches_termwise_oracle():
    # the normalized sum against an explicit mpmath sum over the same radius
    x, y, k, m = 0.2, 1.9, 120, 9
    status, lmax, s_re, s_im, *_rest, radius, _tail = kernel.evaluate(x, y, k, m, kernel.MODE_FULL, LOG_TOL)
    assert status == 0
    with mpmath.workprec(200):
        z = mpmath.mpc(x, y)
        total = mpmath.mpc(0)
        c = 0
        while c * y <= radius:
            for d in range(-int(radius) - 2, int(radius) + 3):
                if abs(c * z + d) > radius or math.gcd(c, d) != 1 or (c == 0 and d != 1):
                    continue
                idx = TermIndex.of(c, d)
                total += mpmath.exp(2j * mpmath.pi * m * (idx.a * z + idx.b) / (c * z + d)) / (c * z + d) ** k
            c += 1
        got = mpmath.exp(lmax) * mpmath.mpc(s_re, s_im)
        assert abs(got - total) <= 1e-13 * abs(total)
