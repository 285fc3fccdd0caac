import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tritronquee import series as ser
from conftest import cplx


def test_leading_coefficient():
    a = ser.coefficients(0.0, 0)
    assert a.shape == (1,)
    assert a[0] == pytest.approx(-6 ** (1 / 3))


@pytest.mark.parametrize("label", ["1", "-2", "0+1j", "0.5+0.25j"])
def test_coefficients_match_direct_substitution(oracles, label):
    ref = np.array([cplx(p) for p in oracles["series"][label]])
    a = ser.coefficients(complex(label), len(ref) - 1)
    assert np.max(np.abs(a - ref) / np.maximum(1, np.abs(ref))) < 1e-13


def test_t0_is_seven_sparse():
    a = ser.coefficients(0.0, 70)
    nz = np.nonzero(np.abs(a) > 0)[0]
    assert set(nz) <= set(range(0, 71, 7))
    assert a[7] == pytest.approx(ser.A0 ** -6)  # c_6 = 1


def test_exact_cn_reproduces_table():
    for n in range(1, 15):
        assert ser.exact_cn(n) == ser.CN_TABLE[n]


@pytest.mark.parametrize("t", [0, 1, -1, 2, -2, 1j])
def test_cn_table(t):
    assert max(ser.cn_table_check(t)) < 1e-10


def test_t0_recurrence_cross_consistency():
    b = ser.coefficients_t0(30)
    a = ser.coefficients(0.0, 70)
    for n in range(11):
        assert float(b[n]) == pytest.approx(a[7 * n].real, rel=1e-12)
    lm, _ = ser.coefficients_log(0.0, 210)
    for n in range(31):
        assert abs(lm[7 * n] - math.log(abs(float(b[n])))) < 1e-10


def test_float_overflow_index():
    with pytest.raises(ser.CoefficientOverflow) as err:
        ser.coefficients(0.0, 900)
    assert err.value.index == 812
    lm, _ = ser.coefficients_log(0.0, 819, dps=20)
    assert math.isfinite(lm[819]) and lm[819] > math.log(1.7e308)


def test_mp_and_float_agree():
    a = ser.coefficients(0.3 - 0.2j, 60)
    b = np.array([complex(v) for v in ser.coefficients_mp(0.3 - 0.2j, 60)])
    assert np.max(np.abs(a - b) / np.maximum(1, np.abs(b))) < 1e-12


def test_negative_M_rejected():
    with pytest.raises(ValueError):
        ser.coefficients(0, -1)


class TestBranchedPoint:
    def test_rejects_origin(self):
        with pytest.raises(ValueError):
            ser.BranchedPoint(0.0, 0.0)

    def test_sheets_differ(self):
        a = ser.BranchedPoint(8.0, 0.0).cube_root()
        b = ser.BranchedPoint(8.0, 2 * math.pi).cube_root()
        assert a == pytest.approx(2.0)
        assert b == pytest.approx(2 * np.exp(2j * math.pi / 3))

    def test_from_complex_near(self):
        p = ser.BranchedPoint.from_complex(-4.0, near=3 * math.pi)
        assert p.argument == pytest.approx(3 * math.pi)
        assert p.modulus == pytest.approx(4.0)


def test_evaluate_derivative_matches_finite_difference():
    rep = ser.auto_truncate(0.5, ser.BranchedPoint(9.0, 0.3), 1e-12)
    h = 1e-5
    f = lambda r: ser.evaluate(rep.series, ser.BranchedPoint(r, 0.3))
    fd = (f(9.0 + h) - f(9.0 - h)) / (2 * h) / np.exp(0.3j)
    assert ser.evaluate(rep.series, ser.BranchedPoint(9.0, 0.3), 1) == pytest.approx(fd, rel=1e-8)


def test_evaluate_rejects_order():
    with pytest.raises(ValueError):
        ser.evaluate([1.0], ser.BranchedPoint(1, 0), 5)


def test_series_satisfies_ode_at_large_x():
    t, p = 0.7, ser.BranchedPoint(20.0, 0.4)
    rep = ser.auto_truncate(t, p, 1e-14)
    d = [ser.evaluate(rep.series, p, k) for k in range(5)]
    r = d[4] + 10 * d[1] ** 2 + 20 * d[0] * d[2] + 40 * (d[0] ** 3 - 6 * t * d[0] + 6 * p.value)
    assert abs(r) < 1e-9 * abs(240 * p.value)


class TestAutoTruncate:
    def test_threshold_met(self):
        rep = ser.auto_truncate(0.0, ser.BranchedPoint(12.0, 0.0), 1e-6)
        assert rep.last_term_size < 1e-6
        assert not rep.hit_cap
        assert rep.series.M == rep.M_selected

    def test_unreachable_near_origin(self):
        with pytest.raises(ser.ThresholdUnreachable) as err:
            ser.auto_truncate(0.0, ser.BranchedPoint(4.0, 0.0), 1e-12)
        assert 1e-12 < err.value.minimum < 1e-9

    def test_non_strict_returns_optimal(self):
        rep = ser.auto_truncate(0.0, ser.BranchedPoint(4.0, 0.0), 1e-12, strict=False)
        sizes = ser.term_sizes(ser.coefficients(0.0, 300), ser.BranchedPoint(4.0, 0.0))
        assert rep.last_term_size == pytest.approx(
            min(sizes[n:n + ser.ENVELOPE_WINDOW].max() for n in range(250)))

    def test_invalid_threshold(self):
        with pytest.raises(ValueError):
            ser.auto_truncate(0.0, ser.BranchedPoint(4.0, 0.0), 0.0)


@settings(max_examples=25, deadline=None)
@given(r=st.floats(2.0, 30.0), arg=st.floats(-10.0, 10.0), n=st.integers(-3, 3),
       tr=st.floats(-1.0, 1.0), ti=st.floats(-1.0, 1.0))
def test_rotation_covariance_of_series(r, arg, n, tr, ti):
    """S(t~, x~) = e^{-4 pi i n / 7} S(t, x) for x~ = e^{2 pi i n/7} x, t~ = e^{6 pi i n/7} t.

    The sheet of x~ is the one with argument ``arg x + 2 pi n/7 - 2 pi n``;
    only for n divisible by 3 does that coincide with ``arg x + 2 pi n/7``.
    """
    t = complex(tr, ti)
    a = ser.coefficients(t, 40)
    at = ser.coefficients(t * np.exp(6j * math.pi * n / 7), 40)
    x = ser.BranchedPoint(r, arg)
    xt = ser.BranchedPoint(r, arg + 2 * math.pi * n / 7 - 2 * math.pi * n)
    lhs = ser.evaluate(at, xt)
    rhs = np.exp(-4j * math.pi * n / 7) * ser.evaluate(a, x)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs))


@settings(max_examples=25, deadline=None)
@given(t=st.complex_numbers(max_magnitude=3.0))
def test_real_t_gives_real_coefficients(t):
    a = ser.coefficients(complex(t.real, 0.0), 40)
    assert np.max(np.abs(a.imag)) == 0.0


def test_write_csv(tmp_path):
    p = tmp_path / "a.csv"
    ser.write_coefficients_csv(p, ser.coefficients(0, 7))
    rows = p.read_text().splitlines()
    assert rows[0].startswith("n,re_a")
    assert len(rows) == 9
    assert rows[2].endswith("-inf")


def test_naive_sheet_breaks_covariance_for_n1():
    a = ser.coefficients(0.0, 30)
    x = ser.BranchedPoint(10.0, 0.0)
    xt = ser.BranchedPoint(10.0, 2 * math.pi / 7)
    rhs = np.exp(-4j * math.pi / 7) * ser.evaluate(a, x)
    assert abs(ser.evaluate(a, xt) - rhs) > 1.0
