import cmath
import json
import math
from types import SimpleNamespace

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from tritronquee import analysis as an
from tritronquee import bvp_solver as bvp
from tritronquee import series as ser

x_, t_, lam_ = sp.symbols("x t lam")
U = sp.symbols("u0:5")


def _ode_u4():
    u, u1, u2 = U[0], U[1], U[2]
    return -10 * u1 ** 2 - 20 * u * u2 - 40 * (u ** 3 - 6 * t_ * u + 6 * x_)


def _total_dx(expr):
    out = sp.diff(expr, x_)
    for k in range(4):
        out += sp.diff(expr, U[k]) * U[k + 1]
    return sp.expand(out.subs(U[4], _ode_u4()))


class TestHamiltoniansSymbolic:
    def test_H1(self):
        H1 = an.H1_values(x_, t_, *U[:4])
        assert sp.simplify(_total_dx(H1) - U[0]) == 0

    def test_H0(self):
        H0 = an.H0_values(x_, t_, *U[:4])
        assert sp.simplify(_total_dx(H0) - sp.Rational(3, 2) * U[0] ** 2) == 0

    def test_lax_zero_curvature(self):
        one = np.ones(3)
        A, B = an.lax_matrices(1.0, one, 1.0, one, one, one, one)
        assert A.shape == B.shape == (2, 2, 3)
        # the same formulas on symbols
        u, u1, u2, u3 = U[:4]
        a = (-u1 * lam_ - 3 * u * u1 - u3 / 4) / 60
        b = (lam_ ** 2 + u * lam_ + sp.Rational(3, 2) * u ** 2 + u2 / 4 - 15 * t_) / 30
        c = (lam_ ** 3 - u * lam_ ** 2 - (u ** 2 / 2 + u2 / 4 + 15 * t_) * lam_ + 2 * u ** 3
             - u1 ** 2 / 4 + u * u2 / 2 + 30 * x_) / 30
        As = sp.Matrix([[a, b], [c, -a]])
        Bs = sp.Matrix([[0, 1], [lam_ - 2 * u, 0]])
        M = As.applyfunc(_total_dx) - sp.diff(Bs, lam_) + As * Bs - Bs * As
        assert sp.simplify(sp.expand(M)) == sp.zeros(2, 2)
        # numeric agreement with the array implementation
        vals = {u: 0.3, u1: -0.2, u2: 1.1, u3: 0.7, x_: 0.5, t_: -1.0, lam_: 2.0}
        An, _ = an.lax_matrices(2.0, 0.5, -1.0, 0.3, -0.2, 1.1, 0.7)
        assert np.allclose(An, np.array(As.subs(vals), dtype=complex))


class TestOnSolution:
    def test_hamiltonians(self, u0_t0):
        h = an.hamiltonians(u0_t0)
        assert h.r1_max < 1e-6 and h.r0_max < 1e-6
        xi = u0_t0.xi[h.interior]
        assert xi.min() == pytest.approx(-8, abs=0.2) and xi.max() == pytest.approx(8, abs=0.2)

    def test_lax(self, u0_t0):
        assert an.lax_residual(u0_t0) < 1e-6

    def test_residuals_detect_perturbation(self, u0_t0):
        bad = bvp.LineSolution(**{**u0_t0.__dict__})
        bump = 1e-3 * np.exp(-u0_t0.xi ** 2)
        bad.derivatives = u0_t0.derivatives.copy()
        bad.derivatives[0] = bad.derivatives[0] + bump
        bad.u = bad.derivatives[0]
        assert an.hamiltonians(bad).r1_max > 1e-4

    def test_kdv_residual_small(self):
        tmpl = bvp.preset_domain("U0-real", Nc=256)
        assert an.kdv_residual(-1.0, 1e-3, tmpl) < 1e-5

    def test_kdv_grid_mismatch(self, u0_t0, u0_t0_256):
        with pytest.raises(ValueError):
            an.kdv_from_solutions(u0_t0, u0_t0, u0_t0_256, 1e-3)


def _decay_signal(k=0.8, period=1.7, amp=2.0, lo=-10.5, hi=-3.5, n=6000):
    x = np.linspace(lo, hi, n)
    s = np.abs(x) ** (7 / 6)
    d = amp * np.abs(x) ** -0.25 * np.exp(-k * s) * np.cos(2 * math.pi * s / period + 0.4)
    return x, d


class TestFitDecay:
    @settings(max_examples=20, deadline=None)
    @given(k=st.floats(0.3, 1.2), period=st.floats(1.0, 3.0))
    def test_recovers_rate_and_period(self, k, period):
        x, d = _decay_signal(k, period)
        fit = an.fit_decay(x, d + 0j, np.zeros_like(x))
        assert fit.rate == pytest.approx(k, rel=5e-3)
        assert fit.period == pytest.approx(period, rel=5e-3)
        assert fit.r_squared > 0.999

    def test_noise_floor(self):
        x, d = _decay_signal()
        with pytest.raises(an.SignalBelowNoise):
            an.fit_decay(x, d + 0j, np.ones_like(x))

    def test_json(self):
        x, d = _decay_signal()
        js = an.fit_decay(x, d + 0j, np.zeros_like(x)).to_json()
        json.dumps(js)
        assert {"rate", "period", "r2"} <= set(js)


def test_series_on_negative_axis():
    x = np.array([-5.0, -8.0])
    S, err = an.series_on_negative_axis(x)
    p = ser.BranchedPoint(5.0, 3 * math.pi)
    rep = ser.auto_truncate(0.0, p, 1e-300, strict=False)
    assert S[0] == ser.evaluate(rep.series, p)
    # optimal truncation error shrinks rapidly with |x|
    assert err[1] < 1e-3 * err[0]


def _fake_solution(f, lo=-20.0, hi=10.0):
    dom = SimpleNamespace(x=lambda xi: np.asarray(xi) + 0j)
    return SimpleNamespace(xi=np.array([lo, hi]), evaluate=lambda q: f(np.asarray(q)), domain=dom)


def test_oscillation_support_synthetic():
    # unit-amplitude wave on [-12, 2], tiny wave elsewhere
    def f(q):
        env = np.where((q > -12) & (q < 2), 1.0, 1e-3)
        return env * np.sin(3 * q) + 0.01 * q
    sup = an.oscillation_support(_fake_solution(f))
    assert sup.left == pytest.approx(-12, abs=1.1)
    assert sup.right == pytest.approx(2, abs=1.1)


def test_oscillation_support_monotone():
    sup = an.oscillation_support(_fake_solution(lambda q: -q))
    assert math.isnan(sup.left)


class TestLaplace:
    def test_constant(self):
        r, th = np.linspace(1, 3, 11), np.linspace(-1, 1, 9)
        out = an.laplace_polar(r, th, np.full((11, 9), 2 - 1j))
        assert np.allclose(out, 2 - 1j)

    def test_log_r_second_order(self):
        errs = []
        for n in (11, 21, 41):
            r, th = np.linspace(1, 3, n), np.linspace(-1, 1, n)
            R, TH = np.meshgrid(r, th, indexing="ij")
            exact = np.log(R) + 1j * R * np.cos(TH)  # both harmonic
            B = exact.copy()
            B[1:-1, 1:-1] = 0
            errs.append(np.max(np.abs(an.laplace_polar(r, th, B) - exact)))
        assert errs[-1] < 1e-3
        assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5

    def test_degenerate(self):
        with pytest.raises(ValueError):
            an.laplace_polar(np.arange(2.0), np.arange(5.0), np.zeros((2, 5)))


def test_compare_and_bounded():
    r, th = np.linspace(1, 10, 5), np.linspace(-1, 1, 3)
    a = an.SectorField(r, th, np.zeros((5, 3), complex), "rays")
    th2 = np.linspace(-1, 1, 5)
    u2 = np.zeros((5, 5), complex)
    u2[:, 2] = 0.5  # shared column theta = 0
    u2[:, 1] = 9.0  # not shared
    b = an.SectorField(r, th2, u2, "laplace")
    assert an.compare_fields(a, b) == 0.5
    assert an.field_bounded(a)
    big = an.SectorField(r, th2, u2 * 100, "laplace")
    assert not an.field_bounded(big)
    with pytest.raises(ValueError):
        an.compare_fields(a, an.SectorField(r * 2, th, a.u, "laplace"))


def test_sector_outputs(tmp_path):
    r, th = np.linspace(1, 2, 3), np.linspace(0, 1, 2)
    f = an.SectorField(r, th, np.ones((3, 2)) * (1 + 2j), "rays")
    f.write_csv(tmp_path / "f.csv")
    f.write_json(tmp_path / "f.json")
    assert (tmp_path / "f.csv").read_text().splitlines()[0] == "r,theta,re_u,im_u"
    assert json.loads((tmp_path / "f.json").read_text())["shape"] == [3, 2]


class TestAnchors:
    def test_bad_family(self):
        with pytest.raises(ValueError):
            an.anchor_domain("typeIII")

    def test_origin_data_needs_origin(self):
        s = bvp.solve_line(bvp.preset_domain("U0-offset", b=0.8j, Nc=256))
        with pytest.raises(ValueError):
            an.origin_data(s)

    def test_anchor_matches_frozen_oracle(self, oracles, u0_t0):
        u0, ux0 = an.origin_data(u0_t0)
        o = oracles["bvp"]["0.0"]
        assert u0 == pytest.approx(o["u"][3], abs=1e-9)
        assert ux0 == pytest.approx(o["ux0"], abs=1e-8)

    @pytest.mark.parametrize("m", [1, 2])
    def test_rotated_anchor(self, u0_t0, m):
        s = bvp.solve_line(an.anchor_domain("typeII", m, 0.0, 256), bvp.SolverOptions(tol=1e-10))
        u0 = an.origin_data(s)[0]
        assert u0 == pytest.approx(an.origin_data(u0_t0)[0] * cmath.exp(-12j * math.pi * m / 7),
                                   abs=1e-8)

    def test_bad_method(self):
        with pytest.raises(ValueError):
            an.sector_field(method="spline")


def test_coefficient_report():
    rep = an.coefficient_asymptotics_report([70, 140, 280, 560])
    assert len(rep["rows"]) == 4 and rep["monotone"]
    assert all(r["rel_log_error"] < 0.1 for r in rep["rows"])


def test_invariant_suite_quick():
    res = an.invariant_suite(quick=True)
    assert len(res) == 5
    assert all(ok for _, ok, _ in res), res
