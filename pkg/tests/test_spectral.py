import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tritronquee import spectral as spc


def test_grid_endpoints_and_spacing():
    g = spc.build_grid(512, -10.0, 10.0)
    assert g.nodes[0] == -10.0 and g.nodes[-1] == 10.0
    assert np.all(np.diff(g.nodes) > 0)
    assert g.nodes[1] - g.nodes[0] == pytest.approx(10 * (1 - math.cos(math.pi / 512)), rel=1e-10)
    assert g.nodes[1] - g.nodes[0] == pytest.approx(1.88e-4, rel=2e-3)
    assert np.allclose(g.nodes, -g.nodes[::-1], atol=1e-15)


def test_grid_errors():
    with pytest.raises(ValueError):
        spc.build_grid(4, 0, 1, min_nodes=8)
    with pytest.raises(ValueError):
        spc.build_grid(16, 1, 1)


def test_polynomial_derivatives_exact():
    g = spc.build_grid(16, -2.0, 3.0)
    D = spc.build_diff_ops(g)
    x = g.nodes
    assert np.max(np.abs(D.D1 @ x ** 2 - 2 * x)) < 1e-12
    assert np.max(np.abs(D.D2 @ x ** 3 - 6 * x)) < 1e-10
    assert np.max(np.abs(D.D4 @ x ** 4 - 24)) < 1e-7
    assert np.max(np.abs(D[3] @ x ** 3 - 6)) < 1e-8


def test_rows_annihilate_constants():
    D = spc.build_diff_ops(spc.build_grid(64, -1, 1))
    for k in range(1, 5):
        # negative-sum diagonal: zero up to the rounding of the row sum itself
        scale = np.abs(D[k]).max()
        assert np.max(np.abs(D[k].sum(axis=1))) < 64 * np.finfo(float).eps * scale


def test_spectral_accuracy_sin():
    g = spc.build_grid(40, -3.0, 3.0)
    D = spc.build_diff_ops(g)
    assert np.max(np.abs(D.D2 @ np.sin(g.nodes) + np.sin(g.nodes))) < 1e-10


def test_integration_inverts_differentiation():
    g = spc.build_grid(48, -1.0, 2.0)
    I1, I2, I3, I4 = spc.build_integration_ops(g)
    x = g.nodes
    f = np.exp(x)
    assert np.max(np.abs(I1 @ f - (np.exp(x) - np.exp(-1.0)))) < 1e-13
    s = x + 1
    for k, Ik in enumerate((I1, I2, I3, I4), start=1):
        assert np.max(np.abs(Ik @ np.ones_like(x) - s ** k / math.factorial(k))) < 1e-13


def test_interpolation():
    g = spc.build_grid(40, -1.0, 2.0)
    q = np.linspace(-1, 2, 101)
    assert np.max(np.abs(spc.interpolate(g, np.exp(g.nodes), q) - np.exp(q))) < 1e-12
    assert spc.interpolate(g, np.exp(g.nodes), g.nodes[7]) == np.exp(g.nodes[7])
    with pytest.raises(ValueError):
        spc.interpolate(g, np.exp(g.nodes), 2.5)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(8, 60), a=st.floats(-20, 0), L=st.floats(0.5, 30), deg=st.integers(0, 7))
def test_polynomials_reproduced(n, a, L, deg):
    g = spc.build_grid(n, a, a + L)
    s = (g.nodes - a) / L
    p = s ** deg
    q = np.linspace(a, a + L, 13)
    assert np.max(np.abs(spc.interpolate(g, p, q) - ((q - a) / L) ** deg)) < 1e-11
    if deg >= 1:
        D1 = spc.build_diff_ops(g).D1
        assert np.max(np.abs(D1 @ p - deg * s ** (deg - 1) / L)) < 1e-9 * n ** 2 / L
