import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from zsl.soliton import Background, BoxTooSmallWarning, background_components, eval_Q, eval_Qx, ode_residual
from zsl.spectral import Grid2D


def test_eval_Q_values():
    assert eval_Q(0.0) == pytest.approx(math.sqrt(2), abs=1e-12)
    assert eval_Q(1.0) == pytest.approx(2 * math.sqrt(2) / (math.e + 1 / math.e), rel=1e-14)
    big = eval_Q(40.0)
    assert 0 <= big < 1e-16
    assert eval_Q(1e4) == 0.0 and not math.isnan(eval_Q(1e4))


@given(st.floats(-30, 30))
def test_Q_solves_ode_pointwise(x):
    # Q'' = Q - Q^3 checked via the closed-form derivative and a finite difference of Q'
    h = 1e-5
    qxx = (eval_Qx(x + h) - eval_Qx(x - h)) / (2 * h)
    q = eval_Q(x)
    assert abs(qxx - q + q ** 3) < 1e-8


@given(st.floats(-50, 50))
def test_Q_even_and_positive(x):
    assert eval_Q(x) == eval_Q(-x)
    assert eval_Q(x) >= 0


def test_ode_residual_small_and_refines():
    r256 = ode_residual(Grid2D(256, 8))
    r512 = ode_residual(Grid2D(512, 8))
    assert r256 < 1e-8
    assert r512 <= r256


def test_small_box_warns():
    with pytest.warns(BoxTooSmallWarning):
        ode_residual(Grid2D(64, 8, Lx=10.0))


def test_background_fields():
    g = Grid2D(64, 16)
    bg = Background(g)
    assert np.all(bg.Q > 0)
    assert bg.Q.max() == pytest.approx(math.sqrt(2), abs=1e-8)
    # mirrored grid points give identical values
    np.testing.assert_array_equal(bg.Q[1:, 0], bg.Q[1:, 0][::-1])
    with pytest.raises(ValueError):
        bg.Q[0, 0] = 1.0


def test_background_components():
    bg = Background(Grid2D(64, 16))
    c0 = background_components(bg, 0.0)
    np.testing.assert_allclose(c0["F_r"], math.sqrt(2) * bg.Q)
    assert np.all(c0["G_r"] == 0)
    c1 = background_components(bg, math.pi / 2)
    np.testing.assert_allclose(c1["F_r"], 0, atol=1e-15)
    np.testing.assert_allclose(c1["G_r"], math.sqrt(2) * bg.Q)
    for t in (0.3, 2.0, -7.1):
        c = background_components(bg, t)
        np.testing.assert_allclose(c["F_r"] ** 2 + c["G_r"] ** 2, 2 * bg.Q2, atol=1e-12)
        assert np.all(c["P_r"] == 0) and np.all(c["V_r"] == 0)
        assert np.all(c["H_r"][1] == 0)
