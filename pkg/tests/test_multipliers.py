import numpy as np
import pytest
from scipy.integrate import solve_ivp

from critwave.multipliers import (
    damped_wave_propagator,
    duhamel_weight,
    heat_duhamel_weight,
    heat_multiplier,
)


def _ode_oracle(t, lam, w0, w1):
    """Integrate w'' + w' + lam*w = 0 to time t with tight tolerances."""
    sol = solve_ivp(
        lambda s, y: [y[1], -y[1] - lam * y[0]],
        [0.0, t],
        [w0, w1],
        rtol=1e-12,
        atol=1e-14,
        dense_output=True,
    )
    return sol.y[:, -1]


@pytest.mark.parametrize("lam", [0.0, 0.01, 0.249, 0.25, 0.2500001, 1.0, 40.0])
def test_columns_match_ode_oracle(lam):
    t = 0.7
    e11, e12, e21, e22 = (float(np.asarray(v)) for v in damped_wave_propagator(t, lam))
    c1 = _ode_oracle(t, lam, 1.0, 0.0)
    c2 = _ode_oracle(t, lam, 0.0, 1.0)
    assert abs(e11 - c1[0]) < 1e-9
    assert abs(e21 - c1[1]) < 1e-9
    assert abs(e12 - c2[0]) < 1e-9
    assert abs(e22 - c2[1]) < 1e-9


def test_determinant_identity():
    rng = np.random.default_rng(7)
    lam = rng.uniform(0.0, 50.0, 300)
    for t in rng.uniform(0.01, 10.0, 20):
        e11, e12, e21, e22 = damped_wave_propagator(t, lam)
        assert np.allclose(e11 * e22 - e12 * e21, np.exp(-t), rtol=1e-11, atol=1e-13)


def test_semigroup_property():
    rng = np.random.default_rng(8)
    for _ in range(50):
        s, t = rng.uniform(0.05, 3.0, 2)
        lam = rng.uniform(0.0, 30.0)
        a = np.array(damped_wave_propagator(s, lam)).reshape(2, 2)
        b = np.array(damped_wave_propagator(t, lam)).reshape(2, 2)
        c = np.array(damped_wave_propagator(s + t, lam)).reshape(2, 2)
        assert np.allclose(a @ b, c, rtol=1e-10, atol=1e-12)


def test_branch_continuity_at_quarter():
    # trig, hyperbolic, and series branches must agree near lam = 1/4
    t = 2.0
    base = np.array(damped_wave_propagator(t, 0.25))
    for dlam in (1e-8, -1e-8, 1e-7, -1e-7):
        other = np.array(damped_wave_propagator(t, 0.25 + dlam))
        assert np.max(np.abs(other - base)) < 1e-7


def test_duhamel_position_weight_oracle():
    # particular solution of w'' + w' + lam*w = 1 with zero data at t = h
    for lam in (0.0, 0.1, 0.25, 4.0):
        h = 0.3
        sol = solve_ivp(
            lambda s, y: [y[1], 1.0 - y[1] - lam * y[0]],
            [0.0, h],
            [0.0, 0.0],
            rtol=1e-12,
            atol=1e-14,
        )
        w = duhamel_weight(h, lam)
        assert abs(float(np.asarray(w)) - sol.y[0, -1]) < 1e-10


def test_heat_weight_is_integral_of_multiplier():
    # closed form of integral_0^h exp(-s*lam) ds, checked by quadrature
    h = 0.2
    for lam in (0.0, 1e-12, 0.5, 30.0):
        s = np.linspace(0.0, h, 20001)
        quad = np.trapezoid(np.exp(-s * lam), s)
        assert abs(float(np.asarray(heat_duhamel_weight(h, lam))) - quad) < 1e-9


def test_heat_multiplier_trivial():
    assert float(np.asarray(heat_multiplier(0.7, 0.0))) == 1.0
    assert abs(float(np.asarray(heat_multiplier(2.0, 3.0))) - np.exp(-6.0)) < 1e-15


def test_weights_positive_and_vectorized():
    lam = np.linspace(0.0, 100.0, 1001)
    w = duhamel_weight(0.05, lam)
    assert w.shape == lam.shape
    assert np.all(w > 0)
    assert np.all(heat_duhamel_weight(0.05, lam) > 0)
