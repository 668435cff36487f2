import math

import numpy as np
import pytest

from deltagreen.core import Curve, Surface, TruncationError
from deltagreen.quadrature import curve_rule, integrate, kress_weights, sphere_rule, time_integral


def test_polynomial_exact():
    assert abs(integrate(lambda x: 5 * x**4, 0.0, 1.0) - 1.0) < 1e-15


def test_endpoint_singularity():
    assert abs(integrate(lambda x: 1 / np.sqrt(x), 0.0, 1.0, rtol=1e-12) - 2.0) < 1e-11


def test_time_integral_gamma_half():
    v = time_integral(lambda t: np.exp(-t) / np.sqrt(t))
    assert abs(v - math.sqrt(math.pi)) < 1e-13


def test_time_integral_slow_tail():
    # int_0^inf exp(-a t) dt = 1/a with a tiny rate
    a = 1e-4
    assert abs(time_integral(lambda t: np.exp(-a * t)) * a - 1) < 1e-12


def test_complex_integrand():
    v = integrate(lambda x: np.exp(1j * x), 0.0, math.pi)
    assert abs(v - 2j) < 1e-14


def test_nonconvergence_raises():
    with pytest.raises(TruncationError):
        integrate(lambda x: 1 / x, 0.0, 1.0, max_panels=50)


@pytest.mark.parametrize("N", [16, 64])
def test_kress_exact_for_trig_polynomials(N):
    # int_0^{2pi} ln(4 sin^2((t - s)/2)) cos(m s) ds = -2 pi cos(m t) / m,  0 for m = 0
    r = kress_weights(N)
    s = 2 * np.pi * np.arange(N) / N
    idx = (np.arange(N)[:, None] - np.arange(N)[None, :]) % N
    R = r[idx]
    assert np.allclose(R @ np.ones(N), 0.0, atol=1e-12)
    for m in range(1, N // 2):
        assert np.allclose(R @ np.cos(m * s), -2 * np.pi * np.cos(m * s) / m, atol=1e-12)


def test_kress_needs_even_nodes():
    with pytest.raises(ValueError):
        kress_weights(15)


def test_rule_totals():
    c = Curve.circle((1.0, 2.0), 1.5, order=64)
    assert abs(curve_rule(c).total - 3 * math.pi) < 1e-13
    s = Surface.sphere((0, 0, 1), 2.0, order=12)
    rule = sphere_rule(s)
    assert abs(rule.total - 16 * math.pi) < 1e-12
    assert np.allclose(np.linalg.norm(rule.points - [0, 0, 1], axis=1), 2.0)
    # degree-2 moment: int z^2 dA = 4 pi R^4 / 3
    z = rule.points[:, 2] - 1
    assert abs(rule.weights @ z**2 - 4 * math.pi * 16 / 3) < 1e-11
