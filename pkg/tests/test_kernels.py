import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from deltagreen import _pykernels as py
from deltagreen import kernels

mp.mp.dps = 40
ZS = [0.1, 1.0, 5.0, 20.0]
IMPLS = [py] + ([kernels.compiled] if kernels.compiled is not None else [])


@pytest.mark.parametrize("impl", IMPLS, ids=lambda m: m.NAME)
@pytest.mark.parametrize("z", ZS)
def test_k0_i0_against_mpmath(impl, z):
    k_ref = float(mp.besselk(0, z))
    i_ref = float(mp.besseli(0, z))
    assert abs(impl.k0(np.array([z]))[0] / k_ref - 1) < 1e-12
    assert abs(impl.i0(np.array([z]))[0] / i_ref - 1) < 1e-12


@pytest.mark.parametrize("impl", IMPLS, ids=lambda m: m.NAME)
def test_k0_dense_grid(impl):
    z = np.geomspace(1e-6, 600.0, 400)
    rel = np.abs(impl.k0(z) / special.k0(z) - 1)
    assert rel.max() < 5e-14
    zi = np.linspace(0.0, 300.0, 301)
    rel = np.abs(impl.i0(zi) / special.i0(zi) - 1)
    assert rel.max() < 5e-14


@pytest.mark.parametrize("z", [0.3 + 0.4j, 1.0 + 2.0j, 3.0 - 1.0j, 8.0 + 10.0j, 25.0 + 1.0j])
def test_complex_arguments(z):
    assert abs(kernels.k0(z) / complex(mp.besselk(0, z)) - 1) < 1e-12
    assert abs(kernels.i0(z) / complex(mp.besseli(0, z)) - 1) < 1e-12


def test_scalar_in_scalar_out():
    assert np.ndim(kernels.k0(1.0)) == 0
    assert abs(kernels.k0(1.0) / (2 * math.pi) - 0.0670081205) < 1e-10


@pytest.mark.skipif(kernels.compiled is None, reason="extension not built")
def test_compiled_matches_fallback(rng):
    c = kernels.compiled
    z = rng.uniform(1e-4, 50.0, 1000)
    assert np.allclose(c.k0(z), py.k0(z), rtol=1e-14, atol=0)
    assert np.allclose(c.i0(z), py.i0(z), rtol=1e-14, atol=0)
    W = rng.standard_normal((7, 7))
    u = rng.standard_normal(7)
    assert np.allclose(c.border(W, u, 0.3), py.border(W, u, 0.3), rtol=1e-15)
    x = rng.uniform(-1, 1, 20)
    assert np.allclose(c.legendre_table(x, 50), py.legendre_table(x, 50), rtol=1e-13, atol=1e-15)
    d = rng.uniform(-3, 3, 500)
    t = rng.uniform(1e-3, 3.0, 500)
    for sub in (False, True):
        assert np.allclose(c.periodic_heat_1d(d, t, 1.7, sub), py.periodic_heat_1d(d, t, 1.7, sub),
                           rtol=1e-13, atol=1e-14)


def test_border_is_bordered_inverse(rng):
    A = rng.standard_normal((5, 5))
    Phi = A @ A.T + 5 * np.eye(5)
    W = np.linalg.inv(Phi[:4, :4])
    g = -Phi[:4, 4]
    u = W @ g
    S = Phi[4, 4] - g @ u
    assert np.allclose(kernels.border(W, u, 1 / S), np.linalg.inv(Phi), rtol=1e-12)


def test_legendre_table_matches_scipy(rng):
    x = rng.uniform(-1, 1, 30)
    P = kernels.legendre_table(x, 60)
    for l in (0, 1, 7, 60):
        assert np.allclose(P[:, l], special.eval_legendre(l, x), atol=1e-13)


@settings(max_examples=60, deadline=None)
@given(d=st.floats(-5, 5), t=st.floats(1e-3, 10.0), L=st.floats(0.5, 3.0))
def test_periodic_heat_matches_image_sum(d, t, L):
    n = np.arange(-200, 201)
    ref = np.sum(np.exp(-(d + n * L) ** 2 / (4 * t))) / math.sqrt(4 * math.pi * t)
    got = kernels.periodic_heat_1d(d, t, L)
    assert abs(got - ref) <= 1e-12 * max(1.0, ref)
    sub = kernels.periodic_heat_1d(d, t, L, True)
    assert abs(sub - (ref - 1 / L)) <= 1e-12 * max(1.0, ref)


def test_pure_fallback_selected_by_env():
    import os
    import subprocess
    import sys
    code = ("import deltagreen as d; from deltagreen import kernels;"
            "s = d.build(d.Flat1D(), [(d.Point(0.0), d.Bare(2.0))], -4.0);"
            "print(kernels.NAME, d.evaluate(s, 0.0, 0.0))")
    env = dict(os.environ, DELTAGREEN_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert out.stdout.split() == ["python", "0.5"]
