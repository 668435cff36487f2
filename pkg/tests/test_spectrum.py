import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq

from deltagreen.core import Bare, Point, Renormalized
from deltagreen.flat import Flat1D
from deltagreen.heat import FlatRD, HeatBackend, Sphere2D
from deltagreen.spectrum import char_value, default_bracket, find_bound_states


def test_single_center_1d():
    Es = find_bound_states(Flat1D(), [(Point(0.0), Bare(2.0))]).energies
    assert len(Es) == 1 and abs(Es[0] + 1) < 1e-12


def test_pair_1d_oracle():
    kp = brentq(lambda k: k - 2 - 2 * math.exp(-k), 0.5, 10, xtol=1e-15)
    km = brentq(lambda k: k - 2 + 2 * math.exp(-k), 0.5, 10, xtol=1e-15)
    scan = find_bound_states(Flat1D(), [(Point(0.0), Bare(4.0)), (Point(1.0), Bare(4.0))])
    assert np.allclose(scan.energies, [-kp**2, -km**2], atol=1e-8, rtol=0)
    assert abs(scan.energies[0] + 4.9182602903) < 1e-9
    assert abs(scan.energies[1] + 2.5396382822) < 1e-9
    assert scan.energies == sorted(scan.energies)
    assert all(r.residual < 1e-8 and r.multiplicity == 1 for r in scan.roots)


@pytest.mark.parametrize("mu", [0.5, 1.0, 2.0])
def test_renormalized_single_center(mu):
    for dim in (2, 3):
        be = HeatBackend(FlatRD(dim))
        Es = find_bound_states(be, [(Point((0.0,) * dim), Renormalized(mu))]).energies
        assert len(Es) == 1 and abs(Es[0] + mu * mu) < 1e-8


def test_empty():
    scan = find_bound_states(Flat1D(), [])
    assert scan.roots == ()


def test_char_value_limits():
    be = Flat1D()
    c = [(Point(0.0), Bare(2.0))]
    assert abs(char_value(be, c, -1e8) - 0.5) < 1e-4
    assert char_value(be, c, -4.0) > 0 > char_value(be, c, -0.25)
    hb = HeatBackend(FlatRD(2))
    vals = [char_value(hb, [(Point((0, 0)), Renormalized(1.0))], -(10.0**k)) for k in (2, 4, 6)]
    assert vals[0] < vals[1] < vals[2]


def test_far_apart_renormalized_pair_near_degenerate():
    be = HeatBackend(FlatRD(2))
    c = [(Point((0.0, 0.0)), Renormalized(1.0)), (Point((30.0, 0.0)), Renormalized(1.0))]
    scan = find_bound_states(be, c, bracket=(-2.0, -0.5), grid=64)
    Es = scan.energies
    # both roots collapse onto -mu^2 (they may be reported as one cluster of multiplicity 2)
    assert sum(r.multiplicity for r in scan.roots) == 2
    assert all(abs(E + 1) < 1e-8 for E in Es)


def test_bracket_edge_flagged():
    scan = find_bound_states(Flat1D(), [(Point(0.0), Bare(2.0))], bracket=(-4.0, -1.0))
    assert [r.flag for r in scan.roots] == ["bracket edge"]
    scan = find_bound_states(Flat1D(), [(Point(0.0), Bare(2.0))], bracket=(-0.5, -0.1))
    assert scan.roots == () and scan.below_bracket == 1


def test_bad_bracket():
    with pytest.raises(ValueError):
        find_bound_states(Flat1D(), [(Point(0.0), Bare(2.0))], bracket=(-1.0, 0.5))
    with pytest.raises(ValueError):
        find_bound_states(Flat1D(), [(Point(0.0), Bare(2.0))], grid=1)


def test_default_bracket_scales():
    lo, hi = default_bracket(Flat1D(), [(Point(0.0), Bare(2.0)), (Point(1.0), Bare(4.0))])
    assert lo == -10 * 4 * 4.0 and hi == -1e-6


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 6))
def test_interlacing_and_grid_stability(seed, n):
    rng = np.random.default_rng(seed)
    xs = np.sort(rng.uniform(-5, 5, n))
    if n > 1 and np.min(np.diff(xs)) < 0.05:
        return
    centers = [(Point(x), Bare(l)) for x, l in zip(xs, rng.uniform(0.5, 5, n))]
    a = find_bound_states(Flat1D(), centers, grid=256)
    b = find_bound_states(Flat1D(), centers, grid=512)
    na = sum(r.multiplicity for r in a.roots)
    assert 1 <= na <= n
    assert na == sum(r.multiplicity for r in b.roots)


def test_threads_give_identical_scan(monkeypatch):
    c = [(Point(0.0), Bare(4.0)), (Point(1.0), Bare(4.0))]
    a = find_bound_states(Flat1D(), c)
    monkeypatch.setenv("GREEN_THREADS", "4")
    b = find_bound_states(Flat1D(), c)
    assert a == b


def test_sphere_scan_residuals():
    be = HeatBackend(Sphere2D(1.0))
    c = [(Point((0.0, 0.0)), Renormalized(1.0)), (Point((1.0, 0.0)), Renormalized(1.5))]
    scan = find_bound_states(be, c, grid=64)
    assert scan.roots and all(abs(char_value(be, c, r.energy)) < 1e-8 for r in scan.roots)
