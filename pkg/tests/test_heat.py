import math

import mpmath as mp
import numpy as np
import pytest
from scipy import special

from deltagreen.acceptance import _sphere_grid, _torus_grid, heat_checks
from deltagreen.core import Point, Renormalized, TruncationError
from deltagreen.heat import (
    FlatRD, HeatBackend, Sphere2D, Torus2D, TruncationControl, g0_from_heat, phi_diag_flat_closed,
    phi_diag_renorm,
)

mp.mp.dps = 30


def _torus_lattice_g0(k, d, L1, L2, n=80):
    m = np.arange(-n, n + 1)
    N1, N2 = np.meshgrid(m, m)
    r = np.hypot(d[0] + N1 * L1, d[1] + N2 * L2)
    return special.k0(k * r).sum() / (2 * np.pi)


@pytest.mark.parametrize("E", [-1.0, -4.0, -0.3])
def test_torus_g0_lattice_sum(E):
    T = Torus2D(1.0, 1.3)
    d = (0.3, 0.5)
    assert abs(g0_from_heat(T, E, (0.0, 0.0), d) / _torus_lattice_g0(math.sqrt(-E), d, 1.0, 1.3) - 1) < 1e-10


@pytest.mark.parametrize("E", [-9.0, -25.0])
@pytest.mark.parametrize("d", [(0.3, -0.2), (0.05, 0.02)])
def test_torus_g0_noisy_tail(E, d):
    # with the mean subtracted the long-time tail is rounding noise; it must not stall the quadrature
    T = Torus2D(1.0, 1.0)
    ref = _torus_lattice_g0(math.sqrt(-E), d, 1.0, 1.0)
    assert abs(g0_from_heat(T, E, (0.0, 0.0), d) / ref - 1) < 1e-10


@pytest.mark.parametrize("mu,E", [(1.0, -4.0), (2.0, -1.0), (0.7, -0.5)])
def test_torus_phi_against_flat_plus_images(mu, E):
    # each nonzero image contributes int K_t(r)(e^{-mu^2 t} - e^{-k^2 t}) dt = (K0(mu r) - K0(k r))/2pi
    T = Torus2D(1.0, 1.0)
    k = math.sqrt(-E)
    m = np.arange(-80, 81)
    N1, N2 = np.meshgrid(m, m)
    r = np.hypot(N1, N2)
    r = r[r > 0]
    ref = phi_diag_flat_closed(2, mu, E) + (special.k0(mu * r) - special.k0(k * r)).sum() / (2 * np.pi)
    assert abs(phi_diag_renorm(T, (0.2, 0.7), mu, E) - ref) < 1e-10


def _sphere_g0_ref(E, c, R=1.0):
    b = -E * R * R
    nu = -mp.mpf(1) / 2 + mp.sqrt(mp.mpf(1) / 4 - b)
    return float(mp.re(-mp.legenp(nu, 0, -c) / (4 * mp.sin(mp.pi * nu))))


@pytest.mark.parametrize("E", [-0.1, -1.0, -4.0, -25.0])
def test_sphere_g0_legendre_function(E):
    S = Sphere2D(1.0)
    x, y = (0.3, 0.2), (1.4, 2.0)
    c = math.cos(S.angle(x, y))
    assert abs(g0_from_heat(S, E, x, y) / _sphere_g0_ref(E, c) - 1) < 1e-10


def test_sphere_g0_radius_scaling():
    # G0 on a sphere of radius R at energy E equals G0 on the unit sphere at E R^2
    x, y = (0.3, 0.2), (1.4, 2.0)
    a = g0_from_heat(Sphere2D(2.0), -1.0, x, y)
    b = g0_from_heat(Sphere2D(1.0), -4.0, x, y)
    assert abs(a / b - 1) < 1e-10


MU_GRID = [0.5, 1.0, 2.0]


@pytest.mark.parametrize("mu", MU_GRID)
@pytest.mark.parametrize("nu", MU_GRID)
def test_sphere_phi_digamma(mu, nu):
    a, b = mu * mu, nu * nu
    ra, rb = mp.sqrt(mp.mpf(1) / 4 - a), mp.sqrt(mp.mpf(1) / 4 - b)
    ref = float(mp.re(mp.digamma(0.5 + rb) + mp.digamma(0.5 - rb)
                      - mp.digamma(0.5 + ra) - mp.digamma(0.5 - ra)) / (4 * mp.pi))
    got = phi_diag_renorm(Sphere2D(1.0), (0.4, 0.1), mu, -b)
    assert abs(got - ref) < 1e-10


@pytest.mark.parametrize("mu", MU_GRID)
@pytest.mark.parametrize("nu", MU_GRID)
def test_flat_phi_quadrature_grid(mu, nu):
    for dim in (2, 3):
        q = phi_diag_renorm(FlatRD(dim), (0.0,) * dim, mu, -nu * nu)
        assert abs(q - phi_diag_flat_closed(dim, mu, -nu * nu)) < 1e-10


def test_phi_known_value():
    assert abs(phi_diag_renorm(FlatRD(2), (0, 0), 1.0, -4.0) - math.log(2) / (2 * math.pi)) < 1e-12


@pytest.mark.parametrize("man", [FlatRD(2), FlatRD(3), Torus2D(1.0, 1.0), Sphere2D(1.0)],
                         ids=["flat2", "flat3", "torus", "sphere"])
def test_phi_monotone_in_energy(man):
    a = (0.1,) * man.dim if isinstance(man, FlatRD) else (0.2, 0.3)
    Es = -np.geomspace(0.05, 20.0, 12)
    vals = [phi_diag_renorm(man, a, 1.0, E) for E in Es]
    assert np.all(np.diff(vals) > 0)  # increases as E decreases


def test_phi_complex_energy():
    E = -2.0 + 0.5j
    got = phi_diag_renorm(FlatRD(2), (0, 0), 1.0, E)
    assert abs(got - phi_diag_flat_closed(2, 1.0, E)) < 1e-10


def test_g0_complex_energy_flat():
    E = -1.0 + 0.4j
    k = np.sqrt(-E)
    got = g0_from_heat(FlatRD(3), E, (0, 0, 0), (0.8, 0, 0))
    assert abs(got - np.exp(-k * 0.8) / (4 * np.pi * 0.8)) < 1e-12


def test_heat_checks_all_but_sphere_flat_limit():
    checks = heat_checks()
    for name, (err, tol) in checks.items():
        if name == "sphere short-time flat limit":
            continue
        assert err <= tol, name


def test_sphere_short_time_with_curvature():
    # K_t(x, x) = (1 / 4 pi t)(1 + t/3 + t^2/15 + 4 t^3/315 + ...) on the unit sphere
    S = Sphere2D(1.0)
    for t in (1e-3, 1e-2, 0.04):
        ser = (1 + t / 3 + t**2 / 15 + 4 * t**3 / 315 + t**4 / 315) / (4 * math.pi * t)
        assert abs(S.heat_diag(np.array(t)) / ser - 1) < 5e-7 * t


def test_sphere_diag_series_matches_legendre():
    S = Sphere2D(1.0)
    for t in (0.049, 0.051, 0.02):
        series = S.heat_diag(np.array(t))
        direct = S.heat(t, (0.3, 0.2), (0.3, 0.2))
        assert abs(series / direct - 1) < 1e-13


@pytest.mark.parametrize("t", [0.01, 0.3, 2.0])
def test_torus_semigroup_and_normalization(t):
    T = Torus2D(1.0, 1.7)
    grid, w = _torus_grid(1.0, 1.7, 200)
    x, z = np.array([0.1, 0.4]), np.array([0.8, 1.2])
    assert abs(w @ T.heat_points(t, x, grid) - 1) < 1e-10
    lhs = T.heat(2 * t, x, z)
    rhs = w @ (T.heat_points(t, x, grid) * T.heat_points(t, z, grid))
    assert abs(rhs / lhs - 1) < 1e-8


@pytest.mark.parametrize("t", [0.02, 0.3, 2.0])
def test_sphere_semigroup_and_normalization(t):
    S = Sphere2D(1.0)
    grid, w = _sphere_grid(128, 256)
    x, z = np.array([0.4, 0.3]), np.array([0.9, 0.6])
    assert abs(w @ S.heat_points(t, x, grid) - 1) < 1e-10
    lhs = S.heat(2 * t, x, z)
    rhs = w @ (S.heat_points(t, x, grid) * S.heat_points(t, z, grid))
    assert abs(rhs / lhs - 1) < 1e-8


def test_torus_short_time_is_flat():
    T = Torus2D(1.0, 1.0)
    t = 1e-3
    assert abs(T.heat_diag(t) * 4 * math.pi * t - 1) < 1e-12


def test_torus_long_time_uniform():
    T = Torus2D(1.0, 2.0)
    assert abs(T.heat(50.0, (0, 0), (0.5, 1.0)) - 0.5) < 1e-12


def test_truncation_error():
    S = Sphere2D(1.0)
    with pytest.raises(TruncationError):
        S.heat(1e-9, (0.1, 0.0), (0.2, 0.0), TruncationControl(l_max=1000))


def test_heat_backend_methods_agree():
    a, b = HeatBackend(FlatRD(2)), HeatBackend(FlatRD(2), method="heat")
    for E in (-1.0, -4.0):
        x, y = np.array([0.0, 0.0]), np.array([0.5, 0.5])
        assert abs(a.g0(E, x, y) / b.g0(E, x, y) - 1) < 1e-11
        p = Point((0.0, 0.0))
        assert abs(a.phi_diag(E, p, Renormalized(1.3)) - b.phi_diag(E, p, Renormalized(1.3))) < 1e-11
