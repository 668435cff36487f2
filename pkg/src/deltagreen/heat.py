"""Heat kernels on flat space, the flat 2-torus and the round 2-sphere.

Resolvents and the renormalized principal-matrix diagonal are obtained as
time integrals of the heat kernel. Heat kernels here are those of the
Laplacian, e^{t Delta}; physical units enter only through the factor
2m/hbar^2 and kappa^2 = -2mE/hbar^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import bernoulli

from . import kernels
from .core import (
    DEFAULT_UNITS,
    NumericalError,
    Point,
    Renormalized,
    SingularProbeError,
    SpectrumError,
    TruncationError,
    Units,
    as_energy,
)
from .flat import Flat2D, Flat3D
from .quadrature import time_integral

# exp(-LOCAL_CUT) bounds the neglected short-time heat kernel between distinct points
LOCAL_CUT = 50.0
_SPHERE_SERIES_MAX = 0.05


@dataclass(frozen=True)
class TruncationControl:
    tol: float = 1e-12
    max_shells: int = 10000
    l_max: int = 40000
    rtol: float = 1e-13  # time-integral relative tolerance


DEFAULT_CONTROL = TruncationControl()


@dataclass(frozen=True)
class FlatRD:
    dim: int = 2

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError("FlatRD supports dimensions 2 and 3")

    compact = False
    volume = math.inf

    def distance(self, x, y):
        return float(np.linalg.norm(np.subtract(x, y, dtype=float)))

    def heat(self, t, x, y, control=DEFAULT_CONTROL, subtract_mean=False):
        t = np.asarray(t, dtype=float)
        d2 = self.distance(x, y) ** 2
        with np.errstate(under="ignore"):
            return (4.0 * np.pi * t) ** (-0.5 * self.dim) * np.exp(-d2 / (4.0 * t))

    def heat_diag(self, t, control=DEFAULT_CONTROL):
        return (4.0 * np.pi * np.asarray(t, dtype=float)) ** (-0.5 * self.dim)


@dataclass(frozen=True)
class Torus2D:
    L1: float = 1.0
    L2: float = 1.0

    def __post_init__(self):
        if not (self.L1 > 0 and self.L2 > 0):
            raise ValueError("torus periods must be positive")

    compact = True
    dim = 2

    @property
    def volume(self):
        return self.L1 * self.L2

    def displacement(self, x, y):
        d = np.subtract(x, y, dtype=float)
        L = np.array([self.L1, self.L2])
        return d - L * np.round(d / L)

    def distance(self, x, y):
        return float(np.linalg.norm(self.displacement(x, y)))

    def heat(self, t, x, y, control=DEFAULT_CONTROL, subtract_mean=False):
        """Product of two periodic 1-D heat kernels (image or Fourier sums)."""
        t = np.asarray(t, dtype=float)
        _check_time(t)
        d = self.displacement(x, y)
        if subtract_mean:
            a1 = kernels.periodic_heat_1d(np.full(t.shape, d[0]), t, self.L1, True)
            b2 = kernels.periodic_heat_1d(np.full(t.shape, d[1]), t, self.L2, False)
            c2 = kernels.periodic_heat_1d(np.full(t.shape, d[1]), t, self.L2, True)
            return a1 * b2 + c2 / self.L1
        a = kernels.periodic_heat_1d(np.full(t.shape, d[0]), t, self.L1, False)
        b = kernels.periodic_heat_1d(np.full(t.shape, d[1]), t, self.L2, False)
        return a * b

    def heat_diag(self, t, control=DEFAULT_CONTROL):
        return self.heat(t, (0.0, 0.0), (0.0, 0.0), control)

    def heat_points(self, t, x, Y):
        """K_t(x, y) for one time and an ``(m, 2)`` array of points y."""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        d = np.asarray(x, dtype=float)[None, :] - Y
        tt = np.full(len(Y), float(t))
        return (kernels.periodic_heat_1d(d[:, 0], tt, self.L1)
                * kernels.periodic_heat_1d(d[:, 1], tt, self.L2))


def sphere_cos_angle(x, y):
    """cos of the angle between two points given as (theta, phi)."""
    t1, p1 = float(x[0]), float(x[1])
    t2, p2 = float(y[0]), float(y[1])
    c = math.cos(t1) * math.cos(t2) + math.sin(t1) * math.sin(t2) * math.cos(p1 - p2)
    return min(1.0, max(-1.0, c))


def _sphere_series_coeffs(n_terms=12):
    # sum_l (2l+1) exp(-tau (l+1/2)^2) ~ 1/tau + sum_k c_k tau^(k-1)  (Euler-Maclaurin)
    B = bernoulli(2 * n_terms)
    return np.array([(1.0 - 2.0 ** (1 - 2 * k)) * B[2 * k] * (-1.0) ** (k - 1) / math.factorial(k)
                     for k in range(1, n_terms + 1)])


_SPHERE_COEFFS = _sphere_series_coeffs()


@dataclass(frozen=True)
class Sphere2D:
    R: float = 1.0

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError("sphere radius must be positive")

    compact = True
    dim = 2

    @property
    def volume(self):
        return 4.0 * math.pi * self.R**2

    def angle(self, x, y):
        return math.acos(sphere_cos_angle(x, y))

    def distance(self, x, y):
        return self.R * self.angle(x, y)

    def l_max(self, t, control=DEFAULT_CONTROL):
        """Smallest l whose Legendre tail is below the absolute tolerance."""
        tau = float(np.min(t)) / self.R**2
        if tau <= 0:
            raise TruncationError("l_max undefined for t <= 0")
        norm = 1.0 / (4.0 * math.pi * self.R**2)
        l = max(2, int(math.sqrt(max(0.0, -math.log(control.tol)) / tau)) // 2)
        while True:
            if l > control.l_max:
                raise TruncationError(f"sphere heat kernel needs l > {control.l_max} at t = {np.min(t)}")
            term = (2 * l + 1) * math.exp(-tau * l * (l + 1)) * norm
            q = math.exp(-2.0 * tau * (l + 1)) * (2 * l + 3) / (2 * l + 1)
            if q < 1.0 and term / (1.0 - q) < control.tol:
                return l
            l += 1 + l // 8

    def heat(self, t, x, y, control=DEFAULT_CONTROL, subtract_mean=False):
        t = np.asarray(t, dtype=float)
        _check_time(t)
        c = sphere_cos_angle(x, y)
        lmax = self.l_max(t, control)
        P = kernels.legendre_table(np.array([c]), lmax)[0]
        return self._legendre_sum(t, P, subtract_mean)

    def heat_points(self, t, x, Y, control=DEFAULT_CONTROL):
        """K_t(x, y) for one time and an ``(m, 2)`` array of (theta, phi)."""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        t1, p1 = float(x[0]), float(x[1])
        c = np.clip(math.cos(t1) * np.cos(Y[:, 0])
                    + math.sin(t1) * np.sin(Y[:, 0]) * np.cos(p1 - Y[:, 1]), -1.0, 1.0)
        lmax = self.l_max(t, control)
        P = kernels.legendre_table(c, lmax)
        l = np.arange(lmax + 1)
        w = (2 * l + 1) * np.exp(-float(t) * l * (l + 1) / self.R**2) / (4.0 * math.pi * self.R**2)
        return P @ w

    def _legendre_sum(self, t, P, subtract_mean):
        l = np.arange(P.size)
        coef = (2 * l + 1) * P / (4.0 * math.pi * self.R**2)
        if subtract_mean:
            coef = coef.copy()
            coef[0] = 0.0
        tt = np.atleast_1d(t).ravel()
        out = np.empty(tt.size)
        ll = l * (l + 1) / self.R**2
        step = max(1, (1 << 21) // P.size)
        for i in range(0, tt.size, step):
            with np.errstate(under="ignore"):
                out[i:i + step] = np.exp(-np.outer(tt[i:i + step], ll)) @ coef
        return out.reshape(np.shape(t))

    def heat_diag(self, t, control=DEFAULT_CONTROL):
        """K_t(x, x); short times use the exact asymptotic series of the trace."""
        t = np.asarray(t, dtype=float)
        _check_time(t)
        tau = t / self.R**2
        out = np.empty(t.shape)
        small = tau < _SPHERE_SERIES_MAX
        if np.any(small):
            ts = tau[small]
            poly = np.polyval(_SPHERE_COEFFS[::-1], ts)
            out[small] = np.exp(ts / 4.0) * (1.0 / ts + poly) / (4.0 * math.pi * self.R**2)
        if np.any(~small):
            tl = t[~small]
            lmax = self.l_max(tl, control)
            out[~small] = self._legendre_sum(tl, np.ones(lmax + 1), False)
        return out


def _check_time(t):
    if np.any(np.asarray(t) <= 0):
        raise ValueError("heat kernel needs t > 0")


def heat_kernel(man, t, x, y, control=DEFAULT_CONTROL):
    """Heat kernel K_t(x, y) of the Laplacian on ``man``."""
    return man.heat(t, x, y, control)


def _expm1_neg(z, t):
    """1 - exp(-z t) without cancellation, for real or complex z."""
    zt = z * t
    if np.iscomplexobj(zt):
        small = np.abs(zt) < 1e-4
        out = 1.0 - np.exp(-zt)
        s = zt[small]
        out[small] = s * (1.0 - s * (0.5 - s * (1.0 / 6.0 - s / 24.0)))
        return out
    return -np.expm1(-zt)


def _kappa2(E, units):
    e = as_energy(E, units)
    if not complex(e.value).real < 0:
        raise SpectrumError("heat-kernel resolvents need Re(E) < 0")
    k2 = -units.scale * complex(e.value)
    return k2.real if k2.imag == 0 else k2


def g0_from_heat(man, E, x, y, units: Units = DEFAULT_UNITS, control=DEFAULT_CONTROL):
    """Free resolvent kernel as the time integral of the heat kernel."""
    k2 = _kappa2(E, units)
    d = man.distance(x, y)
    if d == 0.0:
        raise SingularProbeError("free resolvent diverges on the diagonal in dimension >= 2")
    # the heat kernel between points at distance d is below exp(-LOCAL_CUT) for t < lower
    lower = d * d / (4.0 * LOCAL_CUT)

    if man.compact:
        def f(t):
            with np.errstate(under="ignore"):
                return man.heat(t, x, y, control, subtract_mean=True) * np.exp(-k2 * t)
        # constant mode integrated over (lower, inf) only, like the rest
        zero_mode = np.exp(-k2 * lower) / (man.volume * k2)
    else:
        def f(t):
            with np.errstate(under="ignore"):
                return man.heat(t, x, y, control) * np.exp(-k2 * t)
        zero_mode = 0.0
    val = time_integral(f, lower=lower, rtol=control.rtol) + zero_mode
    return units.scale * val


def phi_diag_renorm(man, a, mu, E, units: Units = DEFAULT_UNITS, control=DEFAULT_CONTROL):
    """Renormalized principal-matrix diagonal.

    int_0^inf K_t(a, a) (exp(-mu^2 t) - exp(-kappa^2 t)) dt, which is finite
    because the bracket is O(t) where K_t(a, a) ~ t^{-D/2}. mu is the bound-state
    wavenumber of the isolated center: the value vanishes at E = -hbar^2 mu^2/2m.
    """
    if not mu > 0:
        raise ValueError("mu must be positive")
    k2 = _kappa2(E, units)
    m2 = float(mu) ** 2
    dk = k2 - m2
    # factor out the slower exponential so nothing overflows
    if np.real(dk) >= 0:
        slow, diff, sign = m2, dk, 1.0
    else:
        slow, diff, sign = k2, -dk, -1.0

    def f(t):
        with np.errstate(under="ignore"):
            return sign * man.heat_diag(t, control) * np.exp(-slow * t) * _expm1_neg(diff, t)

    return units.scale * time_integral(f, rtol=control.rtol)


def phi_diag_flat_closed(dim, mu, E, units: Units = DEFAULT_UNITS):
    """Closed forms: (1/4pi) ln(kappa^2/mu^2) in 2D, (kappa - mu)/(4 pi) in 3D."""
    k2 = _kappa2(E, units)
    if dim == 2:
        val = np.log(k2 / mu**2) / (4.0 * math.pi)
    else:
        val = (np.sqrt(k2) - mu) / (4.0 * math.pi)
    return units.scale * val


class HeatBackend:
    """Renormalized point-interaction backend on a manifold.

    ``method="auto"`` uses closed forms on flat space and heat-kernel time
    integrals on the torus and sphere; ``method="heat"`` forces time integrals
    everywhere.
    """

    renormalized = True

    def __init__(self, manifold, units: Units = DEFAULT_UNITS, method="auto",
                 control: TruncationControl = DEFAULT_CONTROL):
        if method not in ("auto", "heat"):
            raise ValueError("method must be 'auto' or 'heat'")
        self.manifold = manifold
        self.units = units
        self.method = method
        self.control = control
        self.dim = manifold.dim
        flat = isinstance(manifold, FlatRD)
        self._closed = flat and method == "auto"
        self._flat = (Flat2D if manifold.dim == 2 else Flat3D)(units) if flat else None

    def check_energy(self, E):
        _kappa2(E, self.units)
        return as_energy(E, self.units)

    def coupling_factor(self, support, coupling):
        raise TypeError("renormalized backends have no bare coupling factor")

    def _g0_pair(self, E, x, y):
        if self._closed:
            if self.manifold.distance(x, y) == 0.0:
                raise SingularProbeError("free resolvent diverges on the diagonal")
            return self._flat.g0(E, np.asarray(x, float), np.asarray(y, float))[()]
        return g0_from_heat(self.manifold, E, x, y, self.units, self.control)

    def g0(self, E, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.ndim == 1 and y.ndim == 1:
            return self._g0_pair(E, x, y)
        xb, yb = np.broadcast_arrays(np.atleast_2d(x), np.atleast_2d(y))
        vals = [self._g0_pair(E, xi, yi) for xi, yi in zip(xb, yb)]
        return np.array(vals, dtype=np.result_type(*vals))

    def field(self, E, x, support):
        if not isinstance(support, Point):
            raise TypeError("renormalized backends take point supports")
        x = np.asarray(x, dtype=float)
        a = np.asarray(support.position, float)
        if x.ndim == 1:
            return self._g0_pair(E, x, a)
        return self.g0(E, x, a[None, :])

    def bilinear(self, E, v, w):
        if not (isinstance(v, Point) and isinstance(w, Point)):
            raise TypeError("renormalized backends take point supports")
        if self.manifold.distance(v.position, w.position) == 0.0:
            raise SingularProbeError(
                "diagonal of G0 diverges; renormalized models use phi_diag instead")
        return self._g0_pair(E, v.position, w.position)

    def bilinear_row(self, E, supports, w):
        vals = [self.bilinear(E, s, w) for s in supports]
        return np.array(vals, dtype=np.result_type(*vals) if vals else float)

    def phi_diag(self, E, support, coupling):
        if not isinstance(coupling, Renormalized):
            raise TypeError("phi_diag needs a renormalized coupling")
        if self._closed:
            return phi_diag_flat_closed(self.manifold.dim, coupling.mu, E, self.units)
        return phi_diag_renorm(self.manifold, support.position, coupling.mu, E,
                               self.units, self.control)

    def probe_check(self, x, supports):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        for s in supports:
            for xi in x:
                if self.manifold.distance(xi, s.position) == 0.0:
                    raise SingularProbeError("probe coincides with a point support")


__all__ = [
    "FlatRD", "Torus2D", "Sphere2D", "TruncationControl", "HeatBackend",
    "heat_kernel", "g0_from_heat", "phi_diag_renorm", "phi_diag_flat_closed",
    "sphere_cos_angle", "NumericalError",
]
