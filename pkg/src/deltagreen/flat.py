"""Closed-form free Green's functions in flat 1D/2D/3D and their support integrals.

All kernels return values of (H0 - E)^-1 in the backend's units; in the
default units (hbar = 1, 2m = 1) they reduce to

* 1D: exp(-kappa |x - y|) / (2 kappa)
* 2D: K0(kappa r) / (2 pi)
* 3D: exp(-kappa r) / (4 pi r)
"""
from __future__ import annotations

import math

import numpy as np

from . import kernels
from .core import (
    DEFAULT_UNITS,
    Bare,
    Curve,
    Point,
    SingularProbeError,
    SpectrumError,
    Surface,
    Units,
    as_energy,
    supports_collide,
)
from .quadrature import curve_rule, kress_weights, sphere_rule

EULER_GAMMA = 0.57721566490153286061
GUARD_REL = 1e-6
_CHUNK = 1 << 20


def _kappa(E, units):
    e = as_energy(E, units)
    k = e.kappa_value()
    if np.real(k) <= 1e-300 * max(1.0, abs(k)) or np.real(k) <= 0:
        raise SpectrumError(f"energy {e.value} lies on the free spectrum [0, inf)")
    return e, k


def _dist(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.sqrt(np.sum((x - y) ** 2, axis=-1))


class FlatBackend:
    """Shared logic for the flat backends. Subclasses define ``_radial``."""

    dim = 0
    renormalized = False

    def __init__(self, units: Units = DEFAULT_UNITS):
        self.units = units

    def check_energy(self, E):
        return _kappa(E, self.units)[0]

    # -- point values -----------------------------------------------------
    def g0(self, E, x, y):
        """G0(x, y); ``x`` and ``y`` broadcast over leading axes."""
        _, k = _kappa(E, self.units)
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.dim == 1:
            x = x[..., None] if x.ndim == 0 or x.shape[-1] != 1 else x
            y = y[..., None] if y.ndim == 0 or y.shape[-1] != 1 else y
        r = _dist(x, y)
        return self.units.scale * self._radial(k, r)

    def _radial(self, k, r):
        raise NotImplementedError

    # -- support functionals ---------------------------------------------
    def coupling_factor(self, support, coupling):
        if not isinstance(coupling, Bare):
            raise TypeError(f"{type(self).__name__} takes bare couplings only")
        lam = coupling.strength
        if isinstance(support, Curve):
            return lam / support.length
        if isinstance(support, Surface):
            return lam / support.area
        return lam

    def field(self, E, x, support, order=None):
        """int_support G0(x, .) for probe points x of shape (m, dim) or (dim,)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1 and (self.dim != 1 or x.size == 1)
        if self.dim == 1:
            x = x.reshape(-1, 1)
        else:
            x = np.atleast_2d(x)
        if isinstance(support, Point):
            a = np.asarray(support.position, float)
            self._guard_point(x, a)
            out = self.g0(E, x, a[None, :])
        else:
            rule = self._rule(support, order)
            self._guard_rule(x, support, rule)
            out = self._rule_sum(E, x, rule)
        return out[0] if single else out

    def bilinear(self, E, v, w):
        """<v| G0 |w> for two supports (identical supports allowed for codim 1)."""
        if isinstance(v, Point) and isinstance(w, Point):
            if self.dim > 1 and _dist(v.position, w.position) == 0.0:
                raise SingularProbeError("G0 diverges at coincident points")
            return self.g0(E, np.asarray(v.position), np.asarray(w.position))[()]
        if isinstance(v, Point):
            v, w = w, v
        if isinstance(w, Point):
            return self.field(E, np.asarray(w.position), v)
        if _same_support(v, w):
            return self._diagonal(E, v)
        if supports_collide(v, w):
            raise SingularProbeError("supports intersect")
        return self._pair(E, v, w)

    def bilinear_row(self, E, supports, w):
        """Vector of <s_i| G0 |w> over a list of supports."""
        if supports and all(isinstance(s, Point) for s in supports) and isinstance(w, Point):
            pos = np.array([s.position for s in supports], dtype=float)
            a = np.asarray(w.position, float)
            if self.dim > 1 and np.any(_dist(pos, a[None, :]) == 0.0):
                raise SingularProbeError("G0 diverges at coincident points")
            return self.g0(E, pos, a[None, :])
        vals = [self.bilinear(E, s, w) for s in supports]
        dtype = np.result_type(*vals) if vals else float
        return np.array(vals, dtype=dtype)

    # -- quadrature helpers -------------------------------------------------
    def _rule(self, support, order=None):
        raise TypeError(f"{type(self).__name__} has no quadrature for {type(support).__name__}")

    def _rule_sum(self, E, x, rule):
        step = max(1, _CHUNK // max(1, rule.weights.size))
        parts = []
        for i in range(0, x.shape[0], step):
            g = self.g0(E, x[i:i + step, None, :], rule.points[None, :, :])
            parts.append(g @ rule.weights)
        return np.concatenate(parts) if parts else np.zeros(0)

    def _pair(self, E, v, w):
        rv, rw = self._rule(v), self._rule(w)
        return complex_or_real(rv.weights @ self._rule_sum(E, rv.points, rw))

    def _guard_point(self, x, a):
        if self.dim > 1 and np.any(_dist(x, a[None, :]) == 0.0):
            raise SingularProbeError("probe coincides with a point support")

    def _guard_rule(self, x, support, rule):
        d = np.min(_dist(x[:, None, :], rule.points[None, :, :]), axis=1)
        if np.any(d < GUARD_REL * support.diameter):
            raise SingularProbeError("probe lies on (or within the guard distance of) a support")

    def _diagonal(self, E, v):
        raise TypeError(f"no diagonal bilinear for {type(v).__name__} in {type(self).__name__}")

    def probe_check(self, x, supports):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        for s in supports:
            if isinstance(s, Point):
                self._guard_point(x, np.asarray(s.position, float))
            else:
                self._guard_rule(x, s, self._rule(s))


def complex_or_real(v):
    v = complex(v) if np.iscomplexobj(v) else float(v)
    return v


def _same_support(v, w):
    if v is w:
        return True
    if isinstance(v, Surface) and isinstance(w, Surface):
        return v == w
    if isinstance(v, Curve) and isinstance(w, Curve):
        return (v.name != "custom" and v.name == w.name and v.params == w.params
                and v.order == w.order)
    return False


class Flat1D(FlatBackend):
    dim = 1

    def _radial(self, k, r):
        return np.exp(-k * r) / (2.0 * k)


class Flat2D(FlatBackend):
    dim = 2

    def _radial(self, k, r):
        if np.any(r == 0.0):
            raise SingularProbeError("2D free kernel diverges at r = 0")
        return kernels.k0(k * r) / (2.0 * np.pi)

    def _rule(self, support, order=None):
        if not isinstance(support, Curve):
            return super()._rule(support, order)
        return curve_rule(support, order)

    def _diagonal(self, E, v, order=None):
        """<Gamma|G0|Gamma> with the log singularity of K0 split off.

        K0(z) = -ln(z/2) I0(z) + (smooth). In the 2 pi-periodic parameter the
        log part becomes -1/2 I0 ln(4 sin^2((t - tau)/2)) and is integrated with
        the Kress weights; the remainder uses the trapezoid rule.
        """
        if not isinstance(v, Curve):
            return super()._diagonal(E, v)
        _, k = _kappa(E, self.units)
        N = order or v.order
        pts = v.nodes(N)
        L = v.length
        r = _dist(pts[:, None, :], pts[None, :, :])
        idx = np.arange(N)
        diff = (idx[:, None] - idx[None, :]) % N
        t = 2.0 * np.pi * diff / N
        off = diff != 0
        I = np.ones((N, N), dtype=np.result_type(k, float))
        I[off] = kernels.i0(k * r[off])
        logsin = np.zeros((N, N))
        logsin[off] = np.log(4.0 * np.sin(0.5 * t[off]) ** 2)
        S = np.empty((N, N), dtype=I.dtype)
        S[off] = kernels.k0(k * r[off]) + 0.5 * I[off] * logsin[off]
        # arc-length parametrization: |dGamma/dt| = L / (2 pi)
        S[~off] = -EULER_GAMMA - np.log(0.5 * k * L / (2.0 * np.pi))
        R = kress_weights(N)[diff]
        inner = -0.5 * np.sum(R * I, axis=1) + (2.0 * np.pi / N) * np.sum(S, axis=1)
        total = (2.0 * np.pi / N) * inner.sum() / (2.0 * np.pi)
        return complex_or_real(self.units.scale * (L / (2.0 * np.pi)) ** 2 * total)


class Flat3D(FlatBackend):
    dim = 3

    def _radial(self, k, r):
        if np.any(r == 0.0):
            raise SingularProbeError("3D free kernel diverges at r = 0")
        return np.exp(-k * r) / (4.0 * np.pi * r)

    def _rule(self, support, order=None):
        if not isinstance(support, Surface):
            return super()._rule(support, order)
        return sphere_rule(support, order)

    def _guard_rule(self, x, support, rule):
        d = np.abs(_dist(x, np.asarray(support.center)[None, :]) - support.radius)
        if np.any(d < GUARD_REL * support.diameter):
            raise SingularProbeError("probe lies on (or within the guard distance of) a support")

    def _diagonal(self, E, v):
        """Sphere self-interaction by exact angular reduction.

        With |x - y| = 2R sin(gamma/2) the double integral collapses to
        2 pi R^2 (1 - exp(-2 kappa R)) / kappa.
        """
        if not isinstance(v, Surface):
            return super()._diagonal(E, v)
        _, k = _kappa(E, self.units)
        R = v.radius
        val = 2.0 * math.pi * R**2 * (-np.expm1(-2.0 * k * R)) / k
        return complex_or_real(self.units.scale * val)


def backend_for_dim(dim, units=DEFAULT_UNITS):
    return {1: Flat1D, 2: Flat2D, 3: Flat3D}[dim](units)
