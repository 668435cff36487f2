"""Quadrature rules: adaptive Gauss-Kronrod, time integrals, curve and sphere rules."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import TruncationError

# QUADPACK qk15 abscissae and weights
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])            # 15 nodes, ascending
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG15 = np.zeros(15)
_WG15[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])
_EPS = np.finfo(float).eps


def _gk_panels(f, a, b):
    """Kronrod estimate, error estimate and |f| integral on each panel."""
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    x = c[:, None] + h[:, None] * _NODES[None, :]
    fx = np.asarray(f(x.ravel())).reshape(x.shape)
    k = h * (fx @ _WK)
    g = h * (fx @ _WG15)
    absk = np.abs(h) * (np.abs(fx) @ _WK)
    mean = k / (2.0 * h)
    asc = np.abs(h) * (np.abs(fx - mean[:, None]) @ _WK)
    err = np.abs(k - g)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(asc > 0, asc * np.minimum(1.0, (200.0 * err / asc) ** 1.5), err)
    floor = 50.0 * _EPS * absk
    err = np.maximum(scaled, floor)
    return k, err, absk


def integrate(f, a, b, rtol=1e-13, atol=0.0, initial=8, max_panels=20000):
    """Globally adaptive G7-K15 quadrature of a vectorized integrand on [a, b].

    ``f`` receives a 1-D array of abscissae and returns real or complex
    values. Convergence is declared when the summed error estimate drops below
    ``max(atol, rtol * integral of |f|)``.
    """
    edges = np.linspace(a, b, initial + 1)
    lo, hi = edges[:-1], edges[1:]
    val, err, absval = _gk_panels(f, lo, hi)
    while True:
        tol = max(atol, rtol * absval.sum())
        total_err = err.sum()
        if total_err <= tol:
            return val.sum()
        if lo.size >= max_panels:
            raise TruncationError(
                f"adaptive quadrature did not converge: error {total_err:.3g} > {tol:.3g}")
        # split the fewest worst panels whose removal would meet the tolerance
        order = np.argsort(-err)
        cum = np.cumsum(err[order])
        m = int(np.searchsorted(cum, total_err - 0.5 * tol)) + 1
        pick = np.zeros(lo.size, dtype=bool)
        pick[order[:m]] = True
        mid = 0.5 * (lo[pick] + hi[pick])
        new_lo = np.concatenate([lo[pick], mid])
        new_hi = np.concatenate([mid, hi[pick]])
        nv, ne, na = _gk_panels(f, new_lo, new_hi)
        lo = np.concatenate([lo[~pick], new_lo])
        hi = np.concatenate([hi[~pick], new_hi])
        val = np.concatenate([val[~pick], nv])
        err = np.concatenate([err[~pick], ne])
        absval = np.concatenate([absval[~pick], na])


def time_integral(f, lower=0.0, split=1.0, rtol=1e-13, atol=0.0):
    """Integral of f(t) over (lower, inf).

    (lower, split] is mapped by t = u**2, which removes t**-1/2 endpoint
    behaviour; [split, inf) by t = split / s so the exponential decay of the
    integrand lands at s -> 0.
    """
    total = 0.0
    if lower < split:
        def head(u):
            t = u * u
            return 2.0 * u * f(t)
        total = total + integrate(head, math.sqrt(lower), math.sqrt(split), rtol, atol)
        start = split
    else:
        start = lower

    def tail(s):
        t = start / s
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            v = np.asarray(f(t)) * (start / (s * s))
        return np.where(np.isfinite(v), v, 0.0)

    # the tail tolerance is relative to the whole integral: on compact manifolds
    # with the mean subtracted, the tail is rounding noise far below the head
    atol = max(atol, rtol * abs(total))
    return total + integrate(tail, 0.0, 1.0, rtol, atol)


# --------------------------------------------------------------------------
# curves


def kress_weights(n_nodes: int) -> np.ndarray:
    """Circulant weights for the periodic log-singular rule.

    Returns r with ``sum_j r[(i - j) % N] f(t_j)`` approximating
    ``int_0^{2 pi} ln(4 sin^2((t_i - tau)/2)) f(tau) dtau`` for N = 2n equispaced
    nodes; exact for trigonometric polynomials of degree < n.
    """
    if n_nodes % 2:
        raise ValueError("Kress rule needs an even number of nodes")
    n = n_nodes // 2
    tk = np.pi * np.arange(n_nodes) / n
    m = np.arange(1, n)
    r = -(2.0 * np.pi / n) * (np.cos(np.outer(tk, m)) @ (1.0 / m))
    r -= (np.pi / n**2) * np.cos(n * tk)
    return r


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray   # (m, dim) ambient coordinates
    weights: np.ndarray  # (m,)
    params: np.ndarray   # curve arc-length or (cos theta, phi) pairs

    @property
    def total(self) -> float:
        return float(self.weights.sum())


def curve_rule(curve, order=None) -> QuadratureRule:
    n = order or curve.order
    s = np.arange(n) * (curve.length / n)
    return QuadratureRule(curve.nodes(n), np.full(n, curve.length / n), s)


def sphere_rule(surface, order=None) -> QuadratureRule:
    """Gauss-Legendre in cos(theta) times a uniform azimuthal rule."""
    q = order or surface.order
    x, w = np.polynomial.legendre.leggauss(q)
    nphi = 2 * q
    phi = 2.0 * np.pi * (np.arange(nphi) + 0.5) / nphi
    ct = np.repeat(x, nphi)
    st = np.sqrt(1.0 - ct**2)
    ph = np.tile(phi, q)
    R = surface.radius
    pts = np.asarray(surface.center)[None, :] + R * np.stack(
        [st * np.cos(ph), st * np.sin(ph), ct], axis=-1)
    weights = np.repeat(w, nphi) * (2.0 * np.pi / nphi) * R**2
    return QuadratureRule(pts, weights, np.stack([ct, ph], axis=-1))
