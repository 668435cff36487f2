"""Bound states: energies E < 0 where the principal matrix Phi(E) is singular.

For real E every eigenvalue of Phi(E) is strictly decreasing in E (dPhi/dE is
minus a Gram matrix), so the number of negative eigenvalues counts the bound
states below E. The scan locates jumps of that count on a grid and refines
each one on the eigenvalue that crosses zero.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .core import Renormalized
from .engine import build_principal_matrix

DEFAULT_GRID = 512
DEFAULT_TOL = 1e-10
EDGE_HI = -1e-6


@dataclass(frozen=True)
class Root:
    energy: float
    multiplicity: int
    residual: float
    flag: str = ""


@dataclass(frozen=True)
class SpectralScan:
    bracket: tuple
    grid: int
    tol: float
    roots: tuple = ()
    below_bracket: int = 0
    notes: tuple = field(default_factory=tuple)

    @property
    def energies(self):
        return [r.energy for r in self.roots]


def _eigs(backend, centers, E):
    P = build_principal_matrix(backend, centers, E)
    if P.n == 0:
        return np.zeros(0)
    return np.linalg.eigvalsh(P.matrix.real)


def char_value(backend, centers, E) -> float:
    """Smallest eigenvalue of the symmetric principal matrix at real E < 0."""
    ev = _eigs(backend, centers, float(E))
    if ev.size == 0:
        return math.inf
    return float(ev[0])


def _kappa_estimate(backend, sup, cpl):
    if isinstance(cpl, Renormalized):
        return cpl.mu
    # deep single-center bound state: c * <v|G0|v> ~ lambda m / (hbar^2 kappa)
    return max(abs(cpl.strength) * backend.units.scale / 2.0, 1e-3)


def default_bracket(backend, centers):
    """[-10 n^2 kappa_max^2, -1e-6] in energy units."""
    if not centers:
        return (-10.0, EDGE_HI)
    kmax = max(_kappa_estimate(backend, s, c) for s, c in centers)
    n = len(centers)
    lo = -10.0 * max(1, n) ** 2 * kmax**2 / backend.units.scale
    return (lo, EDGE_HI)


def thread_count():
    """GREEN_THREADS as a positive int; 1 when unset or malformed."""
    try:
        return max(1, int(os.environ.get("GREEN_THREADS", "1")))
    except ValueError:
        return 1


def find_bound_states(backend, centers, bracket=None, grid=DEFAULT_GRID, tol=DEFAULT_TOL,
                      residual_tol=1e-8) -> SpectralScan:
    """All bound states in ``bracket`` via inertia counting and refinement.

    A bracket end where Phi is numerically singular is reported as a root
    flagged "bracket edge" and is not refined.
    """
    centers = list(centers)
    if bracket is None:
        bracket = default_bracket(backend, centers)
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (lo < hi < 0):
        raise ValueError("bracket must satisfy E_lo < E_hi < 0")
    if grid < 2:
        raise ValueError("grid needs at least two points")
    if not centers:
        return SpectralScan((lo, hi), grid, tol)

    # log-spaced in -E, ascending in E
    Es = -np.geomspace(-lo, -hi, grid)
    with ThreadPoolExecutor(thread_count()) as pool:
        eigs = list(pool.map(lambda e: _eigs(backend, centers, e), Es))
    counts = np.array([int(np.sum(ev < 0)) for ev in eigs])

    roots = []
    for i in range(grid - 1):
        k0, k1 = counts[i], counts[i + 1]
        if k1 <= k0:
            continue
        roots.extend(_refine(backend, centers, Es[i], Es[i + 1], k0, k1, tol, residual_tol))

    # roots on the bracket ends are reported as flagged, unrefined entries
    out, notes = [], []
    edges = []
    for E_edge, ev in ((lo, eigs[0]), (hi, eigs[-1])):
        near = np.abs(ev) < residual_tol
        if np.any(near):
            edges.append(E_edge)
            out.append(Root(float(E_edge), int(near.sum()), float(np.min(np.abs(ev))), "bracket edge"))
    for r in roots:
        if not any(abs(r.energy - e) <= tol * max(1.0, abs(e)) for e in edges):
            out.append(r)
    below = int(np.sum(eigs[0] <= -residual_tol))
    if below > 0:
        notes.append(f"{below} bound state(s) below the bracket")
    out.sort(key=lambda r: r.energy)
    return SpectralScan((lo, hi), grid, tol, tuple(out), below, tuple(notes))


def _count(backend, centers, E):
    return int(np.sum(_eigs(backend, centers, E) < 0))


def _refine(backend, centers, a, b, k0, k1, tol, residual_tol):
    """Roots in (a, b) where the negative-eigenvalue count rises from k0 to k1."""
    if k1 - k0 == 1:
        def f(E):
            return _eigs(backend, centers, E)[k0]
        fa, fb = f(a), f(b)
        if fa == 0.0:
            E = a
        elif fb == 0.0:
            E = b
        else:
            E = brentq(f, a, b, xtol=min(tol, 1e-14) * max(1.0, abs(a)), rtol=4 * np.finfo(float).eps,
                       maxiter=500)
        ev = _eigs(backend, centers, E)
        res = float(abs(ev[k0]))
        mult = int(np.sum(np.abs(ev) <= max(residual_tol, res)))
        return [Root(float(E), max(1, mult), res)]
    # several crossings in one cell: bisect on the count until they separate
    if b - a <= tol * max(1.0, abs(a)):
        E = 0.5 * (a + b)
        ev = _eigs(backend, centers, E)
        res = float(np.min(np.abs(ev[k0:k1])))
        return [Root(float(E), k1 - k0, res, "cluster")]
    m = 0.5 * (a + b)
    km = _count(backend, centers, m)
    out = []
    if km > k0:
        out += _refine(backend, centers, a, m, k0, km, tol, residual_tol)
    if k1 > km:
        out += _refine(backend, centers, m, b, km, k1, tol, residual_tol)
    return out
