"""Acceptance suite shared by ``green selfcheck`` and the test-suite.

Each criterion returns a :class:`CriterionResult` with the worst measured
error, the tolerance it is judged against and a short detail string.
Reference values come from scipy.special, closed forms or independent
scalar root finding, never from the code under test.
"""
from __future__ import annotations

import contextlib
import math
import time
from dataclasses import dataclass

import numpy as np
from scipy import special
from scipy.optimize import brentq

from . import engine, kernels
from .bench import run_bench
from .core import Bare, Curve, Point, Renormalized, Surface
from .flat import Flat1D, Flat2D, Flat3D
from .heat import FlatRD, HeatBackend, Sphere2D, Torus2D, g0_from_heat
from .spectrum import find_bound_states


@dataclass(frozen=True)
class CriterionResult:
    id: int
    name: str
    passed: bool
    measured: float
    tolerance: float
    seconds: float
    detail: str = ""

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return (f"[{tag}] criterion {self.id:2d} {self.name}: measured {self.measured:.3e} "
                f"(tol {self.tolerance:.0e}, {self.seconds:.2f} s){' ' + self.detail if self.detail else ''}")

    def as_dict(self):
        return {"id": self.id, "name": self.name, "passed": self.passed,
                "measured": self.measured, "tolerance": self.tolerance,
                "seconds": self.seconds, "detail": self.detail}


def _rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def _random_1d(rng, n):
    xs = rng.uniform(-10.0, 10.0, n)
    lam = rng.uniform(0.1, 5.0, n)
    kappa = rng.uniform(0.5, 3.0)
    return [(Point(x), Bare(l)) for x, l in zip(xs, lam)], -kappa**2


def _probe_pairs(rng, m, lo=-12.0, hi=12.0):
    return rng.uniform(lo, hi, m), rng.uniform(lo, hi, m)


# --------------------------------------------------------------------------


def c1_recursion_vs_direct(seed=1):
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    be = Flat1D()
    worst = 0.0
    for _ in range(20):
        centers, E = _random_1d(rng, 50)
        X, Y = _probe_pairs(rng, 10)
        rec = engine.evaluate(engine.build(be, centers, E), X, Y)
        drc = engine.direct_green(be, centers, E, X, Y)
        worst = max(worst, _rel(rec, drc))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-10 and dt < 5.0
    return CriterionResult(1, "recursion-direct equivalence", ok, worst, 1e-10, dt,
                           f"20 configs x 10 probes, n=50, runtime limit 5 s")


def c2_permutation(seed=2):
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    be = Flat1D()
    worst = 0.0
    for _ in range(10):
        centers, E = _random_1d(rng, 8)
        X, Y = _probe_pairs(rng, 10)
        ref = None
        for _ in range(5):
            order = rng.permutation(8)
            g = engine.evaluate(engine.build(be, [centers[i] for i in order], E), X, Y)
            if ref is None:
                ref = g
            else:
                worst = max(worst, _rel(g, ref))
    dt = time.perf_counter() - t0
    return CriterionResult(2, "permutation invariance", worst <= 1e-10, worst, 1e-10, dt,
                           "10 configs x 5 orders, n=8")


def c3_single_bound_state():
    t0 = time.perf_counter()
    lam = 2.0
    # scalar Phi_11(kappa) = 1/lambda - 1/(2 kappa)
    k = brentq(lambda k: 1.0 / lam - 1.0 / (2.0 * k), 0.05, 50.0, xtol=1e-15, rtol=1e-15)
    E_ref = -k * k
    scan = find_bound_states(Flat1D(), [(Point(0.0), Bare(lam))])
    Es = scan.energies
    err = abs(Es[0] - E_ref) if len(Es) == 1 else math.inf
    dt = time.perf_counter() - t0
    return CriterionResult(3, "1D single-center bound state", err <= 1e-12, err, 1e-12, dt,
                           f"E={Es} vs {E_ref!r}")


def c4_pair_bound_states():
    t0 = time.perf_counter()
    # even/odd: kappa = 2 (1 +- exp(-kappa)) for lambda = 4, d = 1
    kp = brentq(lambda k: k - 2.0 - 2.0 * math.exp(-k), 0.5, 10.0, xtol=1e-15, rtol=1e-15)
    km = brentq(lambda k: k - 2.0 + 2.0 * math.exp(-k), 0.5, 10.0, xtol=1e-15, rtol=1e-15)
    ref = sorted([-kp * kp, -km * km])
    scan = find_bound_states(Flat1D(), [(Point(0.0), Bare(4.0)), (Point(1.0), Bare(4.0))])
    Es = scan.energies
    err = max(abs(a - b) for a, b in zip(Es, ref)) if len(Es) == 2 else math.inf
    dt = time.perf_counter() - t0
    return CriterionResult(4, "1D symmetric pair bound states", err <= 1e-8, err, 1e-8, dt,
                           f"E={Es}")


_GRID = (0.5, 1.0, 2.0)


def _renorm_diag(dim, closed, name, cid):
    t0 = time.perf_counter()
    hb = HeatBackend(FlatRD(dim), method="heat")
    a = Point((0.0,) * dim)
    worst = 0.0
    for mu in _GRID:
        for s in _GRID:
            phi = hb.phi_diag(-s * s, a, Renormalized(mu))
            worst = max(worst, abs(phi - closed(mu, s)))
    detail = "Phi_11 quadrature over (mu, sqrt(-E)) grid"
    ok = worst <= 1e-9
    if dim == 2:
        bworst = 0.0
        for mu in _GRID:
            Es = find_bound_states(hb, [(a, Renormalized(mu))]).energies
            bworst = max(bworst, abs(Es[0] + mu * mu) if len(Es) == 1 else math.inf)
        detail += f"; bound state at -mu^2 err {bworst:.2e} (tol 1e-8)"
        ok = ok and bworst <= 1e-8
    return CriterionResult(cid, name, ok, worst, 1e-9, time.perf_counter() - t0, detail)


def c5_renorm_2d():
    return _renorm_diag(2, lambda mu, s: math.log(s * s / (mu * mu)) / (4.0 * math.pi),
                        "renormalized flat 2D", 5)


def c6_renorm_3d():
    return _renorm_diag(3, lambda mu, s: (s - mu) / (4.0 * math.pi), "renormalized flat 3D", 6)


def c7_bilinear_oracles():
    t0 = time.perf_counter()
    circ = Curve.circle((0.0, 0.0), 1.0)
    v_c = Flat2D().bilinear(-1.0, circ, circ)
    ref_c = 2.0 * math.pi * special.i0(1.0) * special.k0(1.0)
    sph = Surface.sphere((0.0, 0.0, 0.0), 1.0)
    v_s = Flat3D().bilinear(-1.0, sph, sph)
    ref_s = 2.0 * math.pi * (1.0 - math.exp(-2.0))
    ec, es = abs(v_c / ref_c - 1.0), abs(v_s / ref_s - 1.0)
    err = max(ec, es)
    return CriterionResult(7, "curve/surface bilinear oracles", err <= 1e-6, err, 1e-6,
                           time.perf_counter() - t0, f"circle {ec:.2e}, sphere {es:.2e}")


def _sphere_grid(n_theta=96, n_phi=192):
    u, w = np.polynomial.legendre.leggauss(n_theta)
    th = np.arccos(u)
    ph = (np.arange(n_phi) + 0.5) * (2.0 * math.pi / n_phi)
    T, P = np.meshgrid(th, ph, indexing="ij")
    W = np.outer(w, np.full(n_phi, 2.0 * math.pi / n_phi))
    return np.stack([T.ravel(), P.ravel()], axis=1), W.ravel()


def _torus_grid(L1, L2, n=256):
    x = np.arange(n) * (L1 / n)
    y = np.arange(n) * (L2 / n)
    X, Y = np.meshgrid(x, y, indexing="ij")
    return np.stack([X.ravel(), Y.ravel()], axis=1), np.full(n * n, L1 * L2 / (n * n))


def heat_checks():
    """Sub-checks of criterion 8 as ``{name: (error, tolerance)}``."""
    out = {}
    # resolvent from the heat kernel on flat space
    e2 = e3 = 0.0
    for E in (-1.0, -4.0):
        k = math.sqrt(-E)
        for r in (0.5, 1.0, 2.0):
            g2 = g0_from_heat(FlatRD(2), E, (0.0, 0.0), (r, 0.0))
            g3 = g0_from_heat(FlatRD(3), E, (0.0, 0.0, 0.0), (r, 0.0, 0.0))
            e2 = max(e2, abs(g2 / (special.k0(k * r) / (2.0 * math.pi)) - 1.0))
            e3 = max(e3, abs(g3 / (math.exp(-k * r) / (4.0 * math.pi * r)) - 1.0))
    out["flat2d g0_from_heat"] = (e2, 1e-10)
    out["flat3d g0_from_heat"] = (e3, 1e-10)

    torus, sphere = Torus2D(1.0, 1.0), Sphere2D(1.0)
    tg, tw = _torus_grid(1.0, 1.0)
    sg, sw = _sphere_grid()
    x_t, z_t = np.array([0.1, 0.2]), np.array([0.7, 0.45])
    x_s, z_s = np.array([0.7, 0.3]), np.array([2.1, 1.9])

    nt = ns = 0.0
    for t in (0.01, 0.1, 1.0):
        nt = max(nt, abs(tw @ torus.heat_points(t, x_t, tg) - 1.0))
        ns = max(ns, abs(sw @ sphere.heat_points(t, x_s, sg) - 1.0))
    out["torus normalization"] = (nt, 1e-10)
    out["sphere normalization"] = (ns, 1e-10)

    t, s = 0.05, 0.1
    lhs = torus.heat(t + s, x_t, z_t)
    rhs = tw @ (torus.heat_points(t, x_t, tg) * torus.heat_points(s, z_t, tg))
    out["torus semigroup"] = (abs(rhs / lhs - 1.0), 1e-8)
    lhs = sphere.heat(t + s, x_s, z_s)
    rhs = sw @ (sphere.heat_points(t, x_s, sg) * sphere.heat_points(s, z_s, sg))
    out["sphere semigroup"] = (abs(rhs / lhs - 1.0), 1e-8)

    t = 1e-3
    flat = 1.0 / (4.0 * math.pi * t)
    out["torus short-time flat limit"] = (abs(float(torus.heat_diag(t)) / flat - 1.0), 1e-8)
    out["sphere short-time flat limit"] = (abs(float(sphere.heat_diag(np.array(t))) / flat - 1.0), 1e-8)
    return out


def c8_heat_consistency():
    t0 = time.perf_counter()
    checks = heat_checks()
    failed = [k for k, (e, tol) in checks.items() if not e <= tol]
    worst = max(e / tol for e, tol in checks.values())
    detail = "; ".join(f"{k} {e:.2e}" for k, (e, tol) in checks.items())
    if failed:
        detail = "failing: " + ", ".join(failed) + " | " + detail
    return CriterionResult(8, "heat-kernel backend consistency", not failed, worst, 1.0,
                           time.perf_counter() - t0, "(measured = worst error/tol) " + detail)


def c9_complexity(seed=0):
    t0 = time.perf_counter()
    rep = run_bench(256, seed)
    counts_ok = bool(np.all(rep.extend_evals == rep.sizes + 1))
    se = rep.fits["extend_flops"].slope
    sd = rep.fits["direct_flops"].slope
    dev = max(abs(se - 2.0), abs(sd - 3.0))
    dt = time.perf_counter() - t0
    ok = counts_ok and dev <= 0.3 and dt < 30.0
    return CriterionResult(9, "complexity claim", ok, dev, 0.3, dt,
                           f"evals==n+1: {counts_ok}; slopes extend {se:.3f}, direct {sd:.3f}")


def c10_curves():
    t0 = time.perf_counter()
    be = Flat2D()
    centers = [(Curve.circle((0.0, 0.0), 1.0), Bare(3.0)),
               (Curve.circle((0.0, 0.0), 2.0), Bare(2.0))]
    r = np.array([0.3, 1.5, 2.7, 0.6, 1.25])
    a = np.array([0.1, 1.3, 2.9, 4.0, 5.5])
    X = np.stack([r * np.cos(a), r * np.sin(a)], axis=1)
    Y = np.stack([1.1 * r[::-1] * np.cos(a + 0.7), 1.1 * r[::-1] * np.sin(a + 0.7)], axis=1)
    rec = engine.evaluate(engine.build(be, centers, -1.0), X, Y)
    drc = engine.direct_green(be, centers, -1.0, X, Y)
    err = _rel(rec, drc)
    return CriterionResult(10, "curve-model recursion cross-check", err <= 1e-8, err, 1e-8,
                           time.perf_counter() - t0, "concentric circles R=1,2")


def c11_renorm_recursion():
    t0 = time.perf_counter()
    be = HeatBackend(FlatRD(2))
    c1 = (Point((0.0, 0.0)), Renormalized(1.0))
    c2 = (Point((2.0, 0.0)), Renormalized(1.0))
    X = np.array([[0.5, 0.5], [1.0, -0.3], [3.0, 1.0], [-1.0, 0.2], [2.2, 2.0]])
    Y = np.array([[1.5, -0.5], [0.1, 0.9], [-2.0, 0.0], [2.5, 0.1], [0.0, -1.0]])
    E = -0.5
    rec = engine.evaluate(engine.build(be, [c1, c2], E), X, Y)
    drc = engine.direct_green(be, [c1, c2], E, X, Y)
    err = _rel(rec, drc)

    def denom(e):
        return engine.denominator(engine.build(be, [c1], e), *c2)

    roots = find_bound_states(be, [c1, c2]).energies
    derr = 0.0
    for Er in roots:
        lo, hi = Er * (1 + 1e-3), Er * (1 - 1e-3)
        Ed = brentq(denom, lo, hi, xtol=1e-15, rtol=1e-15)
        derr = max(derr, abs(Ed - Er))
    if len(roots) != 2:
        derr = math.inf
    ok = err <= 1e-9 and derr <= 1e-8
    return CriterionResult(11, "renormalized recursion", ok, err, 1e-9, time.perf_counter() - t0,
                           f"denominator zero vs det root err {derr:.2e} (tol 1e-8), roots {roots}")


CRITERIA = (c1_recursion_vs_direct, c2_permutation, c3_single_bound_state, c4_pair_bound_states,
            c5_renorm_2d, c6_renorm_3d, c7_bilinear_oracles, c8_heat_consistency,
            c9_complexity, c10_curves, c11_renorm_recursion)


@contextlib.contextmanager
def perturbed_kernel(rel=1e-6):
    """Fault injection: bias the bordering kernel used by the recursion only."""
    orig = kernels.border

    def bad(W, u, scale):
        return orig(W, u, scale * (1.0 + rel))

    kernels.border = bad
    try:
        yield
    finally:
        kernels.border = orig


def run_all(perturb=False):
    ctx = perturbed_kernel() if perturb else contextlib.nullcontext()
    out = []
    with ctx:
        for fn in CRITERIA:
            try:
                out.append(fn())
            except Exception as exc:  # a crash is a failure of that criterion
                cid = CRITERIA.index(fn) + 1
                out.append(CriterionResult(cid, fn.__name__, False, math.inf, 0.0, 0.0,
                                           f"{type(exc).__name__}: {exc}"))
    return out
