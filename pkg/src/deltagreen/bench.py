"""Operation-count benchmark: incremental extension vs direct rebuild.

One random 1D chain is grown center by center. At every step the new state
is produced by ``extend`` and, independently, the full weight matrix is
rebuilt from scratch. Kernel evaluations and arithmetic are counted by
:class:`~deltagreen.engine.OpCounter`; wall times are recorded alongside but
never used for pass/fail decisions.
"""
from __future__ import annotations

import platform
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import engine, kernels
from .core import Bare, Point
from .flat import Flat1D

MIN_SIZES = 4


@dataclass(frozen=True)
class Fit:
    slope: float
    intercept: float
    residual: float          # rms of log residuals

    def as_dict(self):
        return {"slope": self.slope, "intercept": self.intercept, "residual": self.residual}


@dataclass
class BenchReport:
    sizes: np.ndarray
    extend_evals: np.ndarray
    extend_flops: np.ndarray
    extend_seconds: np.ndarray
    direct_evals: np.ndarray
    direct_flops: np.ndarray
    direct_seconds: np.ndarray
    cum_extend_flops: np.ndarray
    cum_direct_flops: np.ndarray
    fits: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    COLUMNS = ("n", "extend_kernel_evals", "extend_flops", "extend_seconds",
               "direct_kernel_evals", "direct_flops", "direct_seconds",
               "cum_extend_flops", "cum_direct_flops")

    def rows(self):
        cols = (self.sizes, self.extend_evals, self.extend_flops, self.extend_seconds,
                self.direct_evals, self.direct_flops, self.direct_seconds,
                self.cum_extend_flops, self.cum_direct_flops)
        out = []
        for i in range(len(self.sizes)):
            out.append({k: (float(c[i]) if c.dtype.kind == "f" else int(c[i]))
                        for k, c in zip(self.COLUMNS, cols)})
        return out


def fit_loglog(n, y) -> Fit:
    """Least-squares slope of log y against log n."""
    x, ly = np.log(np.asarray(n, float)), np.log(np.asarray(y, float))
    A = np.stack([x, np.ones_like(x)], axis=1)
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    r = ly - A @ coef
    return Fit(float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(r**2))))


def random_chain(n, seed=None, span=10.0):
    """n distinct 1D centers in [-span, span] with couplings in [0.1, 5]."""
    rng = np.random.default_rng(seed)
    xs = rng.uniform(-span, span, n)
    while len(np.unique(xs)) < n:
        xs = rng.uniform(-span, span, n)
    lam = rng.uniform(0.1, 5.0, n)
    kappa = float(rng.uniform(0.5, 3.0))
    return [(Point(x), Bare(l)) for x, l in zip(xs, lam)], -kappa**2


def environment():
    return {
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "platform": platform.platform(),
        "machine": platform.machine(),
        "kernels": kernels.NAME,
    }


def run_bench(n_max=256, seed=0, direct=True) -> BenchReport:
    """Grow one chain to ``n_max + 1`` centers, recording even sizes.

    ``n`` is the number of centers present before the step, so the extend
    step at size n evaluates n off-diagonal kernels and one diagonal.
    """
    sizes = np.arange(2, n_max + 1, 2)
    if len(sizes) < MIN_SIZES:
        raise ValueError(f"n_max={n_max} gives {len(sizes)} sizes; a slope fit needs {MIN_SIZES}")
    centers, E = random_chain(n_max + 1, seed)
    be = Flat1D()
    state = engine.init(be, E)
    rec = {k: [] for k in ("ee", "ef", "et", "de", "df", "dt", "ce", "cd")}
    cum_e = cum_d = 0
    ctr = engine.OpCounter()
    for n in range(n_max + 1):
        sup, cpl = centers[n]
        ctr.reset()
        t0 = time.perf_counter()
        state = engine.extend(state, sup, cpl, ctr)
        te = time.perf_counter() - t0
        ext = ctr.snapshot()
        cum_e += ext[1]
        if direct:
            ctr.reset()
            t0 = time.perf_counter()
            engine.direct_weights(be, centers[: n + 1], E, ctr)
            td = time.perf_counter() - t0
            dct = ctr.snapshot()
        else:
            td, dct = 0.0, (0, 0)
        cum_d += dct[1]
        if n >= 2 and n % 2 == 0:
            for k, v in zip(rec, (ext[0], ext[1], te, dct[0], dct[1], td, cum_e, cum_d)):
                rec[k].append(v)

    arr = {k: np.asarray(v) for k, v in rec.items()}
    fits = {
        "extend_evals": fit_loglog(sizes, arr["ee"]),
        "extend_flops": fit_loglog(sizes, arr["ef"]),
        "cum_extend_flops": fit_loglog(sizes, arr["ce"]),
    }
    if direct:
        fits.update({
            "direct_evals": fit_loglog(sizes, arr["de"]),
            "direct_flops": fit_loglog(sizes, arr["df"]),
            "cum_direct_flops": fit_loglog(sizes, arr["cd"]),
        })
    meta = {"n_max": int(n_max), "seed": seed, "energy": float(E), **environment()}
    return BenchReport(sizes, arr["ee"], arr["ef"], arr["et"].astype(float), arr["de"], arr["df"],
                       arr["dt"].astype(float), arr["ce"], arr["cd"], fits, meta)


# --------------------------------------------------------------------------
# compiled vs pure-Python kernels


def _best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def compare_backends(size=20000, repeat=5, seed=0):
    """Best-of wall times for each hot kernel in both implementations.

    Returns a list of dicts with keys ``kernel``, ``python``, ``compiled``
    and ``speedup``; ``compiled`` is None when the extension is not built.
    """
    from . import _pykernels as py
    comp = kernels.compiled
    rng = np.random.default_rng(seed)
    z = rng.uniform(0.01, 30.0, size)
    d = rng.uniform(-3.0, 3.0, size)
    t = rng.uniform(1e-3, 5.0, size)
    x = rng.uniform(-1.0, 1.0, max(size // 100, 1))
    m = 300
    W = rng.standard_normal((m, m))
    W = W + W.T
    u = rng.standard_normal(m)
    cases = {
        "k0": lambda mod: mod.k0(z),
        "i0": lambda mod: mod.i0(z),
        "border": lambda mod: mod.border(W, u, 0.5),
        "legendre_table": lambda mod: mod.legendre_table(x, 400),
        "periodic_heat_1d": lambda mod: mod.periodic_heat_1d(d, t, 2.0, True),
    }
    out = []
    for name, case in cases.items():
        tp = _best_of(lambda: case(py), repeat)
        tc = _best_of(lambda: case(comp), repeat) if comp is not None else None
        out.append({"kernel": name, "python": tp, "compiled": tc,
                    "speedup": (tp / tc) if tc else None})
    return out


__all__ = ["BenchReport", "Fit", "fit_loglog", "random_chain", "run_bench", "compare_backends",
           "environment"]
