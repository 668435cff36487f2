"""Rank-one recursion engine and the direct principal-matrix path.

The n-center Green's function is stored in weight form

    G_n(x, y) = G0(x, y) + sum_ij G0(x, v_i) W_ij G0(v_j, y)

with W the inverse of the principal matrix. Adding a center borders W by one
row and column (a Sherman-Morrison/Schur-complement step), which needs the n
new kernel values against earlier centers, one diagonal value and O(n^2)
arithmetic. The direct path assembles the principal matrix and solves it; the
two routes are independent and are used to check each other.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import lapack

from . import kernels
from .core import (
    Bare,
    DeltaGreenError,
    NumericalError,
    PoleError,
    Renormalized,
    SingularProbeError,
    as_energy,
    supports_collide,
)

POLE_REL = 1e-12
COND_MAX = 1e13


class BoundStateError(NumericalError):
    """The principal matrix is singular (or too ill-conditioned) at this energy."""


class UnsupportedError(DeltaGreenError, TypeError):
    """The backend cannot provide what the operation needs."""


@dataclass
class OpCounter:
    """Instrumentation sink for backend kernel evaluations and arithmetic.

    ``flops`` counts multiply-add pairs; LAPACK calls are charged their
    standard leading-order cost.
    """

    kernel_evals: int = 0
    flops: int = 0

    def reset(self):
        self.kernel_evals = 0
        self.flops = 0

    def snapshot(self):
        return self.kernel_evals, self.flops


def _sink(counter):
    return counter if counter is not None else OpCounter()


@dataclass(frozen=True, eq=False)
class GreenState:
    backend: object
    energy: object
    supports: tuple = ()
    couplings: tuple = ()
    weights: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    gram: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))

    @property
    def n(self) -> int:
        return len(self.supports)

    @property
    def E(self):
        return self.energy.value

    @property
    def centers(self):
        return list(zip(self.supports, self.couplings))

    def principal(self) -> np.ndarray:
        """Phi reassembled from the stored Gram entries (no kernel calls)."""
        Phi = -np.array(self.gram)
        if self.n:
            diag = np.array([self._phi_ii(i, s, c) for i, (s, c) in enumerate(self.centers)])
            Phi[np.diag_indices(self.n)] = diag
        return Phi

    def _phi_ii(self, i, s, c):
        if isinstance(c, Renormalized):
            return self.gram[i, i]
        cf = self.backend.coupling_factor(s, c)
        # a zero coupling has an all-zero row and column in W; any finite
        # diagonal leaves products with W unchanged
        return 1.0 / cf - self.gram[i, i] if cf != 0 else 1.0


def _frozen(a):
    a = np.asarray(a)
    a.setflags(write=False)
    return a


def init(backend, energy) -> GreenState:
    """Empty state: evaluates to the free Green's function."""
    e = backend.check_energy(as_energy(energy, backend.units))
    return GreenState(backend, e, (), (), _frozen(np.zeros((0, 0))), _frozen(np.zeros((0, 0))))


def _check_new_support(state, support):
    for s in state.supports:
        if type(s) is type(support) and supports_collide(s, support):
            raise ValueError("new support coincides with or intersects an existing center")
    pc = getattr(state.backend, "probe_check", None)
    if state.backend.renormalized and pc is not None and state.supports:
        try:
            pc(np.asarray(support.position, float), state.supports)
        except SingularProbeError:
            raise ValueError("new support coincides with an existing center") from None


def _gram_border(gram, g, diag):
    n = gram.shape[0]
    out = np.empty((n + 1, n + 1), dtype=np.result_type(gram, g, diag))
    out[:n, :n] = gram
    out[:n, n] = g
    out[n, :n] = g
    out[n, n] = diag
    return out


def _scalar(v):
    v = complex(v)
    return v.real if v.imag == 0.0 else v


def extend(state: GreenState, support, coupling, counter: Optional[OpCounter] = None) -> GreenState:
    """Add a codimension-one center with a bare coupling.

    The coupling enters through c = lambda, lambda/L or lambda/V(Sigma) and the
    new Green's function is G_n + c G_n(., v) G_n(v, .) / (1 - c G_n(v, v)).
    """
    if not isinstance(coupling, Bare):
        raise TypeError("extend takes a Bare coupling; use extend_renormalized for mu couplings")
    if state.backend.renormalized:
        raise UnsupportedError("renormalized backends need extend_renormalized")
    ctr = _sink(counter)
    _check_new_support(state, support)
    E = state.energy.value
    be = state.backend
    n = state.n
    c = be.coupling_factor(support, coupling)
    g = be.bilinear_row(E, list(state.supports), support) if n else np.zeros(0)
    b = be.bilinear(E, support, support)
    ctr.kernel_evals += n + 1

    W = state.weights
    u = W @ g
    q = g @ u
    ctr.flops += n * n + n
    gvv = b + q
    D = 1.0 - c * gvv
    if abs(D) < POLE_REL * max(1.0, abs(c * gvv)):
        raise PoleError(f"energy {E} is at a pole of the {n + 1}-center Green's function")
    scale = _scalar(c / D)
    W2 = kernels.border(W, u, scale)
    ctr.flops += n * n + n
    return GreenState(be, state.energy, state.supports + (support,), state.couplings + (coupling,),
                      _frozen(W2), _frozen(_gram_border(state.gram, g, b)))


def extend_renormalized(state: GreenState, support, coupling,
                        counter: Optional[OpCounter] = None) -> GreenState:
    """Add a renormalized point center.

    The new term is G_n(., a) G_n(a, .) / (Phi_aa - g^T W g) with Phi_aa the
    subtracted time integral supplied by the backend; no coupling factor
    appears in the numerator.
    """
    if not isinstance(coupling, Renormalized):
        raise TypeError("extend_renormalized takes a Renormalized coupling")
    be = state.backend
    if not getattr(be, "renormalized", False) or not hasattr(be, "phi_diag"):
        raise UnsupportedError("backend lacks renormalized diagonal")
    ctr = _sink(counter)
    _check_new_support(state, support)
    E = state.energy.value
    n = state.n
    g = be.bilinear_row(E, list(state.supports), support) if n else np.zeros(0)
    phi = be.phi_diag(E, support, coupling)
    ctr.kernel_evals += n + 1

    W = state.weights
    u = W @ g
    q = g @ u
    ctr.flops += n * n + n
    S = phi - q
    if abs(S) < POLE_REL * max(abs(phi), abs(q), 1e-300) or S == 0:
        raise PoleError(f"energy {E} is at a pole of the {n + 1}-center Green's function")
    W2 = kernels.border(W, u, _scalar(1.0 / S))
    ctr.flops += n * n + n
    return GreenState(be, state.energy, state.supports + (support,), state.couplings + (coupling,),
                      _frozen(W2), _frozen(_gram_border(state.gram, g, phi)))


def denominator(state: GreenState, support, coupling):
    """The scalar an extension step divides by.

    Bare: 1 - c <v|G_n|v>. Renormalized: Phi_aa - g^T W g. Its zeros in E
    are the new bound states of the (n+1)-center problem.
    """
    be = state.backend
    E = state.energy.value
    g = be.bilinear_row(E, list(state.supports), support) if state.n else np.zeros(0)
    q = g @ (state.weights @ g)
    if isinstance(coupling, Renormalized):
        return _scalar(be.phi_diag(E, support, coupling) - q)
    c = be.coupling_factor(support, coupling)
    return _scalar(1.0 - c * (be.bilinear(E, support, support) + q))


def add(state, support, coupling, counter=None):
    """Dispatch to extend or extend_renormalized on the coupling type."""
    if isinstance(coupling, Renormalized):
        return extend_renormalized(state, support, coupling, counter)
    return extend(state, support, coupling, counter)


def build(backend, centers, energy, counter=None) -> GreenState:
    """Run the recursion over ``centers`` in order."""
    st = init(backend, energy)
    for sup, cpl in centers:
        st = add(st, sup, cpl, counter)
    return st


def _field_matrix(state, x):
    """(m, n) matrix of G0(x_k, v_i)."""
    be = state.backend
    E = state.energy.value
    cols = [np.atleast_1d(be.field(E, x, s)) for s in state.supports]
    if not cols:
        return np.zeros((x.shape[0], 0))
    return np.stack(cols, axis=-1)


def _probes(be, x):
    x = np.asarray(x, dtype=float)
    if be.dim == 1:
        return x.reshape(-1, 1), x.ndim == 0 or x.size == 1 and x.ndim <= 1
    return np.atleast_2d(x), x.ndim == 1


def evaluate(state: GreenState, x, y, refine=True):
    """G_n(x, y). Accepts single coordinates or stacks of them.

    With ``refine`` the product W b_y gets one step of iterative refinement
    against the stored principal matrix. This costs O(n^2) per probe, like
    the plain product, and removes the error amplification that W alone
    shows when G is much smaller than the terms that sum to it.
    """
    be = state.backend
    X, single = _probes(be, x)
    Y, _ = _probes(be, y)
    X, Y = np.broadcast_arrays(X, Y)
    if state.n and hasattr(be, "probe_check"):
        be.probe_check(X, state.supports)
        be.probe_check(Y, state.supports)
    g0 = np.atleast_1d(be.g0(state.energy.value, X, Y))
    if state.n:
        FX = _field_matrix(state, X)
        FY = FX if (X is Y or np.array_equal(X, Y)) else _field_matrix(state, Y)
        W = state.weights
        Z = W @ FY.T
        if refine:
            Z = Z + W @ (FY.T - state.principal() @ Z)
        g0 = g0 + np.einsum("mi,im->m", FX, Z)
    return _scalar(g0[0]) if single else g0


def bilinear(state: GreenState, v, w):
    """<v| G_n |w> = B_vw + b_v^T W b_w."""
    be = state.backend
    E = state.energy.value
    bvw = be.bilinear(E, v, w)
    if not state.n:
        return bvw
    bv = be.bilinear_row(E, list(state.supports), v)
    bw = bv if v is w else be.bilinear_row(E, list(state.supports), w)
    return _scalar(bvw + bv @ state.weights @ bw)


# --------------------------------------------------------------------------
# direct path


@dataclass(frozen=True)
class PrincipalMatrix:
    matrix: np.ndarray
    energy: object
    renormalized: bool

    @property
    def n(self):
        return self.matrix.shape[0]


def _active(centers):
    """Zero bare couplings contribute nothing and have no finite 1/lambda."""
    return [(s, c) for s, c in centers if not (isinstance(c, Bare) and c.strength == 0)]


def build_principal_matrix(backend, centers, energy, counter=None) -> PrincipalMatrix:
    """Phi(E): diagonal 1/c_i - B_ii (bare) or the subtracted integral, off-diagonal -B_ij."""
    ctr = _sink(counter)
    e = backend.check_energy(as_energy(energy, backend.units))
    E = e.value
    centers = _active(centers)
    supports = [s for s, _ in centers]
    n = len(centers)
    vals = []
    for j, (sup, cpl) in enumerate(centers):
        row = backend.bilinear_row(E, supports[:j], sup) if j else np.zeros(0)
        if isinstance(cpl, Renormalized):
            if not getattr(backend, "renormalized", False):
                raise UnsupportedError("backend lacks renormalized diagonal")
            d = backend.phi_diag(E, sup, cpl)
        else:
            d = 1.0 / backend.coupling_factor(sup, cpl) - backend.bilinear(E, sup, sup)
        ctr.kernel_evals += j + 1
        vals.append((row, d))
    dtype = np.result_type(float, *[v for r, d in vals for v in (r.dtype, np.asarray(d).dtype)])
    Phi = np.zeros((n, n), dtype=dtype)
    for j, (row, d) in enumerate(vals):
        Phi[:j, j] = -row
        Phi[j, :j] = -row
        Phi[j, j] = d
    renorm = bool(centers) and isinstance(centers[0][1], Renormalized)
    return PrincipalMatrix(Phi, e, renorm)


def _sym_factor(Phi, counter):
    """Bunch-Kaufman LDL^T with a reciprocal condition estimate."""
    n = Phi.shape[0]
    cplx = np.iscomplexobj(Phi)
    a = np.asfortranarray(Phi, dtype=np.complex128 if cplx else np.float64)
    sytrf, sycon = lapack.get_lapack_funcs(("sytrf", "sycon"), (a,))
    lwork = max(1, n * 64)
    ldu, ipiv, info = sytrf(a, lower=0, lwork=lwork)
    counter.flops += n**3 // 3
    if info > 0:
        raise BoundStateError("principal matrix is exactly singular: energy is a bound state")
    anorm = np.max(np.sum(np.abs(Phi), axis=0)) if n else 0.0
    rcond, info = sycon(ldu, ipiv, anorm, lower=0)
    counter.flops += 2 * n * n
    if rcond * COND_MAX < 1.0:
        raise BoundStateError(f"principal matrix condition estimate {1 / max(rcond, 1e-300):.3g} "
                              "exceeds 1e13: energy is (numerically) a bound state")
    return ldu, ipiv


def _sym_solve(factor, rhs, counter):
    ldu, ipiv = factor
    sytrs = lapack.get_lapack_funcs("sytrs", (ldu,))
    rhs = np.asfortranarray(rhs, dtype=ldu.dtype)
    x, info = sytrs(ldu, ipiv, rhs, lower=0)
    n = ldu.shape[0]
    k = rhs.shape[1] if rhs.ndim > 1 else 1
    counter.flops += 2 * n * n * k
    return x


def direct_weights(backend, centers, energy, counter=None):
    """Phi^-1 from scratch: the full-rebuild alternative to the recursion."""
    ctr = _sink(counter)
    P = build_principal_matrix(backend, centers, energy, ctr)
    n = P.n
    if n == 0:
        return np.zeros((0, 0)), P
    fac = _sym_factor(P.matrix, ctr)
    W = _sym_solve(fac, np.eye(n), ctr)
    return np.asarray(W), P


def direct_green(backend, centers, energy, x, y, counter=None):
    """G_n(x, y) = G0(x, y) + b_x^T Phi^-1 b_y with one symmetric solve."""
    ctr = _sink(counter)
    P = build_principal_matrix(backend, centers, energy, ctr)
    E = P.energy.value
    centers = _active(centers)
    supports = [s for s, _ in centers]
    X, single = _probes(backend, x)
    Y, _ = _probes(backend, y)
    X, Y = np.broadcast_arrays(X, Y)
    if supports and hasattr(backend, "probe_check"):
        backend.probe_check(X, supports)
        backend.probe_check(Y, supports)
    g0 = np.atleast_1d(backend.g0(E, X, Y))
    if supports:
        cols = lambda Z: np.stack([np.atleast_1d(backend.field(E, Z, s)) for s in supports], axis=-1)
        BX = cols(X)
        BY = BX if np.array_equal(X, Y) else cols(Y)
        fac = _sym_factor(P.matrix, ctr)
        Z = _sym_solve(fac, BY.T, ctr)
        g0 = g0 + np.einsum("im,im->m", BX.T, Z)
    return _scalar(g0[0]) if single else g0
