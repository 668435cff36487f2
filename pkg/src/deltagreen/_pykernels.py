"""Pure numpy implementations of the hot kernels.

This module is the reference fallback for :mod:`deltagreen._ckernels`. Every
function here has the same name, signature and semantics as its compiled
counterpart; the compiled module only accepts real float64 input, while these
versions also accept complex arguments.
"""
import numpy as np

NAME = "python"

EULER_GAMMA = 0.57721566490153286061
_SERIES_CUT = 2.0
_I0_SERIES_MAX = 15.0
# half-line trapezoid for exp(z) K0(z), see k0()
_K0_STEP = 0.2
_K0_NODES = np.arange(0, 34) * _K0_STEP


def _i0_series(z):
    q = 0.25 * z * z
    term = np.ones_like(q)
    total = np.ones_like(q)
    for k in range(1, 200):
        term = term * q / (k * k)
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return total


def _k0_series(z):
    q = 0.25 * z * z
    term = np.ones_like(q)
    i0 = np.ones_like(q)
    acc = np.zeros_like(q)
    harmonic = 0.0
    for k in range(1, 60):
        term = term * q / (k * k)
        harmonic += 1.0 / k
        i0 = i0 + term
        acc = acc + term * harmonic
        if np.all(np.abs(term) * max(harmonic, 1.0) <= 1e-18 * np.abs(i0)):
            break
    return -(np.log(0.5 * z) + EULER_GAMMA) * i0 + acc


def _k0_trapezoid(z):
    # exp(z) K0(z) = sqrt(2/z) * int_0^inf exp(-w^2) / sqrt(1 + w^2/(2z)) dw
    w2 = _K0_NODES[:, None] ** 2
    f = np.exp(-w2) / np.sqrt(1.0 + w2 / (2.0 * z[None, :]))
    s = _K0_STEP * (f.sum(axis=0) - 0.5 * f[0])
    return np.sqrt(2.0 / z) * np.exp(-z) * s


def _i0_trapezoid(z):
    out = np.empty_like(z)
    for idx, zz in np.ndenumerate(z):
        n = int(np.sqrt(80.0 * abs(zz))) + 16
        theta = 2.0 * np.pi * np.arange(n) / n
        out[idx] = np.exp(zz) * np.mean(np.exp(-zz * (1.0 - np.cos(theta))))
    return out


def i0(z):
    """Modified Bessel function I0 for real or complex arrays."""
    z = np.asarray(z)
    dtype = np.complex128 if np.iscomplexobj(z) else np.float64
    z = z.astype(dtype, copy=False)
    out = np.empty(z.shape, dtype=dtype)
    small = np.abs(z) <= _I0_SERIES_MAX
    if np.any(small):
        out[small] = _i0_series(z[small])
    if np.any(~small):
        out[~small] = _i0_trapezoid(z[~small])
    return out


def k0(z):
    """Modified Bessel function K0 for real or complex arrays with Re z > 0."""
    z = np.asarray(z)
    dtype = np.complex128 if np.iscomplexobj(z) else np.float64
    z = z.astype(dtype, copy=False)
    out = np.empty(z.shape, dtype=dtype)
    small = np.abs(z) <= _SERIES_CUT
    if np.any(small):
        out[small] = _k0_series(z[small])
    big = ~small
    if np.any(big):
        zb = z[big]
        vals = np.zeros(zb.shape, dtype=dtype)
        ok = zb.real < 740.0
        if np.any(ok):
            vals[ok] = _k0_trapezoid(zb[ok])
        out[big] = vals
    return out


def border(W, u, scale):
    """Bordered extension of a symmetric weight matrix.

    Returns the (n+1, n+1) matrix
    ``[[W + scale * u u^T, scale * u], [scale * u^T, scale]]``.
    """
    n = W.shape[0]
    dtype = np.result_type(W, u, scale)
    out = np.empty((n + 1, n + 1), dtype=dtype)
    su = scale * u
    out[:n, :n] = W + np.outer(su, u)
    out[:n, n] = su
    out[n, :n] = su
    out[n, n] = scale
    return out


def legendre_table(x, lmax):
    """P_l(x) for l = 0..lmax, shape ``(len(x), lmax + 1)``."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty((x.size, lmax + 1))
    out[:, 0] = 1.0
    if lmax >= 1:
        out[:, 1] = x
    for l in range(1, lmax):
        out[:, l + 1] = ((2 * l + 1) * x * out[:, l] - l * out[:, l - 1]) / (l + 1)
    return out


def periodic_heat_1d(d, t, L, subtract_mean):
    """Heat kernel of d^2/dx^2 on a circle of circumference L.

    ``d`` and ``t`` are equal-length 1-D arrays. Each entry is summed either
    over images (short times) or over Fourier modes (long times), whichever
    needs fewer terms. With ``subtract_mean`` the constant mode 1/L is removed.
    """
    d = np.asarray(d, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    out = np.empty(d.shape)
    for i in range(d.size):
        out[i] = _theta_one(d[i], t[i], L, subtract_mean)
    return out


def _theta_one(d, t, L, subtract_mean):
    d = d - L * np.floor(d / L + 0.5)
    n_img = int(np.ceil(np.sqrt(160.0 * t) / L)) + 2
    n_four = int(np.ceil(L * np.sqrt(40.0 / t) / (2.0 * np.pi))) + 2
    if n_img <= n_four:
        n = np.arange(-n_img, n_img + 1)
        s = np.sum(np.exp(-((d + n * L) ** 2) / (4.0 * t))) / np.sqrt(4.0 * np.pi * t)
        return s - 1.0 / L if subtract_mean else s
    k = np.arange(1, n_four + 1)
    w = 2.0 * np.pi * k / L
    s = 2.0 * np.sum(np.exp(-w * w * t) * np.cos(w * d)) / L
    return s if subtract_mean else s + 1.0 / L
