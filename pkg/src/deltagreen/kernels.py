"""Kernel dispatch: compiled core when importable, numpy fallback otherwise.

Set ``DELTAGREEN_PURE=1`` to force the fallback. Complex input is always
routed to the fallback because the compiled core is real-only.
"""
import os

import numpy as np

from . import _pykernels as pure

compiled = None
if os.environ.get("DELTAGREEN_PURE", "") in ("", "0"):
    try:
        from . import _ckernels as compiled
    except ImportError:  # extension not built
        compiled = None

active = compiled if compiled is not None else pure
NAME = active.NAME


def _real(z):
    return not np.iscomplexobj(z)


def k0(z):
    """K0(z), elementwise; scalars in, scalars out."""
    arr = np.asarray(z)
    impl = active if _real(arr) else pure
    out = impl.k0(arr)
    return out[()] if np.ndim(z) == 0 else out


def i0(z):
    """I0(z), elementwise; scalars in, scalars out."""
    arr = np.asarray(z)
    impl = active if _real(arr) else pure
    out = impl.i0(arr)
    return out[()] if np.ndim(z) == 0 else out


def border(W, u, scale):
    if _real(W) and _real(u) and not isinstance(scale, complex) and not np.iscomplexobj(scale):
        return active.border(np.ascontiguousarray(W, dtype=np.float64),
                             np.ascontiguousarray(u, dtype=np.float64), float(scale))
    return pure.border(W, u, scale)


def legendre_table(x, lmax):
    return active.legendre_table(np.atleast_1d(np.asarray(x, dtype=np.float64)), int(lmax))


def periodic_heat_1d(d, t, L, subtract_mean=False):
    d, t = np.broadcast_arrays(np.asarray(d, dtype=np.float64), np.asarray(t, dtype=np.float64))
    out = active.periodic_heat_1d(d.ravel(), t.ravel(), float(L), bool(subtract_mean))
    return np.asarray(out).reshape(d.shape)
