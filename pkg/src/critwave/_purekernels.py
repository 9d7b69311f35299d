"""Pure-numpy implementations of the per-step hot kernels.

These mirror critwave._core (the Cython extension) operation for
operation; the backend module picks whichever is available.
"""

import numpy as np

BACKEND_NAME = "python"


def dw_apply(e11, e12, e21, e22, u, ut, out_u, out_ut):
    """(u, ut) <- E * (u, ut) per mode, written into out arrays."""
    np.multiply(e11, u, out=out_u)
    out_u += e12 * ut
    np.multiply(e21, u, out=out_ut)
    out_ut += e22 * ut


def dw_update(e11, e12, e21, e22, wpos, wvel, f, u, ut):
    """In-place full step: (u, ut) <- E*(u, ut) + (wpos, wvel)*f."""
    new_u = e11 * u + e12 * ut + wpos * f
    new_ut = e21 * u + e22 * ut + wvel * f
    u[...] = new_u
    ut[...] = new_ut


def heat_position(m, u, out):
    np.multiply(m, u, out=out)


def heat_update(m, w, f, u):
    """In-place full step: u <- m*u + w*f."""
    u *= m
    u += w * f


def abs_power(w, exponent, out):
    """out <- |w|^exponent pointwise on a real array."""
    np.abs(w, out=out)
    np.power(out, exponent, out=out)
