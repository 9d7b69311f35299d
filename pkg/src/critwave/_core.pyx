# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled per-step kernels: fused mode updates and pointwise powers.

Same contracts as critwave._purekernels; arrays arrive flattened
C-contiguous.  Expressions are kept in the same elementwise order as the
numpy fallback so the two backends agree to rounding.
"""

from libc.math cimport fabs, pow

import numpy as np

BACKEND_NAME = "compiled"


def dw_apply(double[::1] e11, double[::1] e12, double[::1] e21, double[::1] e22,
             double complex[::1] u, double complex[::1] ut,
             double complex[::1] out_u, double complex[::1] out_ut):
    cdef Py_ssize_t i, n = u.shape[0]
    cdef double complex a, b
    for i in range(n):
        a = u[i]
        b = ut[i]
        out_u[i] = e11[i] * a + e12[i] * b
        out_ut[i] = e21[i] * a + e22[i] * b


def dw_update(double[::1] e11, double[::1] e12, double[::1] e21, double[::1] e22,
              double[::1] wpos, double[::1] wvel, double complex[::1] f,
              double complex[::1] u, double complex[::1] ut):
    cdef Py_ssize_t i, n = u.shape[0]
    cdef double complex a, b, src
    for i in range(n):
        a = u[i]
        b = ut[i]
        src = f[i]
        u[i] = e11[i] * a + e12[i] * b + wpos[i] * src
        ut[i] = e21[i] * a + e22[i] * b + wvel[i] * src


def heat_position(double[::1] m, double complex[::1] u, double complex[::1] out):
    cdef Py_ssize_t i, n = u.shape[0]
    for i in range(n):
        out[i] = m[i] * u[i]


def heat_update(double[::1] m, double[::1] w, double complex[::1] f,
                double complex[::1] u):
    cdef Py_ssize_t i, n = u.shape[0]
    for i in range(n):
        u[i] = m[i] * u[i] + w[i] * f[i]


def abs_power(double[::1] w, double exponent, double[::1] out):
    cdef Py_ssize_t i, n = w.shape[0]
    for i in range(n):
        out[i] = pow(fabs(w[i]), exponent)
