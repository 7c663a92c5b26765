# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled sequential propagation chain.

Applies the ordered 2x2 step maps to a state vector, capturing the state
at requested grid nodes.  This is the hot inner loop of the ODE oracle:
10^4-10^5 steps per solve, hundreds to thousands of solves per run.
"""
import numpy as np


def chain_2x2(double[::1] m11, double[::1] m12, double[::1] m21, double[::1] m22,
              double w0, double wp0, long long[::1] idx_out):
    cdef Py_ssize_t k = idx_out.shape[0]
    out_w = np.empty(k)
    out_wp = np.empty(k)
    cdef double[::1] ow = out_w
    cdef double[::1] owp = out_wp
    cdef double w = w0, wp = wp0, nw
    cdef Py_ssize_t i = 0, j, target
    with nogil:
        for j in range(k):
            target = idx_out[j]
            while i < target:
                nw = m11[i] * w + m12[i] * wp
                wp = m21[i] * w + m22[i] * wp
                w = nw
                i += 1
            ow[j] = w
            owp[j] = wp
    return out_w, out_wp
