# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled biquad-cascade filter kernel.

Identical algorithm to _iir_py.sosfilt (direct form II transposed per
section). The time recurrence is inherently sequential, which is why this
lives in a compiled extension instead of numpy.
"""


def sosfilt(double[:, ::1] sos, double[::1] x, double[::1] out):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t n_sections = sos.shape[0]
    cdef Py_ssize_t s, i
    cdef double b0, b1, b2, a1, a2, z1, z2, xi, yi

    if n == 0:
        return out
    if &out[0] != &x[0]:
        for i in range(n):
            out[i] = x[i]
    for s in range(n_sections):
        b0 = sos[s, 0]
        b1 = sos[s, 1]
        b2 = sos[s, 2]
        a1 = sos[s, 4]
        a2 = sos[s, 5]
        z1 = 0.0
        z2 = 0.0
        for i in range(n):
            xi = out[i]
            yi = b0 * xi + z1
            z1 = b1 * xi - a1 * yi + z2
            z2 = b2 * xi - a2 * yi
            out[i] = yi
    return out
