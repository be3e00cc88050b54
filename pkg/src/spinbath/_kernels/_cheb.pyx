# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Chebyshev recursion kernel.

Evaluates y = phase * (c_0 x + 2 sum_{n>=1} c_n T_n(Htilde) x) for a CSR
matrix H, with Htilde = (H - b) / a. The whole three-term recursion runs
inside one nogil loop so no temporaries are allocated per order.
"""

import numpy as np

cimport numpy as cnp

ctypedef cnp.complex128_t cplx


cdef void _shifted_matvec(const long long[::1] indptr, const int[::1] indices,
                          const cplx[::1] data, double b, double inv_a,
                          const cplx[::1] x, cplx[::1] out) noexcept nogil:
    # out = inv_a * (H x - b x)
    cdef Py_ssize_t i, j
    cdef cplx acc
    for i in range(out.shape[0]):
        acc = 0
        for j in range(indptr[i], indptr[i + 1]):
            acc = acc + data[j] * x[indices[j]]
        out[i] = inv_a * (acc - b * x[i])


def csr_matvec(indptr, indices, data, x):
    """Plain y = H x for a square complex CSR matrix."""
    cdef const long long[::1] ip = indptr
    cdef const int[::1] ix = indices
    cdef const cplx[::1] dv = data
    cdef const cplx[::1] xv = x
    y = np.empty_like(x)
    cdef cplx[::1] yv = y
    _shifted_matvec(ip, ix, dv, 0.0, 1.0, xv, yv)
    return y


def cheb_apply(indptr, indices, data, double b, double inv_a, coeffs, x,
               double complex phase):
    """Apply the Chebyshev polynomial of (H - b)/a with the given
    coefficients to x and multiply by the overall phase."""
    cdef const long long[::1] ip = indptr
    cdef const int[::1] ix = indices
    cdef const cplx[::1] dv = data
    cdef const cplx[::1] cs = coeffs
    cdef const cplx[::1] xv = x
    cdef Py_ssize_t dim = x.shape[0]
    cdef Py_ssize_t order = coeffs.shape[0]

    y = np.empty_like(x)
    cdef cplx[::1] yv = y
    t_prev_arr = np.array(x, copy=True)
    t_cur_arr = np.empty_like(x)
    t_next_arr = np.empty_like(x)
    cdef cplx[::1] t_prev = t_prev_arr
    cdef cplx[::1] t_cur = t_cur_arr
    cdef cplx[::1] t_next = t_next_arr
    cdef cplx[::1] tmp
    cdef cplx c, ph = phase
    cdef Py_ssize_t i, n

    with nogil:
        c = cs[0]
        for i in range(dim):
            yv[i] = c * xv[i]
        if order > 1:
            _shifted_matvec(ip, ix, dv, b, inv_a, t_prev, t_cur)
            c = 2.0 * cs[1]
            for i in range(dim):
                yv[i] = yv[i] + c * t_cur[i]
        for n in range(2, order):
            _shifted_matvec(ip, ix, dv, b, inv_a, t_cur, t_next)
            c = 2.0 * cs[n]
            for i in range(dim):
                t_next[i] = 2.0 * t_next[i] - t_prev[i]
                yv[i] = yv[i] + c * t_next[i]
            tmp = t_prev
            t_prev = t_cur
            t_cur = t_next
            t_next = tmp
        for i in range(dim):
            yv[i] = ph * yv[i]
    return y
