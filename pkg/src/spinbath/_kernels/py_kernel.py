"""Pure numpy/scipy fallback for the Chebyshev recursion kernel."""

import numpy as np


def cheb_apply_csr(csr, b, inv_a, coeffs, x, phase):
    y = coeffs[0] * x
    if len(coeffs) > 1:
        t_prev = x
        t_cur = inv_a * (csr @ x - b * x)
        y = y + (2.0 * coeffs[1]) * t_cur
        for c in coeffs[2:]:
            t_next = 2.0 * inv_a * (csr @ t_cur - b * t_cur) - t_prev
            y += (2.0 * c) * t_next
            t_prev, t_cur = t_cur, t_next
    return phase * y


def csr_matvec(csr, x):
    return csr @ x
