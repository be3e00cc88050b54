"""Kernel selection: compiled Cython recursion if available, numpy fallback.

Set SPINBATH_KERNEL=python to force the fallback (used by the benchmark and
by the kernel-equivalence tests).
"""

import os

import numpy as np

from . import py_kernel

try:
    from . import _cheb as _compiled
except ImportError:  # pragma: no cover - depends on build environment
    _compiled = None

if os.environ.get("SPINBATH_KERNEL", "").lower() == "python":
    _compiled = None

KERNEL = "compiled" if _compiled is not None else "python"


def kernel_arrays(csr):
    """CSR arrays in the dtypes the compiled kernel expects."""
    indptr = np.ascontiguousarray(csr.indptr, dtype=np.int64)
    indices = np.ascontiguousarray(csr.indices, dtype=np.int32)
    data = np.ascontiguousarray(csr.data, dtype=np.complex128)
    return indptr, indices, data


def cheb_apply(op, b, inv_a, coeffs, x, phase=1.0 + 0.0j):
    """y = phase * (c0 x + 2 sum c_n T_n((H-b)/a) x) for a SparseOperator."""
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    x = np.ascontiguousarray(x, dtype=np.complex128)
    if _compiled is not None:
        indptr, indices, data = op.kernel_arrays()
        return _compiled.cheb_apply(indptr, indices, data, float(b),
                                    float(inv_a), coeffs, x, complex(phase))
    return py_kernel.cheb_apply_csr(op.matrix, float(b), float(inv_a),
                                    coeffs, x, complex(phase))
