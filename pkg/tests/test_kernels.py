"""Compiled and pure-python Chebyshev kernels agree."""

import numpy as np
import scipy.sparse as sp

from spinbath import _kernels, model
from spinbath._kernels import py_kernel


def _problem(dim=200, seed=1):
    rng = np.random.Generator(np.random.Philox(seed))
    m = sp.random(dim, dim, density=0.05, random_state=np.random.RandomState(
        seed), dtype=float).toarray()
    m = m + m.T + np.diag(rng.normal(size=dim))
    op = model.SparseOperator(sp.csr_matrix(m.astype(np.complex128)))
    x = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    coeffs = (rng.normal(size=30) + 1j * rng.normal(size=30)) * \
        np.exp(-0.3 * np.arange(30))
    return op, x, coeffs


def test_kernel_selected():
    assert _kernels.KERNEL in ("compiled", "python")


def test_kernel_arrays_dtypes():
    op, _, _ = _problem(dim=40)
    indptr, indices, data = _kernels.kernel_arrays(op.matrix)
    assert indptr.dtype == np.int64
    assert indices.dtype == np.int32
    assert data.dtype == np.complex128
    assert indptr[-1] == len(data)


def test_dispatch_matches_python_kernel():
    op, x, coeffs = _problem()
    b, inv_a, phase = 0.3, 0.25, np.exp(-0.7j)
    got = _kernels.cheb_apply(op, b, inv_a, coeffs, x, phase)
    ref = py_kernel.cheb_apply_csr(op.matrix, b, inv_a, coeffs, x, phase)
    scale = np.abs(ref).max()
    assert np.abs(got - ref).max() < 1e-12 * scale


def test_compiled_kernel_if_built():
    if _kernels.KERNEL != "compiled":
        import pytest
        pytest.skip("compiled kernel not available")
    from spinbath._kernels import _cheb
    op, x, coeffs = _problem(dim=150, seed=7)
    indptr, indices, data = op.kernel_arrays()
    got = _cheb.cheb_apply(indptr, indices, data, 0.1, 0.5,
                           np.ascontiguousarray(coeffs),
                           np.ascontiguousarray(x), 1.0 + 0.0j)
    ref = py_kernel.cheb_apply_csr(op.matrix, 0.1, 0.5, coeffs, x, 1.0 + 0j)
    assert np.abs(got - ref).max() < 1e-12 * np.abs(ref).max()


def test_single_coefficient_edge():
    op, x, _ = _problem(dim=20, seed=5)
    coeffs = np.array([0.8 + 0.1j])
    got = _kernels.cheb_apply(op, 0.0, 1.0, coeffs, x, 1.0 + 0j)
    assert np.abs(got - coeffs[0] * x).max() < 1e-14
