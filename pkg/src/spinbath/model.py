"""Lattice, Hamiltonians and magnetization sectors for the spin-bath model.

The bath is a 3 x L Heisenberg wheel (periodic along the rings), a single
system spin sits in a field B and couples isotropically to the three bath
spins of the first column. Basis states are Ising configurations encoded as
integers: bit 0 is the system spin, bath site (i, r) with i in [1, L],
r in [1, 3] is bit 1 + 3*(i-1) + (r-1). Bit set means spin up. Configurations
are ordered by their integer bit pattern.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ._kernels import kernel_arrays


class ModelError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class LatticeSpec:
    """Bath geometry: L columns of 3 spins plus one system spin."""

    L: int
    periodic: bool = True

    def __post_init__(self):
        if self.L < 2:
            raise ModelError(
                f"L must be >= 2 (got {self.L}); with L=1 the longitudinal "
                "periodicity degenerates into self-bonds")

    @property
    def N(self) -> int:
        return 3 * self.L + 1

    def bath_site(self, i: int, r: int) -> int:
        """Full-space bit index of bath site (i, r); system spin is bit 0."""
        if not (1 <= i <= self.L and 1 <= r <= 3):
            raise ModelError(f"bath site ({i}, {r}) outside 3 x {self.L}")
        return 1 + 3 * (i - 1) + (r - 1)


@dataclass(frozen=True)
class CouplingSpec:
    mode: str = "uniform"  # "uniform" | "random"
    J: float = 1.0
    random_std: float = 0.2
    B: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("uniform", "random"):
            raise ModelError(f"unknown coupling mode {self.mode!r}")
        if self.mode == "uniform" and not self.J > 0:
            raise ModelError("uniform mode requires J > 0")
        if self.mode == "random" and not self.random_std > 0:
            raise ModelError("random mode requires random_std > 0")


@dataclass
class SparseOperator:
    """Hermitian (unless flagged otherwise) operator in CSR form."""

    matrix: sp.csr_matrix
    hermitian: bool = True
    _kernel_cache: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def entries(self):
        """Coordinate-list view (rows, cols, values)."""
        coo = self.matrix.tocoo()
        return coo.row, coo.col, coo.data

    def kernel_arrays(self):
        if self._kernel_cache is None:
            self._kernel_cache = kernel_arrays(self.matrix)
        return self._kernel_cache

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    @classmethod
    def from_coo(cls, rows, cols, vals, dim, hermitian=True):
        m = sp.coo_matrix((np.asarray(vals, dtype=np.complex128),
                           (rows, cols)), shape=(dim, dim)).tocsr()
        m.sum_duplicates()
        return cls(m, hermitian=hermitian)


@dataclass(frozen=True)
class MagnetizationSector:
    """All Ising configurations with a fixed number of up spins."""

    n_up: int
    n_spins: int
    states: np.ndarray  # sorted integer configurations

    @property
    def dim(self) -> int:
        return len(self.states)

    def index_of(self, configs):
        """Sector indices of full-space configurations."""
        idx = np.searchsorted(self.states, configs)
        if np.any(idx >= self.dim) or np.any(self.states[idx] != configs):
            raise ModelError("configuration not in sector")
        return idx

    def config_of(self, idx):
        return self.states[idx]


# -- term lists ---------------------------------------------------------

def bath_bonds(lattice: LatticeSpec, couplings: CouplingSpec):
    """List of (site_u, site_v, J_bond) Heisenberg bonds of the bath.

    Longitudinal bonds along each of the 3 rings (periodic, L+1 = 1) plus
    the two transverse rungs r=1-2 and r=2-3 in every column.
    """
    bonds = []
    for r in (1, 2, 3):
        for i in range(1, lattice.L + 1):
            j = i % lattice.L + 1 if lattice.periodic else i + 1
            if j <= lattice.L:
                bonds.append((lattice.bath_site(i, r), lattice.bath_site(j, r)))
    for i in range(1, lattice.L + 1):
        bonds.append((lattice.bath_site(i, 1), lattice.bath_site(i, 2)))
        bonds.append((lattice.bath_site(i, 2), lattice.bath_site(i, 3)))
    if couplings.mode == "uniform":
        js = np.full(len(bonds), couplings.J)
    else:
        rng = np.random.Generator(np.random.Philox(couplings.seed))
        js = rng.normal(0.0, couplings.random_std, size=len(bonds))
    return [(u, v, j) for (u, v), j in zip(bonds, js)]


def interaction_bonds(lattice: LatticeSpec):
    """System spin coupled isotropically to the three spins of column 1."""
    return [(0, lattice.bath_site(1, r), 1.0) for r in (1, 2, 3)]


# -- assembly -----------------------------------------------------------

def _assemble(bonds, fields, configs, lookup=None):
    """Build the CSR operator for Heisenberg bonds + S^z fields on the given
    basis of integer configurations; lookup maps configs to basis indices."""
    n = len(configs)
    configs = np.asarray(configs, dtype=np.int64)
    if lookup is None:
        def lookup(c):
            return np.searchsorted(configs, c)
    diag = np.zeros(n)
    rows = [np.arange(n)]
    cols = [np.arange(n)]
    vals_off = []
    for u, v, j in bonds:
        bu, bv = 1 << u, 1 << v
        up_u = (configs & bu) != 0
        up_v = (configs & bv) != 0
        same = up_u == up_v
        diag += np.where(same, 0.25 * j, -0.25 * j)
        src = np.nonzero(~same)[0]
        flipped = configs[src] ^ (bu | bv)
        rows.append(src)
        cols.append(lookup(flipped))
        vals_off.append(np.full(len(src), 0.5 * j))
    for site, h in fields:
        b = 1 << site
        diag += np.where((configs & b) != 0, 0.5 * h, -0.5 * h)
    vals = np.concatenate([diag] + vals_off).astype(np.complex128)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    return SparseOperator.from_coo(rows, cols, vals, n)


def _full_configs(n_spins: int) -> np.ndarray:
    return np.arange(1 << n_spins, dtype=np.int64)


def build_bath_hamiltonian(lattice: LatticeSpec, couplings: CouplingSpec,
                           space: str = "full") -> SparseOperator:
    """Heisenberg bath Hamiltonian.

    space="full": on all N spins (identity on the system spin).
    space="bath": on the 2^(N-1)-dimensional bath space alone.
    """
    bonds = bath_bonds(lattice, couplings)
    if space == "full":
        configs = _full_configs(lattice.N)
        return _assemble(bonds, [], configs, lookup=lambda c: c)
    if space == "bath":
        shifted = [(u - 1, v - 1, j) for u, v, j in bonds]
        configs = _full_configs(lattice.N - 1)
        return _assemble(shifted, [], configs, lookup=lambda c: c)
    raise ModelError(f"unknown space {space!r}")


def build_system_hamiltonian(couplings: CouplingSpec,
                             n_spins: int = 1) -> SparseOperator:
    """H_sys = B * S^z on the system spin (bit 0 of an n_spins register)."""
    configs = _full_configs(n_spins)
    return _assemble([], [(0, couplings.B)], configs, lookup=lambda c: c)


def build_interaction_hamiltonian(lattice: LatticeSpec) -> SparseOperator:
    configs = _full_configs(lattice.N)
    return _assemble(interaction_bonds(lattice), [], configs,
                     lookup=lambda c: c)


def build_sz(site: int, n_spins: int) -> SparseOperator:
    """S^z of a single spin as a diagonal full-space operator."""
    configs = _full_configs(n_spins)
    diag = np.where((configs & (1 << site)) != 0, 0.5, -0.5)
    return SparseOperator(sp.diags(diag.astype(np.complex128)).tocsr())


def build_sz_total(n_spins: int) -> SparseOperator:
    configs = _full_configs(n_spins)
    diag = np.bitwise_count(configs).astype(float) - 0.5 * n_spins
    return SparseOperator(sp.diags(diag.astype(np.complex128)).tocsr())


def assemble_total(h_sys: SparseOperator, h_bath: SparseOperator,
                   h_int: SparseOperator, lam: float) -> SparseOperator:
    if not (h_sys.dim == h_bath.dim == h_int.dim):
        raise ModelError(
            f"dimension mismatch: {h_sys.dim}, {h_bath.dim}, {h_int.dim}")
    m = (h_sys.matrix + h_bath.matrix + lam * h_int.matrix).tocsr()
    m.sum_duplicates()
    hermitian = h_sys.hermitian and h_bath.hermitian and h_int.hermitian
    return SparseOperator(m, hermitian=hermitian)


def enumerate_sectors(n_spins: int) -> list[MagnetizationSector]:
    configs = _full_configs(n_spins)
    pops = np.bitwise_count(configs)
    return [MagnetizationSector(n_up=k, n_spins=n_spins,
                                states=configs[pops == k])
            for k in range(n_spins + 1)]


def restrict_to_sector(op: SparseOperator,
                       sector: MagnetizationSector) -> SparseOperator:
    """Restrict a full-space operator to one magnetization sector.

    Rejects operators with matrix elements leaving the sector.
    """
    rows, cols, vals = op.entries
    in_row = np.bitwise_count(rows.astype(np.int64)) == sector.n_up
    rows, cols, vals = rows[in_row], cols[in_row], vals[in_row]
    out = np.bitwise_count(cols.astype(np.int64)) != sector.n_up
    if np.any(out):
        k = np.nonzero(out)[0][0]
        raise ModelError(
            f"operator couples across sectors: entry ({rows[k]}, {cols[k]}) "
            f"= {vals[k]}")
    return SparseOperator.from_coo(sector.index_of(rows),
                                   sector.index_of(cols), vals, sector.dim,
                                   hermitian=op.hermitian)


def apply(op: SparseOperator, state: np.ndarray) -> np.ndarray:
    if op.dim != len(state):
        raise ModelError(f"dimension mismatch: {op.dim} vs {len(state)}")
    return op.matrix @ state


def estimate_spectral_bounds(op: SparseOperator, margin: float = 0.02,
                             seed: int = 7, tol: float = 1e-9,
                             maxiter: int = 20000):
    """Interval containing the spectrum, widened by margin * half-span."""
    if not op.hermitian:
        raise ModelError("spectral bounds require a Hermitian operator")
    if op.dim <= 256:
        evals = np.linalg.eigvalsh(op.dense())
        e_min, e_max = evals[0], evals[-1]
    else:
        v0 = np.random.Generator(np.random.Philox(seed)).normal(size=op.dim)
        try:
            e_min = spla.eigsh(op.matrix, k=1, which="SA", v0=v0, tol=tol,
                               maxiter=maxiter,
                               return_eigenvectors=False)[0]
            e_max = spla.eigsh(op.matrix, k=1, which="LA", v0=v0, tol=tol,
                               maxiter=maxiter,
                               return_eigenvectors=False)[0]
        except spla.ArpackNoConvergence as exc:
            raise ConvergenceError(
                f"extremal eigenvalue iteration did not converge: {exc}")
    half = 0.5 * (e_max - e_min)
    pad = margin * half if half > 0 else max(margin, 1e-12)
    return float(e_min - pad), float(e_max + pad)
