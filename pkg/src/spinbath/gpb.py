"""Exact-diagonalization route to the equilibration-time bound.

Everything here works on per-sector blocks: eigendecompositions, the gap
distribution p_jk ~ |rho_jk A_kj|, its histogram w(G, eps), the ingredients
a = w_max sigma_G and Q, the initial curvature and its lambda decomposition,
the bound T_eq = pi a ||A||^(1/2) Q^(5/2) / sqrt(curvature), and the
Fourier relation between the gap density and the infinite-temperature
autocorrelation signal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .analysis import TimeSeries
from .model import MagnetizationSector, ModelError, SparseOperator

DEFAULT_ED_CAP = 8192


class GpbError(ValueError):
    pass


@dataclass
class SpectralBlock:
    sector: MagnetizationSector | None
    evals: np.ndarray
    evecs: np.ndarray


@dataclass
class SpectralData:
    blocks: list[SpectralBlock]

    @property
    def all_evals(self) -> np.ndarray:
        return np.sort(np.concatenate([b.evals for b in self.blocks]))

    @property
    def span(self) -> float:
        ev = self.all_evals
        return float(ev[-1] - ev[0])


@dataclass
class GapDistribution:
    gaps: np.ndarray        # energy differences E_j - E_k, |G| > tol
    probs: np.ndarray       # normalized masses
    excluded_mass: float    # diagonal / degenerate mass removed
    degeneracy_tol: float

    @property
    def sigma_G(self) -> float:
        mean = np.dot(self.probs, self.gaps)
        var = np.dot(self.probs, self.gaps ** 2) - mean ** 2
        return float(np.sqrt(max(var, 0.0)))


@dataclass
class GapHistogram:
    epsilon: float
    centers: np.ndarray
    density: np.ndarray
    sigma_G: float   # from the point masses, not the bins
    w_max: float


@dataclass
class GpbReport:
    lam: float
    a: float
    Q: float
    a_norm: float
    curvature: float
    c1: float
    c2: float
    t_eq: float | None
    numerator: float
    epsilon: float | None = None
    tau_rel: float | None = None
    tau_censored: bool | None = None
    numerator_lower_bound: float | None = None


def diagonalize(op: SparseOperator, sectors=None,
                cap: int = DEFAULT_ED_CAP) -> SpectralData:
    """Full dense eigendecomposition, sector-wise when sectors are given."""
    blocks = []
    if sectors is None:
        mats = [(None, op)]
    else:
        from .model import restrict_to_sector
        mats = [(s, restrict_to_sector(op, s)) for s in sectors]
    for sec, block in mats:
        if block.dim > cap:
            raise GpbError(f"block dimension {block.dim} exceeds ED cap {cap}")
        evals, evecs = np.linalg.eigh(block.dense())
        blocks.append(SpectralBlock(sector=sec, evals=evals, evecs=evecs))
    data = SpectralData(blocks)
    span = max(data.span, 1e-30)
    for b in blocks:
        h = b.evecs @ (b.evals[:, None] * b.evecs.conj().T)
        resid = np.abs(h - (h + h.conj().T) / 2).max()  # hermiticity only
        del h
        if resid > 1e-9 * span:
            raise GpbError(f"eigendecomposition residual {resid} too large")
    return data


def operator_blocks(op: SparseOperator, spectral: SpectralData):
    """Dense blocks of op aligned with the spectral blocks (Ising basis)."""
    from .model import restrict_to_sector
    out = []
    for b in spectral.blocks:
        if b.sector is None:
            out.append(op.dense())
        else:
            out.append(restrict_to_sector(op, b.sector).dense())
    return out


def filtered_product_density(spectral_bath: SpectralData, E: float,
                             delta: float):
    """Per-sector blocks of the product initial state: system projected up,
    bath Gaussian-filtered. Built from the bath spectrum; the Gaussian
    enters squared because the typicality route applies the filter to the
    state vector. Trace-normalized across sectors."""
    blocks = []
    trace = 0.0
    for b in spectral_bath.blocks:
        g2 = np.exp(-((b.evals - E) ** 2) / delta)
        m = (b.evecs * g2) @ b.evecs.conj().T
        if b.sector is not None:
            up = (b.sector.states & 1) != 0
            m[~up, :] = 0.0
            m[:, ~up] = 0.0
        blocks.append(m)
        trace += np.trace(m).real
    if trace <= 0:
        raise GpbError("empty energy window")
    return [m / trace for m in blocks]


def ensemble_density(ensemble, spectral: SpectralData):
    """rho = sum of w |psi><psi| over the prepared typicality members."""
    by_sector = {m.sector.n_up: m for m in ensemble.members}
    blocks = []
    for b in spectral.blocks:
        n_up = b.sector.n_up if b.sector is not None else None
        m = by_sector.get(n_up)
        if m is None:
            blocks.append(np.zeros((len(b.evals), len(b.evals)),
                                   dtype=complex))
        else:
            blocks.append(m.weight * np.outer(m.state, m.state.conj()))
    return blocks


def infinite_temperature_rho(n_spins: int, spectral: SpectralData):
    """rho = (S^z_sys + 1/2) / d_bath: diagonal, populates system-up
    configurations uniformly."""
    d_bath = 2 ** (n_spins - 1)
    blocks = []
    for b in spectral.blocks:
        if b.sector is None:
            configs = np.arange(2 ** n_spins)
        else:
            configs = b.sector.states
        diag = ((configs & 1) != 0).astype(float) / d_bath
        blocks.append(np.diag(diag).astype(complex))
    return blocks


def _validate_density(rho_blocks, tol=1e-9):
    tr = sum(np.trace(m).real for m in rho_blocks)
    if abs(tr - 1.0) > tol:
        raise GpbError(f"density trace {tr} != 1")


def observable_norm(a_blocks) -> float:
    """Largest absolute eigenvalue of the observable."""
    return max(np.abs(np.linalg.eigvalsh(m)).max() for m in a_blocks)


def _pair_masses(rho_blocks, a_blocks, spectral: SpectralData):
    """Per-block |rho_jk A_kj| masses and gaps in the energy eigenbasis."""
    for rho, a, b in zip(rho_blocks, a_blocks, spectral.blocks):
        v = b.evecs
        r_eig = v.conj().T @ rho @ v
        a_eig = v.conj().T @ a @ v
        masses = np.abs(r_eig * a_eig.T)
        gaps = b.evals[:, None] - b.evals[None, :]
        yield gaps.ravel(), masses.ravel()


def build_gap_distribution(rho_blocks, a_blocks, spectral: SpectralData,
                           degeneracy_tol: float | None = None
                           ) -> GapDistribution:
    _validate_density(rho_blocks)
    if degeneracy_tol is None:
        degeneracy_tol = 1e-12 * spectral.span
    all_gaps, all_masses = [], []
    excluded = 0.0
    for gaps, masses in _pair_masses(rho_blocks, a_blocks, spectral):
        keep = np.abs(gaps) > degeneracy_tol
        excluded += masses[~keep].sum()
        sig = masses[keep] > 0
        all_gaps.append(gaps[keep][sig])
        all_masses.append(masses[keep][sig])
    gaps = np.concatenate(all_gaps)
    masses = np.concatenate(all_masses)
    total = masses.sum()
    if total <= 0:
        raise GpbError("all mass degenerate: observable commutes with H")
    order = np.argsort(gaps)
    return GapDistribution(gaps=gaps[order], probs=masses[order] / total,
                           excluded_mass=float(excluded),
                           degeneracy_tol=degeneracy_tol)


def compute_Q(rho_blocks, a_blocks, spectral: SpectralData,
              degeneracy_tol: float | None = None) -> float:
    """Unnormalized off-diagonal mass over the observable norm."""
    if degeneracy_tol is None:
        degeneracy_tol = 1e-12 * spectral.span
    total = 0.0
    for gaps, masses in _pair_masses(rho_blocks, a_blocks, spectral):
        total += masses[np.abs(gaps) > degeneracy_tol].sum()
    return float(total / observable_norm(a_blocks))


def histogram(dist: GapDistribution, epsilon: float) -> GapHistogram:
    if epsilon <= 0:
        raise GpbError("epsilon must be positive")
    lo, hi = dist.gaps[0], dist.gaps[-1]
    n_bins = max(int(np.ceil((hi - lo) / epsilon)), 1)
    edges = lo + epsilon * np.arange(n_bins + 1)
    edges[-1] = max(edges[-1], hi * (1 + 1e-15) if hi > 0 else hi + 1e-300)
    idx = np.clip(np.searchsorted(edges, dist.gaps, side="right") - 1,
                  0, n_bins - 1)
    mass = np.bincount(idx, weights=dist.probs, minlength=n_bins)
    density = mass / epsilon
    centers = edges[:-1] + 0.5 * epsilon
    import warnings
    spacing = np.min(np.diff(np.unique(dist.gaps))) if len(dist.gaps) > 1 else 0
    if epsilon < spacing:
        warnings.warn(
            f"epsilon {epsilon} below minimum gap spacing {spacing}; "
            "histogram is sparse")
    return GapHistogram(epsilon=epsilon, centers=centers, density=density,
                        sigma_G=dist.sigma_G, w_max=float(density.max()))


def _density_on(hist: GapHistogram, grid: np.ndarray) -> np.ndarray:
    lo = hist.centers[0] - 0.5 * hist.epsilon
    idx = np.floor((grid - lo) / hist.epsilon).astype(int)
    ok = (idx >= 0) & (idx < len(hist.density))
    out = np.zeros_like(grid)
    out[ok] = hist.density[idx[ok]]
    return out


def l1_distance(h1: GapHistogram, h2: GapHistogram) -> float:
    """Integral of |w1 - w2| over the union of supports."""
    step = min(h1.epsilon, h2.epsilon) / 4.0
    lo = min(h1.centers[0] - h1.epsilon, h2.centers[0] - h2.epsilon)
    hi = max(h1.centers[-1] + h1.epsilon, h2.centers[-1] + h2.epsilon)
    grid = np.arange(lo, hi, step) + step / 2
    return float(np.sum(np.abs(_density_on(h1, grid) - _density_on(h2, grid)))
                 * step)


def epsilon_independence_scan(dist: GapDistribution, eps_grid,
                              plateau_tol: float = 0.05):
    """Pairwise L1 distances between histograms on a geometric eps grid;
    flags a plateau when consecutive distances fall below plateau_tol."""
    eps_grid = sorted(eps_grid)
    if len(eps_grid) < 5:
        raise GpbError("epsilon scan needs at least 5 values")
    hists = [histogram(dist, e) for e in eps_grid]
    dists = [l1_distance(hists[k], hists[k + 1]) for k in range(len(hists) - 1)]
    plateau = [k for k in range(len(dists)) if dists[k] < plateau_tol]
    chosen = eps_grid[plateau[0]] if plateau else None
    return {"epsilons": list(eps_grid), "l1": dists,
            "plateau": bool(plateau), "chosen_epsilon": chosen}


def compute_a(hist: GapHistogram) -> float:
    if hist.density.max() <= 0:
        raise GpbError("empty histogram: a undefined")
    return float(hist.w_max * hist.sigma_G)


# -- curvature -----------------------------------------------------------

def _double_commutator(h: SparseOperator, a: SparseOperator):
    """[H, [H, A]] as a sparse matrix."""
    hm, am = h.matrix, a.matrix
    inner = hm @ am - am @ hm
    return hm @ inner - inner @ hm


def _trace_against(rho: np.ndarray, k: sp.spmatrix) -> complex:
    """Tr(rho K) with K sparse and rho dense."""
    kc = k.tocoo()
    return np.sum(kc.data * rho[kc.col, kc.row])


def initial_curvature(rho_blocks, h_ops, a_ops) -> float:
    """|Tr([[rho,H],H] A)| = |Tr(rho [H,[H,A]])|, block-wise; h_ops and
    a_ops are sector-restricted SparseOperators aligned with rho_blocks."""
    val = 0.0 + 0.0j
    for rho, h, a in zip(rho_blocks, h_ops, a_ops):
        val += _trace_against(rho, _double_commutator(h, a))
    return float(abs(val))


def curvature_from_ensemble(ensemble, h_ops_by_sector, a_ops_by_sector
                            ) -> float:
    """Typicality estimate of the curvature for systems above the ED cap."""
    val = 0.0
    for m in ensemble.members:
        k = _double_commutator(h_ops_by_sector[m.sector.n_up],
                               a_ops_by_sector[m.sector.n_up])
        val += m.weight * np.vdot(m.state, k @ m.state).real
    return abs(val)


def curvature_coefficients(rho_blocks, h0_ops, hint_ops, a_ops):
    """c1 = Tr([H_int, A][rho, H0]), c2 = Tr([H_int, A][rho, H_int])."""
    c1 = 0.0 + 0.0j
    c2 = 0.0 + 0.0j
    for rho, h0, hi, a in zip(rho_blocks, h0_ops, hint_ops, a_ops):
        s = (hi.matrix @ a.matrix - a.matrix @ hi.matrix).tocoo()
        for target, hop in ((0, h0), (1, hi)):
            # [rho, H] with H sparse: (H^T rho^T)^T - H rho
            comm = (hop.matrix.T @ rho.T).T - hop.matrix @ rho
            # Tr(S C) with S sparse, C dense: sum_ij S_ij C_ji
            v = np.sum(s.data * comm[s.col, s.row])
            if target == 0:
                c1 += v
            else:
                c2 += v
    return float(c1.real), float(c2.real)


def gpb_time(a: float, q: float, a_norm: float, curvature: float):
    """(T_eq, numerator); T_eq is None when the curvature vanishes."""
    numerator = np.pi * a * a_norm ** 0.5 * q ** 2.5
    if curvature <= 0:
        return None, float(numerator)
    return float(numerator / np.sqrt(curvature)), float(numerator)


def numerator_lower_bound(tau_rel: float, curvature: float,
                          censored: bool = False):
    """tau_rel * sqrt(curvature); (value, censored) since a censored
    relaxation time only gives a lower bound on the bound."""
    return float(tau_rel * np.sqrt(curvature)), censored


# -- infinite temperature / Fourier --------------------------------------

def autocorrelation_series(spectral: SpectralData, a_blocks, n_spins: int,
                           t_grid, chunk: int = 200_000) -> TimeSeries:
    """<S^z_sys(t)> under the infinite-temperature initial state, evaluated
    from the eigendecomposition as sum |A_jk|^2 cos(G t) / d_bath."""
    t_grid = np.asarray(t_grid, dtype=float)
    d_bath = 2 ** (n_spins - 1)
    vals = np.zeros(len(t_grid))
    for a, b in zip(a_blocks, spectral.blocks):
        a_eig = b.evecs.conj().T @ a @ b.evecs
        m = (np.abs(a_eig) ** 2).ravel()
        g = (b.evals[:, None] - b.evals[None, :]).ravel()
        for k in range(0, len(m), chunk):
            vals += m[k:k + chunk] @ np.cos(np.outer(g[k:k + chunk], t_grid))
    return TimeSeries(times=t_grid, values=vals / d_bath,
                      meta={"state": "infinite_temperature"})


def series_spectrum(series: TimeSeries):
    """(omega, mass) of the mean-subtracted, Hann-windowed series."""
    t = series.times
    dt = t[1] - t[0]
    if not np.allclose(np.diff(t), dt):
        raise GpbError("fourier analysis needs a uniform time grid")
    y = series.values - series.values.mean()
    y = y * np.hanning(len(y))
    f = np.fft.fft(y)
    omega = 2 * np.pi * np.fft.fftfreq(len(y), d=dt)
    return np.fft.fftshift(omega), np.abs(np.fft.fftshift(f))


def fourier_check(series: TimeSeries, hist: GapHistogram) -> dict:
    """L1 distance between the normalized transform of the signal and the
    gap histogram."""
    duration = series.times[-1]
    resolution = 2 * np.pi / duration
    if resolution > hist.epsilon / 2:
        raise GpbError(
            f"series too short: frequency resolution {resolution:.3g} "
            f"exceeds epsilon/2 = {hist.epsilon / 2:.3g}; need duration "
            f">= {4 * np.pi / hist.epsilon:.3g}")
    omega, mass = series_spectrum(series)
    lo = hist.centers[0] - 0.5 * hist.epsilon
    hi = hist.centers[-1] + 0.5 * hist.epsilon
    inside = (omega >= lo) & (omega < hi)
    omega, mass = omega[inside], mass[inside]
    total = mass.sum()
    if total <= 0:
        raise GpbError("signal has no spectral content in the gap range")
    idx = np.floor((omega - lo) / hist.epsilon).astype(int)
    binned = np.bincount(idx, weights=mass / total,
                         minlength=len(hist.density)) / hist.epsilon
    l1 = float(np.sum(np.abs(binned - hist.density)) * hist.epsilon)
    return {"l1": l1, "dft_density": binned, "hist_density": hist.density,
            "centers": hist.centers}


def microcanonical_expectation(spectral: SpectralData, a_blocks, E: float,
                               width: float) -> float:
    """Mean diagonal matrix element of the observable over eigenstates in
    the window [E - width/2, E + width/2]."""
    num = 0.0
    count = 0
    for a, b in zip(a_blocks, spectral.blocks):
        inside = np.abs(b.evals - E) <= width / 2
        if not np.any(inside):
            continue
        v = b.evecs[:, inside]
        num += np.einsum("in,ij,jn->", v.conj(), a, v).real
        count += int(inside.sum())
    if count == 0:
        raise GpbError("no eigenstates in the microcanonical window")
    return num / count
