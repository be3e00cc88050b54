"""Typicality state preparation for the product initial state.

The mixed initial state (system spin up, bath in a narrow energy window) is
replaced by one random pure state per magnetization sector: draw a Haar
vector, zero the system-down amplitudes, apply the Gaussian energy filter,
normalize. Sector weights are dim * (squared norm before normalization),
an unbiased estimator of the sector trace of the unnormalized density.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import chebyshev, model
from .model import MagnetizationSector, SparseOperator


@dataclass(frozen=True)
class InitialStateSpec:
    E: float
    delta: float = 0.1
    beta_target: float = 0.4  # informational
    seed: int = 0

    def __post_init__(self):
        if self.delta <= 0:
            raise model.ModelError("delta must be positive")

    @staticmethod
    def window_energy(n_spins: int) -> float:
        """Bath window center E approximately -0.15 (N - 1)."""
        return -0.15 * (n_spins - 1)


@dataclass
class EnsembleMember:
    sector: MagnetizationSector
    state: np.ndarray
    weight: float


@dataclass
class WeightedEnsemble:
    members: list[EnsembleMember]
    d_eff_estimate: float | None = None

    def expectation(self, op_by_sector) -> float:
        num = sum(m.weight * chebyshev.expectation(op_by_sector[m.sector.n_up],
                                                   m.state)
                  for m in self.members)
        return num

    def manifest(self, spec: InitialStateSpec) -> dict:
        return {
            "E": spec.E, "delta": spec.delta, "seed": spec.seed,
            "d_eff_estimate": self.d_eff_estimate,
            "sectors": [{"n_up": m.sector.n_up, "dim": m.sector.dim,
                         "weight": m.weight} for m in self.members],
        }


@dataclass
class TypicalityError:
    mean: float
    std: float
    n_draws: int


def draw_haar_vector(dim: int, seed) -> np.ndarray:
    """Normalized Haar-random vector (Gaussian real and imaginary parts).

    seed may be an int or a tuple; a counter-based generator keyed on it
    makes concurrent per-sector draws reproducible."""
    if dim < 1:
        raise model.ModelError("dim must be >= 1")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def project_system_up(state: np.ndarray,
                      sector: MagnetizationSector) -> np.ndarray:
    """Zero the amplitudes of configurations with the system spin down.

    Not renormalized; the lost norm enters the sector weight."""
    out = np.where((sector.states & 1) != 0, state, 0.0)
    if sector.n_up == 0:
        warnings.warn("sector n_up=0 contains no system-up configurations")
    return out


def prepare_member(sector: MagnetizationSector, spec: InitialStateSpec,
                   h_bath_sector: SparseOperator,
                   filter_plan: chebyshev.FilterPlan | None = None,
                   seed=None):
    """(normalized state, raw weight) for one sector; weight 0 if the
    energy window is empty in this sector."""
    if seed is None:
        seed = (spec.seed, sector.n_up)
    if filter_plan is None:
        filter_plan = chebyshev.plan_gaussian_filter(h_bath_sector, spec.E,
                                                     spec.delta)
    phi = draw_haar_vector(sector.dim, seed)
    proj = project_system_up(phi, sector)
    filtered, norm2 = chebyshev.apply_filter(filter_plan, h_bath_sector, proj)
    raw_weight = sector.dim * norm2
    if norm2 < 1e-28:
        return None, 0.0
    return filtered / np.sqrt(norm2), raw_weight


def prepare_ensemble(sectors, spec: InitialStateSpec, h_bath_sectors,
                     filter_plans=None) -> WeightedEnsemble:
    """One member per sector, weights normalized to 1.

    h_bath_sectors / filter_plans are keyed by n_up."""
    members = []
    for sec in sectors:
        if sec.n_up == 0:
            continue
        plan = filter_plans.get(sec.n_up) if filter_plans else None
        state, w = prepare_member(sec, spec, h_bath_sectors[sec.n_up],
                                  filter_plan=plan)
        if w > 0:
            members.append(EnsembleMember(sec, state, w))
    total = sum(m.weight for m in members)
    if total <= 0:
        raise model.ModelError("empty energy window in every sector")
    for m in members:
        m.weight /= total
    return WeightedEnsemble(members)


def effective_dimension(spec: InitialStateSpec, sectors, h_bath_sectors,
                        n_samples: int = 8, seed: int | None = None):
    """Stochastic estimate of d_eff = 1/Tr(rho^2) for the filtered product
    state, with a standard-error estimate.

    Uses Tr P ~ dim <phi'|g|phi'> and Tr P^2 ~ dim ||g phi'||^2 summed over
    sectors, where phi' is the system-up projected Haar vector and
    P = (projector) x g(H_bath)^2 is the unnormalized density."""
    if seed is None:
        seed = spec.seed
    tr_p = np.zeros(n_samples)
    tr_p2 = np.zeros(n_samples)
    for sec in sectors:
        if sec.n_up == 0:
            continue
        hb = h_bath_sectors[sec.n_up]
        plan = chebyshev.plan_gaussian_filter(hb, spec.E, spec.delta)
        for s in range(n_samples):
            phi = draw_haar_vector(sec.dim, (seed, sec.n_up, s, 0xD))
            proj = project_system_up(phi, sec)
            v, n2 = chebyshev.apply_filter(plan, hb, proj)
            v2, n4 = chebyshev.apply_filter(plan, hb, v)
            tr_p[s] += sec.dim * n2
            tr_p2[s] += sec.dim * n4
    est = tr_p.mean() ** 2 / tr_p2.mean()
    jack = []
    for s in range(n_samples):
        keep = np.arange(n_samples) != s
        jack.append(tr_p[keep].mean() ** 2 / tr_p2[keep].mean())
    stderr = np.sqrt((n_samples - 1) * np.var(jack))
    return float(est), float(stderr)


def exact_effective_dimension(spec: InitialStateSpec, sectors,
                              h_bath_sectors) -> float:
    """Dense-spectrum evaluation of d_eff (small systems only)."""
    g2_sum = 0.0
    g4_sum = 0.0
    for sec in sectors:
        if sec.n_up == 0:
            continue
        hb = h_bath_sectors[sec.n_up]
        evals, evecs = np.linalg.eigh(hb.dense())
        up = (sec.states & 1) != 0
        # weight of each bath eigenvector inside the system-up subspace
        pop = np.sum(np.abs(evecs[up, :]) ** 2, axis=0)
        g2 = np.exp(-((evals - spec.E) ** 2) / spec.delta)
        g2_sum += np.sum(pop * g2)
        g4_sum += np.sum(pop * g2 ** 2)
    return float(g2_sum ** 2 / g4_sum)


def typicality_error_scaling(spec_base: InitialStateSpec, sectors,
                             h_bath_sectors, h_sectors, sz_sectors,
                             deltas, probe_time: float, n_seeds: int = 20):
    """std of <S^z_sys(t*)> across seeds for several window widths,
    paired with d_eff estimates."""
    if n_seeds < 10:
        raise model.ModelError("need at least 10 seeds")
    results = []
    for delta in deltas:
        spec = InitialStateSpec(E=spec_base.E, delta=delta,
                                beta_target=spec_base.beta_target,
                                seed=spec_base.seed)
        plans = {s.n_up: chebyshev.plan_gaussian_filter(
            h_bath_sectors[s.n_up], spec.E, delta)
            for s in sectors if s.n_up > 0}
        vals = []
        for k in range(n_seeds):
            spec_k = InitialStateSpec(E=spec.E, delta=delta,
                                      seed=(spec_base.seed + 1) * 1000 + k)
            ens = prepare_ensemble(sectors, spec_k, h_bath_sectors,
                                   filter_plans=plans)
            t_grid = np.linspace(0.0, probe_time, 2)
            total = 0.0
            for m in ens.members:
                series, _ = chebyshev.evolve(h_sectors[m.sector.n_up],
                                             m.state, t_grid,
                                             sz_sectors[m.sector.n_up])
                total += m.weight * series[-1]
            vals.append(total)
        vals = np.asarray(vals)
        d_eff, _ = effective_dimension(spec, sectors, h_bath_sectors,
                                       n_samples=6)
        results.append((delta, d_eff,
                        TypicalityError(mean=float(vals.mean()),
                                        std=float(vals.std(ddof=1)),
                                        n_draws=n_seeds)))
    return results


def save_manifest(path, ensemble: WeightedEnsemble, spec: InitialStateSpec):
    with open(path, "w") as f:
        json.dump(ensemble.manifest(spec), f, indent=2)
