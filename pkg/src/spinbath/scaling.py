"""Analytic scaling of the critical coupling with system size.

A Gaussian density of states Omega(N, E) ~ (2^N / sqrt(N)) exp(-E^2/(alpha N))
evaluated at fixed inverse temperature beta gives
Omega(N, beta) ~ N^(-1/2) exp((log 2 - alpha beta^2 / 4) N), and the
perturbative breakdown criterion puts the critical coupling at
lambda_crit = C2 / sqrt(Omega) = C2 N^(1/4) exp(-b N) with
b = (log 2 - alpha beta^2 / 4) / 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PAIR_SUM = np.pi ** 2 / 3  # sum over k != 0 of 1/k^2


class ScalingError(ValueError):
    pass


@dataclass(frozen=True)
class DosModel:
    alpha: float
    beta: float

    def __post_init__(self):
        if self.alpha <= 0:
            raise ScalingError("alpha must be positive")

    @property
    def growth_exponent(self) -> float:
        return np.log(2.0) - 0.25 * self.alpha * self.beta ** 2

    @property
    def grows(self) -> bool:
        return self.growth_exponent > 0

    @property
    def b(self) -> float:
        return self.growth_exponent / 2.0


@dataclass
class ScalingFit:
    C2: float
    b: float
    residual: float  # rms in log units

    def __post_init__(self):
        if self.C2 <= 0 or self.b <= 0:
            raise ScalingError(f"fit outside the valid range: {self}")


def dos_at_beta(model: DosModel, n: int) -> float:
    """Omega(N, beta) up to the shared proportionality constant."""
    return np.exp(model.growth_exponent * n) / np.sqrt(n)


def predict_lambda_crit(model_or_b, n: int, c2: float) -> float:
    """lambda_crit(N) = C2 N^(1/4) exp(-b N)."""
    b = model_or_b.b if isinstance(model_or_b, DosModel) else float(model_or_b)
    return c2 * n ** 0.25 * np.exp(-b * n)


def fit_scaling(points) -> ScalingFit:
    """Least squares of log(lambda_crit) = log C2 + log(N)/4 - b N."""
    if len(points) < 3:
        raise ScalingError("need at least 3 (N, lambda_crit) points")
    ns = np.array([p[0] for p in points], dtype=float)
    lams = np.array([p[1] for p in points], dtype=float)
    y = np.log(lams) - 0.25 * np.log(ns)
    design = np.column_stack([np.ones_like(ns), -ns])
    (logc2, b), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = float(np.sqrt(np.mean((design @ [logc2, b] - y) ** 2)))
    return ScalingFit(C2=float(np.exp(logc2)), b=float(b), residual=resid)


def perturbative_criterion(lam: float, model: DosModel, n: int,
                           c1: float) -> float:
    """lambda^2 C1 Omega(N, beta) pi^2/3; values below 1 mark the regime
    where the unperturbed eigenstates survive (superweak)."""
    if c1 <= 0:
        raise ScalingError("C1 must be positive")
    return lam ** 2 * c1 * dos_at_beta(model, n) * PAIR_SUM


def measure_eth_constant(spectral_h0, hint_blocks, target_energy: float,
                         window: float = 1.0):
    """Typical squared off-diagonal matrix element of the coupling between
    unperturbed eigenstates in an energy window, times the local density
    of states: the size-independent constant of the matrix-element ansatz.

    Returns (C1, number of window states, local dos)."""
    elems = []
    local_count = 0
    span = 0.0
    for hint, b in zip(hint_blocks, spectral_h0.blocks):
        inside = np.abs(b.evals - target_energy) <= window / 2
        k = int(inside.sum())
        local_count += k
        if k < 2:
            continue
        v = b.evecs[:, inside]
        m = v.conj().T @ hint @ v
        off = ~np.eye(k, dtype=bool)
        elems.append((np.abs(m[off]) ** 2).ravel())
    if not elems:
        raise ScalingError("fewer than 2 eigenstates in the ETH window")
    elems = np.concatenate(elems)
    dos_local = local_count / window
    return float(elems.mean() * dos_local), local_count, dos_local


def fit_dos_alpha(evals: np.ndarray, n: int) -> float:
    """Gaussian variance coefficient alpha from an exact spectrum:
    var(E) = alpha N / 2 for Omega ~ exp(-E^2/(alpha N))."""
    return float(2.0 * np.var(evals) / n)
