"""Chebyshev polynomial propagation and Gaussian spectral filtering.

The time step exp(-i H dt) is expanded as
    exp(-i b dt) [c_0 + 2 sum_{n>=1} c_n T_n(Htilde)],  c_n = (-i)^n J_n(a dt)
with Htilde = (H - b)/a rescaled to [-1, 1] from the estimated spectral
bounds. The Gaussian filter exp(-(H - E)^2 / (2 delta)) is expanded in the
same basis with real coefficients from Gauss-Chebyshev quadrature.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np
from scipy.special import jv

from . import model
from ._kernels import cheb_apply
from .model import SparseOperator


class PropagationError(RuntimeError):
    pass


ORDER_CAP = 100_000


@dataclass
class PropagatorPlan:
    a: float          # half-span of the estimated spectrum
    b: float          # center of the estimated spectrum
    dt: float
    coeffs: np.ndarray  # c_n = (-i)^n J_n(a dt), n = 0..M
    phase: complex

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def hash(self) -> str:
        h = hashlib.sha256()
        h.update(np.array([self.a, self.b, self.dt]).tobytes())
        h.update(self.coeffs.tobytes())
        return h.hexdigest()[:16]


@dataclass
class FilterPlan:
    E: float
    delta: float      # variance in the Gaussian exponent
    a: float
    b: float
    coeffs: np.ndarray  # real, same c_0 + 2 sum convention as the propagator

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1


def _bessel_order(x: float, tol: float) -> int:
    """Smallest M with |J_M(x)| < tol, plus a 5 term guard."""
    m = max(int(np.ceil(x)), 1)
    while m < ORDER_CAP:
        ns = np.arange(m, min(m + 64, ORDER_CAP + 1))
        vals = np.abs(jv(ns, x))
        below = np.nonzero(vals < tol)[0]
        if len(below):
            return int(ns[below[0]]) + 5
        m += 64
    raise PropagationError(
        f"required Chebyshev order exceeds cap {ORDER_CAP} for a*dt = {x}")


def plan_propagator(op: SparseOperator, dt: float, tol: float = 1e-14,
                    bounds: tuple[float, float] | None = None,
                    margin: float = 0.02) -> PropagatorPlan:
    if dt < 0 or not np.isfinite(dt):
        raise PropagationError(f"invalid dt {dt}")
    if bounds is None:
        bounds = model.estimate_spectral_bounds(op, margin)
    e_min, e_max = bounds
    a = 0.5 * (e_max - e_min)
    b = 0.5 * (e_max + e_min)
    x = a * dt
    m = _bessel_order(x, tol) if x > 0 else 1
    n = np.arange(m + 1)
    coeffs = (-1j) ** n * jv(n, x)
    # Bessel asymptotics: |c_n| decreases monotonically past the turnover
    start = int(np.ceil(x)) + 5
    tail = np.abs(coeffs[start:])
    if len(tail) > 1 and np.any(np.diff(tail) > 1e-30):
        raise PropagationError("coefficient tail is not decaying")
    return PropagatorPlan(a=a, b=b, dt=dt, coeffs=coeffs,
                          phase=np.exp(-1j * b * dt))


def step(plan: PropagatorPlan, op: SparseOperator,
         state: np.ndarray) -> np.ndarray:
    """One exp(-i H dt) application via the three-term recursion."""
    nrm = np.linalg.norm(state)
    if abs(nrm - 1.0) > 1e-6:
        import warnings
        warnings.warn(f"state norm {nrm} deviates from 1")
    out = cheb_apply(op, plan.b, 1.0 / plan.a, plan.coeffs, state, plan.phase)
    if not np.all(np.isfinite(out)):
        raise PropagationError("NaN/Inf in Chebyshev recursion")
    return out


def expectation(op: SparseOperator, state: np.ndarray,
                imag_tol: float = 1e-10) -> float:
    val = np.vdot(state, op.matrix @ state)
    if op.hermitian and abs(val.imag) > imag_tol * max(1.0, abs(val.real)):
        raise PropagationError(f"expectation not real: {val}")
    return val.real


def evolve(op: SparseOperator, state: np.ndarray, t_grid: np.ndarray,
           observable: SparseOperator, tol: float = 1e-14,
           bounds: tuple[float, float] | None = None,
           norm_tol: float = 1e-8, checkpoint=None):
    """Sample <state(t)|observable|state(t)> on t_grid.

    Returns (values, final_state). t_grid must be ascending and start at 0.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid[0] != 0 or np.any(np.diff(t_grid) <= 0):
        raise PropagationError("t_grid must be ascending and start at 0")
    if bounds is None:
        bounds = model.estimate_spectral_bounds(op)
    plans: dict[float, PropagatorPlan] = {}
    psi = np.asarray(state, dtype=np.complex128)
    values = np.empty(len(t_grid))
    values[0] = expectation(observable, psi)
    for k in range(1, len(t_grid)):
        dt = t_grid[k] - t_grid[k - 1]
        key = round(dt, 15)
        if key not in plans:
            plans[key] = plan_propagator(op, dt, tol=tol, bounds=bounds)
        psi = step(plans[key], op, psi)
        drift = abs(np.linalg.norm(psi) - 1.0)
        if drift > norm_tol:
            raise PropagationError(
                f"norm drift {drift:.2e} at step {k} (under-resolved "
                "expansion)")
        values[k] = expectation(observable, psi)
        if checkpoint is not None:
            checkpoint(t_grid[k], psi)
    return values, psi


def plan_gaussian_filter(h_bath: SparseOperator, E: float, delta: float,
                         tol: float = 1e-12,
                         bounds: tuple[float, float] | None = None,
                         order_cap: int = 50_000) -> FilterPlan:
    """Chebyshev coefficients of x -> exp(-(x - E)^2 / (2 delta)) on the
    rescaled spectral axis, by Gauss-Chebyshev quadrature."""
    if delta <= 0:
        raise PropagationError("delta must be positive")
    if bounds is None:
        bounds = model.estimate_spectral_bounds(h_bath)
    e_min, e_max = bounds
    a = 0.5 * (e_max - e_min)
    b = 0.5 * (e_max + e_min)

    def g(x):
        return np.exp(-((a * x + b - E) ** 2) / (2.0 * delta))

    m = 64
    while True:
        k = np.arange(2 * m)
        theta = np.pi * (k + 0.5) / (2 * m)
        gx = g(np.cos(theta))
        n = np.arange(m + 1)
        coeffs = (np.cos(np.outer(n, theta)) @ gx) / (2 * m)
        tail = np.max(np.abs(coeffs[-5:]))
        if tail < tol:
            keep = np.nonzero(np.abs(coeffs) > tol)[0]
            last = keep[-1] + 1 if len(keep) else 1
            return FilterPlan(E=E, delta=delta, a=a, b=b,
                              coeffs=coeffs[:last + 1])
        if m >= order_cap:
            raise PropagationError(
                f"filter order above cap {order_cap}: delta={delta} too "
                f"small for spectral span {2 * a}")
        m *= 2


def apply_filter(plan: FilterPlan, h_bath: SparseOperator,
                 state: np.ndarray):
    """Unnormalized filtered vector and its squared norm."""
    out = cheb_apply(h_bath, plan.b, 1.0 / plan.a,
                     plan.coeffs.astype(np.complex128), state, 1.0 + 0j)
    norm2 = float(np.vdot(out, out).real)
    return out, norm2


# -- checkpoint files ----------------------------------------------------

CHECKPOINT_VERSION = 1


def save_checkpoint(path, sector_id: int, t: float, state: np.ndarray,
                    seed: int, plan_hash: str):
    """Binary checkpoint: npz with a version field (layout in README)."""
    np.savez(path, version=CHECKPOINT_VERSION, sector_id=sector_id, t=t,
             state=state, seed=seed, plan_hash=plan_hash)


def load_checkpoint(path):
    with np.load(path, allow_pickle=False) as f:
        if int(f["version"]) != CHECKPOINT_VERSION:
            raise PropagationError(
                f"unsupported checkpoint version {f['version']}")
        return dict(sector_id=int(f["sector_id"]), t=float(f["t"]),
                    state=f["state"], seed=int(f["seed"]),
                    plan_hash=str(f["plan_hash"]))
