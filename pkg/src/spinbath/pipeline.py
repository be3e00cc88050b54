"""Experiment driver: configs, single decay runs, coupling sweeps and
bound reports, with CSV/JSON emission and sweep resume."""

from __future__ import annotations

import csv
import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import analysis, chebyshev, gpb, model, scaling, typicality

SUMMARY_COLUMNS = ["N", "L", "lambda", "seed", "coupling_mode",
                   "longtime_avg", "tau_rel", "censored", "fit_residual",
                   "regime", "config_hash"]

FGR_GUIDE = 0.95  # tau_rel ~ 0.95 / lambda^2 guide value for this family


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    L: int = 3
    coupling_mode: str = "uniform"
    J: float = 1.0
    random_std: float = 0.2
    B: float = 0.5
    coupling_seed: int = 0
    E: float | None = None          # default: -0.15 (N - 1)
    delta: float = 0.1
    seed: int = 1
    lam: float = 0.1
    t_max: float | None = None      # default: 20 * 0.95 / lambda^2
    n_samples: int = 601
    cheb_tol: float = 1e-14
    tail_fraction: float = 0.5
    stuck_threshold: float = analysis.STUCK_THRESHOLD
    lambda_non_markovian: float = analysis.LAMBDA_NON_MARKOVIAN
    ed_cap: int = gpb.DEFAULT_ED_CAP
    workers: int = 1
    out_dir: str = "."

    @property
    def N(self) -> int:
        return 3 * self.L + 1

    def resolved_E(self) -> float:
        return self.E if self.E is not None else -0.15 * (self.N - 1)

    def resolved_t_max(self) -> float:
        if self.t_max is not None:
            return self.t_max
        return 20.0 * FGR_GUIDE / max(self.lam, 1e-6) ** 2

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        data = json.loads(text)
        known = {f for f in cls.__dataclass_fields__}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        try:
            return cls(**data)
        except (TypeError, model.ModelError) as exc:
            raise ConfigError(str(exc))

    def hash(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:12]


@dataclass
class BuiltSystem:
    config: RunConfig
    sectors: list
    h_sectors: dict
    hb_sectors: dict
    h0_sectors: dict
    hint_sectors: dict
    sz_sectors: dict
    bounds: dict


def build_system(config: RunConfig) -> BuiltSystem:
    lat = model.LatticeSpec(config.L)
    cpl = model.CouplingSpec(mode=config.coupling_mode, J=config.J,
                             random_std=config.random_std, B=config.B,
                             seed=config.coupling_seed)
    hb = model.build_bath_hamiltonian(lat, cpl)
    hs = model.build_system_hamiltonian(cpl, n_spins=lat.N)
    hi = model.build_interaction_hamiltonian(lat)
    h0 = model.assemble_total(hs, hb, hi, 0.0)
    h = model.assemble_total(hs, hb, hi, config.lam)
    sz = model.build_sz(0, lat.N)
    sectors = [s for s in model.enumerate_sectors(lat.N)]
    h_sectors, hb_sectors, h0_sectors = {}, {}, {}
    hint_sectors, sz_sectors, bounds = {}, {}, {}
    for s in sectors:
        h_sectors[s.n_up] = model.restrict_to_sector(h, s)
        hb_sectors[s.n_up] = model.restrict_to_sector(hb, s)
        h0_sectors[s.n_up] = model.restrict_to_sector(h0, s)
        hint_sectors[s.n_up] = model.restrict_to_sector(hi, s)
        sz_sectors[s.n_up] = model.restrict_to_sector(sz, s)
        bounds[s.n_up] = model.estimate_spectral_bounds(h_sectors[s.n_up])
    return BuiltSystem(config=config, sectors=sectors, h_sectors=h_sectors,
                       hb_sectors=hb_sectors, h0_sectors=h0_sectors,
                       hint_sectors=hint_sectors, sz_sectors=sz_sectors,
                       bounds=bounds)


def prepare(system: BuiltSystem) -> typicality.WeightedEnsemble:
    cfg = system.config
    spec = typicality.InitialStateSpec(E=cfg.resolved_E(), delta=cfg.delta,
                                       seed=cfg.seed)
    return typicality.prepare_ensemble(system.sectors, spec,
                                       system.hb_sectors)


def evolve_ensemble(system: BuiltSystem, ensemble, t_grid) -> analysis.TimeSeries:
    cfg = system.config

    def one(member):
        vals, _ = chebyshev.evolve(
            system.h_sectors[member.sector.n_up], member.state, t_grid,
            system.sz_sectors[member.sector.n_up], tol=cfg.cheb_tol,
            bounds=system.bounds[member.sector.n_up])
        return member.weight * vals

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(one, ensemble.members))
    else:
        parts = [one(m) for m in ensemble.members]
    values = np.sum(parts, axis=0)
    return analysis.TimeSeries(
        times=t_grid, values=values,
        meta={"N": cfg.N, "L": cfg.L, "lambda": cfg.lam, "seed": cfg.seed,
              "coupling_mode": cfg.coupling_mode})


def run_decay(config: RunConfig, system: BuiltSystem | None = None):
    """Full pipeline: build, prepare, evolve, analyze.

    Returns (TimeSeries, summary row dict)."""
    if system is None:
        system = build_system(config)
    ensemble = prepare(system)
    t_grid = np.linspace(0.0, config.resolved_t_max(), config.n_samples)
    series = evolve_ensemble(system, ensemble, t_grid)
    regime = analysis.classify_regime(
        series, config.lam, stuck_threshold=config.stuck_threshold,
        lambda_non_markovian=config.lambda_non_markovian,
        tail_fraction=config.tail_fraction,
        min_samples=min(100, config.n_samples // 4))
    tau, censored = analysis.relaxation_time(series, regime.longtime_avg)
    row = {"N": config.N, "L": config.L, "lambda": config.lam,
           "seed": config.seed, "coupling_mode": config.coupling_mode,
           "longtime_avg": regime.longtime_avg, "tau_rel": tau,
           "censored": int(censored),
           "fit_residual": regime.fit_residual if regime.fit_residual
           is not None else "",
           "regime": regime.label, "config_hash": config.hash()}
    return series, row


def _existing_rows(path):
    done = set()
    if not os.path.exists(path):
        return done
    with open(path) as f:
        for line in f:
            if line.startswith("#") or line.startswith("N,"):
                continue
            parts = line.strip().split(",")
            if len(parts) == len(SUMMARY_COLUMNS):
                done.add((parts[0], parts[2], parts[3], parts[4], parts[10]))
    return done


def sweep(config: RunConfig, lambda_grid, L_grid, out_csv,
          seeds=(None,), resume: bool = True):
    """One summary row per (L, lambda, seed); resumable; appends the
    critical-coupling interpolation and golden-rule fit as footer lines."""
    lambda_grid = list(lambda_grid)
    L_grid = list(L_grid)
    if not lambda_grid or not L_grid:
        raise ConfigError("sweep grids must be non-empty")
    rows = []
    done = _existing_rows(out_csv) if resume else set()
    new_file = not os.path.exists(out_csv) or not resume
    mode = "w" if new_file else "a"
    with open(out_csv, mode, newline="") as f:
        writer = csv.DictWriter(f, fieldnames=SUMMARY_COLUMNS)
        if new_file:
            f.write("# spinbath sweep summary; one row per run; "
                    "tau_rel censored=1 means lower bound only\n")
            writer.writeheader()
        for L in L_grid:
            for lam in lambda_grid:
                for seed in seeds:
                    cfg = RunConfig(**{**asdict(config), "L": L, "lam": lam,
                                       "seed": config.seed if seed is None
                                       else seed})
                    key = (str(cfg.N), repr(lam), str(cfg.seed),
                           cfg.coupling_mode, cfg.hash())
                    if key in done:
                        continue
                    try:
                        _, row = run_decay(cfg)
                    except Exception as exc:  # keep sweeping
                        row = {c: "" for c in SUMMARY_COLUMNS}
                        row.update({"N": cfg.N, "L": L, "lambda": lam,
                                    "seed": cfg.seed,
                                    "coupling_mode": cfg.coupling_mode,
                                    "regime": f"error:{exc}",
                                    "config_hash": cfg.hash()})
                    writer.writerow(row)
                    f.flush()
                    rows.append(row)
    return rows


def read_sweep(path):
    rows = []
    with open(path) as f:
        for line in f:
            if line.startswith("#"):
                continue
            rows.append(line)
    return list(csv.DictReader(rows))


def lambda_crit_from_rows(rows, threshold=analysis.STUCK_THRESHOLD):
    """lambda_crit per system size from sweep summary rows."""
    by_n = {}
    for r in rows:
        if r["regime"].startswith("error") or r["longtime_avg"] == "":
            continue
        by_n.setdefault(int(r["N"]), []).append(
            (float(r["lambda"]), float(r["longtime_avg"])))
    out = {}
    for n, curve in sorted(by_n.items()):
        try:
            out[n] = analysis.find_lambda_crit(curve, threshold)
        except analysis.AnalysisError:
            out[n] = None
    return out


def append_sweep_footer(out_csv, rows, threshold=analysis.STUCK_THRESHOLD):
    crits = lambda_crit_from_rows(rows, threshold)
    fgr_pts = [(float(r["lambda"]), float(r["tau_rel"])) for r in rows
               if r.get("regime") == "Markovian" and r["censored"] == "0"]
    with open(out_csv, "a") as f:
        for n, lc in crits.items():
            f.write(f"# lambda_crit,N={n},{lc}\n")
        if len(fgr_pts) >= 3:
            r, _ = analysis.fit_fgr_constant(fgr_pts)
            f.write(f"# fgr_constant,{r}\n")
        usable = [(n, lc) for n, lc in crits.items() if lc is not None]
        if len(usable) >= 3:
            fit = scaling.fit_scaling(usable)
            f.write(f"# scaling_fit,C2={fit.C2},b={fit.b},"
                    f"residual={fit.residual}\n")
    return crits


def gpb_report(config: RunConfig, tau_rel: float | None = None,
               tau_censored: bool = False,
               eps_grid=None) -> gpb.GpbReport:
    """All bound ingredients at one coupling; above the ED cap only the
    curvature and the relaxation-time lower bound are computed."""
    system = build_system(config)
    max_dim = max(s.dim for s in system.sectors)
    cfg = config
    if tau_rel is None:
        _, row = run_decay(cfg, system=system)
        tau_rel, tau_censored = row["tau_rel"], bool(row["censored"])
    if max_dim > cfg.ed_cap:
        ensemble = prepare(system)
        curv = gpb.curvature_from_ensemble(ensemble, system.h_sectors,
                                           system.sz_sectors)
        bound, cens = gpb.numerator_lower_bound(tau_rel, curv, tau_censored)
        return gpb.GpbReport(lam=cfg.lam, a=float("nan"), Q=float("nan"),
                             a_norm=0.5, curvature=curv, c1=float("nan"),
                             c2=float("nan"), t_eq=None,
                             numerator=float("nan"), tau_rel=tau_rel,
                             tau_censored=cens, numerator_lower_bound=bound)
    lat = model.LatticeSpec(cfg.L)
    cpl = model.CouplingSpec(mode=cfg.coupling_mode, J=cfg.J,
                             random_std=cfg.random_std, B=cfg.B,
                             seed=cfg.coupling_seed)
    hb = model.build_bath_hamiltonian(lat, cpl)
    hs = model.build_system_hamiltonian(cpl, n_spins=lat.N)
    hi = model.build_interaction_hamiltonian(lat)
    h = model.assemble_total(hs, hb, hi, cfg.lam)
    sz = model.build_sz(0, lat.N)
    spectral = gpb.diagonalize(h, system.sectors, cap=cfg.ed_cap)
    spectral_b = gpb.diagonalize(hb, system.sectors, cap=cfg.ed_cap)
    rho = gpb.filtered_product_density(spectral_b, cfg.resolved_E(),
                                       cfg.delta)
    a_blocks = gpb.operator_blocks(sz, spectral)
    dist = gpb.build_gap_distribution(rho, a_blocks, spectral)
    if eps_grid is None:
        eps_grid = dist.sigma_G * np.geomspace(0.02, 0.64, 6)
    scan = gpb.epsilon_independence_scan(dist, eps_grid)
    epsilon = scan["chosen_epsilon"] or float(np.median(eps_grid))
    hist = gpb.histogram(dist, epsilon)
    a_val = gpb.compute_a(hist)
    q_val = gpb.compute_Q(rho, a_blocks, spectral)
    a_norm = gpb.observable_norm(a_blocks)
    h_ops = [system.h_sectors[s.n_up] for s in system.sectors]
    h0_ops = [system.h0_sectors[s.n_up] for s in system.sectors]
    hi_ops = [system.hint_sectors[s.n_up] for s in system.sectors]
    sz_ops = [system.sz_sectors[s.n_up] for s in system.sectors]
    curv = gpb.initial_curvature(rho, h_ops, sz_ops)
    c1, c2 = gpb.curvature_coefficients(rho, h0_ops, hi_ops, sz_ops)
    t_eq, numerator = gpb.gpb_time(a_val, q_val, a_norm, curv)
    bound, cens = gpb.numerator_lower_bound(tau_rel, curv, tau_censored)
    report = gpb.GpbReport(lam=cfg.lam, a=a_val, Q=q_val, a_norm=a_norm,
                           curvature=curv, c1=c1, c2=c2, t_eq=t_eq,
                           numerator=numerator, epsilon=epsilon,
                           tau_rel=tau_rel, tau_censored=cens,
                           numerator_lower_bound=bound)
    report.scan = scan
    report.histogram = hist
    return report


def write_gpb_report(report: gpb.GpbReport, json_path, csv_path=None):
    payload = {k: v for k, v in asdict(report).items()}
    if hasattr(report, "scan"):
        payload["epsilon_scan"] = {k: v for k, v in report.scan.items()}
    if hasattr(report, "histogram"):
        payload["histogram"] = {
            "epsilon": report.histogram.epsilon,
            "centers": list(report.histogram.centers),
            "density": list(report.histogram.density),
        }
    with open(json_path, "w") as f:
        json.dump(payload, f, indent=2, default=float)
    if csv_path:
        exists = os.path.exists(csv_path)
        with open(csv_path, "a", newline="") as f:
            w = csv.writer(f)
            if not exists:
                w.writerow(["lambda", "a", "Q", "curvature", "T_eq",
                            "numerator", "numerator_lower_bound"])
            w.writerow([report.lam, report.a, report.Q, report.curvature,
                        report.t_eq, report.numerator,
                        report.numerator_lower_bound])


def write_series_csv(series: analysis.TimeSeries, path):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        meta = json.dumps(series.meta, sort_keys=True)
        f.write(f"# spinbath time series; meta={meta}\n")
        w.writerow(["t", "sz_sys"])
        for t, v in zip(series.times, series.values):
            w.writerow([t, v])
