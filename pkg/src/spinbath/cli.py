"""Command line driver.

Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict

import numpy as np

from . import analysis, chebyshev, model, pipeline, scaling, typicality
from .pipeline import ConfigError, RunConfig

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _load_config(args) -> RunConfig:
    data = {}
    if args.config:
        with open(args.config) as f:
            data = json.load(f)
    for key in RunConfig.__dataclass_fields__:
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    return RunConfig.from_json(json.dumps(data))


def _add_config_flags(p):
    p.add_argument("--config", help="JSON config file (RunConfig fields)")
    p.add_argument("--L", type=int)
    p.add_argument("--lam", type=float, dest="lam")
    p.add_argument("--coupling-mode", dest="coupling_mode",
                   choices=["uniform", "random"])
    p.add_argument("--B", type=float)
    p.add_argument("--J", type=float)
    p.add_argument("--random-std", type=float, dest="random_std")
    p.add_argument("--coupling-seed", type=int, dest="coupling_seed")
    p.add_argument("--E", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--t-max", type=float, dest="t_max")
    p.add_argument("--n-samples", type=int, dest="n_samples")
    p.add_argument("--workers", type=int)
    p.add_argument("--ed-cap", type=int, dest="ed_cap")
    p.add_argument("--out-dir", dest="out_dir")


def cmd_decay(args):
    cfg = _load_config(args)
    os.makedirs(cfg.out_dir, exist_ok=True)
    series, row = pipeline.run_decay(cfg)
    tag = f"N{cfg.N}_lam{cfg.lam}_seed{cfg.seed}"
    pipeline.write_series_csv(series, os.path.join(cfg.out_dir,
                                                   f"decay_{tag}.csv"))
    print(json.dumps(row, default=float))
    return 0


def cmd_sweep(args):
    cfg = _load_config(args)
    os.makedirs(cfg.out_dir, exist_ok=True)
    lams = [float(x) for x in args.lambdas.split(",")]
    ls = [int(x) for x in args.Ls.split(",")]
    out_csv = os.path.join(cfg.out_dir, args.out or "sweep_summary.csv")
    rows = pipeline.sweep(cfg, lams, ls, out_csv,
                          resume=not args.no_resume)
    all_rows = pipeline.read_sweep(out_csv)
    crits = pipeline.append_sweep_footer(out_csv, all_rows,
                                         cfg.stuck_threshold)
    print(json.dumps({"rows": len(rows), "lambda_crit": crits,
                      "csv": out_csv}, default=float))
    return 0


def cmd_gpb(args):
    cfg = _load_config(args)
    os.makedirs(cfg.out_dir, exist_ok=True)
    report = pipeline.gpb_report(cfg)
    tag = f"N{cfg.N}_lam{cfg.lam}"
    json_path = os.path.join(cfg.out_dir, f"gpb_{tag}.json")
    csv_path = os.path.join(cfg.out_dir, "gpb_summary.csv")
    pipeline.write_gpb_report(report, json_path, csv_path)
    print(json.dumps({"json": json_path, "csv": csv_path,
                      "T_eq": report.t_eq, "numerator": report.numerator,
                      "lower_bound": report.numerator_lower_bound},
                     default=float))
    return 0


def cmd_scaling_fit(args):
    rows = pipeline.read_sweep(args.sweep_csv)
    crits = pipeline.lambda_crit_from_rows(rows, args.threshold)
    usable = [(n, lc) for n, lc in sorted(crits.items()) if lc is not None]
    if len(usable) < 3:
        print(f"need >= 3 system sizes with a measured lambda_crit, have "
              f"{len(usable)}", file=sys.stderr)
        return EXIT_NUMERIC
    fit = scaling.fit_scaling(usable)
    payload = {"points": usable, "C2": fit.C2, "b": fit.b,
               "residual": fit.residual}
    with open(args.out, "w") as f:
        json.dump(payload, f, indent=2)
    with open(args.sweep_csv, "a") as f:
        f.write(f"# scaling_fit,C2={fit.C2},b={fit.b},"
                f"residual={fit.residual}\n")
    print(json.dumps(payload))
    return 0


def cmd_filter_check(args):
    cfg = _load_config(args)
    system = pipeline.build_system(cfg)
    spec = typicality.InitialStateSpec(E=cfg.resolved_E(), delta=cfg.delta,
                                       seed=cfg.seed)
    ens = typicality.prepare_ensemble(system.sectors, spec,
                                      system.hb_sectors)
    e1 = e2 = 0.0
    for m in ens.members:
        hb = system.hb_sectors[m.sector.n_up]
        hx = hb.matrix @ m.state
        e1 += m.weight * np.vdot(m.state, hx).real
        e2 += m.weight * np.vdot(hx, hx).real
    var = e2 - e1 ** 2
    out = {"E_target": spec.E, "E_mean": e1, "E_var": var,
           "delta": cfg.delta,
           "weights": {m.sector.n_up: m.weight for m in ens.members}}
    print(json.dumps(out, default=float))
    if abs(e1 - spec.E) > 0.2:
        print("warning: window mean off target by more than 0.2",
              file=sys.stderr)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="spinbath")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("decay", help="single decay run -> series CSV")
    _add_config_flags(d)
    d.set_defaults(func=cmd_decay)

    s = sub.add_parser("sweep", help="lambda x L sweep -> summary CSV")
    _add_config_flags(s)
    s.add_argument("--lambdas", required=True,
                   help="comma separated coupling strengths")
    s.add_argument("--Ls", required=True, help="comma separated L values")
    s.add_argument("--out", help="summary CSV name")
    s.add_argument("--no-resume", action="store_true")
    s.set_defaults(func=cmd_sweep)

    g = sub.add_parser("gpb", help="equilibration-bound report")
    _add_config_flags(g)
    g.set_defaults(func=cmd_gpb)

    f = sub.add_parser("scaling-fit",
                       help="fit lambda_crit(N) from a sweep CSV")
    f.add_argument("sweep_csv")
    f.add_argument("--out", default="scaling_fit.json")
    f.add_argument("--threshold", type=float,
                   default=analysis.STUCK_THRESHOLD)
    f.set_defaults(func=cmd_scaling_fit)

    c = sub.add_parser("filter-check",
                       help="report the prepared window energy and width")
    _add_config_flags(c)
    c.set_defaults(func=cmd_filter_check)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, model.ModelError, FileNotFoundError,
            json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (chebyshev.PropagationError, analysis.AnalysisError,
            model.ConvergenceError, scaling.ScalingError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
