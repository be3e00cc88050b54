"""A synthetic reference output directory in the simulator's documented
CSV schemas, small enough to render instantly."""
import json

import numpy as np
import pytest


def _write_decay(path, n, lam, mode, seed=1):
    t = np.linspace(0.0, 100.0, 51)
    tau = 0.95 / lam ** 2
    v = -0.05 + 0.55 * np.exp(-t / tau)
    meta = {"N": n, "L": (n - 1) // 3, "lambda": lam, "seed": seed,
            "coupling_mode": mode}
    with open(path, "w") as f:
        f.write(f"# spinbath time series; meta={json.dumps(meta, sort_keys=True)}\n")
        f.write("t,sz_sys\n")
        for ti, vi in zip(t, v):
            f.write(f"{ti},{vi}\n")


@pytest.fixture(scope="session")
def reference_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("reference")
    runs = [(10, 0.2, "uniform"), (10, 0.5, "uniform"),
            (13, 0.2, "uniform"), (13, 0.2, "random")]
    for i, (n, lam, mode) in enumerate(runs):
        _write_decay(d / f"decay_{i:04d}.csv", n, lam, mode)

    cols = ("N,L,lambda,seed,coupling_mode,longtime_avg,tau_rel,censored,"
            "fit_residual,regime,config_hash")
    lines = ["# spinbath sweep summary; one row per run; tau_rel censored=1 "
             "means lower bound only", cols]
    rng = np.random.default_rng(0)
    for n, l_ in ((10, 3), (13, 4), (16, 5)):
        for lam in (0.1, 0.2, 0.5, 1.0):
            avg = -0.05 + 0.3 * np.exp(-n / 8.0) / lam + 0.01
            tau = 0.95 / lam ** 2 * (1 + 0.05 * rng.standard_normal())
            lines.append(f"{n},{l_},{lam},1,uniform,{avg},{tau},0,"
                         f"0.002,Markovian,deadbeef0000")
    lines += ["# lambda_crit,N=10,None",
              "# lambda_crit,N=13,0.61",
              "# lambda_crit,N=16,0.29",
              "# fgr_constant,0.94",
              "# scaling_fit,C2=12.1,b=0.24,residual=0.05"]
    (d / "sweep_summary.csv").write_text("\n".join(lines) + "\n")

    gpb_lines = ["lambda,a,Q,curvature,T_eq,numerator,numerator_lower_bound"]
    c2 = 0.59
    for lam in (0.05, 0.1, 0.2, 0.5, 1.0):
        curv = c2 * lam ** 2
        numer = "nan" if lam == 1.0 else f"{0.2 / lam ** 0.5}"
        gpb_lines.append(f"{lam},1.1,0.3,{curv},1.2,{numer},"
                         f"{0.95 / lam ** 2 * np.sqrt(curv)}")
    (d / "gpb_summary.csv").write_text("\n".join(gpb_lines) + "\n")
    return str(d)
