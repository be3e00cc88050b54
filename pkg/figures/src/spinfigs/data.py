"""Readers for the simulator's documented CSV output schemas."""
import csv
import glob
import json
import os

import numpy as np


class DataError(ValueError):
    pass


def read_decay(path):
    """decay_*.csv: '# spinbath time series; meta={...}' header, then
    t,sz_sys rows. Returns (meta dict, times, values)."""
    meta = {}
    times, values = [], []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if line.startswith("#"):
                if "meta=" in line:
                    meta = json.loads(line.split("meta=", 1)[1])
                continue
            if line.startswith("t,") or not line:
                continue
            t, v = line.split(",")
            times.append(float(t))
            values.append(float(v))
    if not times:
        raise DataError(f"no samples in {path}")
    return meta, np.asarray(times), np.asarray(values)


def find_decays(input_dir, **match):
    """All decay series under input_dir whose metadata matches the given
    key/value filters, sorted by (N, lambda, coupling_mode)."""
    out = []
    for path in sorted(glob.glob(os.path.join(input_dir, "decay_*.csv"))):
        meta, t, v = read_decay(path)
        if all(meta.get(k) == val for k, val in match.items()):
            out.append((meta, t, v))
    out.sort(key=lambda m: (m[0].get("N", 0), m[0].get("lambda", 0.0),
                            m[0].get("coupling_mode", "")))
    return out


def read_sweep(input_dir):
    """sweep_summary.csv: summary rows plus '# lambda_crit,N=..' /
    '# fgr_constant,..' / '# scaling_fit,..' footers.

    Returns (rows, footer dict)."""
    path = os.path.join(input_dir, "sweep_summary.csv")
    if not os.path.exists(path):
        raise DataError(f"missing {path}")
    body, footer = [], {"lambda_crit": {}, "fgr_constant": None,
                        "scaling_fit": None}
    with open(path) as f:
        for line in f:
            line = line.strip()
            if line.startswith("# lambda_crit,"):
                _, n_part, val = line[2:].split(",")
                n = int(n_part.split("=")[1])
                footer["lambda_crit"][n] = (None if val == "None"
                                            else float(val))
            elif line.startswith("# fgr_constant,"):
                footer["fgr_constant"] = float(line.split(",")[1])
            elif line.startswith("# scaling_fit,"):
                parts = dict(p.split("=") for p in line[2:].split(",")[1:])
                footer["scaling_fit"] = {k: float(v) for k, v in parts.items()}
            elif line.startswith("#") or not line:
                continue
            else:
                body.append(line)
    rows = [r for r in csv.DictReader(body)
            if not r["regime"].startswith("error") and r["longtime_avg"]]
    for r in rows:
        for k in ("lambda", "longtime_avg", "tau_rel", "random_std"):
            if k in r and r[k]:
                r[k] = float(r[k])
        r["N"] = int(r["N"])
        r["censored"] = int(r["censored"])
    if not rows:
        raise DataError(f"no usable rows in {path}")
    return rows, footer


def read_gpb(input_dir):
    """gpb_summary.csv rows as floats, sorted by lambda."""
    path = os.path.join(input_dir, "gpb_summary.csv")
    if not os.path.exists(path):
        raise DataError(f"missing {path}")
    with open(path) as f:
        rows = list(csv.DictReader(f))
    out = []
    for r in rows:
        out.append({k: (float(v) if v not in ("", "None", "nan") else None)
                    for k, v in r.items()})
    out.sort(key=lambda r: r["lambda"])
    if not out:
        raise DataError(f"no rows in {path}")
    return out
