"""One builder per figure id; all read only the documented CSV schemas."""
from dataclasses import dataclass, field

import numpy as np

from . import data, theme

FIGURE_IDS = ("2", "3", "4", "5", "6", "7", "8", "C")


@dataclass
class FigureSpec:
    figure_id: str
    input_dir: str
    transforms: dict = field(default_factory=dict)
    reference_lines: list = field(default_factory=list)  # (axis, value, label)

    def __post_init__(self):
        if self.figure_id not in FIGURE_IDS:
            raise data.DataError(
                f"unknown figure id {self.figure_id!r}; "
                f"expected one of {FIGURE_IDS}")


def build_spec(figure_id: str, input_dir: str) -> FigureSpec:
    figure_id = str(figure_id)
    transforms = {}
    refs = []
    if figure_id in ("2", "5"):
        transforms["x"] = "lambda^2 * t"
        refs.append(("y", theme.EQUILIBRIUM_LINE, "equilibrium -0.05"))
    if figure_id == "3":
        refs.append(("y", theme.EQUILIBRIUM_LINE, "equilibrium -0.05"))
        refs.append(("y", theme.THRESHOLD_LINE, "threshold -0.04"))
    if figure_id == "6":
        transforms["x"] = "lambda^-2"
        refs.append(("guide", theme.FGR_GUIDE, "0.95 lambda^-2"))
    if figure_id == "C":
        refs.append(("y", theme.EQUILIBRIUM_LINE, "equilibrium -0.05"))
    return FigureSpec(figure_id=figure_id, input_dir=input_dir,
                      transforms=transforms, reference_lines=refs)


def _draw_reference(ax, spec):
    for axis, value, label in spec.reference_lines:
        if axis == "y":
            ax.axhline(value, color="k", ls="--", lw=0.8, label=label)
        elif axis == "x":
            ax.axvline(value, color="k", ls=":", lw=0.8, label=label)
        elif axis == "guide":
            lo, hi = ax.get_xlim()
            x = np.geomspace(max(lo, 1e-3), hi, 50)
            ax.plot(x, value * x, "k--", lw=0.8, label=label)


def _fig_decay_rescaled(ax, spec):
    """Figure 2: decay curves at the largest available N, one line per
    coupling, on the lambda^2 t axis."""
    decays = data.find_decays(spec.input_dir, coupling_mode="uniform")
    if not decays:
        raise data.DataError(f"no decay_*.csv in {spec.input_dir}")
    n_max = max(m.get("N", 0) for m, _, _ in decays)
    for i, (meta, t, v) in enumerate(
            d for d in decays if d[0].get("N") == n_max):
        lam = meta["lambda"]
        ax.plot(lam ** 2 * t, v, color=theme.color(i),
                label=f"$\\lambda$={lam:g}")
    ax.set_xlabel(r"$\lambda^2 t$")
    ax.set_ylabel(r"$\langle S^z_{\rm sys}(t)\rangle$")
    ax.set_title(f"relaxation at N={n_max}")


def _fig_longtime_vs_lambda(ax, spec):
    """Figure 3: long-time average vs coupling, one line per N."""
    rows, _ = data.read_sweep(spec.input_dir)
    by_n = {}
    for r in rows:
        if r["coupling_mode"] == "uniform":
            by_n.setdefault(r["N"], []).append((r["lambda"],
                                                r["longtime_avg"]))
    for i, (n, pts) in enumerate(sorted(by_n.items())):
        pts.sort()
        lam, avg = zip(*pts)
        ax.plot(lam, avg, "o-", color=theme.color(i), label=f"N={n}")
    ax.set_xscale("log")
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel(r"long-time average of $\langle S^z_{\rm sys}\rangle$")


def _fig_lambda_crit(ax, spec):
    """Figure 4: critical coupling vs N with the scaling fit."""
    _, footer = data.read_sweep(spec.input_dir)
    crits = {n: lc for n, lc in footer["lambda_crit"].items()
             if lc is not None}
    undefined = [n for n, lc in footer["lambda_crit"].items() if lc is None]
    if crits:
        ns = np.array(sorted(crits))
        ax.semilogy(ns, [crits[n] for n in ns], "o", color=theme.color(0),
                    label=r"measured $\lambda_{\rm crit}$")
    fit = footer["scaling_fit"]
    if fit and crits:
        ns_f = np.linspace(min(crits) - 1, max(crits) + 1, 100)
        ax.semilogy(ns_f, fit["C2"] * ns_f ** 0.25 * np.exp(-fit["b"] * ns_f),
                    "-", color=theme.color(1),
                    label=f"$C_2 N^{{1/4}} e^{{-bN}}$, b={fit['b']:.3f}")
    if undefined:
        ax.text(0.05, 0.05,
                "no threshold crossing at N=" +
                ", ".join(str(n) for n in sorted(undefined)),
                transform=ax.transAxes, fontsize=8)
    ax.set_xlabel("N")
    ax.set_ylabel(r"$\lambda_{\rm crit}$")


def _fig_collapse(ax, spec):
    """Figure 5: decay curves across sizes and couplings overlaid on
    the lambda^2 t axis (golden-rule data collapse)."""
    decays = data.find_decays(spec.input_dir, coupling_mode="uniform")
    if not decays:
        raise data.DataError(f"no decay_*.csv in {spec.input_dir}")
    for i, (meta, t, v) in enumerate(decays):
        lam = meta["lambda"]
        ax.plot(lam ** 2 * t, v, color=theme.color(i), alpha=0.8,
                label=f"N={meta.get('N')}, $\\lambda$={lam:g}")
    ax.set_xlabel(r"$\lambda^2 t$")
    ax.set_ylabel(r"$\langle S^z_{\rm sys}(t)\rangle$")
    ax.set_title("golden-rule collapse")


def _fig_tau_rel(ax, spec):
    """Figure 6: relaxation time vs lambda^-2 with the 0.95 guide."""
    rows, _ = data.read_sweep(spec.input_dir)
    by_n = {}
    for r in rows:
        if r["coupling_mode"] == "uniform" and not r["censored"]:
            by_n.setdefault(r["N"], []).append((r["lambda"] ** -2,
                                                r["tau_rel"]))
    for i, (n, pts) in enumerate(sorted(by_n.items())):
        pts.sort()
        x, tau = zip(*pts)
        ax.loglog(x, tau, "o", color=theme.color(i), label=f"N={n}")
    ax.set_xlabel(r"$\lambda^{-2}$")
    ax.set_ylabel(r"$\tau_{\rm rel}$")


def _fig_sqrt_curvature(ax, spec):
    """Figure 7: sqrt of the initial curvature vs coupling."""
    rows = data.read_gpb(spec.input_dir)
    lam = np.array([r["lambda"] for r in rows])
    curv = np.array([r["curvature"] for r in rows], dtype=float)
    ax.loglog(lam, np.sqrt(curv), "o-", color=theme.color(0),
              label=r"$\sqrt{|c_1\lambda + c_2\lambda^2|}$")
    slope = np.sqrt(curv[-1]) / lam[-1]
    ax.loglog(lam, slope * lam, "k--", lw=0.8, label="linear guide")
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel(r"$\sqrt{\rm curvature}$")


def _fig_numerator(ax, spec):
    """Figure 8: bound numerator and its relaxation-time lower bound
    vs coupling."""
    rows = data.read_gpb(spec.input_dir)
    lam = np.array([r["lambda"] for r in rows])
    numer = np.array([r["numerator"] if r["numerator"] is not None
                      else np.nan for r in rows])
    lower = np.array([r["numerator_lower_bound"]
                      if r.get("numerator_lower_bound") is not None
                      else np.nan for r in rows])
    if np.isfinite(numer).any():
        ax.loglog(lam[np.isfinite(numer)], numer[np.isfinite(numer)], "o-",
                  color=theme.color(0),
                  label=r"$\pi a \|A\|^{1/2} Q^{5/2}$")
    if np.isfinite(lower).any():
        ax.loglog(lam[np.isfinite(lower)], lower[np.isfinite(lower)], "s--",
                  color=theme.color(1),
                  label=r"$\tau_{\rm rel}\sqrt{\rm curvature}$")
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel("bound numerator")


def _fig_coupling_overlay(ax, spec):
    """Figure C: uniform vs Gaussian-random couplings at matched
    (N, lambda)."""
    uniform = data.find_decays(spec.input_dir, coupling_mode="uniform")
    random_ = data.find_decays(spec.input_dir, coupling_mode="random")
    if not uniform or not random_:
        raise data.DataError("need both uniform and random decay series")
    pairs = []
    for mu, tu, vu in uniform:
        for mr, tr, vr in random_:
            if (mu.get("N"), mu.get("lambda")) == (mr.get("N"),
                                                   mr.get("lambda")):
                pairs.append(((mu, tu, vu), (mr, tr, vr)))
    if not pairs:
        raise data.DataError("no matching (N, lambda) uniform/random pair")
    for i, ((mu, tu, vu), (mr, tr, vr)) in enumerate(pairs):
        ax.plot(tu, vu, color=theme.color(2 * i),
                label=f"uniform N={mu['N']}, $\\lambda$={mu['lambda']:g}")
        ax.plot(tr, vr, "--", color=theme.color(2 * i + 1),
                label=f"random N={mr['N']}, $\\lambda$={mr['lambda']:g}")
    ax.set_xlabel("t")
    ax.set_ylabel(r"$\langle S^z_{\rm sys}(t)\rangle$")


_BUILDERS = {
    "2": _fig_decay_rescaled,
    "3": _fig_longtime_vs_lambda,
    "4": _fig_lambda_crit,
    "5": _fig_collapse,
    "6": _fig_tau_rel,
    "7": _fig_sqrt_curvature,
    "8": _fig_numerator,
    "C": _fig_coupling_overlay,
}


def render(spec: FigureSpec, out_dir: str) -> str:
    import os

    import matplotlib.pyplot as plt

    theme.apply()
    fig, ax = plt.subplots()
    _BUILDERS[spec.figure_id](ax, spec)
    _draw_reference(ax, spec)
    ax.legend(loc="best")
    os.makedirs(out_dir, exist_ok=True)
    out = os.path.join(out_dir, f"figure_{spec.figure_id}.svg")
    fig.savefig(out, metadata={"Date": None})  # drop timestamp: reproducible
    plt.close(fig)
    return out
