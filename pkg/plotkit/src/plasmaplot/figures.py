"""The three figure types: decay, scattering convergence, shock overlay."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .bundle import PlotBundle, SchemaError

_STYLE = {"lw": 1.6, "alpha": 0.9}


def _finish(fig, out_path):
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out_path


def plot_decay(bundle: PlotBundle, out_path):
    """Log-log sup|h| vs t with the reported slope and a -1/2 reference."""
    t, sup = bundle.decay[:, 0], bundle.decay[:, 1]
    pos = (t > 0) & (sup > 0)
    fig, ax = plt.subplots(figsize=(6, 4.2))
    ax.loglog(t[pos], sup[pos], color="tab:blue", label="sup |h|", **_STYLE)
    slope = bundle.annotation_float("decay_slope")
    if t[pos].size:
        t0 = max(t[pos][0], 1.0)
        ref = sup[pos][np.searchsorted(t[pos], t0)] * (t[pos] / t0) ** -0.5
        ax.loglog(t[pos], ref, "k--", lw=1.0, label=r"reference $t^{-1/2}$")
    title = f"amplitude decay ({bundle.label})"
    if slope is not None:
        title += f"   fitted slope = {slope:.4f}"
    ax.set_title(title, fontsize=10)
    ax.set_xlabel("t")
    ax.set_ylabel("sup |h|")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.25)
    return _finish(fig, out_path), slope


def plot_scattering(bundle: PlotBundle, out_path):
    """Corrected-profile convergence D(t) with its uncorrected control."""
    if bundle.convergence is None:
        raise SchemaError(f"bundle {bundle.root} has no scattering_convergence.csv")
    c = bundle.convergence
    t = c[:-1, 0]       # final row is the reference snapshot: D(T) = 0
    fig, ax = plt.subplots(figsize=(6, 4.2))
    pos = t > 0
    ax.loglog(t[pos], c[:-1, 1][pos], color="tab:blue",
              label="corrected", **_STYLE)
    ax.loglog(t[pos], c[:-1, 2][pos], color="tab:orange",
              label=r"control ($\vartheta \equiv 0$)", **_STYLE)
    delta = bundle.annotation_float("delta")
    if delta is not None and pos.any():
        t0 = t[pos][0]
        ref = c[:-1, 1][pos][0] * (t[pos] / t0) ** (-delta)
        ax.loglog(t[pos], ref, "k--", lw=1.0,
                  label=rf"fitted $t^{{-\delta}}$, $\delta$={delta:.3f}")
    ax.set_title(f"corrected-profile convergence ({bundle.label})", fontsize=10)
    ax.set_xlabel("t")
    ax.set_ylabel("weighted sup difference")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.25)
    return _finish(fig, out_path), delta


def plot_shock_compare(bundle_a: PlotBundle, bundle_b: PlotBundle, out_path):
    """Overlay max|dn/dx|: the field-free run steepens, the other does not."""
    fig, ax = plt.subplots(figsize=(6, 4.2))
    for bundle, color in ((bundle_a, "tab:red"), (bundle_b, "tab:green")):
        t, grad = bundle.decay[:, 0], bundle.decay[:, 2]
        ax.semilogy(t, grad / max(grad[0], 1e-300),
                    color=color, label=bundle.label, **_STYLE)
        det = bundle.annotation_float("detector_time")
        if det is not None:
            ax.axvline(det, color=color, ls=":", lw=1.0)
    ax.axhline(10.0, color="k", ls="--", lw=0.8, label="detector level (10x)")
    ax.set_title("density-gradient growth: field off vs on", fontsize=10)
    ax.set_xlabel("t")
    ax.set_ylabel("max |dn/dx| / initial")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.25)
    return _finish(fig, out_path)
