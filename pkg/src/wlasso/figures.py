"""Figure rendering for experiment reports.

Each experiment gets one or two PNG companions next to its delimited
output. Figures are presentation-only: nothing in them feeds back into
the reports, and they are excluded from the determinism contract.
"""

import math
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .bench import SimulationResult

__all__ = ["render_figures"]


def _finite(values):
    return [v for v in values if v is not None and math.isfinite(v)]


def _save(fig, out_dir: str, stem: str, name: str, paths: list) -> None:
    path = os.path.join(out_dir, f"{stem}_{name}.png")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    paths.append(path)


def _fig_fit(result, out_dir, stem, paths):
    beta = result.records[0].get("beta_hat")
    if not beta:
        return
    fig, ax = plt.subplots(figsize=(6, 3))
    ax.stem([float(b) for b in beta])
    ax.set_xlabel("coordinate")
    ax.set_ylabel("estimate")
    ax.set_title("fitted coefficients")
    _save(fig, out_dir, stem, "coefficients", paths)


def _fig_path(result, out_dir, stem, paths):
    lams = [r["lambda"] for r in result.records]
    active = [r["active_size"] for r in result.records]
    betas = [r.get("beta_hat") for r in result.records]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.2))
    if all(b is not None for b in betas):
        p = len(betas[0])
        for j in range(p):
            ax1.semilogx(lams, [b[j] for b in betas], lw=0.8)
    ax1.set_xlabel("penalty level")
    ax1.set_ylabel("coefficient")
    ax1.set_title("solution path")
    ax2.semilogx(lams, active, marker="o", ms=3)
    ax2.set_xlabel("penalty level")
    ax2.set_ylabel("active set size")
    ax2.set_title("sparsity along the path")
    _save(fig, out_dir, stem, "path", paths)


def _fig_multistage(result, out_dir, stem, paths):
    records = result.records
    if not records:
        return
    stages = sorted(
        int(k.rsplit("stage", 1)[1]) for k in records[0] if k.startswith("err_l2_stage")
    )
    if not stages:
        return
    series = [
        _finite([r.get(f"err_l2_stage{s}") for r in records]) for s in stages
    ]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.boxplot(series, positions=stages, widths=0.5)
    ax.set_xlabel("stage")
    ax.set_ylabel("l2 error to target")
    ax.set_title("error across recursion stages")
    _save(fig, out_dir, stem, "stage_errors", paths)


def _fig_oracle(result, out_dir, stem, paths):
    in_ev = [r for r in result.records if r.get("in_event")]
    out_ev = [r for r in result.records if not r.get("in_event")]
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    for subset, color, label in ((out_ev, "0.7", "outside event"),
                                 (in_ev, "C0", "in event")):
        xs = _finite([r.get("l2_bound") for r in subset])
        ys = _finite([r.get("err_l2") for r in subset])
        k = min(len(xs), len(ys))
        if k:
            ax.scatter(xs[:k], ys[:k], s=8, c=color, label=label)
    lims = ax.get_xlim()
    hi = max(lims[1], ax.get_ylim()[1])
    ax.plot([0, hi], [0, hi], "k--", lw=0.8)
    ax.set_xlabel("bound")
    ax.set_ylabel("l2 error")
    ax.set_title("error vs certified bound")
    ax.legend(fontsize=8)
    _save(fig, out_dir, stem, "error_vs_bound", paths)


def _fig_selection(result, out_dir, stem, paths):
    records = result.records
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.2))
    rate = result.aggregates.get("sign_recovery_rate", 0.0)
    ax1.bar([0], [rate], width=0.5)
    ax1.set_ylim(0, 1.05)
    ax1.set_xticks([0])
    ax1.set_xticklabels(["sign recovery"])
    ax1.set_ylabel("fraction of replicates")
    ax1.axhline(0.95, color="r", ls="--", lw=0.8)
    z0s = _finite([r.get("z0") for r in records])
    if z0s:
        ax2.hist(z0s, bins=30)
    lam = result.aggregates.get("lambda")
    if lam is not None and math.isfinite(lam):
        ax2.axvline(lam, color="r", ls="--", lw=0.8, label="penalty level")
        ax2.legend(fontsize=8)
    ax2.set_xlabel("on-support score noise")
    ax2.set_ylabel("replicates")
    _save(fig, out_dir, stem, "selection", paths)


def _fig_sparsity(result, out_dir, stem, paths):
    fps = [int(r["false_positives"]) for r in result.records]
    d1 = result.aggregates.get("d1")
    fig, ax = plt.subplots(figsize=(5, 3.2))
    hi = max(fps + [d1 or 0]) + 1
    ax.hist(fps, bins=range(0, hi + 2), align="left", rwidth=0.8)
    if d1 is not None:
        ax.axvline(d1 + 0.5, color="r", ls="--", lw=0.8, label="dimension cap")
        ax.legend(fontsize=8)
    ax.set_xlabel("false positives")
    ax.set_ylabel("replicates")
    ax.set_title("false positives vs cap")
    _save(fig, out_dir, stem, "false_positives", paths)


def _fig_diagnostics(result, out_dir, stem, paths):
    rec = result.records[0]
    names = ["kappa_star", "re2", "f2", "f0_phi_1S", "f0_phi_q2"]
    vals = [rec.get(n) for n in names]
    pairs = [(n, v) for n, v in zip(names, vals) if v is not None and math.isfinite(v)]
    if not pairs:
        return
    fig, ax = plt.subplots(figsize=(6, 3.2))
    ax.bar(range(len(pairs)), [v for _, v in pairs])
    ax.set_xticks(range(len(pairs)))
    ax.set_xticklabels([n for n, _ in pairs], rotation=20, fontsize=8)
    ax.set_ylabel("value")
    ax.set_title("cone factors")
    _save(fig, out_dir, stem, "factors", paths)


_RENDERERS = {
    "fit": (_fig_fit,),
    "path": (_fig_path,),
    "multistage": (_fig_multistage,),
    "oracle_verify": (_fig_oracle,),
    "selection_verify": (_fig_selection,),
    "sparsity_verify": (_fig_sparsity,),
    "diagnostics": (_fig_diagnostics,),
}


def render_figures(result: SimulationResult, out_dir: str, stem: str) -> list:
    """Render the experiment's figures into ``out_dir``; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for renderer in _RENDERERS.get(result.experiment, ()):
        renderer(result, out_dir, stem, paths)
    return paths
