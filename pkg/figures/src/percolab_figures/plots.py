"""Figure builders. Inputs are the public CSV/JSON contracts, never library
internals; identical inputs give identical images."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import (FormatError, read_cluster_report, read_growth,
                 read_lambda_c, read_phase_curve)

_SAVE_KW = dict(dpi=120, metadata={"Software": None})


def _self_test_sorted(series):
    # the plotted arrays must be lambda-sorted and order-consistent with the
    # CSV rows of their (R, L) group
    for key, rows in series.items():
        lams = [r["lambda"] for r in sorted(rows, key=lambda r: r["lambda"])]
        if lams != sorted(r["lambda"] for r in rows):
            raise FormatError(f"series {key}: lambda order broken")


def plot_phase_curve(csv_path, out_path, lambda_c_json=None):
    series = read_phase_curve(csv_path)
    _self_test_sorted(series)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for (R, L), rows in sorted(series.items()):
        rows = sorted(rows, key=lambda r: r["lambda"])
        lam = np.array([r["lambda"] for r in rows])
        p = np.array([r["p_hat"] for r in rows])
        lo = np.array([r["ci_low"] for r in rows])
        hi = np.array([r["ci_high"] for r in rows])
        line, = ax.plot(lam, p, marker="o", ms=3.5,
                        label=f"R={R:g}, L={L:g}")
        ax.fill_between(lam, lo, hi, alpha=0.2, color=line.get_color())
    if lambda_c_json is not None:
        doc = read_lambda_c(lambda_c_json)
        for res in doc.get("results", {}).values():
            lo, hi = res["bracket"]
            ax.axvspan(lo, hi, color="0.85", zorder=0)
            ax.axvline(res["lambda_c_hat"], color="0.4", ls="--", lw=1)
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel("crossing probability")
    ax.set_ylim(-0.03, 1.03)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, **_SAVE_KW)
    plt.close(fig)
    return out_path


def plot_cluster_scatter(json_path, out_path):
    doc = read_cluster_report(json_path)
    pts = np.asarray(doc["points"], float)
    labels = np.asarray(doc["component_ids"], int)
    L = float(doc.get("L", np.max(np.hypot(pts[:, 0], pts[:, 1]))
                      if len(pts) else 1.0))
    fig, ax = plt.subplots(figsize=(5.4, 5.4))
    ax.add_patch(plt.Circle((0, 0), L, fill=False, color="k", lw=1.2))
    if len(pts):
        uniq, counts = np.unique(labels, return_counts=True)
        biggest = uniq[np.argmax(counts)]
        order = {lab: i for i, lab in enumerate(uniq)}
        colors = np.array([order[x] for x in labels], float)
        back = labels != biggest
        ax.scatter(pts[back, 0], pts[back, 1], c=colors[back],
                   cmap="viridis", s=8, lw=0)
        main = labels == biggest
        ax.scatter(pts[main, 0], pts[main, 1], color="crimson", s=12, lw=0,
                   label=f"largest ({counts.max()} points)")
        ax.legend(loc="upper right", fontsize=8)
    ax.set_aspect("equal")
    pad = 1.1 * L
    ax.set_xlim(-pad, pad)
    ax.set_ylim(-pad, pad)
    fig.tight_layout()
    fig.savefig(out_path, **_SAVE_KW)
    plt.close(fig)
    return out_path


def plot_growth_loglog(csv_path, out_path):
    rows = read_growth(csv_path)
    n = np.array([r["n"] for r in rows])
    size = np.array([r["size"] for r in rows])
    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    ax.loglog(n, size, marker="o", ms=4)
    keep = n >= np.ceil(n.max() / 2)
    slope = np.polyfit(np.log(n[keep]), np.log(size[keep]), 1)[0]
    ax.loglog(n[keep], np.exp(np.polyval(
        np.polyfit(np.log(n[keep]), np.log(size[keep]), 1), np.log(n[keep]))),
        "--", color="0.4", label=f"slope {slope:.2f}")
    ax.set_xlabel("n")
    ax.set_ylabel("|B(n)|")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, **_SAVE_KW)
    plt.close(fig)
    return out_path
