"""Figure rendering for the CLI report paths.

Every plotting helper takes data already computed by the commands and writes
a PNG next to the delimited output; nothing here feeds back into results.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_pred_vs_actual(path, actual, svm_pred, fga_pred) -> None:
    """Side-by-side predicted-vs-actual scatter for the SVM and the graph."""
    actual = np.asarray(actual)
    lo = min(actual.min(), np.min(svm_pred), np.min(fga_pred))
    hi = max(actual.max(), np.max(svm_pred), np.max(fga_pred))
    fig, axes = plt.subplots(1, 2, figsize=(9, 4.2), sharex=True, sharey=True)
    for ax, pred, label in ((axes[0], svm_pred, "SVM"), (axes[1], fga_pred, "FGA")):
        ax.scatter(actual, pred, s=12, alpha=0.6, edgecolors="none")
        ax.plot([lo, hi], [lo, hi], "k--", lw=1)
        ax.set_xlabel("actual")
        ax.set_title(label)
    axes[0].set_ylabel("predicted")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_stability_hist(path, svm_norms, fga_norms) -> None:
    """Distribution of leave-one-out error-vector distances for both models."""
    fig, ax = plt.subplots(figsize=(6.5, 4.2))
    bins = np.histogram_bin_edges(np.concatenate([svm_norms, fga_norms]), bins=20)
    ax.hist(svm_norms, bins=bins, alpha=0.6, label="SVM")
    ax.hist(fga_norms, bins=bins, alpha=0.6, label="FGA")
    ax.set_xlabel("||e - e_i|| over removed points")
    ax.set_ylabel("count")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_perm_trace(path, improvement_idx, best_errors, sig_counts) -> None:
    """Best-so-far training error and first-layer significant-pair counts."""
    fig, ax1 = plt.subplots(figsize=(6.5, 4.2))
    ax1.step(improvement_idx, best_errors, where="post", color="tab:blue", label="best train SSE")
    ax1.set_xlabel("permutation improvement")
    ax1.set_ylabel("best train SSE", color="tab:blue")
    ax1.tick_params(axis="y", labelcolor="tab:blue")
    ax2 = ax1.twinx()
    ax2.plot(improvement_idx, sig_counts, "o--", color="tab:orange", label="significant pairs")
    ax2.set_ylabel("significant first-layer pairs", color="tab:orange")
    ax2.tick_params(axis="y", labelcolor="tab:orange")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
