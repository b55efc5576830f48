"""Figure rendering for CLI reports.

Writes matplotlib figures to files next to the delimited output; only runs
when a plot path is requested, so default invocations stay stdout-only.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["plot_histogram", "plot_axiom_deviations"]


def plot_histogram(counts: dict[str, int], shots: int, path: str, title: str = "") -> str:
    keys = sorted(counts)
    values = [counts[k] / shots for k in keys]
    fig, ax = plt.subplots(figsize=(max(4.0, 0.9 * len(keys) + 2.0), 3.2))
    ax.bar(range(len(keys)), values, color="#4878cf")
    ax.set_xticks(range(len(keys)))
    ax.set_xticklabels(keys, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("frequency")
    ax.set_ylim(0.0, 1.0)
    if title:
        ax.set_title(title, fontsize=9)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_axiom_deviations(
    rows: list[dict], tol: float, path: str, title: str = "axiom deviations"
) -> str:
    axioms = [r["axiom"] for r in rows]
    devs = [max(r["max_deviation"], 1e-18) for r in rows]
    colors = ["#4878cf" if r["passed"] == r["trials"] else "#d65f5f" for r in rows]
    fig, ax = plt.subplots(figsize=(max(4.0, 0.6 * len(axioms) + 2.0), 3.2))
    ax.bar(range(len(axioms)), devs, color=colors)
    ax.set_yscale("log")
    ax.axhline(tol, color="black", linewidth=0.8, linestyle="--", label=f"tol={tol:g}")
    ax.set_xticks(range(len(axioms)))
    ax.set_xticklabels(axioms)
    ax.set_ylabel("max Frobenius deviation")
    ax.set_title(title, fontsize=9)
    ax.legend(fontsize=8)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
