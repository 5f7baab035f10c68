"""Figures written next to the CSV reports."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _save(fig, path) -> None:
    fig.tight_layout()
    # fixed metadata keeps the PNG bytes stable across runs
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)


def error_histogram_figure(hist, path) -> None:
    """Two bar panels: CE message categories and FE error types."""
    fig, axes = plt.subplots(1, 2, figsize=(12, 4.5))
    for ax, counter, title in ((axes[0], hist.ce, "compile errors (CE)"),
                               (axes[1], hist.fe, "test failures (FE)")):
        items = sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))
        labels = [k for k, _ in items]
        ax.barh(range(len(items)), [v for _, v in items], color="#4a7ab5")
        ax.set_yticks(range(len(items)), labels, fontsize=8)
        ax.invert_yaxis()
        ax.set_xlabel("samples")
        ax.set_title(f"{title}: {sum(counter.values())}")
    _save(fig, path)


def loss_figure(losses, path, label: str = "", valid=None, best_epoch=None) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot([e for e, _ in losses], [v for _, v in losses], marker="o", markersize=3, label="training")
    if valid:
        ax.plot([e for e, _ in valid], [v for _, v in valid], marker="s", markersize=3, label="validation")
        if best_epoch is not None:
            ax.axvline(best_epoch, color="grey", linestyle=":", label=f"kept epoch {best_epoch}")
        ax.legend(fontsize=8)
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean token cross-entropy")
    ax.set_yscale("log")
    ax.set_title(f"training loss {label}".strip())
    _save(fig, path)


def eval_figure(reports, path) -> None:
    """Grouped bars of exact and plausible rates per model at each k."""
    fig, axes = plt.subplots(1, 2, figsize=(12, 4.5), sharey=True)
    for ax, which in zip(axes, ("exact", "plausible")):
        ks = sorted({k for r in reports for k in r.ks})
        width = 0.8 / max(len(reports), 1)
        for i, rep in enumerate(reports):
            vals = [rep.rate(which, k) if k in rep.ks else None for k in ks]
            xs = [j + i * width for j in range(len(ks))]
            ax.bar(xs, [v or 0.0 for v in vals], width, label=rep.label)
        ax.set_xticks([j + width * (len(reports) - 1) / 2 for j in range(len(ks))], [f"@{k}" for k in ks])
        ax.set_ylim(0, 1)
        ax.set_title(f"{which}-match rate")
        ax.legend(fontsize=8)
    _save(fig, path)
