"""PNG figures for scenario reports (headless Agg backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_report(result, path: str | Path) -> Path:
    """Per-query store reads against Baseline, plus the running hit rate for cached modes."""
    path = Path(path)
    recs = result.records
    xs = [r.query for r in recs]
    cached = any(r.hit for r in recs) or "cached" in result.mode
    fig, axes = plt.subplots(1, 2 if cached else 1, figsize=(10 if cached else 6, 3.6), squeeze=False)
    ax = axes[0][0]
    ax.plot(xs, [r.baseline_gets for r in recs], label="baseline", color="0.5", lw=1)
    ax.plot(xs, [max(r.gets, 0.5) for r in recs], label=result.mode, color="C0", lw=1, marker=".", ms=3)
    ax.set_yscale("log")
    ax.set_xlabel("query")
    ax.set_ylabel("store gets")
    ax.set_title(f"read reduction {result.read_reduction:.1f}%")
    ax.legend(frameon=False)
    if cached:
        hits, running = 0, []
        for i, r in enumerate(recs, start=1):
            hits += r.hit
            running.append(hits / i)
        ax2 = axes[0][1]
        ax2.plot(xs, running, color="C1")
        ax2.set_ylim(0, 1)
        ax2.set_xlabel("query")
        ax2.set_ylabel("cumulative hit rate")
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
