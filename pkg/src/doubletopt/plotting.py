"""Per-block distribution figures for a solved scenario matrix."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# keep PNG bytes stable across matplotlib versions and runs
_SAVE_KW = {"dpi": 120, "metadata": {"Software": None}}


def _scenario_label(q_min_lps: float, r_delta: float) -> str:
    return f"q_min={q_min_lps:g} l/s, r={r_delta:g}"


def plot_block_distributions(series, path) -> Path:
    """Histograms of block rate and doublet count, one curve per scenario.

    ``series`` is a list of ``(q_min_lps, r_delta, block_rates, doublet_counts)``
    covering the analysed blocks of each scenario.
    """
    fig, (ax_q, ax_n) = plt.subplots(1, 2, figsize=(10, 4))
    q_hi = max((max(rates, default=0.0) for _, _, rates, _ in series), default=0.0)
    n_hi = max((max(counts, default=0) for _, _, _, counts in series), default=0)
    q_bins = 20 if q_hi <= 0 else [q_hi * k / 20 for k in range(21)]
    n_bins = [k - 0.5 for k in range(n_hi + 2)]
    for q_min, r_delta, rates, counts in series:
        label = _scenario_label(q_min, r_delta)
        ax_q.hist(rates, bins=q_bins, histtype="step", label=label)
        ax_n.hist(counts, bins=n_bins, histtype="step", label=label)
    ax_q.set_xlabel("block pumping rate [l/s]")
    ax_q.set_ylabel("blocks")
    ax_n.set_xlabel("doublets per block")
    ax_n.set_ylabel("blocks")
    ax_q.legend(fontsize="x-small")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def plot_rate_vs_count(series, path) -> Path:
    """Block rate against installed doublets for each scenario."""
    fig, ax = plt.subplots(figsize=(5, 4))
    for q_min, r_delta, rates, counts in series:
        ax.scatter(counts, rates, s=8, alpha=0.6, label=_scenario_label(q_min, r_delta))
    ax.set_xlabel("doublets per block")
    ax.set_ylabel("block pumping rate [l/s]")
    ax.legend(fontsize="x-small")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def render_figures(series, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return [
        plot_block_distributions(series, out / "block_distributions.png"),
        plot_rate_vs_count(series, out / "rate_vs_doublets.png"),
    ]
