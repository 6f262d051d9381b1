"""Comparison figures rendered from metrics logs.

Two panels, written as separate PNG files next to the delimited output:
test accuracy per increment and cumulative classes learned per increment,
each as a per-strategy mean curve with a +/- one std band across seeds. The
legend annotates each strategy with its mean average incremental accuracy.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .errors import ValidationError

_COLORS = {"curiosity": "tab:red", "softmax": "tab:green", "random": "tab:blue"}


def _strategy_color(strategy: str) -> str | None:
    return _COLORS.get(strategy)


def _band_plot(ax, aggregates: dict, value_key: str, ylabel: str) -> None:
    for strategy, agg in aggregates.items():
        x = agg["increments"]
        mean = agg[value_key + "_mean"]
        std = agg[value_key + "_std"]
        label = strategy
        avg = agg.get("average_incremental_accuracy_mean")
        if value_key == "accuracy" and avg is not None:
            label = f"{strategy} ({avg:.3f})"
        color = _strategy_color(strategy)
        ax.plot(x, mean, label=label, color=color)
        lo = [m - s for m, s in zip(mean, std)]
        hi = [m + s for m, s in zip(mean, std)]
        ax.fill_between(x, lo, hi, alpha=0.2, color=color)
    ax.set_xlabel("increment")
    ax.set_ylabel(ylabel)
    ax.legend()
    ax.grid(True, alpha=0.3)


def render_figures(aggregates: dict, out_dir: Path | str, stem: str = "metrics") -> list[Path]:
    """Write accuracy and classes-learned figures; returns the file paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for value_key, ylabel, suffix in (
        ("accuracy", "test accuracy", "accuracy"),
        ("classes_learned", "classes learned", "classes"),
    ):
        fig, ax = plt.subplots(figsize=(6, 4))
        _band_plot(ax, aggregates, value_key, ylabel)
        fig.tight_layout()
        path = out_dir / f"{stem}_{suffix}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        paths.append(path)
    return paths


def render_from_json(metrics_json: Path | str, out_dir: Path | str) -> list[Path]:
    """Render figures from a JSON metrics file written by ``write_metrics``."""
    metrics_json = Path(metrics_json)
    document = json.loads(metrics_json.read_text())
    aggregates = document.get("aggregates")
    if not aggregates:
        raise ValidationError(f"{metrics_json}: no aggregates section")
    return render_figures(aggregates, out_dir, stem=metrics_json.stem)
