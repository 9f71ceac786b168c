"""Figure rendering for the report outputs.

Every delimited report the CLI writes can optionally be rendered to a PNG
next to it; the CSV stays the canonical artifact.
"""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .catalogue import Decade, LanguageShareTable
from .crawl_planner import FrontierState
from .evaluation import PrCurve


def render_pr_curve(curve: PrCurve, path: Path, operating_threshold: float = 80.0) -> Path:
    """Precision/recall with 95% CI bands and the retained-fraction line."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    t = curve.thresholds
    ax.plot(t, curve.precision, "--", color="tab:blue", label="precision")
    ax.fill_between(t, curve.precision_ci_low, curve.precision_ci_high,
                    color="tab:blue", alpha=0.2, linewidth=0)
    ax.plot(t, curve.recall, ":", color="tab:orange", label="recall")
    ax.fill_between(t, curve.recall_ci_low, curve.recall_ci_high,
                    color="tab:orange", alpha=0.2, linewidth=0)
    ax.plot(t, curve.retention, "-", color="black", label="retained fraction")
    ax.axvline(operating_threshold, color="gray", linewidth=1)
    ax.set_xlabel("title score threshold")
    ax.set_ylabel("precision / recall / retention")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="lower left")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def render_decade_histogram(histogram: Sequence[tuple[Decade, int]], path: Path,
                            title: str = "") -> Path:
    """Semi-log bar chart of counts per publication decade."""
    dated = [(d, c) for d, c in histogram if isinstance(d, int)]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    if dated:
        decades = [d for d, _ in dated]
        counts = [c for _, c in dated]
        ax.bar(decades, counts, width=8.0, color="tab:blue")
        ax.set_yscale("log")
    ax.set_xlabel("publication decade")
    ax.set_ylabel("items")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def render_crawl_series(state: FrontierState, path: Path) -> Path:
    """Cumulative works/editions/authors bars and per-depth recommendations."""
    depths = np.arange(len(state.new_by_depth))
    works = np.cumsum([d.works for d in state.new_by_depth])
    editions = np.cumsum([d.editions for d in state.new_by_depth])
    authors = np.cumsum([d.authors for d in state.new_by_depth])
    recs = [d.recommendations for d in state.new_by_depth]

    fig, ax = plt.subplots(figsize=(7, 4.5))
    width = 0.25
    ax.bar(depths - width, editions, width, label="editions (cum.)", color="tab:blue")
    ax.bar(depths, works, width, label="works (cum.)", color="tab:orange")
    ax.bar(depths + width, authors, width, label="authors (cum.)", color="tab:green")
    ax.set_xlabel("depth")
    ax.set_ylabel("cumulative count")
    ax2 = ax.twinx()
    ax2.plot(depths, recs, "k.-", label="new recommendations")
    ax2.set_ylabel("new recommendations")
    handles1, labels1 = ax.get_legend_handles_labels()
    handles2, labels2 = ax2.get_legend_handles_labels()
    ax.legend(handles1 + handles2, labels1 + labels2, loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def render_language_shares(table: LanguageShareTable, path: Path, top: int = 20) -> Path:
    rows = table.rows[:top]
    fig, ax = plt.subplots(figsize=(7, max(2.5, 0.3 * len(rows))))
    langs = [lang for lang, _ in rows][::-1]
    shares = [share for _, share in rows][::-1]
    ax.barh(langs, shares, color="tab:blue")
    ax.set_xlabel("share of items (%)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)
