"""Pool and selection statistics: histograms, length/quality tables, text rendering.

Reports are emitted as machine-readable JSON fragments plus aligned
plain-text tables; no plotting dependency.
"""

from __future__ import annotations

from typing import Sequence

from .corpus import ClassStats
from .generation import SyntheticSample, tokenize
from .selection import SelectionResult

Q_BIN_WIDTH = 0.05
_Q_BINS = 20


def _q_bin(q: float) -> int:
    return min(int(q / Q_BIN_WIDTH), _Q_BINS - 1)


def pool_report(samples: Sequence[SyntheticSample]) -> dict:
    """Pool-level statistics: q histogram (bin width 0.05), token-length
    histogram, and mean quality per token length."""
    q_hist = [0] * _Q_BINS
    length_counts: dict[int, int] = {}
    length_q_sums: dict[int, float] = {}
    degraded = 0
    q_sum = 0.0
    scored = 0
    for sample in samples:
        length = len(tokenize(sample.text))
        length_counts[length] = length_counts.get(length, 0) + 1
        if sample.degraded:
            degraded += 1
        if sample.quality is not None:
            q_hist[_q_bin(sample.quality)] += 1
            q_sum += sample.quality
            length_q_sums[length] = length_q_sums.get(length, 0.0) + sample.quality
            scored += 1
    length_quality = [
        {"token_length": length, "count": length_counts[length],
         "mean_quality": length_q_sums[length] / length_counts[length]}
        for length in sorted(length_q_sums)
    ]
    return {
        "size": len(samples),
        "degraded": degraded,
        "mean_quality": (q_sum / scored) if scored else None,
        "quality_histogram": {"bin_width": Q_BIN_WIDTH, "counts": q_hist},
        "token_length_histogram": [[length, length_counts[length]]
                                   for length in sorted(length_counts)],
        "length_quality": length_quality,
    }


def stats_fragment(stats: ClassStats) -> dict:
    return stats.as_dict()


def selection_fragment(result: SelectionResult) -> dict:
    degraded = sum(1 for s in result.selected if s.degraded)
    return {
        "strategy": result.strategy,
        "qsynt": result.threshold,
        "selected": len(result.selected),
        "degraded_selected": degraded,
        "synthetic_fraction": result.synthetic_fraction,
        "added_positives": result.added_positives,
        "unmet_targets": result.unmet_targets,
        "ratios_before": dict(zip(result.stats_before.categories,
                                  result.stats_before.ratios)),
        "ratios_after": dict(zip(result.stats_after.categories,
                                 result.stats_after.ratios)),
    }


def _table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    def line(cells):
        return "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(cells)).rstrip()
    rule = "  ".join("-" * w for w in widths)
    return "\n".join([line(headers), rule, *[line(r) for r in rows]])


def render_text(report: dict) -> str:
    """Aligned plain-text rendering of a full run report."""
    parts: list[str] = []

    source = report.get("source")
    if source:
        rows = [[category, str(source["positives"][category]),
                 f"{source['ratios'][category]:.4f}"]
                for category in source["positives"]]
        parts.append(f"source dataset: {source['total']} items")
        parts.append(_table(["category", "positives", "ratio"], rows))

    pool = report.get("pool")
    if pool:
        mean_q = "n/a" if pool["mean_quality"] is None else f"{pool['mean_quality']:.4f}"
        parts.append(f"pool: {pool['size']} samples, {pool['degraded']} degraded, "
                     f"mean q = {mean_q}")
        hist = pool["quality_histogram"]
        rows = []
        for i, count in enumerate(hist["counts"]):
            lo = i * hist["bin_width"]
            hi = lo + hist["bin_width"]
            if count:
                rows.append([f"[{lo:.2f}, {hi:.2f})" if i < _Q_BINS - 1
                             else f"[{lo:.2f}, 1.00]", str(count)])
        parts.append(_table(["q bin", "count"], rows))
        rows = [[str(length), str(count)]
                for length, count in pool["token_length_histogram"]]
        parts.append(_table(["token length", "count"], rows))
        rows = [[str(e["token_length"]), str(e["count"]), f"{e['mean_quality']:.4f}"]
                for e in pool["length_quality"]]
        parts.append(_table(["token length", "count", "mean q"], rows))

    for sel in report.get("selections", []):
        parts.append(f"selection: strategy={sel['strategy']} qsynt={sel['qsynt']:g} "
                     f"selected={sel['selected']} degraded={sel['degraded_selected']} "
                     f"synthetic_fraction={sel['synthetic_fraction']:.4f}")
        rows = [[category,
                 f"{sel['ratios_before'][category]:.4f}",
                 f"{sel['ratios_after'][category]:.4f}",
                 str(sel["added_positives"][category]),
                 str(sel["unmet_targets"].get(category, 0))]
                for category in sel["ratios_before"]]
        parts.append(_table(["category", "ratio before", "ratio after",
                             "added", "unmet"], rows))

    return "\n\n".join(parts) + "\n"
