"""Delimited report tables and the figures rendered alongside them."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .corpus import CorpusStats  # noqa: E402
from .metrics import EvalReport, SPLIT_TEST, SPLIT_TRAIN  # noqa: E402
from .types import MappingType  # noqa: E402

FLOAT_FORMAT = "{:.4f}"


def _fmt(value: float | None) -> str:
    return "" if value is None else FLOAT_FORMAT.format(value)


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_ranked_csv(report: EvalReport, path) -> None:
    """Wide table: one row per (mapping type, method), train and test column groups."""
    cells: dict[tuple[str, str], dict[str, tuple[float, float, float]]] = {}
    for row in report.ranked:
        cells.setdefault((row.mapping_type, row.method), {})[row.split] = (
            row.map_score,
            row.recall_at_10,
            row.recall_at_5,
        )
    out_rows = []
    for (mapping_type, method), by_split in sorted(cells.items()):
        record = [mapping_type, method]
        for split_name in (SPLIT_TRAIN, SPLIT_TEST):
            values = by_split.get(split_name)
            record.extend(
                [_fmt(values[0]), _fmt(values[1]), _fmt(values[2])] if values else ["", "", ""]
            )
        out_rows.append(record)
    _write_csv(
        Path(path),
        [
            "mapping_type", "method",
            "train_map", "train_recall_at_10", "train_recall_at_5",
            "test_map", "test_recall_at_10", "test_recall_at_5",
        ],
        out_rows,
    )


def write_unranked_csv(report: EvalReport, path) -> None:
    cells: dict[tuple[str, str], dict[str, tuple[float, float, float]]] = {}
    for row in report.unranked:
        cells.setdefault((row.mapping_type, row.method), {})[row.split] = (
            row.f1,
            row.precision,
            row.recall,
        )
    out_rows = []
    for (mapping_type, method), by_split in sorted(cells.items()):
        record = [mapping_type, method]
        for split_name in (SPLIT_TRAIN, SPLIT_TEST):
            values = by_split.get(split_name)
            record.extend(
                [_fmt(values[0]), _fmt(values[1]), _fmt(values[2])] if values else ["", "", ""]
            )
        out_rows.append(record)
    _write_csv(
        Path(path),
        [
            "mapping_type", "method",
            "train_f1", "train_precision", "train_recall",
            "test_f1", "test_precision", "test_recall",
        ],
        out_rows,
    )


def write_classwise_csv(report: EvalReport, path) -> None:
    rows = [
        [row.technique_id, row.mapping_type, row.split, str(row.frequency), _fmt(row.recall_at_10)]
        for row in sorted(
            report.classwise, key=lambda r: (r.mapping_type, r.split, -r.frequency, r.technique_id)
        )
    ]
    _write_csv(
        Path(path),
        ["technique_id", "mapping_type", "split", "frequency", "recall_at_10"],
        rows,
    )


def write_uncategorized_csv(report: EvalReport, path) -> None:
    cells: dict[tuple[str, str], dict[str, tuple[float, float, float]]] = {}
    for row in report.uncategorized:
        cells.setdefault((row.method, row.secondary_impacts), {})[row.split] = (
            row.map_score,
            row.recall_at_10,
            row.recall_at_5,
        )
    out_rows = []
    for (method, secondary), by_split in sorted(cells.items()):
        record = [method, secondary]
        for split_name in (SPLIT_TRAIN, SPLIT_TEST):
            values = by_split.get(split_name)
            record.extend(
                [_fmt(values[0]), _fmt(values[1]), _fmt(values[2])] if values else ["", "", ""]
            )
        out_rows.append(record)
    _write_csv(
        Path(path),
        [
            "method", "secondary_impacts",
            "train_map", "train_recall_at_10", "train_recall_at_5",
            "test_map", "test_recall_at_10", "test_recall_at_5",
        ],
        out_rows,
    )


def write_ablation_csv(rows: list[dict], path) -> None:
    """One row per ablation grid entry."""
    out_rows = [
        [
            row["features"],
            str(row["num_demonstrations"]),
            _fmt(row["map"]),
            _fmt(row["recall_at_10"]),
            _fmt(row["recall_at_5"]),
            str(row["mean_prompt_chars"]),
        ]
        for row in rows
    ]
    _write_csv(
        Path(path),
        ["features", "num_demonstrations", "map", "recall_at_10", "recall_at_5", "mean_prompt_chars"],
        out_rows,
    )


# ---------------------------------------------------------------------------
# Figures
# ---------------------------------------------------------------------------

_PNG_METADATA = {"Software": None}  # keep output byte-stable across reruns


def render_rank_frequency(stats: CorpusStats, path, top_n: int = 10) -> None:
    """Rank-frequency curve of mapped techniques with a top-N inset table."""
    counts = [count for _, count in stats.technique_frequency]
    figure, axis = plt.subplots(figsize=(7, 4.5))
    axis.plot(range(1, len(counts) + 1), counts, lw=1.5)
    axis.set_xlabel("technique rank")
    axis.set_ylabel("mapping count")
    axis.set_title("Technique rank-frequency")
    top = stats.technique_frequency[:top_n]
    table_text = "\n".join(f"{tid}  {count}" for tid, count in top)
    axis.text(
        0.97, 0.95, table_text, transform=axis.transAxes,
        fontsize=8, family="monospace", va="top", ha="right",
        bbox={"boxstyle": "round", "facecolor": "white", "alpha": 0.8},
    )
    figure.tight_layout()
    figure.savefig(path, dpi=150, metadata=_PNG_METADATA)
    plt.close(figure)


def render_classwise_heatmap(report: EvalReport, path) -> None:
    """Recall@10 per technique and (mapping type, split) column."""
    techniques = sorted({row.technique_id for row in report.classwise})
    columns = []
    for mapping_type in MappingType:
        for split_name in (SPLIT_TRAIN, SPLIT_TEST):
            columns.append((mapping_type.value, split_name))
    lookup = {
        (row.technique_id, row.mapping_type, row.split): row.recall_at_10
        for row in report.classwise
    }
    if not techniques:
        techniques = ["(none)"]
    grid = [
        [lookup.get((tech, mt, sp), float("nan")) for mt, sp in columns]
        for tech in techniques
    ]
    height = max(3.0, 0.25 * len(techniques) + 1.5)
    figure, axis = plt.subplots(figsize=(8, height))
    image = axis.imshow(grid, aspect="auto", cmap="Greens", vmin=0.0, vmax=1.0)
    axis.set_xticks(range(len(columns)))
    axis.set_xticklabels([f"{mt}\n{sp}" for mt, sp in columns], fontsize=7)
    axis.set_yticks(range(len(techniques)))
    axis.set_yticklabels(techniques, fontsize=7, family="monospace")
    axis.set_title("Classwise recall@10")
    figure.colorbar(image, ax=axis, shrink=0.6)
    figure.tight_layout()
    figure.savefig(path, dpi=150, metadata=_PNG_METADATA)
    plt.close(figure)


def render_ranked_metrics(report: EvalReport, path) -> None:
    """Grouped bars of MAP / R@10 / R@5 per mapping type and method."""
    keys = sorted({(row.mapping_type, row.method, row.split) for row in report.ranked})
    if not keys:
        keys = []
    lookup = {
        (row.mapping_type, row.method, row.split): row for row in report.ranked
    }
    labels = [f"{mt[:12]}\n{method}/{split}" for mt, method, split in keys]
    maps = [lookup[k].map_score for k in keys]
    r10 = [lookup[k].recall_at_10 for k in keys]
    r5 = [lookup[k].recall_at_5 for k in keys]
    positions = range(len(keys))
    width = 0.27
    figure, axis = plt.subplots(figsize=(max(6.0, 1.1 * len(keys)), 4.5))
    axis.bar([p - width for p in positions], maps, width, label="MAP")
    axis.bar(list(positions), r10, width, label="R@10")
    axis.bar([p + width for p in positions], r5, width, label="R@5")
    axis.set_xticks(list(positions))
    axis.set_xticklabels(labels, fontsize=7)
    axis.set_ylim(0, 1)
    axis.set_ylabel("score")
    axis.set_title("Ranked metrics by mapping type")
    axis.legend()
    figure.tight_layout()
    figure.savefig(path, dpi=150, metadata=_PNG_METADATA)
    plt.close(figure)
