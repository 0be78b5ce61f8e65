import csv

from cvemap import corpus as corpus_mod
from cvemap import reports
from cvemap.metrics import (
    ClasswiseRow,
    EvalReport,
    RankedMetricsRow,
    UncategorizedRow,
    UnrankedMetricsRow,
)

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def sample_report():
    return EvalReport(
        ranked=[
            RankedMetricsRow("exploitation_technique", "combined", "train", 4, 0.75, 0.9, 0.8),
            RankedMetricsRow("exploitation_technique", "combined", "test", 2, 0.5, 0.7, 0.6),
            RankedMetricsRow("primary_impact", "icl", "test", 2, 0.25, 0.4, 0.3),
        ],
        unranked=[
            UnrankedMetricsRow("primary_impact", "vulnerability_type", "test", 2, 0.5, 0.25, 1 / 3),
        ],
        classwise=[
            ClasswiseRow("T1190", "exploitation_technique", "test", 3, 2 / 3),
            ClasswiseRow("T1059", "primary_impact", "train", 1, 1.0),
        ],
        uncategorized=[
            UncategorizedRow("pipeline", "included", "test", 2, 0.5, 0.6, 0.55),
            UncategorizedRow("external", "included", "test", 2, 0.2, 0.3, 0.25),
        ],
    )


def read_csv(path):
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


def test_ranked_csv_pivots_splits(tmp_path):
    path = tmp_path / "ranked.csv"
    reports.write_ranked_csv(sample_report(), path)
    rows = {(r["mapping_type"], r["method"]): r for r in read_csv(path)}
    combined = rows[("exploitation_technique", "combined")]
    assert combined["train_map"] == "0.7500"
    assert combined["test_recall_at_5"] == "0.6000"
    icl_row = rows[("primary_impact", "icl")]
    assert icl_row["train_map"] == ""  # no train data for that method
    assert icl_row["test_map"] == "0.2500"


def test_unranked_csv_columns(tmp_path):
    path = tmp_path / "unranked.csv"
    reports.write_unranked_csv(sample_report(), path)
    rows = read_csv(path)
    assert rows[0]["test_f1"] == "0.3333"
    assert rows[0]["test_precision"] == "0.5000"
    assert rows[0]["train_f1"] == ""


def test_classwise_csv_sorted_by_frequency(tmp_path):
    path = tmp_path / "classwise.csv"
    reports.write_classwise_csv(sample_report(), path)
    rows = read_csv(path)
    assert [r["technique_id"] for r in rows] == ["T1190", "T1059"]


def test_uncategorized_csv(tmp_path):
    path = tmp_path / "cmp.csv"
    reports.write_uncategorized_csv(sample_report(), path)
    rows = {r["method"]: r for r in read_csv(path)}
    assert rows["pipeline"]["test_map"] == "0.5000"
    assert rows["external"]["secondary_impacts"] == "included"


def test_ablation_csv(tmp_path):
    path = tmp_path / "ablation.csv"
    reports.write_ablation_csv(
        [
            {
                "features": "A+CVSS+CWE",
                "num_demonstrations": 6,
                "map": 0.5,
                "recall_at_10": 0.9,
                "recall_at_5": 0.8,
                "mean_prompt_chars": 1234,
            }
        ],
        path,
    )
    rows = read_csv(path)
    assert rows[0]["num_demonstrations"] == "6"
    assert rows[0]["mean_prompt_chars"] == "1234"


def test_figures_render_to_png(tmp_path, mini_corpus):
    report = sample_report()
    stats = corpus_mod.corpus_stats(mini_corpus)
    heatmap = tmp_path / "heatmap.png"
    bars = tmp_path / "bars.png"
    curve = tmp_path / "curve.png"
    reports.render_classwise_heatmap(report, heatmap)
    reports.render_ranked_metrics(report, bars)
    reports.render_rank_frequency(stats, curve)
    for path in (heatmap, bars, curve):
        assert path.read_bytes()[:8] == PNG_MAGIC


def test_heatmap_tolerates_empty_report(tmp_path):
    path = tmp_path / "empty.png"
    reports.render_classwise_heatmap(EvalReport(), path)
    assert path.read_bytes()[:8] == PNG_MAGIC


def test_figures_byte_stable(tmp_path, mini_corpus):
    stats = corpus_mod.corpus_stats(mini_corpus)
    first = tmp_path / "a.png"
    second = tmp_path / "b.png"
    reports.render_rank_frequency(stats, first)
    reports.render_rank_frequency(stats, second)
    assert first.read_bytes() == second.read_bytes()
