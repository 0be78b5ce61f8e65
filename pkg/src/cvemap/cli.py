"""Command-line surface: ingest, map, evaluate, ablate, compare, report.

Runs are driven by a JSON config file; every setting can be overridden on the
command line. With the recorded backend, identical inputs produce
byte-identical artifacts and reports.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from . import corpus as corpus_mod
from . import fusion, icl, mappers, metrics, reports, rules
from .gateway import (
    Gateway,
    LiveBackend,
    RecordedBackend,
    estimate_cost,
    load_price_table,
)
from .types import MappingType

logger = logging.getLogger(__name__)


@click.group()
@click.option("--verbose", is_flag=True, help="Enable debug logging.")
def main(verbose: bool) -> None:
    """Map CVEs to ATT&CK techniques and evaluate the predictions."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )


# ---------------------------------------------------------------------------
# ingest
# ---------------------------------------------------------------------------


@main.command()
@click.option("--kev", "kev_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--kev-format", type=click.Choice(["csv", "json"]), default=None,
              help="Defaults to the file extension.")
@click.option("--nvd", "nvd_paths", multiple=True, required=True,
              type=click.Path(exists=True, path_type=Path))
@click.option("--attack", "attack_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--cwe", "cwe_path", default=None, type=click.Path(exists=True, path_type=Path))
@click.option("-o", "--output", "output_path", required=True, type=click.Path(path_type=Path))
def ingest(kev_path, kev_format, nvd_paths, attack_path, cwe_path, output_path) -> None:
    """Build the corpus archive from the labeled mappings and their sources."""
    kev_raw = kev_path.read_bytes()
    fmt = kev_format or ("json" if kev_path.suffix.lower() == ".json" else "csv")
    kev_rows = corpus_mod.parse_kev_mappings(kev_raw, fmt)

    nvd_records = []
    skipped = 0
    digests = {"kev": corpus_mod.file_digest(kev_raw)}
    for nvd_path in nvd_paths:
        raw = nvd_path.read_bytes()
        digests[f"nvd:{nvd_path.name}"] = corpus_mod.file_digest(raw)
        records, skipped_here = corpus_mod.parse_nvd_records(raw)
        nvd_records.extend(records)
        skipped += skipped_here

    attack_raw = attack_path.read_bytes()
    digests["attack"] = corpus_mod.file_digest(attack_raw)
    attack_records = corpus_mod.parse_attack_bundle(attack_raw)

    cwe_catalog = None
    if cwe_path:
        cwe_raw = cwe_path.read_bytes()
        digests["cwe"] = corpus_mod.file_digest(cwe_raw)
        cwe_catalog = corpus_mod.parse_cwe_catalog(cwe_raw)

    corpus, unresolved = corpus_mod.enrich(kev_rows, nvd_records, attack_records, cwe_catalog)
    corpus.provenance.update(digests)

    output_path.parent.mkdir(parents=True, exist_ok=True)
    corpus_mod.save_corpus(corpus, output_path)
    unresolved_path = output_path.with_name(output_path.stem + "_unresolved.json")
    with open(unresolved_path, "w", encoding="utf-8") as handle:
        json.dump({"unresolved_cves": unresolved}, handle, indent=2, sort_keys=True)
        handle.write("\n")

    if not corpus.cves:
        click.echo("0 CVEs resolved; nothing to report", err=True)
        sys.exit(1)
    stats = corpus_mod.corpus_stats(corpus)
    click.echo(
        f"{stats.total_cves} CVEs, {len(corpus.techniques)} techniques, "
        f"{stats.total_mappings} mappings"
    )
    for mapping_type in MappingType:
        click.echo(f"  {mapping_type.value}: {stats.mappings_per_type[mapping_type]} mappings")
    if skipped:
        click.echo(f"  skipped {skipped} NVD record(s) without an English description")
    if unresolved:
        click.echo(f"  {len(unresolved)} CVE(s) unresolved against NVD (see {unresolved_path})")
    click.echo(f"wrote {output_path}")


# ---------------------------------------------------------------------------
# config handling
# ---------------------------------------------------------------------------

DEFAULT_CONFIG = {
    "corpus": None,
    "output_dir": None,
    "split": {"ratio": 0.2, "seed": 7},
    "backend": None,
    "model": "recorded-model",
    "temperature": 0.0,
    "max_output_tokens": 1024,
    "features": {
        "include_attack_descriptions": True,
        "include_cvss": True,
        "include_cwe": True,
        "num_demonstrations": None,
    },
    "methods": [m.value for m in mappers.DEFAULT_HYBRID_METHODS],
    "seed": 0,
    "concurrency": 4,
    "requests_per_minute": None,
    "price_table": None,
}


def _resolve(base: Path, value):
    if not value:
        return value
    candidate = Path(value)
    return str(candidate if candidate.is_absolute() else base / candidate)


def load_config(path: Path | None, overrides: dict) -> dict:
    config = json.loads(json.dumps(DEFAULT_CONFIG))
    if path is not None:
        with open(path, encoding="utf-8") as handle:
            loaded = json.load(handle)
        for key, value in loaded.items():
            if isinstance(value, dict) and isinstance(config.get(key), dict):
                config[key].update(value)
            else:
                config[key] = value
        # paths in a config file are relative to the file, not the cwd
        base = Path(path).resolve().parent
        for key in ("corpus", "output_dir", "price_table"):
            config[key] = _resolve(base, config.get(key))
        backend = config.get("backend") or {}
        if "recorded" in backend:
            backend["recorded"]["fixture_dir"] = _resolve(
                base, backend["recorded"].get("fixture_dir")
            )
        if "live" in backend and backend["live"].get("cache_dir"):
            backend["live"]["cache_dir"] = _resolve(base, backend["live"]["cache_dir"])
    for key, value in overrides.items():
        if value is None:
            continue
        if key in ("split_seed", "split_ratio"):
            config["split"]["seed" if key == "split_seed" else "ratio"] = value
        elif key == "num_demonstrations":
            config["features"]["num_demonstrations"] = value
        elif key == "fixture_dir":
            config["backend"] = {"recorded": {"fixture_dir": str(value)}}
        elif key == "methods":
            config["methods"] = [m.strip() for m in value.split(",") if m.strip()]
        else:
            config[key] = value
    if not config.get("corpus"):
        raise click.UsageError("no corpus configured (config file or --corpus)")
    if not config.get("output_dir"):
        raise click.UsageError("no output directory configured (config file or --output-dir)")
    backend = config.get("backend") or {}
    if len([k for k in ("recorded", "live") if k in backend]) != 1:
        raise click.UsageError("exactly one backend must be configured (recorded or live)")
    return config


def make_gateway(config: dict, output_dir: Path) -> Gateway:
    backend_config = config["backend"]
    if "recorded" in backend_config:
        backend = RecordedBackend(backend_config["recorded"]["fixture_dir"])
        cache_dir = None
    else:
        live = backend_config["live"]
        backend = LiveBackend(
            endpoint_url=live["endpoint"],
            credential_env=live.get("credential_env", "OPENAI_API_KEY"),
        )
        cache_dir = Path(live.get("cache_dir") or output_dir / "cache")
    return Gateway(
        backend,
        cache_dir=cache_dir,
        max_concurrent=config.get("concurrency", 4),
        requests_per_minute=config.get("requests_per_minute"),
    )


def config_features(config: dict) -> icl.IclFeatures:
    f = config["features"]
    return icl.IclFeatures(
        include_attack_descriptions=f.get("include_attack_descriptions", True),
        include_cvss=f.get("include_cvss", True),
        include_cwe=f.get("include_cwe", True),
        num_demonstrations=f.get("num_demonstrations"),
    )


def semantic_config(config: dict) -> dict:
    """The config fields that determine prediction content (paths excluded,
    so reruns into different directories stay byte-identical)."""
    return {
        "split": config["split"],
        "model": config["model"],
        "temperature": config["temperature"],
        "max_output_tokens": config["max_output_tokens"],
        "features": config["features"],
        "methods": config["methods"],
        "seed": config["seed"],
    }


def _digest_of(document: dict) -> str:
    return hashlib.sha256(
        json.dumps(document, sort_keys=True, ensure_ascii=False).encode("utf-8")
    ).hexdigest()


# ---------------------------------------------------------------------------
# map
# ---------------------------------------------------------------------------


@main.command("map")
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path))
@click.option("--corpus", "corpus_path", type=click.Path(path_type=Path))
@click.option("--output-dir", type=click.Path(path_type=Path))
@click.option("--fixture-dir", type=click.Path(path_type=Path),
              help="Shorthand for a recorded backend over this directory.")
@click.option("--model", default=None)
@click.option("--seed", type=int, default=None)
@click.option("--split-seed", type=int, default=None)
@click.option("--split-ratio", type=float, default=None)
@click.option("--num-demonstrations", type=int, default=None)
@click.option("--methods", default=None, help="Comma-separated method names.")
@click.option("--concurrency", type=int, default=None)
@click.option("--cve", "cve_ids", multiple=True, help="Map these CVE IDs.")
@click.option("--all-test", is_flag=True, help="Map every test-split CVE.")
@click.option("--limit", type=int, default=None, help="Cap the number of CVEs mapped.")
def cmd_map(config_path, corpus_path, output_dir, fixture_dir, model, seed, split_seed,
            split_ratio, num_demonstrations, methods, concurrency, cve_ids, all_test, limit):
    """Predict ranked technique lists for CVEs and write the run artifact."""
    config = load_config(
        config_path,
        {
            "corpus": str(corpus_path) if corpus_path else None,
            "output_dir": str(output_dir) if output_dir else None,
            "fixture_dir": fixture_dir,
            "model": model,
            "seed": seed,
            "split_seed": split_seed,
            "split_ratio": split_ratio,
            "num_demonstrations": num_demonstrations,
            "methods": methods,
            "concurrency": concurrency,
        },
    )
    corpus = corpus_mod.load_corpus(config["corpus"])
    corpus_digest = corpus_mod.file_digest(Path(config["corpus"]).read_bytes())
    tables = rules.load_default_tables()
    split = corpus_mod.split_corpus(corpus, config["split"]["ratio"], config["split"]["seed"])

    targets = list(cve_ids)
    if all_test:
        targets.extend(sorted(split.test_cve_ids))
    if not targets:
        raise click.UsageError("nothing to map: pass --cve or --all-test")
    targets = sorted(dict.fromkeys(targets))
    if limit is not None:
        targets = targets[:limit]
    unknown = [c for c in targets if c not in corpus.cves]
    if unknown:
        raise click.UsageError(f"CVE(s) not in corpus: {', '.join(unknown)}")

    out_dir = Path(config["output_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    gateway = make_gateway(config, out_dir)
    features = config_features(config)
    selected = tuple(mappers.Method.parse(m) for m in config["methods"])
    defaults = mappers.RequestDefaults(
        model_name=config["model"],
        temperature=config["temperature"],
        max_output_tokens=config["max_output_tokens"],
    )
    demonstrations = icl.select_demonstrations(
        split, corpus, features.num_demonstrations, config["seed"]
    )

    def predict_one(cve_id: str) -> tuple[str, fusion.PredictionTrace]:
        return cve_id, fusion.predict_cve(
            gateway, corpus.cves[cve_id], tables, corpus, split, features, defaults,
            selected_methods=selected, seed=config["seed"], demonstrations=demonstrations,
        )

    traces: dict[str, fusion.PredictionTrace] = {}
    with ThreadPoolExecutor(max_workers=config.get("concurrency", 4)) as pool:
        for cve_id, trace in pool.map(predict_one, targets):
            traces[cve_id] = trace

    config_document = semantic_config(config)
    artifact = fusion.build_run_artifact(
        traces, config_document, _digest_of(config_document), corpus_digest,
        gateway.usage.as_dict(),
    )
    artifact_path = out_dir / "run.json"
    fusion.dump_artifact(artifact, artifact_path)

    errors = {cve_id: sorted(trace.errors) for cve_id, trace in traces.items() if trace.errors}
    if errors:
        with open(out_dir / "errors.json", "w", encoding="utf-8") as handle:
            json.dump(errors, handle, indent=2, sort_keys=True)
            handle.write("\n")

    usage = gateway.usage
    click.echo(
        f"mapped {len(targets)} CVE(s): {usage.request_count} requests, "
        f"{usage.input_tokens} input tokens, {usage.output_tokens} output tokens"
    )
    if config.get("price_table"):
        prices = load_price_table(config["price_table"])
        if config["model"] in prices:
            cost = estimate_cost(usage, prices, config["model"])
            click.echo(f"estimated cost: ${cost:.4f} ({config['model']})")
        else:
            click.echo(f"no price entry for model {config['model']!r}; cost not estimated")
    click.echo(f"wrote {artifact_path}")
    if errors:
        click.echo(f"{len(errors)} CVE(s) had errors (see {out_dir / 'errors.json'})", err=True)
        sys.exit(1)


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------


def _split_from_artifact(artifact: dict, corpus) -> corpus_mod.DataSplit:
    split_config = artifact.get("config", {}).get("split", {})
    return corpus_mod.split_corpus(
        corpus, split_config.get("ratio", 0.2), split_config.get("seed", 7)
    )


def ablation_sample(corpus, sample_size: int, seed: int) -> list[str]:
    rng = random.Random(f"ablation:{seed}")
    return sorted(rng.sample(sorted(corpus.cves), sample_size))


@main.command()
@click.argument("run_artifact", type=click.Path(exists=True, path_type=Path))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("-o", "--output-dir", required=True, type=click.Path(path_type=Path))
@click.option("--exclude-secondary", is_flag=True)
@click.option("--uncategorized", is_flag=True)
@click.option("--figures/--no-figures", default=True)
def evaluate(run_artifact, corpus_path, output_dir, exclude_secondary, uncategorized, figures):
    """Score a run artifact and emit CSV tables, classwise data, and figures."""
    artifact = fusion.load_artifact(run_artifact)
    corpus = corpus_mod.load_corpus(corpus_path)
    split = _split_from_artifact(artifact, corpus)
    options = metrics.EvalOptions(exclude_secondary=exclude_secondary, uncategorized=uncategorized)
    report = metrics.evaluate_run(artifact, corpus, split, options)

    out_dir = Path(output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    reports.write_ranked_csv(report, out_dir / "ranked.csv")
    reports.write_unranked_csv(report, out_dir / "unranked.csv")
    reports.write_classwise_csv(report, out_dir / "classwise.csv")
    if uncategorized:
        reports.write_uncategorized_csv(report, out_dir / "uncategorized.csv")
    if figures:
        reports.render_classwise_heatmap(report, out_dir / "classwise_heatmap.png")
        reports.render_ranked_metrics(report, out_dir / "ranked_metrics.png")

    for row in report.ranked:
        click.echo(
            f"{row.mapping_type:24s} {row.method:9s} {row.split:5s} "
            f"MAP={row.map_score:.4f} R@10={row.recall_at_10:.4f} R@5={row.recall_at_5:.4f} "
            f"(Q={row.queries})"
        )
    click.echo(f"wrote reports to {out_dir}")


# ---------------------------------------------------------------------------
# ablate
# ---------------------------------------------------------------------------


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path))
@click.option("--plan", "plan_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--corpus", "corpus_path", type=click.Path(path_type=Path))
@click.option("--output-dir", type=click.Path(path_type=Path))
@click.option("--fixture-dir", type=click.Path(path_type=Path))
def ablate(config_path, plan_path, corpus_path, output_dir, fixture_dir):
    """Run in-context-only predictions for each feature-grid row and report
    MAP, R@10, and R@5 per row."""
    config = load_config(
        config_path,
        {
            "corpus": str(corpus_path) if corpus_path else None,
            "output_dir": str(output_dir) if output_dir else None,
            "fixture_dir": fixture_dir,
        },
    )
    with open(plan_path, encoding="utf-8") as handle:
        plan = json.load(handle)
    corpus = corpus_mod.load_corpus(config["corpus"])
    split = corpus_mod.split_corpus(corpus, config["split"]["ratio"], config["split"]["seed"])

    sample_size = plan.get("sample_size", 100)
    if sample_size > len(corpus.cves):
        raise click.UsageError(
            f"sample size {sample_size} exceeds corpus size {len(corpus.cves)}"
        )
    sampled = ablation_sample(corpus, sample_size, plan.get("seed", 0))

    out_dir = Path(config["output_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    gateway = make_gateway(config, out_dir)
    icl_defaults = mappers.RequestDefaults(
        model_name=config["model"],
        temperature=config["temperature"],
        max_output_tokens=config["max_output_tokens"],
        system_text=icl.icl_system_text(),
    )

    truth_index = corpus.mapping_index()
    report_rows = []
    details: dict[str, dict] = {}
    for row in plan["rows"]:
        row_features = icl.IclFeatures(
            include_attack_descriptions=row.get("features", {}).get("include_attack_descriptions", True),
            include_cvss=row.get("features", {}).get("include_cvss", True),
            include_cwe=row.get("features", {}).get("include_cwe", True),
            num_demonstrations=row.get("num_demonstrations"),
        )
        demonstrations = icl.select_demonstrations(
            split, corpus, row_features.num_demonstrations, config["seed"]
        )
        queries = []
        prompt_chars = 0
        prompt_count = 0
        row_lists: dict[str, dict[str, list[str]]] = {}
        for cve_id in sampled:
            row_lists[cve_id] = {}
            for mapping_type in MappingType:
                result = icl.run_icl(
                    gateway, corpus.cves[cve_id], mapping_type, row_features, split, corpus,
                    icl_defaults, seed=config["seed"], demonstrations=demonstrations,
                )
                for prompt in result.prompts.values():
                    prompt_chars += len(prompt)
                    prompt_count += 1
                truth = metrics.make_truth(truth_index.get((cve_id, mapping_type), set()))
                queries.append(metrics.RankedQuery(predicted=list(result.ranked.slots), truth=truth))
                row_lists[cve_id][mapping_type.value] = list(result.ranked.slots)
        label = row_features.label()
        num_demonstrations = (
            row_features.num_demonstrations
            if row_features.num_demonstrations is not None
            else len(split.train_cve_ids)
        )
        report_rows.append(
            {
                "features": label,
                "num_demonstrations": num_demonstrations,
                "map": metrics.mean_average_precision(queries),
                "recall_at_10": sum(metrics.recall_at_k(q, 10) for q in queries) / len(queries),
                "recall_at_5": sum(metrics.recall_at_k(q, 5) for q in queries) / len(queries),
                "mean_prompt_chars": prompt_chars // max(prompt_count, 1),
            }
        )
        details[f"{label}/{num_demonstrations}"] = row_lists

    reports.write_ablation_csv(report_rows, out_dir / "ablation.csv")
    with open(out_dir / "ablation_details.json", "w", encoding="utf-8") as handle:
        json.dump(details, handle, indent=2, sort_keys=True)
        handle.write("\n")
    for row in report_rows:
        click.echo(
            f"features={row['features']:12s} demos={row['num_demonstrations']:4d} "
            f"MAP={row['map']:.4f} R@10={row['recall_at_10']:.4f} R@5={row['recall_at_5']:.4f}"
        )
    click.echo(f"wrote {out_dir / 'ablation.csv'}")


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------


@main.command()
@click.argument("run_artifact", type=click.Path(exists=True, path_type=Path))
@click.argument("external_csv", type=click.Path(exists=True, path_type=Path))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--external-name", default="external")
@click.option("-o", "--output-dir", required=True, type=click.Path(path_type=Path))
def compare(run_artifact, external_csv, corpus_path, external_name, output_dir):
    """Score this run against an external tool's uncategorized rankings under
    identical ground truth, with and without secondary impacts."""
    artifact = fusion.load_artifact(run_artifact)
    corpus = corpus_mod.load_corpus(corpus_path)
    split = _split_from_artifact(artifact, corpus)

    external: dict[str, list[tuple[int, str]]] = {}
    with open(external_csv, encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        required = {"cve_id", "rank", "technique_id"}
        if not required.issubset(set(reader.fieldnames or [])):
            raise click.UsageError(
                f"external file needs columns {sorted(required)}, has {reader.fieldnames}"
            )
        for record in reader:
            external.setdefault(record["cve_id"], []).append(
                (int(record["rank"]), record["technique_id"])
            )
    ranking_by_cve: dict[str, list[str]] = {}
    for cve_id, entries in external.items():
        lifted = [corpus_mod.lift_subtechnique(t) for _, t in sorted(entries)]
        deduped = list(dict.fromkeys(lifted))
        ranking_by_cve[cve_id] = deduped

    artifact_ids = sorted(artifact.get("cves", {}))
    missing = [cve_id for cve_id in artifact_ids if cve_id not in ranking_by_cve]
    if missing:
        raise click.ClickException(
            f"external file is missing {len(missing)} CVE(s): {', '.join(missing)}"
        )

    report = metrics.EvalReport()
    for include_secondary in (True, False):
        ours = metrics.uncategorized_queries(artifact, corpus, split, include_secondary)
        report.uncategorized.extend(
            metrics.uncategorized_rows(ours, "pipeline", include_secondary)
        )
    report.uncategorized.extend(
        metrics.score_external_ranking(ranking_by_cve, artifact_ids, corpus, split, external_name)
    )

    out_dir = Path(output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    reports.write_uncategorized_csv(report, out_dir / "comparison.csv")
    for row in report.uncategorized:
        click.echo(
            f"{row.method:10s} secondary={row.secondary_impacts:9s} {row.split:5s} "
            f"MAP={row.map_score:.4f} R@10={row.recall_at_10:.4f} R@5={row.recall_at_5:.4f}"
        )
    click.echo(f"wrote {out_dir / 'comparison.csv'}")


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------


@main.command()
@click.argument("run_artifact", type=click.Path(exists=True, path_type=Path))
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("-o", "--output-dir", required=True, type=click.Path(path_type=Path))
def report(run_artifact, corpus_path, output_dir):
    """Write a human-readable run summary with figures."""
    artifact = fusion.load_artifact(run_artifact)
    corpus = corpus_mod.load_corpus(corpus_path)
    split = _split_from_artifact(artifact, corpus)
    eval_report = metrics.evaluate_run(artifact, corpus, split)
    stats = corpus_mod.corpus_stats(corpus)

    out_dir = Path(output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    reports.render_rank_frequency(stats, out_dir / "rank_frequency.png")
    reports.render_classwise_heatmap(eval_report, out_dir / "classwise_heatmap.png")
    reports.render_ranked_metrics(eval_report, out_dir / "ranked_metrics.png")

    usage = artifact.get("usage", {})
    error_count = sum(1 for body in artifact.get("cves", {}).values() if body.get("errors"))
    lines = [
        f"run artifact: {run_artifact}",
        f"corpus: {stats.total_cves} CVEs, {stats.total_mappings} mappings",
        f"mapped CVEs: {len(artifact.get('cves', {}))} ({error_count} with errors)",
        f"usage: {usage.get('request_count', 0)} requests, "
        f"{usage.get('input_tokens', 0)} input tokens, {usage.get('output_tokens', 0)} output tokens",
        "",
        "ranked metrics (combined lists):",
    ]
    for row in eval_report.ranked:
        if row.method != "combined":
            continue
        lines.append(
            f"  {row.mapping_type:24s} {row.split:5s} MAP={row.map_score:.4f} "
            f"R@10={row.recall_at_10:.4f} R@5={row.recall_at_5:.4f} (Q={row.queries})"
        )
    summary_path = out_dir / "summary.txt"
    summary_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    click.echo("\n".join(lines))
    click.echo(f"wrote {summary_path}")


if __name__ == "__main__":
    main()
