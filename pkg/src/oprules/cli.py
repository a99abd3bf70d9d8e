"""Batch command-line entry point.

Subcommands: train, infer, eval, analyze, sample, oracle-check. Options can
come from a YAML/JSON config document (--config); explicit flags win. Every
run writes a manifest (config snapshot, seed, versions) into the log
directory. Exit codes: 0 success, 1 validation/usage errors, 2 runtime
errors. API keys are only ever read from environment variables.
"""

from __future__ import annotations

import json
import os
import platform
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import yaml

from . import __version__
from .dataset import load_dataset, save_dataset
from .errors import OprulesError
from .evaluation import (
    evaluate,
    taxonomy_rows,
    write_report,
    write_taxonomy_csv,
)
from .gateway import (
    EmbeddingSimilarity,
    HttpProvider,
    LexicalSimilarity,
    LlmGateway,
    Provider,
    ProviderConfig,
    ScriptedProvider,
)
from .inference import RetrievalConfig, infer
from .lexicon import OperatorCategory
from .optree import library_load
from .semantics import BoundedOracle, ExternalCheckerConfig, ExternalOracle, parse_sva
from .semantics.equivalence import check_equivalence
from .trainer import (
    TrainConfig,
    TrainLog,
    stratified_sample,
    train,
    write_curve_csv,
    write_train_log,
)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    text = Path(path).read_text(encoding="utf-8")
    if path.endswith((".yaml", ".yml")):
        doc = yaml.safe_load(text)
    else:
        doc = json.loads(text)
    if not isinstance(doc, dict):
        raise click.ClickException(f"config {path} must be a mapping")
    return doc


def _pick(flag_value, config: dict, *keys, default=None):
    """Flag wins; otherwise walk the config document; otherwise default."""
    if flag_value is not None:
        return flag_value
    node = config
    for key in keys:
        if not isinstance(node, dict) or key not in node:
            return default
        node = node[key]
    return node


def _resolve_log_dir(flag_value, config: dict) -> str:
    # every run records a manifest; the directory is configurable, not optional
    return _pick(flag_value, config, "log_dir", default="oprules-logs")


def _resolve_provider(spec: str | None, config: dict) -> Provider:
    spec = spec or config.get("provider", {}).get("mode")
    if spec is None:
        raise click.ClickException("no provider configured (use --provider or a config file)")
    if isinstance(spec, str) and spec.startswith("scripted:"):
        fixture = Path(spec.split(":", 1)[1])
        if not fixture.exists():
            raise click.ClickException(f"scripted fixture {fixture} does not exist")
        return ScriptedProvider.from_jsonl(fixture)
    if spec == "scripted":
        fixture = config.get("provider", {}).get("fixture")
        if not fixture:
            raise click.ClickException("scripted provider needs provider.fixture in the config")
        return ScriptedProvider.from_jsonl(fixture)
    if spec == "http":
        section = config.get("provider", {})
        try:
            return HttpProvider(
                ProviderConfig(
                    endpoint=section["endpoint"],
                    model_name=section["model_name"],
                    api_key_env=section.get("api_key_env", "OPRULES_API_KEY"),
                    temperature=float(section.get("temperature", 0.0)),
                    max_output_tokens=int(section.get("max_output_tokens", 1024)),
                    request_timeout=float(section.get("request_timeout", 60.0)),
                    max_retries=int(section.get("max_retries", 3)),
                    concurrency_limit=int(section.get("concurrency_limit", 4)),
                )
            )
        except KeyError as exc:
            raise click.ClickException(f"provider config missing {exc}")
    raise click.ClickException(f"unrecognized provider {spec!r}")


def _resolve_similarity(selector: str, config: dict, trees):
    """lexical (idf fitted on the library backgrounds) or embedding-backed."""
    if selector == "lexical":
        return LexicalSimilarity(t.background.nl_spec for t in trees)
    if selector == "embedding":
        section = config.get("retrieval", {}).get("embedding", {})
        try:
            return EmbeddingSimilarity(
                ProviderConfig(
                    endpoint=section["endpoint"],
                    model_name=section["model_name"],
                    api_key_env=section.get("api_key_env", "OPRULES_API_KEY"),
                )
            )
        except KeyError as exc:
            raise click.ClickException(f"embedding similarity config missing {exc}")
    raise click.ClickException(f"unrecognized similarity {selector!r}")


def _resolve_oracle(name: str | None, config: dict, max_len: int | None):
    name = name or config.get("oracle", {}).get("mode", "bounded")
    if name == "bounded":
        section = config.get("oracle", {})
        return BoundedOracle(
            max_len=max_len if max_len is not None else int(section.get("max_len", 5)),
            budget=int(section.get("budget", 2**24)),
        )
    if name == "external":
        section = config.get("oracle", {})
        command = section.get("command")
        if not command:
            raise click.ClickException("external oracle needs oracle.command in the config")
        return ExternalOracle(
            ExternalCheckerConfig(
                command=command,
                strict_pass=section.get("strict_pass", r"\bEQUIVALENT\b"),
                relaxed_pass=section.get("relaxed_pass", r"\bRELAXED_ONLY\b|\bEQUIVALENT\b"),
            )
        )
    raise click.ClickException(f"unrecognized oracle {name!r}")


def _load_pairs_or_fail(path: str):
    pairs, errors = load_dataset(path)
    for err in errors:
        click.echo(f"warning: {path}: {err}", err=True)
    if not pairs:
        raise click.ClickException(f"no valid records in {path}")
    return pairs


def _write_manifest(log_dir: str, command: str, params: dict) -> None:
    out = Path(log_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": command,
        "config_snapshot": {k: v for k, v in sorted(params.items())},
        "versions": {
            "oprules": __version__,
            "python": platform.python_version(),
        },
    }
    (out / f"manifest-{command}.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n",
        encoding="utf-8",
    )


@click.group()
def cli():
    """Learn operator-level correction rules for assertion generation."""


@cli.command("train")
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True))
@click.option("--out-library", default="library.jsonl", show_default=True)
@click.option("--max-iter", type=int, default=None, help="Training iteration cap (default 25).")
@click.option("--seed", type=int, default=None)
@click.option("--oracle", "oracle_name", type=click.Choice(["bounded", "external"]), default=None)
@click.option("--sample-ratio", type=float, default=None, help="Stratified subsample of the dataset.")
@click.option("--provider", "provider_spec", default=None, help="scripted:<fixture.jsonl> or http.")
@click.option("--questions-per-layer", type=int, default=None)
@click.option("--max-len", type=int, default=None, help="Bounded oracle trace length.")
@click.option("--jobs", type=int, default=None, help="Worker pool size.")
@click.option("--log-dir", default=None, help="Run-log directory (manifest + LLM audit archive). [default: oprules-logs]")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
def train_cmd(
    dataset_path, out_library, max_iter, seed, oracle_name, sample_ratio,
    provider_spec, questions_per_layer, max_len, jobs, log_dir, config_path,
):
    """Learn a tree library from a JSONL dataset."""
    config = _load_config(config_path)
    seed = _pick(seed, config, "train", "seed", default=0)
    train_config = TrainConfig(
        max_iterations=_pick(max_iter, config, "train", "max_iterations", default=25),
        questions_per_layer=_pick(
            questions_per_layer, config, "train", "questions_per_layer", default=3
        ),
        equivalence=_pick(oracle_name, config, "oracle", "mode", default="bounded"),
        rng_seed=seed,
        concurrency_limit=_pick(jobs, config, "train", "concurrency_limit", default=4),
    )
    log_dir = _resolve_log_dir(log_dir, config)
    gateway = LlmGateway(
        _resolve_provider(provider_spec, config),
        archive_dir=Path(log_dir) / "llm",
    )
    oracle = _resolve_oracle(oracle_name, config, max_len)
    pairs = _load_pairs_or_fail(dataset_path)
    ratio = _pick(sample_ratio, config, "train", "sample_ratio")
    if ratio is not None and ratio < 1.0:
        pairs = stratified_sample(pairs, ratio, seed=seed)
        click.echo(f"stratified sample: {len(pairs)} items")
    _write_manifest(
        log_dir, "train",
        {
            "dataset": dataset_path, "out_library": out_library, "seed": seed,
            "max_iterations": train_config.max_iterations,
            "questions_per_layer": train_config.questions_per_layer,
            "oracle": train_config.equivalence, "sample_ratio": ratio,
        },
    )
    library_path, train_log = train(
        pairs, train_config, gateway, out_library, oracle=oracle,
        dataset_id=Path(dataset_path).stem,
    )
    base = Path(log_dir)
    base.mkdir(parents=True, exist_ok=True)
    write_train_log(train_log, base / "trainlog.json", base / "trainlog.csv")
    final_ratio = train_log.records[-1].cumulative_fixing_ratio if train_log.records else 0.0
    committed = sum(r.trees_committed for r in train_log.records)
    click.echo(
        f"library: {library_path} ({committed} trees), "
        f"fixing ratio {final_ratio:.3f} after {len(train_log.records)} iteration(s)"
    )


@cli.command("infer")
@click.option("--dataset", "dataset_path", default=None, type=click.Path(exists=True))
@click.option("--spec", "spec_text", default=None, help="Single specification instead of a dataset.")
@click.option("--context", "context_csv", default="", help="Comma-separated signal names for --spec.")
@click.option("--library", "library_path", default=None, type=click.Path(exists=True),
              help="Tree library; omit for the plain no-rules generation mode.")
@click.option("--k", "k_trees", type=int, default=None, help="Trees to retrieve (default 3).")
@click.option("--k-traces", type=int, default=None, help="Traces to select (default 3).")
@click.option("--alpha", type=float, default=None, help="Operator/semantic weight (default 0.5).")
@click.option("--out", "out_path", default="predictions.jsonl", show_default=True)
@click.option("--provider", "provider_spec", default=None)
@click.option("--jobs", type=int, default=None, help="Items processed in parallel.")
@click.option("--log-dir", default=None, help="Run-log directory (manifest + LLM audit archive). [default: oprules-logs]")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
def infer_cmd(
    dataset_path, spec_text, context_csv, library_path, k_trees, k_traces,
    alpha, out_path, provider_spec, jobs, log_dir, config_path,
):
    """Generate assertions with retrieved correction rules."""
    if (dataset_path is None) == (spec_text is None):
        raise click.ClickException("provide exactly one of --dataset or --spec")
    config = _load_config(config_path)
    retrieval = RetrievalConfig(
        k_trees=_pick(k_trees, config, "retrieval", "k_trees", default=3),
        k_traces=_pick(k_traces, config, "retrieval", "k_traces", default=3),
        alpha=_pick(alpha, config, "retrieval", "alpha", default=0.5),
        similarity=_pick(None, config, "retrieval", "similarity", default="lexical"),
    )
    log_dir = _resolve_log_dir(log_dir, config)
    gateway = LlmGateway(
        _resolve_provider(provider_spec, config),
        archive_dir=Path(log_dir) / "llm",
    )
    trees: list = []
    if library_path:
        trees, errors = library_load(library_path)
        for err in errors:
            click.echo(f"warning: {library_path}: {err}", err=True)
    scorer = _resolve_similarity(retrieval.similarity, config, trees)
    if dataset_path:
        items = [
            (p.id, p.nl, p.design_context) for p in _load_pairs_or_fail(dataset_path)
        ]
    else:
        context = tuple((name.strip(), 1) for name in context_csv.split(",") if name.strip())
        items = [("spec-0", spec_text, context)]
    if jobs is None:
        # available parallelism, capped at the provider's concurrency limit
        jobs = min(os.cpu_count() or 1, 4)
    _write_manifest(
        log_dir, "infer",
        {
            "dataset": dataset_path, "spec": spec_text, "library": library_path,
            "k_trees": retrieval.k_trees, "k_traces": retrieval.k_traces,
            "alpha": retrieval.alpha, "out": out_path, "jobs": jobs,
        },
    )
    workers = max(1, jobs)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(
            pool.map(
                lambda item: infer(item[1], item[2], trees, retrieval, gateway, scorer=scorer),
                items,
            )
        )
    with open(out_path, "w", encoding="utf-8") as fh:
        for (item_id, _, _), result in zip(items, results):
            record = {"id": item_id} | result.to_dict()
            fh.write(json.dumps(record, sort_keys=True) + "\n")
            if spec_text is not None:
                click.echo(result.final_sva)
    click.echo(f"predictions: {out_path} ({len(items)} item(s))", err=bool(spec_text))


@cli.command("eval")
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True))
@click.option("--predictions", "predictions_path", required=True, type=click.Path(exists=True))
@click.option("--oracle", "oracle_name", type=click.Choice(["bounded", "external"]), default=None)
@click.option("--max-len", type=int, default=None)
@click.option("--baseline-report", default=None, type=click.Path(exists=True),
              help="Earlier report.json for the reduction table.")
@click.option("--out-dir", default=".", show_default=True)
@click.option("--log-dir", default=None, help="Run-log directory (manifest + LLM audit archive). [default: oprules-logs]")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
def eval_cmd(
    dataset_path, predictions_path, oracle_name, max_len, baseline_report,
    out_dir, log_dir, config_path,
):
    """Score predictions: BLEU, syntax, functionality, relaxed functionality."""
    config = _load_config(config_path)
    oracle = _resolve_oracle(oracle_name, config, max_len)
    pairs = _load_pairs_or_fail(dataset_path)
    predictions = {}
    with open(predictions_path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                record = json.loads(line)
                predictions[str(record["id"])] = record.get("final_sva", "")
    report = evaluate(pairs, predictions, oracle=oracle)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_report(report, out / "report.json", out / "report.csv")
    baseline = None
    if baseline_report:
        doc = json.loads(Path(baseline_report).read_text(encoding="utf-8"))
        baseline = {
            OperatorCategory(key): value for key, value in doc["taxonomy"].items()
        }
    rows = taxonomy_rows(report.taxonomy, baseline)
    write_taxonomy_csv(rows, out / "taxonomy.csv")
    _write_manifest(
        _resolve_log_dir(log_dir, config), "eval",
        {"dataset": dataset_path, "predictions": predictions_path,
         "baseline_report": baseline_report, "out_dir": out_dir},
    )
    click.echo(
        f"bleu {report.mean_bleu:.4f}  syn {report.mean_syn:.4f}  "
        f"func {report.mean_func:.4f}  r.func {report.mean_relaxed_func:.4f}  "
        f"skipped {report.skipped}"
    )
    for err in report.errors:
        click.echo(f"warning: {err}", err=True)


@cli.command("analyze")
@click.option("--report", "report_path", default=None, type=click.Path(exists=True))
@click.option("--baseline-report", default=None, type=click.Path(exists=True))
@click.option("--trainlog", "trainlog_path", default=None, type=click.Path(exists=True))
@click.option("--out-dir", default=".", show_default=True)
def analyze_cmd(report_path, baseline_report, trainlog_path, out_dir):
    """Failure-taxonomy and fixing-curve tables, ready for plotting."""
    if not report_path and not trainlog_path:
        raise click.ClickException("nothing to analyze: pass --report and/or --trainlog")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if report_path:
        doc = json.loads(Path(report_path).read_text(encoding="utf-8"))
        ours = {OperatorCategory(k): v for k, v in doc["taxonomy"].items()}
        baseline = None
        if baseline_report:
            base_doc = json.loads(Path(baseline_report).read_text(encoding="utf-8"))
            baseline = {OperatorCategory(k): v for k, v in base_doc["taxonomy"].items()}
        rows = taxonomy_rows(ours, baseline)
        write_taxonomy_csv(rows, out / "taxonomy.csv")
        for row in rows:
            line = f"{row['category']:22s} ours={row['ours']}"
            if baseline is not None:
                line += f" base={row['base']} red={row['reduction']}"
            click.echo(line)
    if trainlog_path:
        doc = json.loads(Path(trainlog_path).read_text(encoding="utf-8"))
        write_curve_csv(TrainLog.from_dict(doc), out / "fixing_curve.csv")
        click.echo(f"fixing curve: {out / 'fixing_curve.csv'}")


@cli.command("sample")
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True))
@click.option("--ratio", type=float, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True)
def sample_cmd(dataset_path, ratio, seed, out_path):
    """Operator-category stratified subsample of a dataset."""
    pairs = _load_pairs_or_fail(dataset_path)
    sampled = stratified_sample(pairs, ratio, seed=seed)
    save_dataset(out_path, sampled)
    click.echo(f"sampled {len(sampled)}/{len(pairs)} items -> {out_path}")


@cli.command("oracle-check")
@click.option("--a", "text_a", required=True, help="Golden/reference assertion.")
@click.option("--b", "text_b", required=True, help="Generated assertion.")
@click.option("--signals", "signals_csv", default="", help="Comma-separated signal universe.")
@click.option("--max-len", type=int, default=5, show_default=True)
def oracle_check_cmd(text_a, text_b, signals_csv, max_len):
    """Compare two assertions with the bounded-trace oracle."""
    ast_a = parse_sva(text_a)
    ast_b = parse_sva(text_b)
    signals = [s.strip() for s in signals_csv.split(",") if s.strip()] or None
    result = check_equivalence(ast_a, ast_b, signals=signals, max_len=max_len)
    click.echo(result.verdict.value)
    if result.counterexample is not None:
        click.echo(f"counterexample: {result.counterexample.render()}")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except (OprulesError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except Exception as exc:  # anything else is still a runtime failure
        click.echo(f"internal error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
