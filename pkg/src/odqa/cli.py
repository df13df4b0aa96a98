"""Command-line interface.

Each pipeline stage is runnable in isolation (index, search, augment,
plan-stages, answer, evaluate, stats, tune-mu) and `run` executes the whole
pipeline from a JSON config. Exit codes: 0 success, 1 usage error, 2 data
error, 3 reader/protocol error.
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

import click

from . import __version__
from .analysis import analyzer_for_lang
from .datasets import FORMATS, ingest_qa_dataset
from .errors import DataError, OdqaError, ReaderProtocolError
from .index.core import Index, IndexConfig
from .metrics import evaluate_run
from .pipeline import (
    RunConfig,
    build_index_from_corpus,
    make_reader,
    read_gold_file,
    read_predictions_file,
    read_retrieval_file,
    run_pipeline,
    write_gold_file,
    write_predictions_file,
    write_retrieval_file,
)
from .readers import FusionConfig, answer_question, tune_mu
from .supervision import (
    AugmentationConfig,
    Strategy,
    build_stage_plan,
    dataset_stats,
    generate_dataset,
    read_training_file,
    write_training_file,
)


def _parse_reader_spec(spec: str) -> dict:
    kind, sep, rest = spec.partition(":")
    if not sep or not rest:
        raise click.UsageError(
            f"bad reader spec {spec!r}; expected mock:TABLE.json, "
            "subprocess:COMMAND, or tcp:HOST:PORT"
        )
    if kind == "mock":
        return {"type": "mock", "table": rest}
    if kind == "subprocess":
        return {"type": "subprocess", "command": rest}
    if kind == "tcp":
        return {"type": "tcp", "address": rest}
    raise click.UsageError(f"unknown reader type {kind!r}")


def _parse_negatives(value: str):
    if value == "all":
        return "all"
    if value.startswith("ratio:"):
        try:
            d = int(value.split(":", 1)[1])
        except ValueError:
            d = 0
        if d >= 1:
            return d
    raise click.UsageError(f"bad negatives policy {value!r}; expected 'all' or 'ratio:D'")


@click.group()
@click.version_option(version=__version__, prog_name="odqa")
def cli():
    """Open-domain QA pipeline: index, retrieve, read, fuse, evaluate."""


@cli.command("index")
@click.option("--corpus", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--lang", type=click.Choice(["en", "zh"]), default="en", show_default=True)
@click.option("--k1", type=float, default=0.9, show_default=True)
@click.option("--b", type=float, default=0.4, show_default=True)
@click.option("--min-paragraph-chars", type=int, default=10, show_default=True)
def index_cmd(corpus, out_dir, lang, k1, b, min_paragraph_chars):
    """Build a paragraph-level BM25 index from a JSONL corpus."""
    config = IndexConfig(
        analyzer=analyzer_for_lang(lang), k1=k1, b=b, min_paragraph_chars=min_paragraph_chars
    )
    index = build_index_from_corpus(corpus, config)
    index.save(out_dir)
    click.echo(
        json.dumps(
            {
                "paragraphs": index.n,
                "terms": len(index.vocab),
                "avg_length": index.avg_length,
                "path": str(out_dir),
            }
        )
    )


@cli.command("search")
@click.option("--index", "index_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--query", required=True)
@click.option("--k", type=int, default=10, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
def search_cmd(index_dir, query, k, out_path):
    """Retrieve the top-k paragraphs for one query."""
    index = Index.open(index_dir)
    results = [
        {
            "doc_id": p.paragraph.doc_id,
            "para_id": p.paragraph.para_id,
            "rank": p.rank,
            "score": p.retriever_score,
            "text": p.paragraph.text,
        }
        for p in index.search(query, k)
    ]
    payload = json.dumps(results, ensure_ascii=False, indent=2)
    if out_path:
        Path(out_path).write_text(payload + "\n", encoding="utf-8")
    else:
        click.echo(payload)


@cli.command("augment")
@click.option("--index", "index_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--dataset", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(FORMATS), default="squad_v11", show_default=True)
@click.option("--lang", type=click.Choice(["en", "zh"]), default="en", show_default=True)
@click.option("--n", type=int, default=10, show_default=True)
@click.option("--negatives", default="all", show_default=True, help="'all', 'ratio:D', or 'none' for positives only")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--src-out", type=click.Path(dir_okay=False), default=None, help="also export the source dataset as SRC training rows")
def augment_cmd(index_dir, dataset, fmt, lang, n, negatives, out_path, src_out):
    """Generate a distantly-supervised training dataset."""
    positives_only = negatives == "none"
    policy = "all" if positives_only else _parse_negatives(negatives)
    index = Index.open(index_dir)
    qa_examples, _, src_rows = ingest_qa_dataset(dataset, format=fmt, lang=lang)
    config = AugmentationConfig(n=n, negatives=policy, lang=lang)
    examples = generate_dataset(qa_examples, index, config)
    if positives_only:
        examples = [ex for ex in examples if not ex.is_negative]
    write_training_file(examples, out_path)
    if src_out:
        write_training_file(src_rows, src_out)
    click.echo(json.dumps(dataset_stats(examples)))


@cli.command("plan-stages")
@click.option("--strategy", required=True, type=click.Choice([s.value for s in Strategy]))
@click.option("--src", "src_files", multiple=True, type=click.Path(dir_okay=False))
@click.option("--ds", "ds_files", multiple=True, type=click.Path(dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def plan_stages_cmd(strategy, src_files, ds_files, out_path):
    """Write a stage-wise fine-tuning manifest."""
    try:
        manifest = build_stage_plan(strategy, list(src_files), list(ds_files))
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    manifest.write(out_path)
    click.echo(json.dumps(manifest.to_dict()))


@cli.command("answer")
@click.option("--index", "index_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--dataset", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(FORMATS), default="squad_v11", show_default=True)
@click.option("--lang", type=click.Choice(["en", "zh"]), default="en", show_default=True)
@click.option("--reader", "reader_spec", required=True, help="mock:TABLE.json | subprocess:COMMAND | tcp:HOST:PORT")
@click.option("--k", type=int, default=100, show_default=True)
@click.option("--mu", type=float, required=True)
@click.option("--top-m", type=int, default=1, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--retrieval-out", type=click.Path(dir_okay=False), default=None)
@click.option("--gold-out", type=click.Path(dir_okay=False), default=None)
def answer_cmd(index_dir, dataset, fmt, lang, reader_spec, k, mu, top_m, out_path, retrieval_out, gold_out):
    """Answer a QA dataset end to end and write predictions."""
    index = Index.open(index_dir)
    qa_examples, golds, _ = ingest_qa_dataset(dataset, format=fmt, lang=lang)
    fusion = FusionConfig(mu=mu)
    reader = make_reader(_parse_reader_spec(reader_spec))
    predictions = {}
    retrieved = {}
    try:
        for qa in qa_examples:
            passages = index.search(qa.question, k)
            retrieved[qa.question_id] = passages
            candidates = answer_question(qa, passages, reader, fusion, top_m=top_m)
            predictions[qa.question_id] = candidates[0].span_text if candidates else ""
    finally:
        reader.close()
    write_predictions_file(predictions, out_path)
    if retrieval_out:
        write_retrieval_file(retrieved, retrieval_out, order=[qa.question_id for qa in qa_examples])
    if gold_out:
        write_gold_file(golds, gold_out)
    click.echo(json.dumps({"questions": len(qa_examples), "predictions": str(out_path)}))


@cli.command("evaluate")
@click.option("--predictions", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--gold", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--retrieval", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--mu", type=float, default=0.0, show_default=True)
@click.option("--k", type=int, default=100, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def evaluate_cmd(predictions, gold, retrieval, mu, k, out_path):
    """Score predictions against gold answers and write a report."""
    report = evaluate_run(
        read_predictions_file(predictions),
        read_gold_file(gold),
        read_retrieval_file(retrieval),
        mu=mu,
        k=k,
    )
    report.write(out_path)
    click.echo(
        json.dumps({"em": report.em, "f1": report.f1, "recall": report.recall, "n": report.num_questions})
    )


@cli.command("stats")
@click.option("--dataset", required=True, type=click.Path(exists=True, dir_okay=False))
def stats_cmd(dataset):
    """Count positives/negatives in a training JSONL file."""
    click.echo(json.dumps(dataset_stats(read_training_file(dataset))))


@cli.command("tune-mu")
@click.option("--index", "index_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--dataset", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(FORMATS), default="squad_v11", show_default=True)
@click.option("--lang", type=click.Choice(["en", "zh"]), default="en", show_default=True)
@click.option("--reader", "reader_spec", required=True)
@click.option("--k", type=int, default=100, show_default=True)
@click.option("--grid-step", type=float, default=0.1, show_default=True)
@click.option("--sample", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=13, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
def tune_mu_cmd(index_dir, dataset, fmt, lang, reader_spec, k, grid_step, sample, seed, out_path):
    """Grid-search the fusion weight by end-to-end EM."""
    index = Index.open(index_dir)
    qa_examples, _, _ = ingest_qa_dataset(dataset, format=fmt, lang=lang)
    rng = random.Random(seed)
    if len(qa_examples) > sample:
        qa_examples = rng.sample(qa_examples, sample)
    reader = make_reader(_parse_reader_spec(reader_spec))
    try:
        mu_star, table = tune_mu(qa_examples, index, reader, k, grid_step)
    finally:
        reader.close()
    payload = {"mu_star": mu_star, "seed": seed, "sample": len(qa_examples), "table": table}
    if out_path:
        Path(out_path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    click.echo(json.dumps(payload))


@cli.command("run")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--output-dir", default=None, help="override the config's output_dir")
def run_cmd(config_path, output_dir):
    """Run the full pipeline from a JSON config file."""
    try:
        doc = json.loads(Path(config_path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"bad run config {config_path}: {exc}") from exc
    if output_dir:
        doc["output_dir"] = output_dir
    config = RunConfig.from_dict(doc)
    report = run_pipeline(config)
    click.echo(
        json.dumps(
            {
                "em": report.em,
                "f1": report.f1,
                "recall": report.recall,
                "mu": report.mu,
                "n": report.num_questions,
                "output_dir": config.output_dir,
            }
        )
    )


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show(file=sys.stderr)
        return 1
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return 1
    except (click.Abort, ValueError) as exc:
        click.echo(f"error: {exc}" if str(exc) else "Aborted.", err=True)
        return 1
    except ReaderProtocolError as exc:
        click.echo(f"reader error: {exc}", err=True)
        return 3
    except (DataError, OdqaError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
