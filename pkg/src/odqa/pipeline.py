"""End-to-end runs: build/open an index, retrieve, read, fuse, evaluate.

Every artifact (gold sets, retrieval results, predictions, reports, DS
datasets, stage manifests) is written deterministically, and the run
manifest records the effective config plus a sha256 per artifact, so
re-running an identical config yields byte-identical outputs.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .analysis import analyzer_for_lang
from .datasets import ingest_qa_dataset
from .errors import DataError
from .index.core import FORMAT_VERSION, Index, IndexBuilder, IndexConfig, Paragraph, RetrievedPassage
from .metrics import EvalReport, GoldAnswerSet, evaluate_run
from .readers import FusionConfig, MockReader, ProtocolReader, answer_question, tune_mu
from .supervision import (
    AugmentationConfig,
    build_stage_plan,
    dataset_stats,
    generate_dataset,
    write_training_file,
)


@dataclass
class RunConfig:
    index_path: str
    output_dir: str
    dataset_paths: list[str]
    reader: dict
    corpus_path: str | None = None
    dataset_format: str = "squad_v11"
    lang: str = "en"
    k: int = 100
    n: int = 10
    negatives: str | int = "all"
    mu: float | str = 0.5
    top_m: int = 1
    k1: float = 0.9
    b: float = 0.4
    min_paragraph_chars: int = 10
    augment: bool = False
    stage_strategies: list[str] = field(default_factory=list)
    tune_grid_step: float = 0.1
    tune_sample: int = 1000
    tune_seed: int = 13

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not isinstance(self.reader, dict) or "type" not in self.reader:
            raise ValueError("reader must be an object with a 'type' key")
        if isinstance(self.mu, str) and self.mu != "tune":
            raise ValueError(f"mu must be a number or 'tune', got {self.mu!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise DataError(f"unknown run config keys: {sorted(unknown)}")
        try:
            return cls(**d)
        except (TypeError, ValueError) as exc:
            raise DataError(f"bad run config: {exc}") from exc

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


def make_reader(spec: dict):
    kind = spec.get("type")
    if kind == "mock":
        if not spec.get("table"):
            raise DataError("mock reader requires a 'table' path")
        return MockReader.from_json(spec["table"])
    if kind == "subprocess":
        if not spec.get("command"):
            raise DataError("subprocess reader requires a 'command'")
        return ProtocolReader.subprocess(
            spec["command"], timeout=spec.get("timeout", 30.0)
        )
    if kind == "tcp":
        if not spec.get("address"):
            raise DataError("tcp reader requires an 'address' (HOST:PORT)")
        return ProtocolReader.tcp(spec["address"], timeout=spec.get("timeout", 30.0))
    raise DataError(f"unknown reader type {kind!r} (expected mock, subprocess, or tcp)")


@contextmanager
def _exclusive_output_dir(path: Path):
    path.mkdir(parents=True, exist_ok=True)
    lock = path / ".lock"
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise DataError(
            f"output directory {path} is locked by another run (stale? remove {lock})"
        ) from None
    try:
        os.close(fd)
        yield path
    finally:
        lock.unlink(missing_ok=True)


def write_gold_file(golds, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for g in golds:
            row = {"question_id": g.question_id, "answers": list(g.answers), "lang": g.lang}
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


def read_gold_file(path) -> list[GoldAnswerSet]:
    golds = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                golds.append(
                    GoldAnswerSet(row["question_id"], tuple(row["answers"]), row["lang"])
                )
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise DataError(f"{path}:{lineno}: bad gold row: {exc}") from exc
    return golds


def write_retrieval_file(results: dict, path, order=None) -> None:
    """results: question_id -> list of RetrievedPassage."""
    ids = order if order is not None else sorted(results)
    with open(path, "w", encoding="utf-8") as fh:
        for qid in ids:
            row = {
                "question_id": qid,
                "passages": [
                    {
                        "doc_id": p.paragraph.doc_id,
                        "para_id": p.paragraph.para_id,
                        "rank": p.rank,
                        "score": p.retriever_score,
                        "text": p.paragraph.text,
                    }
                    for p in results[qid]
                ],
            }
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


def read_retrieval_file(path) -> dict:
    results: dict = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                results[row["question_id"]] = [
                    RetrievedPassage(
                        Paragraph(p["doc_id"], p["para_id"], p["text"]),
                        p["score"],
                        p["rank"],
                    )
                    for p in row["passages"]
                ]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise DataError(f"{path}:{lineno}: bad retrieval row: {exc}") from exc
    return results


def write_predictions_file(predictions: dict, path) -> None:
    ordered = {qid: predictions[qid] for qid in sorted(predictions)}
    Path(path).write_text(
        json.dumps(ordered, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )


def read_predictions_file(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"bad predictions file {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise DataError(f"predictions file {path} must be a JSON object")
    return doc


def load_or_build_index(config: RunConfig) -> Index:
    index_path = Path(config.index_path)
    if (index_path / "meta.json").is_file():
        return Index.open(index_path)
    if not config.corpus_path:
        raise DataError(
            f"no index at {index_path} and no corpus_path to build one from"
        )
    index_config = IndexConfig(
        analyzer=analyzer_for_lang(config.lang),
        k1=config.k1,
        b=config.b,
        min_paragraph_chars=config.min_paragraph_chars,
    )
    index = build_index_from_corpus(config.corpus_path, index_config)
    index.save(index_path)
    return index


def build_index_from_corpus(corpus_path, index_config: IndexConfig) -> Index:
    """Corpus format: JSONL, one {"id": ..., "contents": ...} per document."""
    builder = IndexBuilder(index_config)
    with open(corpus_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
                builder.add_document(str(doc["id"]), doc["contents"])
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise DataError(f"{corpus_path}:{lineno}: bad corpus document: {exc}") from exc
    return builder.finalize()


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def run_pipeline(config: RunConfig) -> EvalReport:
    out = Path(config.output_dir)
    with _exclusive_output_dir(out):
        index = load_or_build_index(config)

        qa_examples: list = []
        golds: list = []
        src_rows: list = []
        for dataset_path in config.dataset_paths:
            qas, gs, rows = ingest_qa_dataset(
                dataset_path, format=config.dataset_format, lang=config.lang
            )
            qa_examples.extend(qas)
            golds.extend(gs)
            src_rows.extend(rows)
        seen = set()
        for g in golds:
            if g.question_id in seen:
                raise DataError(f"duplicate question id across datasets: {g.question_id!r}")
            seen.add(g.question_id)

        write_gold_file(golds, out / "gold.jsonl")
        write_training_file(src_rows, out / "src.jsonl")

        retrieved = {qa.question_id: index.search(qa.question, config.k) for qa in qa_examples}
        write_retrieval_file(
            retrieved, out / "retrieval.jsonl", order=[qa.question_id for qa in qa_examples]
        )

        if config.augment:
            aug = AugmentationConfig(n=config.n, negatives=config.negatives, lang=config.lang)
            ds_rows = generate_dataset(qa_examples, index, aug)
            write_training_file(ds_rows, out / "ds.jsonl")
            (out / "ds_stats.json").write_text(
                json.dumps(dataset_stats(ds_rows), indent=2) + "\n", encoding="utf-8"
            )

        for strategy in config.stage_strategies:
            manifest = build_stage_plan(strategy, [str(out / "src.jsonl")], [str(out / "ds.jsonl")])
            manifest.write(out / f"stages_{manifest.strategy.value}.json")

        reader = make_reader(config.reader)
        try:
            mu = config.mu
            if mu == "tune":
                rng = random.Random(config.tune_seed)
                sample = (
                    rng.sample(qa_examples, config.tune_sample)
                    if len(qa_examples) > config.tune_sample
                    else list(qa_examples)
                )
                mu, table = tune_mu(sample, index, reader, config.k, config.tune_grid_step)
                (out / "tune.json").write_text(
                    json.dumps(
                        {"mu_star": mu, "seed": config.tune_seed, "sample": len(sample), "table": table},
                        indent=2,
                    )
                    + "\n",
                    encoding="utf-8",
                )
            fusion = FusionConfig(mu=float(mu))

            predictions: dict = {}
            answers_rows = []
            for qa in qa_examples:
                candidates = answer_question(
                    qa, retrieved[qa.question_id], reader, fusion, top_m=config.top_m
                )
                predictions[qa.question_id] = candidates[0].span_text if candidates else ""
                answers_rows.append(
                    {
                        "question_id": qa.question_id,
                        "candidates": [
                            {
                                "doc_id": c.paragraph.doc_id,
                                "para_id": c.paragraph.para_id,
                                "span_text": c.span_text,
                                "retriever_score": c.retriever_score,
                                "reader_score": c.reader_score,
                                "fused_score": c.fused_score,
                            }
                            for c in candidates
                        ],
                    }
                )
        finally:
            reader.close()

        write_predictions_file(predictions, out / "predictions.json")
        with open(out / "answers.jsonl", "w", encoding="utf-8") as fh:
            for row in answers_rows:
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")

        report = evaluate_run(predictions, golds, retrieved, mu=float(mu), k=config.k)
        report.write(out / "report.json")

        effective = config.to_dict()
        effective["mu"] = float(mu)
        artifact_names = sorted(
            p.name for p in out.iterdir() if p.is_file() and p.name not in (".lock", "run_manifest.json")
        )
        manifest = {
            "package": "odqa",
            "version": __version__,
            "index_format_version": FORMAT_VERSION,
            "config": effective,
            "artifacts": {name: _sha256(out / name) for name in artifact_names},
        }
        (out / "run_manifest.json").write_text(
            json.dumps(manifest, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )
        return report
