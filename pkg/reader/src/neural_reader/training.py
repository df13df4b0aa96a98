"""Stage-wise fine-tuning from stage manifests.

A manifest orders training stages; each stage concatenates its JSONL files,
shuffles them with a seeded RNG, and fine-tunes starting from the previous
stage's weights. Negative examples (is_negative=true) are encoded per
negative_target: pointed at the [CLS] sentinel (null_span) or dropped
(skip). A per-stage checkpoint and a training log are written under the
output directory.
"""

import json
import random
from dataclasses import dataclass
from pathlib import Path

import torch
from torch.optim import AdamW

from .modeling import load


class TrainingDataError(Exception):
    """Unreadable manifest/files or invalid training rows."""


@dataclass
class TrainerConfig:
    base_model: str
    max_sequence_tokens: int = 384
    learning_rate: float = 3e-5
    epochs_per_stage: int = 2
    negative_target: str = "null_span"  # or "skip"
    batch_size: int = 8
    seed: int = 13

    def __post_init__(self):
        if self.max_sequence_tokens < 1:
            raise ValueError("max_sequence_tokens must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.negative_target not in ("null_span", "skip"):
            raise ValueError(f"unknown negative_target {self.negative_target!r}")


def load_manifest(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        stages = doc["stages"]
        for stage in stages:
            stage["name"], stage["files"], stage["shuffle"]
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise TrainingDataError(f"bad stage manifest {path}: {exc}") from exc
    if not stages:
        raise TrainingDataError(f"stage manifest {path} has no stages")
    return doc


def load_rows(files) -> list[dict]:
    """Read TrainingExample JSONL rows, tagging each with its source."""
    rows = []
    for file_path in files:
        try:
            with open(file_path, encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, start=1):
                    if not line.strip():
                        continue
                    try:
                        row = json.loads(line)
                        where = f"{file_path}:{lineno}"
                        validate_row(row, where)
                    except json.JSONDecodeError as exc:
                        raise TrainingDataError(f"{file_path}:{lineno}: bad JSON: {exc}") from exc
                    row["_source"] = str(file_path)
                    row["_where"] = where
                    rows.append(row)
        except OSError as exc:
            raise TrainingDataError(f"cannot read training file {file_path}: {exc}") from exc
    return rows


def validate_row(row: dict, where: str) -> None:
    try:
        text = row["paragraph"]["text"]
        question = row["question"]
        negative = row["is_negative"]
    except (KeyError, TypeError) as exc:
        raise TrainingDataError(f"{where}: missing field {exc}") from exc
    if not isinstance(question, str) or not isinstance(text, str):
        raise TrainingDataError(f"{where}: question and paragraph text must be strings")
    if negative:
        return
    answer = row.get("answer_text")
    start = row.get("answer_start_char")
    if answer is None or start is None:
        raise TrainingDataError(f"{where}: positive example without answer span")
    if not (0 <= start and start + len(answer) <= len(text)):
        raise TrainingDataError(
            f"{where}: span [{start}, {start + len(answer)}) out of bounds "
            f"for paragraph of length {len(text)}"
        )


def encode_rows(rows, tokenizer, config: TrainerConfig):
    """Tokenize rows into padded tensors with start/end position targets.

    Negatives (and spans that fall outside the truncated window) target the
    [CLS] index under null_span; under skip, negatives are dropped.
    """
    kept = [r for r in rows if not (r["is_negative"] and config.negative_target == "skip")]
    if not kept:
        raise TrainingDataError("no training examples left after negative filtering")
    enc = tokenizer(
        [r["question"] for r in kept],
        [r["paragraph"]["text"] for r in kept],
        truncation="only_second",
        max_length=config.max_sequence_tokens,
        padding="max_length",
        return_offsets_mapping=True,
        return_tensors="pt",
    )
    starts, ends, truncated = [], [], 0
    for i, row in enumerate(kept):
        if row["is_negative"]:
            starts.append(0)
            ends.append(0)
            continue
        span_start = row["answer_start_char"]
        span_end = span_start + len(row["answer_text"])
        seq_ids = enc.sequence_ids(i)
        offsets = enc["offset_mapping"][i].tolist()
        start_tok = end_tok = None
        for tok, (sid, (a, b)) in enumerate(zip(seq_ids, offsets)):
            if sid != 1 or a == b:
                continue
            if a <= span_start < b:
                start_tok = tok
            if a < span_end <= b:
                end_tok = tok
        if start_tok is None or end_tok is None:
            truncated += 1
            starts.append(0)
            ends.append(0)
        else:
            starts.append(start_tok)
            ends.append(end_tok)
    features = {
        k: v for k, v in enc.items() if k != "offset_mapping"
    }
    features["start_positions"] = torch.tensor(starts, dtype=torch.long)
    features["end_positions"] = torch.tensor(ends, dtype=torch.long)
    return features, len(kept), truncated


def train(manifest_path, config: TrainerConfig, out_dir) -> dict:
    """Run every stage in manifest order; returns the training log."""
    manifest = load_manifest(manifest_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    torch.manual_seed(config.seed)
    model, tokenizer = load(config.base_model)
    model.train()

    log = {"manifest": str(manifest_path), "strategy": manifest.get("strategy"), "stages": []}
    for stage_index, stage in enumerate(manifest["stages"]):
        rows = load_rows(stage["files"])
        if stage["shuffle"]:
            random.Random(config.seed + stage_index).shuffle(rows)
        features, n_examples, truncated = encode_rows(rows, tokenizer, config)

        optimizer = AdamW(model.parameters(), lr=config.learning_rate)
        epoch_losses = []
        for _epoch in range(config.epochs_per_stage):
            total, batches = 0.0, 0
            for lo in range(0, n_examples, config.batch_size):
                hi = min(lo + config.batch_size, n_examples)
                batch = {k: v[lo:hi] for k, v in features.items()}
                optimizer.zero_grad()
                loss = model(**batch).loss
                loss.backward()
                optimizer.step()
                total += float(loss.detach())
                batches += 1
            epoch_losses.append(total / batches)

        checkpoint = out / f"stage_{stage_index:02d}_{stage['name']}"
        model.save_pretrained(checkpoint)
        tokenizer.save_pretrained(checkpoint)
        sources = [
            r["_source"] for r in rows
            if not (r["is_negative"] and config.negative_target == "skip")
        ]
        log["stages"].append(
            {
                "index": stage_index,
                "name": stage["name"],
                "files": list(stage["files"]),
                "examples": n_examples,
                "truncated_spans": truncated,
                "epoch_losses": epoch_losses,
                "checkpoint": str(checkpoint),
                "example_sources": sources,
            }
        )
        print(
            f"stage {stage_index} ({stage['name']}): {n_examples} examples, "
            f"losses {['%.4f' % x for x in epoch_losses]}"
        )

    (out / "training_log.json").write_text(
        json.dumps(log, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    return log
