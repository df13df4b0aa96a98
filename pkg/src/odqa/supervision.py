"""Distant supervision: mine positive/negative training examples and plan
stage-wise fine-tuning curricula.

For each source question, the top-n retrieved paragraphs are partitioned by
whether any acceptable answer string occurs in them (token-boundary,
case-insensitive matching for English; exact substring for Chinese).
Matching paragraphs become positive examples with the earliest span;
non-matching ones become negatives according to the configured policy.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Union

from .analysis import tokenize_english
from .errors import DataError
from .index.core import Index, Paragraph

# Negative sampling policy: "all" emits every non-matching candidate; an
# integer d emits the d lowest-rank non-matching candidates per positive.
NegativePolicy = Union[str, int]


@dataclass(frozen=True, slots=True)
class QaExample:
    question_id: str
    question: str
    answers: tuple[str, ...]
    lang: str = "en"

    def __post_init__(self):
        if not self.answers:
            raise ValueError(f"question {self.question_id!r} has no answers")
        if not self.question:
            raise ValueError(f"question {self.question_id!r} has empty text")


@dataclass(frozen=True, slots=True)
class AugmentationConfig:
    n: int = 10
    negatives: NegativePolicy = "all"
    lang: str = "en"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.negatives != "all" and (not isinstance(self.negatives, int) or self.negatives < 1):
            raise ValueError(f"negatives must be 'all' or a positive int, got {self.negatives!r}")


@dataclass(frozen=True, slots=True)
class TrainingExample:
    question_id: str
    question: str
    paragraph: Paragraph
    answer_text: Optional[str]
    answer_start_char: Optional[int]
    is_negative: bool
    retriever_rank: int
    retriever_score: float

    def to_json_dict(self) -> dict:
        row = {
            "question_id": self.question_id,
            "question": self.question,
            "paragraph": {
                "doc_id": self.paragraph.doc_id,
                "para_id": self.paragraph.para_id,
                "text": self.paragraph.text,
            },
        }
        if not self.is_negative:
            row["answer_text"] = self.answer_text
            row["answer_start_char"] = self.answer_start_char
        row["is_negative"] = self.is_negative
        row["retriever_rank"] = self.retriever_rank
        row["retriever_score"] = self.retriever_score
        return row

    @classmethod
    def from_json_dict(cls, row: dict) -> "TrainingExample":
        para = row["paragraph"]
        return cls(
            question_id=row["question_id"],
            question=row["question"],
            paragraph=Paragraph(para["doc_id"], para["para_id"], para["text"]),
            answer_text=row.get("answer_text"),
            answer_start_char=row.get("answer_start_char"),
            is_negative=row["is_negative"],
            retriever_rank=row["retriever_rank"],
            retriever_score=row["retriever_score"],
        )


def find_answer_span(
    paragraph_text: str, answers, lang: str
) -> Optional[tuple[int, str]]:
    """Earliest occurrence of any answer; None when no answer occurs.

    English matches case-insensitively and only at token boundaries of the
    paragraph, so 'par' does not match inside 'Comparison'. Chinese matches
    exact substrings. Among matches starting at the same offset the longest
    wins. Returns (start_char, matched_text) with the paragraph's own text.
    """
    if not answers:
        raise ValueError("answers must be non-empty")
    best: Optional[tuple[int, int]] = None  # (start, end)
    if lang == "zh":
        for answer in answers:
            if not answer:
                continue
            start = paragraph_text.find(answer)
            if start < 0:
                continue
            end = start + len(answer)
            if best is None or (start, -end) < (best[0], -best[1]):
                best = (start, end)
    elif lang == "en":
        tokens = tokenize_english(paragraph_text)
        starts = {t.start_char for t in tokens}
        ends = {t.end_char for t in tokens}
        for answer in answers:
            if not answer:
                continue
            for m in re.finditer(re.escape(answer), paragraph_text, re.IGNORECASE):
                if m.start() in starts and m.end() in ends:
                    if best is None or (m.start(), -m.end()) < (best[0], -best[1]):
                        best = (m.start(), m.end())
                    break  # later matches of this answer cannot improve
    else:
        raise ValueError(f"unsupported language: {lang!r}")
    if best is None:
        return None
    return best[0], paragraph_text[best[0] : best[1]]


def generate_dataset(
    source, index: Index, config: AugmentationConfig
) -> list[TrainingExample]:
    """Mine training examples from the top-n candidates of each question.

    Questions whose candidates contain no answer contribute nothing (no
    orphan negatives). Output is sorted by (question_id, retriever_rank) so
    per-question parallelism would be unobservable.
    """
    examples: list[TrainingExample] = []
    for qa in source:
        hits = index.search(qa.question, config.n)
        positives = []
        negative_pool = []
        for hit in hits:
            span = find_answer_span(hit.paragraph.text, qa.answers, config.lang)
            if span is not None:
                positives.append((hit, span))
            else:
                negative_pool.append(hit)
        if not positives:
            continue
        for hit, (start, matched) in positives:
            examples.append(
                TrainingExample(
                    question_id=qa.question_id,
                    question=qa.question,
                    paragraph=hit.paragraph,
                    answer_text=matched,
                    answer_start_char=start,
                    is_negative=False,
                    retriever_rank=hit.rank,
                    retriever_score=hit.retriever_score,
                )
            )
        if config.negatives == "all":
            chosen = negative_pool
        else:
            # Pool is rank-ascending, so this takes the hardest negatives.
            chosen = negative_pool[: config.negatives * len(positives)]
        for hit in chosen:
            examples.append(
                TrainingExample(
                    question_id=qa.question_id,
                    question=qa.question,
                    paragraph=hit.paragraph,
                    answer_text=None,
                    answer_start_char=None,
                    is_negative=True,
                    retriever_rank=hit.rank,
                    retriever_score=hit.retriever_score,
                )
            )
    examples.sort(key=lambda ex: (ex.question_id, ex.retriever_rank))
    return examples


def dataset_stats(examples) -> dict:
    positives = sum(1 for ex in examples if not ex.is_negative)
    negatives = sum(1 for ex in examples if ex.is_negative)
    return {
        "positives": positives,
        "negatives": negatives,
        "total": positives + negatives,
        "questions_with_positive": len(
            {ex.question_id for ex in examples if not ex.is_negative}
        ),
    }


def write_training_file(examples, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(json.dumps(ex.to_json_dict(), ensure_ascii=False) + "\n")


def read_training_file(path) -> list[TrainingExample]:
    examples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                examples.append(TrainingExample.from_json_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise DataError(f"{path}:{lineno}: bad training example: {exc}") from exc
    return examples


class Strategy(str, Enum):
    MIXED = "mixed"
    DS_THEN_SRC = "ds_then_src"
    SRC_THEN_DS = "src_then_ds"
    DS_ONLY = "ds_only"
    SRC_ONLY = "src_only"


@dataclass(frozen=True, slots=True)
class Stage:
    name: str
    files: tuple[str, ...]
    shuffle: bool = True


@dataclass(frozen=True, slots=True)
class StageManifest:
    strategy: Strategy
    stages: tuple[Stage, ...]

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy.value,
            "stages": [
                {"name": s.name, "files": list(s.files), "shuffle": s.shuffle}
                for s in self.stages
            ],
        }

    def write(self, path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), ensure_ascii=False, indent=2) + "\n",
            encoding="utf-8",
        )

    @classmethod
    def from_dict(cls, d: dict) -> "StageManifest":
        return cls(
            strategy=Strategy(d["strategy"]),
            stages=tuple(
                Stage(s["name"], tuple(s["files"]), s["shuffle"]) for s in d["stages"]
            ),
        )

    @classmethod
    def read(cls, path) -> "StageManifest":
        try:
            return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise DataError(f"bad stage manifest {path}: {exc}") from exc


def build_stage_plan(strategy, src_files, ds_files) -> StageManifest:
    """Order training datasets into stages for one fine-tuning strategy.

    Mixed trains one stage on everything shuffled together; the two-stage
    strategies train strictly in the given order, each stage shuffled.
    """
    strategy = Strategy(strategy)
    src_files = tuple(str(p) for p in src_files)
    ds_files = tuple(str(p) for p in ds_files)

    def require(files: tuple[str, ...], name: str) -> tuple[str, ...]:
        if not files:
            raise ValueError(f"strategy {strategy.value!r} references {name} files but none were given")
        return files

    if strategy is Strategy.MIXED:
        stages = (Stage("mixed", require(src_files, "src") + require(ds_files, "ds")),)
    elif strategy is Strategy.DS_THEN_SRC:
        stages = (Stage("ds", require(ds_files, "ds")), Stage("src", require(src_files, "src")))
    elif strategy is Strategy.SRC_THEN_DS:
        stages = (Stage("src", require(src_files, "src")), Stage("ds", require(ds_files, "ds")))
    elif strategy is Strategy.DS_ONLY:
        stages = (Stage("ds", require(ds_files, "ds")),)
    else:
        stages = (Stage("src", require(src_files, "src")),)
    return StageManifest(strategy=strategy, stages=stages)
