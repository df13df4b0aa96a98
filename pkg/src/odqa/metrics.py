"""Exact match, token-level F1, and retrieval recall.

EM and F1 follow the de-facto SQuAD v1.1 scheme via normalize_answer;
Chinese F1 is computed over characters of the normalized strings. Recall is
the fraction of questions whose answer occurs in any retrieved paragraph,
using the same match predicate as distant supervision.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .analysis import normalize_answer
from .errors import DataError
from .supervision import find_answer_span

# Recorded in reports so published numbers can be compared knowingly.
MATCH_PREDICATE = "case-insensitive token-boundary (en) / exact substring (zh)"
NORMALIZATION = "squad-v1.1 scheme, unicode punctuation; zh strips all whitespace"


@dataclass(frozen=True, slots=True)
class GoldAnswerSet:
    question_id: str
    answers: tuple[str, ...]
    lang: str = "en"

    def __post_init__(self):
        if not self.answers:
            raise ValueError(f"gold set {self.question_id!r} has no answers")


def _tokens(normalized: str, lang: str) -> list[str]:
    return list(normalized) if lang == "zh" else normalized.split()


def exact_match(prediction: str, gold: GoldAnswerSet) -> int:
    pred = normalize_answer(prediction, gold.lang)
    return int(any(pred == normalize_answer(a, gold.lang) for a in gold.answers))


def token_f1(prediction: str, gold: GoldAnswerSet) -> float:
    """Best token-multiset F1 of the prediction against any gold answer."""
    pred_tokens = _tokens(normalize_answer(prediction, gold.lang), gold.lang)
    best = 0.0
    for answer in gold.answers:
        gold_tokens = _tokens(normalize_answer(answer, gold.lang), gold.lang)
        if not pred_tokens and not gold_tokens:
            best = 1.0
            break
        overlap = sum((Counter(pred_tokens) & Counter(gold_tokens)).values())
        if overlap == 0:
            continue
        precision = overlap / len(pred_tokens)
        recall = overlap / len(gold_tokens)
        best = max(best, 2 * precision * recall / (precision + recall))
    return best


def answer_in_passages(gold: GoldAnswerSet, passages) -> bool:
    return any(
        find_answer_span(p.paragraph.text, gold.answers, gold.lang) is not None
        for p in passages
    )


def retrieval_recall(questions, retrieved: dict) -> float:
    """Fraction of questions whose answer appears in any retrieved paragraph."""
    if not questions:
        return 0.0
    hits = 0
    for gold in questions:
        if gold.question_id not in retrieved:
            raise DataError(f"no retrieval results for question {gold.question_id!r}")
        hits += answer_in_passages(gold, retrieved[gold.question_id])
    return hits / len(questions)


@dataclass(frozen=True, slots=True)
class EvalReport:
    em: float
    f1: float
    recall: float
    num_questions: int
    mu: float
    k: int
    per_question: tuple[dict, ...]

    def to_dict(self) -> dict:
        return {
            "em": self.em,
            "f1": self.f1,
            "recall": self.recall,
            "num_questions": self.num_questions,
            "mu": self.mu,
            "k": self.k,
            "metadata": {
                "match_predicate": MATCH_PREDICATE,
                "normalization": NORMALIZATION,
            },
            "per_question": list(self.per_question),
        }

    def to_json(self) -> str:
        return _render_json(self.to_dict())

    def write(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")


def _render_json(obj) -> str:
    """Deterministic JSON with every float rendered to 6 decimal places."""
    parts: list[str] = []

    def emit(value):
        if isinstance(value, bool):
            parts.append("true" if value else "false")
        elif isinstance(value, float):
            parts.append(f"{value:.6f}")
        elif isinstance(value, int):
            parts.append(str(value))
        elif isinstance(value, str):
            parts.append(json.dumps(value, ensure_ascii=False))
        elif value is None:
            parts.append("null")
        elif isinstance(value, dict):
            parts.append("{")
            for i, (key, item) in enumerate(value.items()):
                if i:
                    parts.append(", ")
                parts.append(json.dumps(str(key), ensure_ascii=False) + ": ")
                emit(item)
            parts.append("}")
        elif isinstance(value, (list, tuple)):
            parts.append("[")
            for i, item in enumerate(value):
                if i:
                    parts.append(", ")
                emit(item)
            parts.append("]")
        else:
            raise TypeError(f"cannot render {type(value).__name__} in report JSON")

    emit(obj)
    return "".join(parts)


def evaluate_run(
    predictions: dict, golds, retrieved: dict, mu: float, k: int
) -> EvalReport:
    """Score a run: per-question EM/F1, retrieval recall, unweighted means.

    Questions missing from `predictions` score 0 and are flagged, so partial
    runs stay measurable. Duplicate question ids are rejected.
    """
    seen: set[str] = set()
    rows = []
    for gold in golds:
        if gold.question_id in seen:
            raise DataError(f"duplicate question id {gold.question_id!r}")
        seen.add(gold.question_id)
        if gold.question_id not in retrieved:
            raise DataError(f"no retrieval results for question {gold.question_id!r}")
        missing = gold.question_id not in predictions
        prediction = predictions.get(gold.question_id, "")
        rows.append(
            {
                "question_id": gold.question_id,
                "prediction": prediction,
                "em": float(exact_match(prediction, gold)),
                "f1": token_f1(prediction, gold),
                "answer_found_in_retrieval": answer_in_passages(
                    gold, retrieved[gold.question_id]
                ),
                "missing_prediction": missing,
            }
        )
    rows.sort(key=lambda r: r["question_id"])
    n = len(rows)
    return EvalReport(
        em=math.fsum(r["em"] for r in rows) / n if n else 0.0,
        f1=math.fsum(r["f1"] for r in rows) / n if n else 0.0,
        recall=math.fsum(float(r["answer_found_in_retrieval"]) for r in rows) / n if n else 0.0,
        num_questions=n,
        mu=mu,
        k=k,
        per_question=tuple(rows),
    )
