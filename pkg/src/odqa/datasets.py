"""Source QA dataset ingestion.

squad_v11 is the mandatory format: every question becomes a QaExample and a
GoldAnswerSet (all listed answer variants), and the original (question, gold
paragraph, span) triples are preserved as SRC training rows so the source
dataset can participate in stage-wise fine-tuning.
"""

from __future__ import annotations

import json

from .errors import DataError
from .index.core import Paragraph
from .metrics import GoldAnswerSet
from .supervision import QaExample, TrainingExample

FORMATS = ("squad_v11",)


def _get(obj, key, path):
    if not isinstance(obj, dict) or key not in obj:
        raise DataError(f"{path}: missing field {key!r}")
    return obj[key]


def ingest_qa_dataset(path, format: str = "squad_v11", lang: str = "en"):
    """Parse a QA dataset file.

    Returns (qa_examples, gold_sets, src_training_rows). SRC rows use the
    article title as doc_id, the paragraph's ordinal within the article as
    para_id, and the first listed answer as the training span. Errors name
    the path into the document.
    """
    if format not in FORMATS:
        raise DataError(f"unsupported dataset format {format!r} (supported: {FORMATS})")
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read dataset {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path} is not valid JSON: {exc}") from exc

    qa_examples: list[QaExample] = []
    gold_sets: list[GoldAnswerSet] = []
    src_rows: list[TrainingExample] = []
    seen_ids: set[str] = set()

    articles = _get(doc, "data", str(path))
    if not isinstance(articles, list):
        raise DataError(f"{path}: 'data' must be a list")
    for ai, article in enumerate(articles):
        apath = f"{path}:data[{ai}]"
        title = _get(article, "title", apath)
        paragraphs = _get(article, "paragraphs", apath)
        for pi, para in enumerate(paragraphs):
            ppath = f"{apath}.paragraphs[{pi}]"
            context = _get(para, "context", ppath)
            for qi, qa in enumerate(_get(para, "qas", ppath)):
                qpath = f"{ppath}.qas[{qi}]"
                qid = str(_get(qa, "id", qpath))
                question = _get(qa, "question", qpath)
                answers = _get(qa, "answers", qpath)
                if not answers:
                    raise DataError(f"{qpath}: question {qid!r} has no answers")
                if qid in seen_ids:
                    raise DataError(f"{qpath}: duplicate question id {qid!r}")
                seen_ids.add(qid)
                texts = tuple(_get(a, "text", f"{qpath}.answers[{j}]") for j, a in enumerate(answers))
                qa_examples.append(QaExample(qid, question, texts, lang))
                gold_sets.append(GoldAnswerSet(qid, texts, lang))

                first = answers[0]
                start = _get(first, "answer_start", f"{qpath}.answers[0]")
                text = first["text"]
                if context[start : start + len(text)].lower() != text.lower():
                    raise DataError(
                        f"{qpath}: answer_start {start} does not point at {text!r}"
                    )
                src_rows.append(
                    TrainingExample(
                        question_id=qid,
                        question=question,
                        paragraph=Paragraph(title, pi, context),
                        answer_text=text,
                        answer_start_char=start,
                        is_negative=False,
                        retriever_rank=1,
                        retriever_score=0.0,
                    )
                )
    return qa_examples, gold_sets, src_rows
