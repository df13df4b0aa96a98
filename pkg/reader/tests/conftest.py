import json
from pathlib import Path

import pytest

from neural_reader.modeling import build_tiny_model

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def protocol_requests():
    return json.loads((FIXTURES / "protocol_requests.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory, protocol_requests):
    """Miniature offline model whose vocabulary covers the test texts."""
    texts = [r["paragraph"] for r in protocol_requests] + [r["question"] for r in protocol_requests]
    texts += [
        "sample paragraph number mentions basketball naismith data court game",
        "negative filler text with nothing relevant inside it",
    ]
    out = tmp_path_factory.mktemp("model") / "tiny"
    build_tiny_model(out, texts, seed=0)
    return out


def make_training_rows(n, answer="basketball", negative_every=None):
    """TrainingExample JSONL rows in the pipeline's schema."""
    rows = []
    for i in range(n):
        negative = negative_every is not None and i % negative_every == 0
        if negative:
            text = f"negative filler text number {i} with nothing relevant inside it."
            row = {
                "question_id": f"t{i:03d}",
                "question": "what sport is played",
                "paragraph": {"doc_id": "doc", "para_id": i, "text": text},
                "is_negative": True,
                "retriever_rank": 2,
                "retriever_score": 0.5,
            }
        else:
            text = f"sample paragraph number {i} mentions {answer} and the court game."
            row = {
                "question_id": f"t{i:03d}",
                "question": "what sport is played",
                "paragraph": {"doc_id": "doc", "para_id": i, "text": text},
                "answer_text": answer,
                "answer_start_char": text.find(answer),
                "is_negative": False,
                "retriever_rank": 1,
                "retriever_score": 1.0,
            }
        rows.append(row)
    return rows


def write_rows(rows, path):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


def write_manifest(path, strategy, stages):
    doc = {
        "strategy": strategy,
        "stages": [{"name": n, "files": [str(f) for f in files], "shuffle": True} for n, files in stages],
    }
    Path(path).write_text(json.dumps(doc, indent=2), encoding="utf-8")
