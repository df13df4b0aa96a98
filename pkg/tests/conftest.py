import json
import random
import sys
from pathlib import Path

import pytest

from odqa.analysis import AnalyzerKind
from odqa.index.core import IndexConfig, Paragraph, build_index
from odqa.supervision import QaExample

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"

TOPICS = [
    ("volcano", "obsidian"),
    ("glacier", "crevasse"),
    ("nebula", "protostar"),
    ("reef", "polyps"),
    ("desert", "caravan"),
    ("tundra", "permafrost"),
    ("canyon", "sediment"),
    ("geyser", "silica"),
    ("marsh", "peat"),
    ("dune", "ripples"),
]


def make_planted_corpus(paragraphs_per_topic=3, planted=(0, 2)):
    """30 paragraphs over 10 topics; each topic's answer word is planted in
    a known subset of its paragraphs. Every paragraph shares filler terms so
    queries retrieve across topics."""
    paragraphs = []
    for topic, answer in TOPICS:
        for j in range(paragraphs_per_topic):
            body = f"The {topic} survey field report part {j} describes measurements."
            if j in planted:
                body += f" Researchers recorded {answer} deposits near the {topic} site."
            else:
                body += f" No unusual deposits were found near the {topic} site."
            paragraphs.append(Paragraph(f"wiki-{topic}", j, body))
    return paragraphs


def make_planted_questions():
    return [
        QaExample(
            question_id=f"q{i:02d}",
            question=f"What did the {topic} survey field report record",
            answers=(answer,),
            lang="en",
        )
        for i, (topic, answer) in enumerate(TOPICS)
    ]


@pytest.fixture(scope="session")
def planted_index():
    return build_index(
        make_planted_corpus(),
        IndexConfig(analyzer=AnalyzerKind.ENGLISH_LOWER, min_paragraph_chars=0),
    )


@pytest.fixture(scope="session")
def planted_questions():
    return make_planted_questions()


def make_word_soup_corpus(n_paragraphs=20, seed=7):
    """Paragraphs of random words over a small shared vocabulary, so queries
    hit many paragraphs with varied tf/lengths."""
    rng = random.Random(seed)
    vocab = [
        "apple", "bridge", "candle", "dragon", "ember", "forest", "garnet",
        "harbor", "island", "jungle", "kernel", "lantern", "meadow", "nickel",
    ]
    paragraphs = []
    for i in range(n_paragraphs):
        words = rng.choices(vocab, k=rng.randint(4, 30))
        paragraphs.append(Paragraph(f"doc{i // 4}", i % 4, " ".join(words)))
    return paragraphs


def make_word_soup_queries(n_queries=10, seed=11):
    rng = random.Random(seed)
    vocab = [
        "apple", "bridge", "candle", "dragon", "ember", "forest", "garnet",
        "harbor", "island", "jungle", "kernel", "lantern", "meadow", "nickel",
        "quartz",  # never indexed
    ]
    return [" ".join(rng.choices(vocab, k=rng.randint(1, 5))) for _ in range(n_queries)]


def make_e2e_workspace(root):
    """Write corpus.jsonl, a SQuAD-style dataset, and a mock reader table
    for the planted-topic fixture. The mock lists both planted paragraphs per
    question with the exact answer span, so any retrieved listed paragraph
    yields the correct answer."""
    root = Path(root)
    paragraphs = make_planted_corpus()
    questions = make_planted_questions()

    by_doc = {}
    for p in paragraphs:
        by_doc.setdefault(p.doc_id, []).append(p)
    corpus_path = root / "corpus.jsonl"
    with open(corpus_path, "w", encoding="utf-8") as fh:
        for doc_id, paras in by_doc.items():
            contents = "\n\n".join(p.text for p in sorted(paras, key=lambda p: p.para_id))
            fh.write(json.dumps({"id": doc_id, "contents": contents}, ensure_ascii=False) + "\n")

    dataset_path = root / "dataset.json"
    entries = []
    for q, (topic, answer) in zip(questions, TOPICS):
        context = next(p.text for p in paragraphs if p.doc_id == f"wiki-{topic}" and p.para_id == 0)
        start = context.find(answer)
        assert start >= 0
        entries.append((f"src-{topic}", context, [(q.question_id, q.question, [(answer, start)])]))
    write_squad_file(dataset_path, entries)

    table_path = root / "mock_table.json"
    entries = []
    for q, (topic, answer) in zip(questions, TOPICS):
        for p in paragraphs:
            if p.doc_id == f"wiki-{topic}" and answer in p.text:
                start = p.text.find(answer)
                entries.append(
                    {
                        "question_id": q.question_id,
                        "doc_id": p.doc_id,
                        "para_id": p.para_id,
                        "start_char": start,
                        "end_char": start + len(answer),
                        "score": 10.0,
                    }
                )
    table_path.write_text(json.dumps({"default_score": 0.0, "entries": entries}, indent=2))

    return {
        "corpus": corpus_path,
        "dataset": dataset_path,
        "mock_table": table_path,
        "questions": questions,
    }


def write_squad_file(path, entries):
    """entries: list of (title, context, [(qid, question, [(text, start), ...]), ...])."""
    data = []
    for title, context, qas in entries:
        data.append(
            {
                "title": title,
                "paragraphs": [
                    {
                        "context": context,
                        "qas": [
                            {
                                "id": qid,
                                "question": question,
                                "answers": [
                                    {"text": t, "answer_start": s} for t, s in answers
                                ],
                            }
                            for qid, question, answers in qas
                        ],
                    }
                ],
            }
        )
    Path(path).write_text(
        json.dumps({"version": "1.1", "data": data}, ensure_ascii=False), encoding="utf-8"
    )
