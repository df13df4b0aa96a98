"""Paragraph-level BM25 index: segmentation, build, search, persistence.

Each paragraph is an independent retrieval unit. Scoring follows the
Lucene-style BM25 with non-negative idf:

    score(p, q) = sum over unique query terms t of
        idf(t) * tf(t,p) * (k1 + 1) / (tf(t,p) + k1 * (1 - b + b * len(p) / avglen))
    idf(t) = ln(1 + (N - df(t) + 0.5) / (df(t) + 0.5))

Paragraph ordinals are assigned in (doc_id, para_id) order at finalize time,
so ranking ties break deterministically and the built index is independent
of insertion order.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..analysis import AnalyzerKind, terms
from ..errors import DuplicateParagraphError, IndexFormatError
from . import kernels

FORMAT_NAME = "odqa-index"
FORMAT_VERSION = 1

_BLANK_LINES_RE = re.compile(r"\n{2,}")


@dataclass(frozen=True, slots=True)
class Paragraph:
    doc_id: str
    para_id: int
    text: str


@dataclass(frozen=True, slots=True)
class IndexConfig:
    analyzer: AnalyzerKind = AnalyzerKind.ENGLISH_LOWER
    k1: float = 0.9
    b: float = 0.4
    min_paragraph_chars: int = 10

    def __post_init__(self):
        if self.k1 <= 0:
            raise ValueError(f"k1 must be positive, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError(f"b must be in [0, 1], got {self.b}")
        if self.min_paragraph_chars < 0:
            raise ValueError("min_paragraph_chars must be non-negative")

    def to_dict(self) -> dict:
        return {
            "analyzer": self.analyzer.value,
            "k1": self.k1,
            "b": self.b,
            "min_paragraph_chars": self.min_paragraph_chars,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IndexConfig":
        return cls(
            analyzer=AnalyzerKind(d["analyzer"]),
            k1=d["k1"],
            b=d["b"],
            min_paragraph_chars=d["min_paragraph_chars"],
        )


@dataclass(frozen=True, slots=True)
class RetrievedPassage:
    paragraph: Paragraph
    retriever_score: float
    rank: int


def segment_document(doc_id: str, body: str, config: IndexConfig) -> list[Paragraph]:
    """Split on blank lines (two or more newlines) and drop short paragraphs.

    para_id preserves document order among the retained paragraphs.
    """
    paragraphs: list[Paragraph] = []
    for chunk in _BLANK_LINES_RE.split(body):
        text = chunk.strip()
        if not text or len(text) < config.min_paragraph_chars:
            continue
        paragraphs.append(Paragraph(doc_id, len(paragraphs), text))
    return paragraphs


class IndexBuilder:
    """Accumulates paragraphs, then finalizes into an immutable Index.

    Paragraphs may be added from any number of partitions in any order; the
    finalized index depends only on the set of paragraphs.
    """

    def __init__(self, config: IndexConfig):
        self.config = config
        self._paragraphs: list[Paragraph] = []
        self._seen: set[tuple[str, int]] = set()

    def add(self, paragraph: Paragraph) -> None:
        key = (paragraph.doc_id, paragraph.para_id)
        if key in self._seen:
            raise DuplicateParagraphError(
                f"duplicate paragraph doc_id={paragraph.doc_id!r} para_id={paragraph.para_id}"
            )
        self._seen.add(key)
        self._paragraphs.append(paragraph)

    def add_many(self, paragraphs) -> None:
        for p in paragraphs:
            self.add(p)

    def add_document(self, doc_id: str, body: str) -> int:
        paragraphs = segment_document(doc_id, body, self.config)
        self.add_many(paragraphs)
        return len(paragraphs)

    def finalize(self) -> "Index":
        paragraphs = sorted(self._paragraphs, key=lambda p: (p.doc_id, p.para_id))
        lengths = np.zeros(len(paragraphs), dtype=np.int32)
        postings: dict[str, list[tuple[int, int]]] = {}
        for ordinal, p in enumerate(paragraphs):
            tokens = terms(p.text, self.config.analyzer)
            lengths[ordinal] = len(tokens)
            for term, count in Counter(tokens).items():
                postings.setdefault(term, []).append((ordinal, count))

        vocab: dict[str, tuple[int, int]] = {}
        ids: list[int] = []
        tfs: list[int] = []
        for term in sorted(postings):
            plist = postings[term]
            vocab[term] = (len(ids), len(plist))
            for ordinal, count in plist:
                ids.append(ordinal)
                tfs.append(count)

        return Index(
            config=self.config,
            paragraphs=paragraphs,
            lengths=lengths,
            vocab=vocab,
            posting_ids=np.asarray(ids, dtype=np.int32),
            posting_tfs=np.asarray(tfs, dtype=np.int32),
        )


def build_index(paragraphs, config: IndexConfig) -> "Index":
    builder = IndexBuilder(config)
    builder.add_many(paragraphs)
    return builder.finalize()


@dataclass
class Index:
    """Immutable inverted index; safe to share across concurrent searchers."""

    config: IndexConfig
    paragraphs: list[Paragraph]
    lengths: np.ndarray
    vocab: dict[str, tuple[int, int]]
    posting_ids: np.ndarray
    posting_tfs: np.ndarray
    norms: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        k1, b = self.config.k1, self.config.b
        if self.n > 0 and self.avg_length > 0:
            self.norms = k1 * (1.0 - b + b * self.lengths.astype(np.float64) / self.avg_length)
        else:
            self.norms = np.full(self.n, k1 * (1.0 - b), dtype=np.float64)

    @property
    def n(self) -> int:
        return len(self.paragraphs)

    @property
    def avg_length(self) -> float:
        return float(self.lengths.sum()) / self.n if self.n else 0.0

    def df(self, term: str) -> int:
        entry = self.vocab.get(term)
        return entry[1] if entry else 0

    def search(self, query: str, k: int) -> list[RetrievedPassage]:
        """Top-k paragraphs by BM25; ties break by (doc_id, para_id) ascending."""
        if k <= 0 or self.n == 0:
            return []
        query_terms = sorted(set(terms(query, self.config.analyzer)))
        scores = np.zeros(self.n, dtype=np.float64)
        touched = np.zeros(self.n, dtype=np.uint8)
        n, k1p1 = self.n, self.config.k1 + 1.0
        for term in query_terms:
            entry = self.vocab.get(term)
            if entry is None:
                continue
            offset, df = entry
            idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
            kernels.accumulate(
                self.posting_ids[offset : offset + df],
                self.posting_tfs[offset : offset + df],
                idf,
                k1p1,
                self.norms,
                scores,
                touched,
            )
        matched = np.flatnonzero(touched)
        if matched.size == 0:
            return []
        # Primary key: score descending; secondary: ordinal ascending, which
        # is (doc_id, para_id) order by construction.
        order = np.lexsort((matched, -scores[matched]))
        top = matched[order[:k]]
        return [
            RetrievedPassage(self.paragraphs[int(p)], float(scores[int(p)]), rank)
            for rank, p in enumerate(top, start=1)
        ]

    def save(self, path) -> None:
        """Persist to a directory; layout documented in the README."""
        root = Path(path)
        root.mkdir(parents=True, exist_ok=True)
        meta = {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "config": self.config.to_dict(),
            "n_paragraphs": self.n,
            "avg_length": self.avg_length,
        }
        (root / "meta.json").write_text(
            json.dumps(meta, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )
        with open(root / "paragraphs.jsonl", "w", encoding="utf-8") as fh:
            for p in self.paragraphs:
                fh.write(
                    json.dumps(
                        {"doc_id": p.doc_id, "para_id": p.para_id, "text": p.text},
                        ensure_ascii=False,
                    )
                    + "\n"
                )
        np.save(root / "lengths.npy", self.lengths)
        np.save(root / "posting_ids.npy", self.posting_ids)
        np.save(root / "posting_tfs.npy", self.posting_tfs)
        vocab_json = {t: [off, df] for t, (off, df) in self.vocab.items()}
        (root / "vocab.json").write_text(
            json.dumps(vocab_json, ensure_ascii=False), encoding="utf-8"
        )

    @classmethod
    def open(cls, path) -> "Index":
        root = Path(path)
        meta_path = root / "meta.json"
        if not meta_path.is_file():
            raise IndexFormatError(f"no index at {root} (missing meta.json)")
        try:
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise IndexFormatError(f"corrupt index metadata in {meta_path}: {exc}") from exc
        if meta.get("format") != FORMAT_NAME:
            raise IndexFormatError(f"not an {FORMAT_NAME} directory: {root}")
        if meta.get("version") != FORMAT_VERSION:
            raise IndexFormatError(
                f"unsupported index version {meta.get('version')!r} "
                f"(this build reads version {FORMAT_VERSION})"
            )
        try:
            config = IndexConfig.from_dict(meta["config"])
        except (KeyError, ValueError) as exc:
            raise IndexFormatError(f"invalid index config in {meta_path}: {exc}") from exc
        try:
            paragraphs = []
            with open(root / "paragraphs.jsonl", encoding="utf-8") as fh:
                for line in fh:
                    row = json.loads(line)
                    paragraphs.append(Paragraph(row["doc_id"], row["para_id"], row["text"]))
            lengths = np.load(root / "lengths.npy")
            posting_ids = np.load(root / "posting_ids.npy")
            posting_tfs = np.load(root / "posting_tfs.npy")
            vocab_json = json.loads((root / "vocab.json").read_text(encoding="utf-8"))
        except (OSError, KeyError, ValueError) as exc:
            raise IndexFormatError(f"corrupt index data under {root}: {exc}") from exc
        vocab = {t: (off, df) for t, (off, df) in vocab_json.items()}
        index = cls(
            config=config,
            paragraphs=paragraphs,
            lengths=lengths,
            vocab=vocab,
            posting_ids=posting_ids,
            posting_tfs=posting_tfs,
        )
        if index.n != meta["n_paragraphs"]:
            raise IndexFormatError(
                f"paragraph count mismatch in {root}: meta says {meta['n_paragraphs']}, "
                f"found {index.n}"
            )
        return index
