"""Reader bridge: drive a span-extraction reader and fuse its scores with
retrieval scores.

A reader receives newline-delimited JSON requests
    {"id": str, "question": str, "paragraph": str, "lang": "en"|"zh"}
and answers, possibly out of order,
    {"id": str, "start_char": int, "end_char": int, "score": float}
or  {"id": str, "no_answer": true, "score": float}
over the stdio of a child process or a TCP connection. Character offsets
index Unicode code points of the request's paragraph. Final answers are
ranked by S = (1 - mu) * retriever_score + mu * reader_score.

A table-driven mock reader supports ML-free tests and pipelines.
"""

from __future__ import annotations

import json
import queue
import shlex
import socket
import subprocess
import threading
from dataclasses import dataclass
from typing import Optional

from .errors import DataError, ReaderProtocolError
from .index.core import Paragraph
from .metrics import GoldAnswerSet, exact_match
from .supervision import QaExample

DEFAULT_TIMEOUT = 30.0
MAX_IN_FLIGHT = 32


@dataclass(frozen=True, slots=True)
class SpanPrediction:
    start_char: int
    end_char: int
    reader_score: float


@dataclass(frozen=True, slots=True)
class FusionConfig:
    mu: float

    def __post_init__(self):
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError(f"mu must be in [0, 1], got {self.mu}")


@dataclass(frozen=True, slots=True)
class AnswerCandidate:
    question_id: str
    paragraph: Paragraph
    span_text: str
    retriever_score: float
    reader_score: float
    fused_score: float


def fuse(retriever_score: float, reader_score: float, config: FusionConfig) -> float:
    return (1.0 - config.mu) * retriever_score + config.mu * reader_score


def _check_span(start, end, paragraph: Paragraph, request_id=None) -> None:
    if not (isinstance(start, int) and isinstance(end, int)):
        raise ReaderProtocolError(
            f"non-integer span offsets ({start!r}, {end!r}) for paragraph "
            f"({paragraph.doc_id!r}, {paragraph.para_id})",
            request_id=request_id,
        )
    if not (0 <= start < end <= len(paragraph.text)):
        raise ReaderProtocolError(
            f"span [{start}, {end}) out of bounds for paragraph "
            f"({paragraph.doc_id!r}, {paragraph.para_id}) of length {len(paragraph.text)}",
            request_id=request_id,
        )


class MockReader:
    """Deterministic table-driven reader for tests and dry runs.

    Maps (question_id, doc_id, para_id) to a fixed span and score; unlisted
    keys yield no candidate.
    """

    def __init__(self, table: dict, default_score: float = 0.0):
        self.table = dict(table)
        self.default_score = default_score

    @classmethod
    def from_json(cls, path) -> "MockReader":
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
            table = {
                (e["question_id"], e["doc_id"], e["para_id"]): (
                    e["start_char"],
                    e["end_char"],
                    e["score"],
                )
                for e in doc["entries"]
            }
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
            raise DataError(f"bad mock reader table {path}: {exc}") from exc
        return cls(table, default_score=doc.get("default_score", 0.0))

    def score_many(self, question_id, question, paragraphs, lang):
        results = []
        for p in paragraphs:
            entry = self.table.get((question_id, p.doc_id, p.para_id))
            if entry is None:
                results.append(None)
                continue
            start, end, score = entry
            _check_span(start, end, p)
            results.append(SpanPrediction(start, end, float(score)))
        return results

    def close(self):
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class _SubprocessTransport:
    """NDJSON over a child process's stdin/stdout."""

    def __init__(self, command, timeout: float):
        if isinstance(command, str):
            command = shlex.split(command)
        self.timeout = timeout
        try:
            self.proc = subprocess.Popen(
                command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise ReaderProtocolError(f"cannot start reader {command!r}: {exc}") from exc
        self._lines: queue.Queue = queue.Queue()
        self._pump = threading.Thread(target=self._read_loop, daemon=True)
        self._pump.start()

    def _read_loop(self):
        for line in self.proc.stdout:
            self._lines.put(line)
        self._lines.put(None)  # EOF marker

    def send_line(self, line: str) -> None:
        try:
            self.proc.stdin.write(line + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, ValueError, OSError) as exc:
            raise ReaderProtocolError(f"reader process closed stdin: {exc}") from exc

    def recv_line(self) -> str:
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            raise ReaderProtocolError(f"reader timed out after {self.timeout}s") from None
        if line is None:
            raise ReaderProtocolError("reader process closed its output stream")
        return line

    def close(self):
        if self.proc.poll() is None:
            try:
                self.proc.stdin.close()
            except OSError:
                pass
            try:
                self.proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self.proc.kill()
                self.proc.wait()


class _TcpTransport:
    """NDJSON over a TCP connection."""

    def __init__(self, address, timeout: float):
        if isinstance(address, str):
            host, _, port = address.rpartition(":")
            if not host or not port.isdigit():
                raise ValueError(f"bad TCP address {address!r}, expected HOST:PORT")
            address = (host, int(port))
        try:
            self.sock = socket.create_connection(address, timeout=timeout)
        except OSError as exc:
            raise ReaderProtocolError(f"cannot connect to reader at {address}: {exc}") from exc
        self.sock.settimeout(timeout)
        self._reader = self.sock.makefile("r", encoding="utf-8", newline="\n")

    def send_line(self, line: str) -> None:
        try:
            self.sock.sendall((line + "\n").encode("utf-8"))
        except OSError as exc:
            raise ReaderProtocolError(f"reader connection lost: {exc}") from exc

    def recv_line(self) -> str:
        try:
            line = self._reader.readline()
        except socket.timeout:
            raise ReaderProtocolError("reader timed out") from None
        except OSError as exc:
            raise ReaderProtocolError(f"reader connection lost: {exc}") from exc
        if not line:
            raise ReaderProtocolError("reader closed the connection")
        return line

    def close(self):
        try:
            self._reader.close()
        finally:
            self.sock.close()


class ProtocolReader:
    """Client for the wire protocol with bounded pipelining.

    Responses are matched by id, so out-of-order arrival never affects
    result ordering. Any failure aborts the whole batch.
    """

    def __init__(self, transport, max_in_flight: int = MAX_IN_FLIGHT):
        self.transport = transport
        self.max_in_flight = max(1, max_in_flight)
        self._seq = 0

    @classmethod
    def subprocess(cls, command, timeout: float = DEFAULT_TIMEOUT, **kw) -> "ProtocolReader":
        return cls(_SubprocessTransport(command, timeout), **kw)

    @classmethod
    def tcp(cls, address, timeout: float = DEFAULT_TIMEOUT, **kw) -> "ProtocolReader":
        return cls(_TcpTransport(address, timeout), **kw)

    def score_many(self, question_id, question, paragraphs, lang):
        pending: dict[str, int] = {}
        results: list = [None] * len(paragraphs)
        answered: set[str] = set()
        next_to_send = 0

        def receive_one():
            line = self.transport.recv_line()
            try:
                msg = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ReaderProtocolError(f"malformed reader response: {line!r}") from exc
            rid = msg.get("id")
            if rid not in pending:
                raise ReaderProtocolError(f"response for unknown request id {rid!r}", request_id=rid)
            if rid in answered:
                raise ReaderProtocolError(f"duplicate response for request id {rid!r}", request_id=rid)
            answered.add(rid)
            idx = pending[rid]
            paragraph = paragraphs[idx]
            if msg.get("no_answer") is True:
                results[idx] = None
                return
            if "start_char" not in msg or "end_char" not in msg or "score" not in msg:
                raise ReaderProtocolError(
                    f"reader response missing fields for paragraph "
                    f"({paragraph.doc_id!r}, {paragraph.para_id}): {line!r}",
                    request_id=rid,
                )
            _check_span(msg["start_char"], msg["end_char"], paragraph, request_id=rid)
            results[idx] = SpanPrediction(msg["start_char"], msg["end_char"], float(msg["score"]))

        while next_to_send < len(paragraphs) or len(answered) < len(pending):
            if next_to_send < len(paragraphs) and len(pending) - len(answered) < self.max_in_flight:
                paragraph = paragraphs[next_to_send]
                self._seq += 1
                rid = f"{question_id}#{self._seq}"
                pending[rid] = next_to_send
                request = {
                    "id": rid,
                    "question": question,
                    "paragraph": paragraph.text,
                    "lang": lang,
                }
                self.send_line(json.dumps(request, ensure_ascii=False))
                next_to_send += 1
            else:
                receive_one()
        return results

    def send_line(self, line):
        self.transport.send_line(line)

    def close(self):
        self.transport.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def score_paragraph(
    reader, question_id: str, question: str, paragraph: Paragraph, lang: str = "en"
) -> Optional[SpanPrediction]:
    """Best span for one paragraph, or None when the reader has no candidate."""
    return reader.score_many(question_id, question, [paragraph], lang)[0]


def answer_question(
    example: QaExample, passages, reader, config: FusionConfig, top_m: int = 1
) -> list[AnswerCandidate]:
    """Rank span candidates across one question's retrieved passages.

    One candidate per span-yielding passage, ordered by fused score
    descending with retriever rank breaking ties; truncated to top_m. Any
    reader failure fails the whole question.
    """
    if top_m < 1:
        raise ValueError("top_m must be >= 1")
    predictions = reader.score_many(
        example.question_id, example.question, [p.paragraph for p in passages], example.lang
    )
    ranked = []
    for passage, pred in zip(passages, predictions):
        if pred is None:
            continue
        candidate = AnswerCandidate(
            question_id=example.question_id,
            paragraph=passage.paragraph,
            span_text=passage.paragraph.text[pred.start_char : pred.end_char],
            retriever_score=passage.retriever_score,
            reader_score=pred.reader_score,
            fused_score=fuse(passage.retriever_score, pred.reader_score, config),
        )
        ranked.append((candidate, passage.rank))
    ranked.sort(key=lambda item: (-item[0].fused_score, item[1]))
    return [candidate for candidate, _ in ranked[:top_m]]


def tune_mu(dev, index, reader, k: int, grid_step: float = 0.1):
    """Grid-search mu by end-to-end EM on a dev sample.

    Retrieval and reader scores are computed once per question and re-fused
    for every grid point. Returns the smallest mu achieving maximal EM plus
    the full (mu, em) table.
    """
    dev = list(dev)
    if not dev:
        raise ValueError("dev sample must be non-empty")
    if not 0.0 < grid_step <= 0.5:
        raise ValueError("grid_step must be in (0, 0.5]")

    scored = []
    for qa in dev:
        passages = index.search(qa.question, k)
        predictions = reader.score_many(
            qa.question_id, qa.question, [p.paragraph for p in passages], qa.lang
        )
        candidates = [
            (
                p.retriever_score,
                pred.reader_score,
                p.paragraph.text[pred.start_char : pred.end_char],
                p.rank,
            )
            for p, pred in zip(passages, predictions)
            if pred is not None
        ]
        gold = GoldAnswerSet(qa.question_id, qa.answers, qa.lang)
        scored.append((gold, candidates))

    grid = []
    i = 0
    while i * grid_step < 1.0 - 1e-12:
        grid.append(i * grid_step)
        i += 1
    grid.append(1.0)

    table = []
    mu_star, best_em = 0.0, -1.0
    for mu in grid:
        hits = 0
        for gold, candidates in scored:
            if candidates:
                best = min(
                    candidates,
                    key=lambda c: (-((1.0 - mu) * c[0] + mu * c[1]), c[3]),
                )
                prediction = best[2]
            else:
                prediction = ""
            hits += exact_match(prediction, gold)
        em = hits / len(scored)
        table.append({"mu": mu, "em": em})
        if em > best_em:
            mu_star, best_em = mu, em
    return mu_star, table
