"""Wire-protocol server: newline-delimited JSON over stdio or TCP.

Requests:  {"id": str, "question": str, "paragraph": str, "lang": "en"|"zh"}
Responses: {"id", "start_char", "end_char", "score"} for the best span, or
           {"id", "no_answer": true, "score"} when the null answer wins, or
           {"id", "error": "..."} for malformed requests.

Character offsets index Unicode code points of the request's paragraph. A
bad request never kills the stream.
"""

import json
import socket
import sys
from dataclasses import dataclass

from .inference import predict_span


@dataclass(frozen=True)
class ServeOptions:
    max_length: int = 384
    stride: int = 128
    max_answer_tokens: int = 30
    allow_no_answer: bool = False


def handle_request_line(raw: str, model, tokenizer, options: ServeOptions) -> dict:
    request_id = None
    try:
        msg = json.loads(raw)
        if isinstance(msg, dict):
            request_id = msg.get("id")
        if not isinstance(msg, dict):
            raise ValueError("request must be a JSON object")
        question = msg.get("question")
        paragraph = msg.get("paragraph")
        if not isinstance(question, str) or not isinstance(paragraph, str):
            raise ValueError("request needs string 'question' and 'paragraph' fields")
        if not paragraph.strip():
            raise ValueError("paragraph is empty")
        result = predict_span(
            model,
            tokenizer,
            question,
            paragraph,
            max_length=options.max_length,
            stride=options.stride,
            max_answer_tokens=options.max_answer_tokens,
            allow_no_answer=options.allow_no_answer,
        )
        if result.no_answer:
            return {"id": request_id, "no_answer": True, "score": result.score}
        if not 0 <= result.start_char < result.end_char <= len(paragraph):
            raise ValueError(
                f"internal span [{result.start_char}, {result.end_char}) out of bounds"
            )
        return {
            "id": request_id,
            "start_char": result.start_char,
            "end_char": result.end_char,
            "score": result.score,
        }
    except Exception as exc:  # noqa: BLE001 - protocol servers must not crash
        return {"id": request_id, "error": f"{type(exc).__name__}: {exc}"}


def _serve_stream(reader, writer, model, tokenizer, options: ServeOptions) -> None:
    for raw in reader:
        line = raw.decode("utf-8", errors="replace").strip()
        if not line:
            continue
        response = handle_request_line(line, model, tokenizer, options)
        writer.write((json.dumps(response, ensure_ascii=False) + "\n").encode("utf-8"))
        writer.flush()


def serve_stdio(model, tokenizer, options: ServeOptions) -> None:
    _serve_stream(sys.stdin.buffer, sys.stdout.buffer, model, tokenizer, options)


def serve_tcp(model, tokenizer, options: ServeOptions, port: int, once: bool = False) -> None:
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as server:
        server.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        server.bind(("127.0.0.1", port))
        server.listen(1)
        print(f"listening on 127.0.0.1:{server.getsockname()[1]}", file=sys.stderr, flush=True)
        while True:
            conn, _ = server.accept()
            with conn:
                reader = conn.makefile("rb")
                writer = conn.makefile("wb")
                try:
                    _serve_stream(reader, writer, model, tokenizer, options)
                except (BrokenPipeError, ConnectionResetError):
                    pass
            if once:
                return
