#!/usr/bin/env python3
"""Scripted stand-in reader speaking the NDJSON wire protocol on stdio.

Default behavior: answer every request with span [0, min(5, len)) and
score = number of characters in the paragraph. Flags simulate misbehavior
and transport quirks for client tests:

  --pairs-reversed   buffer requests in pairs and answer each pair in
                     reverse order (out-of-order delivery)
  --fragmented       write each response in two flushes
  --no-answer        respond {"no_answer": true} to everything
  --malformed        respond with a non-JSON line
  --wrong-id         respond with an unknown id
  --out-of-bounds    respond with end_char beyond the paragraph
  --silent           never respond (timeout testing)
  --swap-ends        respond with end_char <= start_char
"""

import json
import sys


def response_for(msg):
    paragraph = msg["paragraph"]
    end = min(5, len(paragraph))
    return {
        "id": msg["id"],
        "start_char": 0,
        "end_char": end,
        "score": float(len(paragraph)),
    }


def emit(obj, fragmented=False):
    data = json.dumps(obj, ensure_ascii=False)
    if fragmented and len(data) > 2:
        half = len(data) // 2
        sys.stdout.write(data[:half])
        sys.stdout.flush()
        sys.stdout.write(data[half:] + "\n")
    else:
        sys.stdout.write(data + "\n")
    sys.stdout.flush()


def main():
    flags = set(sys.argv[1:])
    held = None
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        msg = json.loads(line)
        if "--silent" in flags:
            continue
        if "--malformed" in flags:
            sys.stdout.write("this is not json\n")
            sys.stdout.flush()
            continue
        if "--wrong-id" in flags:
            emit({"id": "nobody-asked-for-this", "start_char": 0, "end_char": 1, "score": 0.0})
            continue
        if "--no-answer" in flags:
            emit({"id": msg["id"], "no_answer": True, "score": -1.0})
            continue
        if "--out-of-bounds" in flags:
            emit({"id": msg["id"], "start_char": 0, "end_char": len(msg["paragraph"]) + 5, "score": 1.0})
            continue
        if "--swap-ends" in flags:
            emit({"id": msg["id"], "start_char": 3, "end_char": 3, "score": 1.0})
            continue
        resp = response_for(msg)
        if "--pairs-reversed" in flags:
            if held is None:
                held = resp
            else:
                emit(resp, "--fragmented" in flags)
                emit(held, "--fragmented" in flags)
                held = None
        else:
            emit(resp, "--fragmented" in flags)
    if held is not None:
        emit(held)


if __name__ == "__main__":
    main()
