"""Span selection over sliding-window encodings.

Long paragraphs are processed in overlapping windows; the best span across
all windows wins. Scores are unnormalized sums of start and end logits, so
they stay comparable across paragraphs (no per-paragraph softmax).
"""

from dataclasses import dataclass

import torch


@dataclass(frozen=True)
class SpanResult:
    start_char: int
    end_char: int
    score: float
    no_answer: bool = False


def encode_windows(tokenizer, question, paragraph, max_length, stride):
    return tokenizer(
        question,
        paragraph,
        truncation="only_second",
        max_length=max_length,
        stride=stride,
        return_overflowing_tokens=True,
        return_offsets_mapping=True,
        padding="longest",
        return_tensors="pt",
    )


def select_span(
    start_logits,
    end_logits,
    offset_mappings,
    sequence_ids_per_window,
    max_answer_tokens: int = 30,
    allow_no_answer: bool = False,
) -> SpanResult:
    """Best (start <= end) context span across windows.

    offset_mappings/sequence_ids_per_window are per-window lists aligned with
    the logit rows. The null score is the best CLS start+end sum; with
    allow_no_answer it competes against the best span.
    """
    best = None  # (score, start_char, end_char)
    null_score = None
    for w in range(len(start_logits)):
        s_logits, e_logits = start_logits[w], end_logits[w]
        cls_score = float(s_logits[0] + e_logits[0])
        if null_score is None or cls_score > null_score:
            null_score = cls_score
        offsets = offset_mappings[w]
        seq_ids = sequence_ids_per_window[w]
        context = [
            i
            for i, (sid, (a, b)) in enumerate(zip(seq_ids, offsets))
            if sid == 1 and b > a
        ]
        for pos_i, i in enumerate(context):
            for j in context[pos_i : pos_i + max_answer_tokens]:
                score = float(s_logits[i] + e_logits[j])
                if best is None or score > best[0]:
                    best = (score, int(offsets[i][0]), int(offsets[j][1]))
    if best is None:
        return SpanResult(0, 0, null_score if null_score is not None else 0.0, no_answer=True)
    if allow_no_answer and null_score is not None and null_score > best[0]:
        return SpanResult(0, 0, null_score, no_answer=True)
    return SpanResult(best[1], best[2], best[0])


def predict_span(
    model,
    tokenizer,
    question: str,
    paragraph: str,
    max_length: int = 384,
    stride: int = 128,
    max_answer_tokens: int = 30,
    allow_no_answer: bool = False,
) -> SpanResult:
    enc = encode_windows(tokenizer, question, paragraph, max_length, stride)
    model_inputs = {
        k: v for k, v in enc.items() if k not in ("offset_mapping", "overflow_to_sample_mapping")
    }
    with torch.no_grad():
        out = model(**model_inputs)
    n_windows = out.start_logits.shape[0]
    offsets = [[(int(a), int(b)) for a, b in enc["offset_mapping"][w].tolist()] for w in range(n_windows)]
    seq_ids = [enc.sequence_ids(w) for w in range(n_windows)]
    return select_span(
        out.start_logits,
        out.end_logits,
        offsets,
        seq_ids,
        max_answer_tokens=max_answer_tokens,
        allow_no_answer=allow_no_answer,
    )
