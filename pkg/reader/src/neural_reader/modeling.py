"""Model and tokenizer loading, plus an offline tiny-model factory.

The tiny factory builds a randomly initialized miniature BERT QA model with
a WordPiece vocabulary derived from supplied text, so tests and smoke runs
need no network or pretrained weights.
"""

import os
import re
from pathlib import Path

os.environ.setdefault("HF_HUB_DISABLE_PROGRESS_BARS", "1")

import torch
from transformers import (
    AutoModelForQuestionAnswering,
    AutoTokenizer,
    BertConfig,
    BertForQuestionAnswering,
    BertTokenizerFast,
)
from transformers.utils import logging as hf_logging

hf_logging.set_verbosity_error()

SPECIAL_TOKENS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]

_WORDISH_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)


def load(model_dir):
    """Load (model, tokenizer) from a local directory or hub identifier."""
    model = AutoModelForQuestionAnswering.from_pretrained(model_dir)
    tokenizer = AutoTokenizer.from_pretrained(model_dir, use_fast=True)
    if not tokenizer.is_fast:
        raise ValueError(
            f"tokenizer for {model_dir} has no fast implementation; "
            "character offsets require a fast tokenizer"
        )
    model.eval()
    return model, tokenizer


def build_tiny_model(
    out_dir,
    texts,
    hidden_size: int = 64,
    num_layers: int = 2,
    num_heads: int = 2,
    max_positions: int = 512,
    seed: int = 0,
):
    """Create and save a miniature randomly-initialized QA model.

    The vocabulary is every lowercased word and punctuation mark occurring
    in `texts`; unseen words map to [UNK] at runtime, which is fine for
    smoke-scale training and protocol tests.
    """
    words = set()
    for text in texts:
        words.update(w.lower() for w in _WORDISH_RE.findall(text))
    vocab = SPECIAL_TOKENS + sorted(words)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    vocab_file = out / "vocab.txt"
    vocab_file.write_text("\n".join(vocab) + "\n", encoding="utf-8")
    tokenizer = BertTokenizerFast(str(vocab_file), do_lower_case=True)

    torch.manual_seed(seed)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=hidden_size,
        num_hidden_layers=num_layers,
        num_attention_heads=num_heads,
        intermediate_size=hidden_size * 2,
        max_position_embeddings=max_positions,
    )
    model = BertForQuestionAnswering(config)
    model.save_pretrained(out)
    tokenizer.save_pretrained(out)
    return out
