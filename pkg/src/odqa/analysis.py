"""Deterministic tokenization and answer normalization for English and CJK text.

Two analyzers are supported: lowercased alphanumeric-run tokens for English,
and overlapping character bigrams inside CJK runs (with the English rule
applied to embedded non-CJK runs). Both emit character offsets into the
original string so spans can be extracted later.

All functions here are pure and thread-safe.
"""

from __future__ import annotations

import re
import string
import unicodedata
from dataclasses import dataclass
from enum import Enum

# Maximal runs of Unicode letters/digits; underscore is a separator.
_WORD_RE = re.compile(r"[^\W_]+")

_ARTICLE_RE = re.compile(r"\b(a|an|the)\b")

# Characters stripped by answer normalization: ASCII punctuation/symbols
# (the set the de-facto SQuAD normalizer removes) plus common full-width
# CJK punctuation that falls outside the Unicode P* categories.
_EXTRA_PUNCT = frozenset(string.punctuation) | frozenset(
    "＂＃＄％＆＇（）＊＋，－．／：；＜＝＞？＠［＼］＾＿｀｛｜｝～｟｠｡｢｣､･・〜￥￦"
)


@dataclass(frozen=True, slots=True)
class Token:
    """One analyzed token with [start_char, end_char) offsets into the source."""

    surface: str
    start_char: int
    end_char: int


class AnalyzerKind(str, Enum):
    ENGLISH_LOWER = "english_lower"
    CJK_BIGRAM = "cjk_bigram"


def analyzer_for_lang(lang: str) -> AnalyzerKind:
    if lang == "en":
        return AnalyzerKind.ENGLISH_LOWER
    if lang == "zh":
        return AnalyzerKind.CJK_BIGRAM
    raise ValueError(f"unsupported language: {lang!r} (expected 'en' or 'zh')")


def _is_cjk(ch: str) -> bool:
    # CJK Unified Ideographs plus Extension A.
    cp = ord(ch)
    return 0x4E00 <= cp <= 0x9FFF or 0x3400 <= cp <= 0x4DBF


def tokenize_english(text: str) -> list[Token]:
    """Lowercased maximal alphanumeric runs; everything else separates."""
    return [Token(m.group().lower(), m.start(), m.end()) for m in _WORD_RE.finditer(text)]


def tokenize_cjk_bigrams(text: str) -> list[Token]:
    """Overlapping bigrams inside CJK runs; English rule elsewhere.

    A CJK run of length 1 emits that single character. Offsets always refer
    to the original text.
    """
    tokens: list[Token] = []
    i, n = 0, len(text)
    while i < n:
        if _is_cjk(text[i]):
            j = i
            while j < n and _is_cjk(text[j]):
                j += 1
            if j - i == 1:
                tokens.append(Token(text[i], i, j))
            else:
                for s in range(i, j - 1):
                    tokens.append(Token(text[s : s + 2], s, s + 2))
            i = j
        else:
            j = i
            while j < n and not _is_cjk(text[j]):
                j += 1
            for m in _WORD_RE.finditer(text, i, j):
                tokens.append(Token(m.group().lower(), m.start(), m.end()))
            i = j
    return tokens


def tokenize(text: str, kind: AnalyzerKind) -> list[Token]:
    if kind is AnalyzerKind.ENGLISH_LOWER:
        return tokenize_english(text)
    if kind is AnalyzerKind.CJK_BIGRAM:
        return tokenize_cjk_bigrams(text)
    raise ValueError(f"unknown analyzer kind: {kind!r}")


def terms(text: str, kind: AnalyzerKind) -> list[str]:
    """Token surfaces only, for indexing and querying."""
    return [t.surface for t in tokenize(text, kind)]


def _is_strippable(ch: str) -> bool:
    return ch in _EXTRA_PUNCT or unicodedata.category(ch).startswith("P")


def normalize_answer(text: str, lang: str) -> str:
    """Canonical form used for exact-match comparison.

    en: lowercase, strip punctuation, drop whole-token articles (a/an/the),
    collapse whitespace. zh: lowercase, strip punctuation and all whitespace;
    Chinese has no articles to remove.

    Idempotent: normalize(normalize(x)) == normalize(x).
    """
    s = text.lower()
    if lang == "zh":
        return "".join(ch for ch in s if not (_is_strippable(ch) or ch.isspace()))
    if lang != "en":
        raise ValueError(f"unsupported language: {lang!r} (expected 'en' or 'zh')")
    s = "".join(ch for ch in s if not _is_strippable(ch))
    s = _ARTICLE_RE.sub(" ", s)
    return " ".join(s.split())
