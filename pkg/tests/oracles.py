"""Independent brute-force oracles.

These deliberately share no code with the library's scoring/generation paths:
they recount statistics from raw text and apply the documented formulas
directly, so tests compare two independent routes.
"""

import math
from collections import Counter


def bm25_brute_force(paragraph_texts, query_text, tokenizer, k1, b):
    """Score every paragraph for the query by direct evaluation.

    Returns a list of (paragraph_index, score) for paragraphs matching at
    least one query term, sorted by score descending then index ascending.
    tokenizer: text -> list of term strings.
    """
    docs = [tokenizer(t) for t in paragraph_texts]
    n = len(docs)
    lengths = [len(d) for d in docs]
    avglen = sum(lengths) / n if n else 0.0
    df = Counter()
    for d in docs:
        for term in set(d):
            df[term] += 1

    query_terms = sorted(set(tokenizer(query_text)))
    scored = []
    for i, d in enumerate(docs):
        counts = Counter(d)
        score = 0.0
        matched = False
        for term in query_terms:
            tf = counts.get(term, 0)
            if tf == 0 or df[term] == 0:
                continue
            matched = True
            idf = math.log(1.0 + (n - df[term] + 0.5) / (df[term] + 0.5))
            norm = k1 * (1.0 - b + b * lengths[i] / avglen)
            score += idf * tf * (k1 + 1.0) / (tf + norm)
        if matched:
            scored.append((i, score))
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored


def contains_answer(paragraph_text, answers, lang):
    """Answer-occurrence check written independently of find_answer_span.

    en: lowercase substring whose boundaries do not fall inside alphanumeric
    runs; zh: plain substring.
    """
    if lang == "zh":
        return any(a and a in paragraph_text for a in answers)
    low = paragraph_text.lower()

    def alnum(ch):
        return (ch.isalpha() or ch.isdigit()) and ch != "_"

    for answer in answers:
        a = answer.lower()
        if not a:
            continue
        start = low.find(a)
        while start != -1:
            end = start + len(a)
            left_ok = alnum(low[start]) and (start == 0 or not alnum(low[start - 1]))
            right_ok = alnum(low[end - 1]) and (end == len(low) or not alnum(low[end]))
            if left_ok and right_ok:
                return True
            start = low.find(a, start + 1)
    return False


def enumerate_ds_counts(questions, retrieved_texts, lang, policy):
    """Expected positive/negative counts per question by exhaustive scan.

    questions: list of (question_id, answers); retrieved_texts: question_id
    -> list of paragraph texts in rank order (already truncated to n);
    policy: 'all' or an integer ratio d. Returns {question_id: (pos, neg)}.
    """
    expected = {}
    for qid, answers in questions:
        texts = retrieved_texts[qid]
        flags = [contains_answer(t, answers, lang) for t in texts]
        pos = sum(flags)
        if pos == 0:
            expected[qid] = (0, 0)
            continue
        nonmatching = len(flags) - pos
        neg = nonmatching if policy == "all" else min(policy * pos, nonmatching)
        expected[qid] = (pos, neg)
    return expected


def recall_brute_force(questions, retrieved_texts, lang):
    """Fraction of questions with any answer-bearing retrieved paragraph."""
    if not questions:
        return 0.0
    hits = 0
    for qid, answers in questions:
        if any(contains_answer(t, answers, lang) for t in retrieved_texts[qid]):
            hits += 1
    return hits / len(questions)
