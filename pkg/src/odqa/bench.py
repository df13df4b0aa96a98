"""Benchmark the compiled scoring kernel against the pure-Python fallback.

Builds a synthetic corpus with a Zipf-ish vocabulary, runs the same query
load through both backends, verifies the ranked lists are identical, and
reports wall-clock times.

    python -m odqa.bench --paragraphs 5000 --queries 100
"""

from __future__ import annotations

import argparse
import random
import time

from .analysis import AnalyzerKind
from .index.core import IndexConfig, Paragraph, build_index
from .index import kernels


def synthetic_corpus(paragraphs: int, vocab: int, words_per_paragraph: int, seed: int):
    rng = random.Random(seed)
    words = [f"w{i}" for i in range(vocab)]
    # Zipf-like sampling: low word ids are much more frequent.
    weights = [1.0 / (i + 1) for i in range(vocab)]
    out = []
    for p in range(paragraphs):
        text = " ".join(rng.choices(words, weights=weights, k=words_per_paragraph))
        out.append(Paragraph(f"doc{p // 10}", p % 10, text))
    return out, words, rng


def run(paragraphs: int, queries: int, vocab: int, words_per_paragraph: int, terms_per_query: int, seed: int):
    corpus, words, rng = synthetic_corpus(paragraphs, vocab, words_per_paragraph, seed)
    index = build_index(corpus, IndexConfig(analyzer=AnalyzerKind.ENGLISH_LOWER, min_paragraph_chars=0))
    query_texts = [" ".join(rng.choices(words, k=terms_per_query)) for _ in range(queries)]

    available = kernels.available_backends()
    timings: dict[str, float] = {}
    results: dict[str, list] = {}
    for backend in available:
        kernels.use_backend(backend)
        t0 = time.perf_counter()
        results[backend] = [index.search(q, 100) for q in query_texts]
        timings[backend] = time.perf_counter() - t0
    kernels.use_backend(None)

    print(f"corpus: {paragraphs} paragraphs, {len(index.vocab)} terms, {queries} queries")
    for backend in available:
        qps = queries / timings[backend] if timings[backend] else float("inf")
        print(f"  {backend:>7}: {timings[backend] * 1000:8.1f} ms total  ({qps:8.1f} queries/s)")
    if len(available) == 2:
        speedup = timings["python"] / timings["cython"]
        print(f"  speedup: {speedup:.1f}x (cython over python)")
        a, b = results["cython"], results["python"]
        identical = all(
            [(p.paragraph.doc_id, p.paragraph.para_id, p.retriever_score) for p in ra]
            == [(p.paragraph.doc_id, p.paragraph.para_id, p.retriever_score) for p in rb]
            for ra, rb in zip(a, b)
        )
        print(f"  results identical across backends: {identical}")
        if not identical:
            raise SystemExit("backend results diverged")
    else:
        print("  (compiled backend not available; nothing to compare)")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--paragraphs", type=int, default=5000)
    parser.add_argument("--queries", type=int, default=100)
    parser.add_argument("--vocab", type=int, default=5000)
    parser.add_argument("--words-per-paragraph", type=int, default=60)
    parser.add_argument("--terms-per-query", type=int, default=5)
    parser.add_argument("--seed", type=int, default=1234)
    args = parser.parse_args(argv)
    run(args.paragraphs, args.queries, args.vocab, args.words_per_paragraph, args.terms_per_query, args.seed)


if __name__ == "__main__":
    main()
