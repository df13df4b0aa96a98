"""Pure-Python twin of the compiled BM25 accumulator.

Used when the extension is unavailable (or forced via ODQA_SCORING_BACKEND).
Operand order matches _scoring.pyx exactly so both backends produce
bit-identical scores.
"""


def accumulate(ids, tfs, idf, k1_plus_1, norms, scores, touched):
    for i in range(len(ids)):
        d = ids[i]
        tf = float(tfs[i])
        scores[d] += idf * tf * k1_plus_1 / (tf + norms[d])
        touched[d] = 1
