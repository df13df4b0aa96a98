# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled BM25 posting-list accumulator.

Semantics must stay bit-identical to the pure-Python twin in _scoring_py.py:
same operand order, float64 arithmetic throughout, no FMA contraction.
"""


def accumulate(const int[:] ids, const int[:] tfs, double idf, double k1_plus_1,
               const double[:] norms, double[:] scores, unsigned char[:] touched):
    """Add one query term's BM25 contributions into the score accumulator.

    ids/tfs are the term's posting list (paragraph ordinal, term frequency);
    norms[d] holds the precomputed k1 * (1 - b + b * len(d) / avglen).
    """
    cdef Py_ssize_t i, n = ids.shape[0]
    cdef int d
    cdef double tf
    for i in range(n):
        d = ids[i]
        tf = <double> tfs[i]
        scores[d] += idf * tf * k1_plus_1 / (tf + norms[d])
        touched[d] = 1
