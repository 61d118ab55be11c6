# cython: language_level=3
"""Compiled kernels; must agree bit for bit with ``_pykernels``."""
import numpy as np

cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()

cdef uint64_t FNV_OFFSET = 0xCBF29CE484222325ULL
cdef uint64_t FNV_PRIME = 0x100000001B3ULL


cdef inline uint64_t _fnv_update(uint64_t h, const unsigned char[:] data) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(data.shape[0]):
        h ^= data[i]
        h *= FNV_PRIME
    return h


cdef inline uint64_t _mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline void _bump(int64_t[:] counts, uint64_t h, Py_ssize_t dimension) noexcept nogil:
    if h >> 63:
        counts[h % dimension] -= 1
    else:
        counts[h % dimension] += 1


def feature_hash(bytes data, uint64_t seed):
    return _mix64(_fnv_update(FNV_OFFSET ^ seed, data))


def hashed_counts(list tokens, Py_ssize_t dimension, uint64_t seed, bint bigrams=True):
    cdef cnp.ndarray[int64_t, ndim=1] out = np.zeros(dimension, dtype=np.int64)
    cdef int64_t[:] counts = out
    cdef uint64_t base = FNV_OFFSET ^ seed
    cdef uint64_t space = (<unsigned char>32)
    cdef uint64_t h
    cdef Py_ssize_t i, n = len(tokens)
    cdef list encoded = [(<str>t).encode("utf-8") for t in tokens]
    cdef bytes cur, nxt
    for i in range(n):
        cur = encoded[i]
        h = _fnv_update(base, cur)
        _bump(counts, _mix64(h), dimension)
    if bigrams:
        for i in range(n - 1):
            cur = encoded[i]
            nxt = encoded[i + 1]
            h = _fnv_update(base, cur)
            h ^= space
            h *= FNV_PRIME
            h = _fnv_update(h, nxt)
            _bump(counts, _mix64(h), dimension)
    return out


def mmr_greedy(relevance, similarity, double lam, Py_ssize_t k):
    cdef double[:] rel = np.ascontiguousarray(relevance, dtype=np.float64)
    cdef double[:, :] sim = np.ascontiguousarray(similarity, dtype=np.float64)
    cdef Py_ssize_t n = rel.shape[0]
    if k > n:
        k = n
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] chosen_arr = np.zeros(n, dtype=np.uint8)
    cdef cnp.ndarray[double, ndim=1] max_arr = np.zeros(n, dtype=np.float64)
    cdef cnp.uint8_t[:] chosen = chosen_arr
    cdef double[:] max_sim = max_arr
    cdef list order = []
    cdef list scores = []
    cdef Py_ssize_t step, i, best
    cdef double score, best_score, penalty
    for step in range(k):
        best = -1
        best_score = 0.0
        for i in range(n):
            if chosen[i]:
                continue
            penalty = max_sim[i] if step else 0.0
            score = lam * rel[i] - (1.0 - lam) * penalty
            if best < 0 or score > best_score:
                best = i
                best_score = score
        chosen[best] = 1
        order.append(best)
        scores.append(best_score)
        for i in range(n):
            if step == 0 or sim[best, i] > max_sim[i]:
                max_sim[i] = sim[best, i]
    return order, scores
