"""Pure-Python kernels; reference behaviour for the compiled twins in ``_ckernels``."""
from __future__ import annotations

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def fnv1a64(data: bytes, seed: int) -> int:
    h = (FNV_OFFSET ^ seed) & MASK64
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & MASK64
    return h


def mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def feature_hash(data: bytes, seed: int) -> int:
    return mix64(fnv1a64(data, seed))


def hashed_counts(tokens: list[str], dimension: int, seed: int, bigrams: bool = True) -> np.ndarray:
    """Signed bucket counts for token unigrams and (optionally) adjacent bigrams.

    A feature lands in bucket ``h % dimension``; the top bit of ``h`` picks the
    sign. Bigrams hash the two tokens joined by one space.
    """
    counts = np.zeros(dimension, dtype=np.int64)
    encoded = [t.encode("utf-8") for t in tokens]
    features = list(encoded)
    if bigrams:
        features.extend(a + b" " + b for a, b in zip(encoded, encoded[1:]))
    for feat in features:
        h = feature_hash(feat, seed)
        counts[h % dimension] += -1 if h >> 63 else 1
    return counts


def mmr_greedy(relevance, similarity, lam: float, k: int) -> tuple[list[int], list[float]]:
    """Greedy MMR over candidates already sorted by tie-break priority.

    ``relevance[i]`` is the (rank-weighted) similarity of candidate i to the
    target; ``similarity[i][j]`` the candidate-candidate cosine. A later
    candidate must beat the incumbent strictly, so index order breaks ties.
    """
    n = len(relevance)
    k = min(k, n)
    rel = [float(x) for x in relevance]
    sim = [[float(x) for x in row] for row in similarity]
    chosen = [False] * n
    max_sim = [0.0] * n
    order: list[int] = []
    scores: list[float] = []
    for step in range(k):
        best = -1
        best_score = 0.0
        for i in range(n):
            if chosen[i]:
                continue
            penalty = max_sim[i] if step else 0.0
            score = lam * rel[i] - (1.0 - lam) * penalty
            if best < 0 or score > best_score:
                best, best_score = i, score
        chosen[best] = True
        order.append(best)
        scores.append(best_score)
        row = sim[best]
        for i in range(n):
            if step == 0 or row[i] > max_sim[i]:
                max_sim[i] = row[i]
    return order, scores
