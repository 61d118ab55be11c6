"""Few-shot exemplar selection by greedy, rank-weighted maximal marginal relevance."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import math

import numpy as np

from . import _kernels
from .core import Exemplar, cosine_similarity
from .errors import InvalidArgumentError


@dataclass(frozen=True)
class SelectionResult:
    selected: list[int]
    scores: list[float]
    lam: float
    gamma: float


def rank_weight(rank: int, gamma: float, K_lib: int) -> float:
    """Multiplier on the relevance term: ``1 + gamma`` at rank 1, falling linearly to 1 at ``K_lib``.

    Negative ``gamma`` deflates top-ranked exemplars instead.
    """
    if rank < 1:
        raise InvalidArgumentError("rank must be >= 1")
    return 1.0 + gamma * (K_lib - min(rank, K_lib)) / max(K_lib - 1, 1)


def mmr_score(candidate: Exemplar, selected: Sequence[Exemplar], z_x, lam: float, gamma: float,
              K_lib: int) -> float:
    if not 0.0 <= lam <= 1.0:
        raise InvalidArgumentError("lambda must lie in [0, 1]")
    relevance = rank_weight(candidate.rank, gamma, K_lib) * cosine_similarity(z_x, candidate.embedding)
    penalty = max((cosine_similarity(candidate.embedding, e.embedding) for e in selected), default=0.0)
    return lam * relevance - (1.0 - lam) * penalty


def _exact_dots(rows: np.ndarray, vec: np.ndarray) -> np.ndarray:
    # correctly rounded sums: equal vectors score bit-identically and near-ties
    # do not hinge on BLAS blocking or memory alignment
    return np.array([math.fsum(p) for p in rows * vec])


def _exemplar_key(e: Exemplar, position: int):
    return e.exemplar_id if e.exemplar_id is not None else position


def select_exemplars(pool: Sequence[Exemplar], z_x, cfg) -> SelectionResult:
    """Pick ``min(cfg.m, len(pool))`` exemplars greedily.

    Ties on the MMR score go to higher raw relevance, then better (lower)
    source rank, then smaller exemplar id. Exemplars without an id are keyed
    by their position in ``pool``.
    """
    lam, gamma = float(cfg.lam), float(cfg.gamma)
    if not 0.0 <= lam <= 1.0:
        raise InvalidArgumentError("lambda must lie in [0, 1]")
    if not pool:
        return SelectionResult([], [], lam, gamma)
    ids = [_exemplar_key(e, i) for i, e in enumerate(pool)]
    if len(set(ids)) != len(ids):
        raise InvalidArgumentError("pool contains repeated exemplar ids")
    emb = np.stack([e.embedding for e in pool])
    raw = _exact_dots(emb, np.asarray(z_x, dtype=np.float64))
    # candidates sorted by tie-break priority, so the kernel's first strict max wins ties
    order = sorted(range(len(pool)), key=lambda i: (-raw[i], pool[i].rank, ids[i]))
    weights = np.array([rank_weight(pool[i].rank, gamma, cfg.K_lib) for i in order])
    relevance = weights * raw[order]
    ordered = emb[order]
    sims = np.stack([_exact_dots(ordered, row) for row in ordered])
    picked, scores = _kernels.mmr_greedy(relevance, sims, lam, int(cfg.m))
    return SelectionResult([ids[order[j]] for j in picked], [float(s) for s in scores], lam, gamma)
