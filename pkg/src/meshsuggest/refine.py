"""Rank fusion and cumulative-gain cutoff refinement.

A ranking is refined by walking its tie blocks in order and keeping them
while the accumulated gain (gain = 1 - normalized score) stays within
kappa percent of the total gain. Tied scores are all-or-none: a block is
never split. Fusion sums per-method normalized scores across methods
(CombSUM) and re-normalizes.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from meshsuggest.metrics import f_beta, set_precision_recall

KAPPA_GRID = tuple(range(5, 100, 5))


def minmax_normalize(scores: list) -> list:
    """(s - min) / (max - min); a singleton or all-equal list maps to 1.0."""
    if not scores:
        raise ValueError("cannot normalize an empty score list")
    lo, hi = min(scores), max(scores)
    if hi == lo:
        return [1.0] * len(scores)
    return [(s - lo) / (hi - lo) for s in scores]


def _score(item) -> float:
    return item.norm_score if hasattr(item, "norm_score") else float(item)


@dataclass(frozen=True)
class GainEntry:
    rank: int
    score: float
    gain: float
    cg: float


@dataclass(frozen=True)
class GainSeries:
    entries: tuple
    total_cg: float


def build_gain_series(ranked: list) -> GainSeries:
    entries = []
    cg = 0.0
    for p, item in enumerate(ranked, 1):
        gain = 1.0 - _score(item)
        cg += gain
        entries.append(GainEntry(rank=p, score=_score(item), gain=gain, cg=cg))
    return GainSeries(entries=tuple(entries), total_cg=cg)


def _tie_blocks(ranked: list) -> list:
    """(start, end) index pairs of consecutive exactly-equal scores."""
    blocks = []
    start = 0
    for i in range(1, len(ranked) + 1):
        if i == len(ranked) or _score(ranked[i]) != _score(ranked[start]):
            blocks.append((start, i))
            start = i
    return blocks


def refine_cutoff(ranked: list, kappa: int) -> list:
    """Keep the longest prefix of tie blocks whose cumulative gain stays
    within (kappa/100) of the total gain, threshold inclusive.

    The first block is always kept: rankings arrive min-max normalized, so
    the top score is 1.0 and carries zero gain, which guarantees at least
    one suggestion per fragment.
    """
    if not ranked:
        raise ValueError("cannot refine an empty ranking")
    if kappa not in KAPPA_GRID:
        raise ValueError(f"kappa must be one of {KAPPA_GRID}, got {kappa}")
    gains = [1.0 - _score(item) for item in ranked]
    total = sum(gains)
    threshold = (kappa / 100.0) * total
    kept = 0
    cg = 0.0
    for lo, hi in _tie_blocks(ranked):
        block_gain = sum(gains[lo:hi])
        if lo == 0 or cg + block_gain <= threshold:
            cg += block_gain
            kept = hi
        else:
            break
    return ranked[:kept]


def cutoff_top_k(ranked: list, k: int) -> list:
    """Fixed-depth cutoff, for debugging comparisons only."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return ranked[:k]


def fuse_methods(ranked_per_method: dict) -> list:
    """CombSUM across methods: group candidates by heading, sum their
    per-method normalized scores, sort descending with lexicographic
    tie-break, and re-normalize. Input lists must already carry min-max
    normalized scores; iteration order of the mapping fixes which spelling
    and source order win.
    """
    groups: dict = {}
    for candidates in ranked_per_method.values():
        for c in candidates:
            key = c.heading.lower()
            if key not in groups:
                groups[key] = {"first": c, "sum": 0.0, "sources": []}
            groups[key]["sum"] += c.norm_score
            groups[key]["sources"].extend(c.sources)
    ordered = sorted(groups.values(), key=lambda g: (-g["sum"], g["first"].heading.lower()))
    if not ordered:
        return []
    norm_scores = minmax_normalize([g["sum"] for g in ordered])
    return [
        dataclasses.replace(
            g["first"],
            method="fusion",
            raw_score=g["sum"],
            norm_score=ns,
            sources=tuple(g["sources"]),
        )
        for g, ns in zip(ordered, norm_scores)
    ]


def tune_kappa(rankings: dict, gold: dict) -> tuple:
    """Grid-search kappa on training fragments.

    ``rankings`` maps fragment_id to its ranked candidates, ``gold`` maps
    fragment_id to the gold heading set. Returns (best kappa, curve) where
    the curve lists (kappa, mean set-F1) for every grid point and ties go
    to the smallest kappa.
    """
    curve = []
    for kappa in KAPPA_GRID:
        scores = []
        for fid, ranked in rankings.items():
            gold_set = {h.lower() for h in gold[fid]}
            if not ranked or not gold_set:
                scores.append(0.0)
                continue
            kept = {c.heading.lower() for c in refine_cutoff(ranked, kappa)}
            p, r = set_precision_recall(kept, gold_set)
            scores.append(f_beta(p, r, 1.0))
        curve.append((kappa, sum(scores) / len(scores) if scores else 0.0))
    best_kappa = max(curve, key=lambda pair: (pair[1], -pair[0]))[0]
    return best_kappa, curve
