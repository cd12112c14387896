"""Evaluation: suggestion-quality metrics, residual-aware search metrics,
F_beta, paired significance with Bonferroni correction, and aggregation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

RESIDUAL_MODES = ("lower", "mle", "optimistic")
BETAS = (0.5, 1.0, 3.0)


def set_precision_recall(suggested: set, gold: set) -> tuple:
    """Set precision and recall; an empty suggestion set scores (0, 0)."""
    if not gold:
        raise ValueError("gold set must be nonempty")
    hit = len(set(suggested) & set(gold))
    p = hit / len(suggested) if suggested else 0.0
    return p, hit / len(gold)


def reciprocal_rank(ranked: list, gold: set) -> float:
    if not gold:
        raise ValueError("gold set must be nonempty")
    for i, item in enumerate(ranked, 1):
        if item in gold:
            return 1.0 / i
    return 0.0


def recall_at_k(ranked: list, gold: set, k: int) -> float:
    if k <= 0:
        raise ValueError("k must be positive")
    if not gold:
        raise ValueError("gold set must be nonempty")
    return len(set(ranked[:k]) & set(gold)) / len(gold)


def ndcg_at_k(ranked: list, gold: set, k: int, log_base: float = 2.0) -> float:
    """Binary-gain nDCG: DCG = sum rel_i / log(i + 1); ideal from |gold|."""
    if k <= 0:
        raise ValueError("k must be positive")
    if not gold:
        raise ValueError("gold set must be nonempty")

    def dcg(rels):
        return sum(rel / (math.log(i + 2) / math.log(log_base)) for i, rel in enumerate(rels))

    gold = set(gold)
    idcg = dcg([1] * min(len(gold), k))
    if idcg == 0:
        return 0.0
    return dcg([1 if item in gold else 0 for item in ranked[:k]]) / idcg


def f_beta(p: float, r: float, beta: float) -> float:
    if beta <= 0:
        raise ValueError("beta must be positive")
    denom = beta * beta * p + r
    if denom == 0:
        return 0.0
    return (1 + beta * beta) * p * r / denom


@dataclass(frozen=True)
class SuggestionMetrics:
    precision: float
    recall: float
    rr: float
    recall_at_5: float
    recall_at_10: float
    ndcg_at_5: float
    ndcg_at_10: float

    def as_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "rr": self.rr,
            "recall_at_5": self.recall_at_5,
            "recall_at_10": self.recall_at_10,
            "ndcg_at_5": self.ndcg_at_5,
            "ndcg_at_10": self.ndcg_at_10,
        }


def suggestion_metrics(ranked: list, gold: set) -> SuggestionMetrics:
    """Score a ranked suggestion list against gold headings (as given; the
    caller canonicalizes case)."""
    suggested = set(ranked)
    p, r = set_precision_recall(suggested, gold)
    return SuggestionMetrics(
        precision=p,
        recall=r,
        rr=reciprocal_rank(ranked, gold),
        recall_at_5=recall_at_k(ranked, gold, 5),
        recall_at_10=recall_at_k(ranked, gold, 10),
        ndcg_at_5=ndcg_at_k(ranked, gold, 5),
        ndcg_at_10=ndcg_at_k(ranked, gold, 10),
    )


@dataclass(frozen=True)
class ModeMetrics:
    precision: float
    recall: float
    f_half: float
    f1: float
    f3: float

    def as_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f_half": self.f_half,
            "f1": self.f1,
            "f3": self.f3,
        }


@dataclass(frozen=True)
class SearchMetrics:
    lower: ModeMetrics
    mle: ModeMetrics
    optimistic: ModeMetrics
    retrieved: int
    judged_relevant_retrieved: int
    judged_irrelevant_retrieved: int
    unjudged_retrieved: int
    mle_fallback: bool

    def mode(self, name: str) -> ModeMetrics:
        return {"lower": self.lower, "mle": self.mle, "optimistic": self.optimistic}[name]


def _mode_metrics(p: float, r: float) -> ModeMetrics:
    return ModeMetrics(
        precision=p,
        recall=r,
        f_half=f_beta(p, r, 0.5),
        f1=f_beta(p, r, 1.0),
        f3=f_beta(p, r, 3.0),
    )


def search_eval(
    retrieved: set,
    topic_id: str,
    judgments: dict,
    mle: str = "expected",
    seed: int | None = None,
    samples: int = 1,
) -> SearchMetrics:
    """Search metrics under the three residual treatments.

    lower: unjudged retrieved documents count as irrelevant. optimistic:
    they count as relevant, and join the relevant pool in the recall
    denominator. mle: they count as relevant with probability rho = judged
    relevant retrieved / judged retrieved; the default fills the mle slot
    with the deterministic expectation, ``mle="sampling"`` with the seeded
    Monte Carlo mean over ``samples`` draws. With nothing judged among the
    retrieved, mle falls back to lower and is flagged.
    """
    if topic_id not in judgments:
        raise ValueError(f"unknown topic {topic_id!r}")
    if mle not in ("expected", "sampling"):
        raise ValueError(f"mle must be 'expected' or 'sampling', got {mle!r}")
    topic_qrels = judgments[topic_id]
    total_rel = sum(topic_qrels.values())
    if total_rel == 0:
        raise ValueError(f"topic {topic_id!r} has no relevant documents")
    jr = sum(1 for d in retrieved if topic_qrels.get(d) == 1)
    ji = sum(1 for d in retrieved if topic_qrels.get(d) == 0)
    u = len(retrieved) - jr - ji
    n = len(retrieved)

    if n == 0:
        zero = _mode_metrics(0.0, 0.0)
        return SearchMetrics(
            lower=zero, mle=zero, optimistic=zero,
            retrieved=0, judged_relevant_retrieved=0,
            judged_irrelevant_retrieved=0, unjudged_retrieved=0,
            mle_fallback=False,
        )

    lower = _mode_metrics(jr / n, jr / total_rel)
    optimistic = _mode_metrics((jr + u) / n, (jr + u) / (total_rel + u))
    judged = jr + ji
    fallback = judged == 0
    if fallback:
        mle_metrics = lower
    else:
        rho = jr / judged
        if mle == "expected":
            expected = jr + rho * u
            mle_metrics = _mode_metrics(expected / n, expected / (total_rel + rho * u))
        else:
            rng = np.random.default_rng(seed)
            draws = rng.binomial(u, rho, size=samples)
            p_mean = float(np.mean((jr + draws) / n))
            r_mean = float(np.mean((jr + draws) / (total_rel + draws)))
            mle_metrics = _mode_metrics(p_mean, r_mean)
    return SearchMetrics(
        lower=lower,
        mle=mle_metrics,
        optimistic=optimistic,
        retrieved=n,
        judged_relevant_retrieved=jr,
        judged_irrelevant_retrieved=ji,
        unjudged_retrieved=u,
        mle_fallback=fallback,
    )


@dataclass(frozen=True)
class SignificanceResult:
    t: float
    p_raw: float
    p_corrected: float
    significant: bool
    degenerate: bool


def significance(per_topic_a: list, per_topic_b: list, comparisons: int) -> SignificanceResult:
    """Paired two-tailed t-test with Bonferroni correction.

    Zero variance of the paired differences (including identical vectors)
    is degenerate: flagged, never significant.
    """
    if len(per_topic_a) != len(per_topic_b):
        raise ValueError("paired vectors must have equal length")
    if len(per_topic_a) < 2:
        raise ValueError("need at least 2 paired topics")
    diffs = np.asarray(per_topic_a, dtype=float) - np.asarray(per_topic_b, dtype=float)
    if float(np.std(diffs, ddof=1)) == 0.0:
        return SignificanceResult(
            t=float("nan"), p_raw=1.0, p_corrected=1.0, significant=False, degenerate=True
        )
    t_stat, p_raw = stats.ttest_rel(per_topic_a, per_topic_b)
    p_corrected = min(1.0, float(p_raw) * comparisons)
    return SignificanceResult(
        t=float(t_stat),
        p_raw=float(p_raw),
        p_corrected=p_corrected,
        significant=p_corrected < 0.05,
        degenerate=False,
    )


def aggregate(per_topic: list) -> dict:
    """Arithmetic mean per metric over per-topic dicts (mean-of-F: each
    topic's F is computed first, then averaged)."""
    if not per_topic:
        raise ValueError("need at least one topic")
    keys = per_topic[0].keys()
    return {k: sum(row[k] for row in per_topic) / len(per_topic) for k in keys}
