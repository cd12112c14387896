"""Features for ranking MeSH candidates against a query fragment.

Eleven features per (fragment, candidate) pair: free-text term counts,
description length, IEF/TF statistics, three retrieval scores of the
fragment terms against the candidate's description (Dirichlet LM, BM25,
and a sequential-dependence score), and three binary text-overlap flags.

Candidate descriptions come from a line-delimited JSON corpus
({"heading", "description"}); a candidate without a description gets an
empty one: zero term statistics and background-only LM scores.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from meshsuggest.corpus import tokenize
from meshsuggest.fragments import Fragment

FEATURE_NAMES = (
    "num_terms",
    "desc_length",
    "sum_ief",
    "sum_tf",
    "sum_tf_ief",
    "lm",
    "bm25",
    "sdm",
    "qce",
    "ecq_contains",
    "ecq_equals",
)

MU = 2000.0
BM25_K1 = 1.2
BM25_B = 0.75
SDM_WEIGHTS = (0.85, 0.10, 0.05)
SDM_WINDOW = 8


@dataclass(frozen=True)
class MeshDescription:
    heading: str
    description: str
    tokens: tuple

    @property
    def length(self) -> int:
        return len(self.tokens)


def load_descriptions(path) -> dict:
    """heading (lowercased) -> MeshDescription."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            desc = MeshDescription(
                heading=rec["heading"],
                description=rec["description"],
                tokens=tuple(tokenize(rec["description"])),
            )
            out[desc.heading.lower()] = desc
    return out


class DescStats:
    """Collection statistics over the description corpus.

    Collection unigram and pair probabilities are add-one smoothed so terms
    never seen in any description still get finite background scores.
    """

    def __init__(self, descriptions: list):
        if not descriptions:
            raise ValueError("description corpus is empty")
        self.n_docs = len(descriptions)
        self._docs = [d.tokens for d in descriptions]
        self.ef: dict = {}
        self.cf: dict = {}
        self.total_cf = 0
        for tokens in self._docs:
            for t in set(tokens):
                self.ef[t] = self.ef.get(t, 0) + 1
            for t in tokens:
                self.cf[t] = self.cf.get(t, 0) + 1
                self.total_cf += 1
        self.avg_len = self.total_cf / self.n_docs
        self.vocab_size = len(self.cf)
        self._pair_cf: dict = {}
        self._total_pairs = 0
        for tokens in self._docs:
            self._total_pairs += max(len(tokens) - 1, 0)
            for a, b in zip(tokens, tokens[1:]):
                self._pair_cf[(a, b)] = self._pair_cf.get((a, b), 0) + 1
        self._window_cache: dict = {}

    def ief(self, term: str) -> float:
        return math.log(self.n_docs / (1 + self.ef.get(term, 0))) + 1.0

    def idf_bm25(self, term: str) -> float:
        df = self.ef.get(term, 0)
        return math.log(1 + (self.n_docs - df + 0.5) / (df + 0.5))

    def p_collection(self, term: str) -> float:
        return (self.cf.get(term, 0) + 1) / (self.total_cf + self.vocab_size + 1)

    def p_collection_ordered(self, pair: tuple) -> float:
        return (self._pair_cf.get(pair, 0) + 1) / (self._total_pairs + len(self._pair_cf) + 1)

    def p_collection_window(self, pair: tuple) -> float:
        key = tuple(sorted(pair))
        if key not in self._window_cache:
            count = 0
            total = 0
            for tokens in self._docs:
                count += _window_count(tokens, key, SDM_WINDOW)
                total += len(tokens)
            self._window_cache[key] = (count, total)
        count, total = self._window_cache[key]
        return (count + 1) / (total + self.vocab_size + 1)


def build_description_stats(descriptions) -> DescStats:
    if isinstance(descriptions, dict):
        descriptions = list(descriptions.values())
    return DescStats(descriptions)


def _ordered_count(tokens, pair) -> int:
    a, b = pair
    return sum(1 for x, y in zip(tokens, tokens[1:]) if x == a and y == b)


def _window_count(tokens, pair, window) -> int:
    """Co-occurrences of an unordered pair within a token window."""
    a, b = pair
    count = 0
    for i, x in enumerate(tokens):
        if x != a and x != b:
            continue
        other = b if x == a else a
        for j in range(i + 1, min(i + window, len(tokens))):
            if tokens[j] == other:
                count += 1
    return count


def score_lm(q_tokens, d_tokens, stats: DescStats, mu: float = MU) -> float:
    """Dirichlet-smoothed query log-likelihood."""
    dl = len(d_tokens)
    score = 0.0
    for t in q_tokens:
        tf = d_tokens.count(t)
        score += math.log((tf + mu * stats.p_collection(t)) / (dl + mu))
    return score


def score_bm25(q_tokens, d_tokens, stats: DescStats, k1: float = BM25_K1, b: float = BM25_B) -> float:
    dl = len(d_tokens)
    score = 0.0
    for t in q_tokens:
        tf = d_tokens.count(t)
        if tf == 0:
            continue
        norm = tf + k1 * (1 - b + b * dl / stats.avg_len)
        score += stats.idf_bm25(t) * tf * (k1 + 1) / norm
    return score


def score_sdm(q_tokens, d_tokens, stats: DescStats, mu: float = MU) -> float:
    """0.85 unigram + 0.10 ordered-bigram + 0.05 unordered-window evidence,
    each Dirichlet-smoothed; a single-term query has no pairs and the pair
    components contribute exactly 0."""
    w_uni, w_ord, w_win = SDM_WEIGHTS
    score = w_uni * score_lm(q_tokens, d_tokens, stats, mu)
    pairs = list(zip(q_tokens, q_tokens[1:]))
    if not pairs:
        return score
    dl_pairs = max(len(d_tokens) - 1, 0)
    ordered = 0.0
    windowed = 0.0
    for pair in pairs:
        tf_o = _ordered_count(d_tokens, pair)
        ordered += math.log((tf_o + mu * stats.p_collection_ordered(pair)) / (dl_pairs + mu))
        tf_w = _window_count(d_tokens, tuple(sorted(pair)), SDM_WINDOW)
        windowed += math.log(
            (tf_w + mu * stats.p_collection_window(pair)) / (len(d_tokens) + mu)
        )
    return score + w_ord * ordered + w_win * windowed


_EMPTY = MeshDescription(heading="", description="", tokens=())


def extract_features(f: Fragment, heading: str, stats: DescStats, descriptions: dict) -> np.ndarray:
    """The 11-feature vector, in FEATURE_NAMES order."""
    desc = descriptions.get(heading.lower(), _EMPTY)
    q = list(f.q)
    d = list(desc.tokens)
    heading_lower = heading.lower()
    concatenated = " ".join(q)
    tfs = [d.count(t) for t in q]
    return np.array(
        [
            float(len(q)),
            float(len(d)),
            sum(stats.ief(t) for t in q),
            float(sum(tfs)),
            sum(tf * stats.ief(t) for tf, t in zip(tfs, q)),
            score_lm(q, d, stats),
            score_bm25(q, d, stats),
            score_sdm(q, d, stats),
            1.0 if heading_lower and heading_lower in concatenated else 0.0,
            1.0 if any(t in heading_lower for t in q) else 0.0,
            1.0 if any(c.lower() == heading_lower for c in f.clause_texts()) else 0.0,
        ],
        dtype=np.float64,
    )


def label_instances(f: Fragment, candidates: list, stats: DescStats, descriptions: dict) -> list:
    """(feature vector, label) pairs; label 1 iff the heading is gold."""
    if not f.gold_mesh:
        raise ValueError(f"fragment {f.fragment_id} has no gold MeSH terms")
    gold = f.gold_set()
    return [
        (extract_features(f, c.heading, stats, descriptions), int(c.heading.lower() in gold))
        for c in candidates
    ]


def write_features_csv(path, rows) -> None:
    """Feature dump for cross-checking: identifying columns, then the fixed
    11-column feature block in FEATURE_NAMES order."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("fragment_id", "heading", "label") + FEATURE_NAMES)
        for fragment_id, heading, label, vector in rows:
            writer.writerow([fragment_id, heading, label] + [repr(float(v)) for v in vector])
