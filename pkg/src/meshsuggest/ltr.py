"""Hand-rolled LambdaMART: gradient-boosted regression trees driven by
pairwise nDCG-delta gradients within fragment groups.

Training is deterministic for fixed data and configuration; saved models
are canonical JSON, byte-identical across runs.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass

import numpy as np

from meshsuggest import _kernels
from meshsuggest.ranking import FEATURE_NAMES, extract_features

MODEL_FORMAT_VERSION = 1


class DegenerateTraining(ValueError):
    """No training group carries both a positive and a negative label."""


class FeatureOrderMismatch(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    trees: int = 100
    depth: int = 4
    learning_rate: float = 0.1
    seed: int = 0


@dataclass(frozen=True)
class RankerModel:
    trees: tuple
    learning_rate: float
    feature_names: tuple
    method: str
    seed: int

    def score(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.zeros(X.shape[0], dtype=np.float64)
        for tree in self.trees:
            for i in range(X.shape[0]):
                out[i] += self.learning_rate * _eval_tree(tree, X[i])
        return out


def _eval_tree(node: dict, x) -> float:
    while "value" not in node:
        node = node["left"] if x[node["feature"]] <= node["threshold"] else node["right"]
    return node["value"]


def _leaf(lam, w) -> dict:
    total_w = float(np.sum(w))
    value = float(np.sum(lam)) / (total_w + 1e-9)
    return {"value": value}


def _build_tree(X, lam, w, depth: int) -> dict:
    if depth == 0 or X.shape[0] < 2:
        return _leaf(lam, w)
    feature, threshold, _ = _kernels.best_split(
        np.ascontiguousarray(X), np.ascontiguousarray(lam)
    )
    if feature < 0:
        return _leaf(lam, w)
    mask = X[:, feature] <= threshold
    return {
        "feature": int(feature),
        "threshold": float(threshold),
        "left": _build_tree(X[mask], lam[mask], w[mask], depth - 1),
        "right": _build_tree(X[~mask], lam[~mask], w[~mask], depth - 1),
    }


def _max_dcg(n_pos: int) -> float:
    return sum(1.0 / math.log2(p + 1.0) for p in range(1, n_pos + 1))


def train_ranker(groups: list, config: TrainConfig | None = None, method: str = "") -> RankerModel:
    """Boost regression trees on lambda gradients.

    ``groups`` is a list of (X, y) per fragment: an (n, 11) feature matrix
    and binary labels. At least one group must contain both labels.
    """
    cfg = config or TrainConfig()
    prepared = []
    for X, y in groups:
        X = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
        y = np.ascontiguousarray(np.asarray(y, dtype=np.int64))
        if X.ndim != 2 or X.shape[1] != len(FEATURE_NAMES):
            raise ValueError(f"feature matrix must have {len(FEATURE_NAMES)} columns")
        prepared.append((X, y))
    if not any(0 < int(y.sum()) < len(y) for _, y in prepared if len(y)):
        raise DegenerateTraining("no group contains both a positive and a negative instance")

    X_all = np.vstack([X for X, _ in prepared])
    slices = []
    offset = 0
    for X, y in prepared:
        slices.append((offset, offset + len(y), y, _max_dcg(int(y.sum()))))
        offset += len(y)
    scores = np.zeros(offset, dtype=np.float64)

    trees = []
    for _ in range(cfg.trees):
        lam = np.zeros(offset, dtype=np.float64)
        w = np.zeros(offset, dtype=np.float64)
        for lo, hi, y, max_dcg in slices:
            if max_dcg == 0.0 or int(y.sum()) == len(y):
                continue
            g_lam, g_w = _kernels.lambda_pass(
                np.ascontiguousarray(scores[lo:hi]), y, max_dcg
            )
            lam[lo:hi] = g_lam
            w[lo:hi] = g_w
        tree = _build_tree(X_all, lam, w, cfg.depth)
        trees.append(tree)
        for i in range(offset):
            scores[i] += cfg.learning_rate * _eval_tree(tree, X_all[i])
    return RankerModel(
        trees=tuple(trees),
        learning_rate=cfg.learning_rate,
        feature_names=FEATURE_NAMES,
        method=method,
        seed=cfg.seed,
    )


def rank(model: RankerModel, f, candidates: list, stats, descriptions) -> list:
    """Sort candidates by model score, stable on the incoming order, and
    recompute norm_score as a min-max over the model scores."""
    if tuple(model.feature_names) != FEATURE_NAMES:
        raise FeatureOrderMismatch(
            f"model features {model.feature_names} != extractor {FEATURE_NAMES}"
        )
    if not candidates:
        return []
    X = np.vstack([extract_features(f, c.heading, stats, descriptions) for c in candidates])
    scores = model.score(X)
    order = sorted(range(len(candidates)), key=lambda i: (-scores[i], i))
    lo, hi = float(scores.min()), float(scores.max())
    out = []
    for i in order:
        norm = 1.0 if hi == lo else (float(scores[i]) - lo) / (hi - lo)
        out.append(dataclasses.replace(candidates[i], norm_score=norm))
    return out


def save_model(model: RankerModel, path) -> None:
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": "lambdamart",
        "method": model.method,
        "seed": model.seed,
        "learning_rate": model.learning_rate,
        "feature_names": list(model.feature_names),
        "trees": list(model.trees),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_model(path) -> RankerModel:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {payload.get('format_version')}")
    return RankerModel(
        trees=tuple(payload["trees"]),
        learning_rate=payload["learning_rate"],
        feature_names=tuple(payload["feature_names"]),
        method=payload["method"],
        seed=payload["seed"],
    )
