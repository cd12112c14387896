"""Numeric kernels for LambdaMART training.

The jitted and plain paths run the same function bodies, so they produce
bitwise-identical floats. Set MESHSUGGEST_NO_NUMBA=1 before import to skip
compilation and use the plain path (also used automatically when numba is
not installed).
"""

import math
import os

import numpy as np


def _lambda_pass(scores, labels, max_dcg):
    """Pairwise lambda/hessian accumulation for one query group.

    Ranks come from a stable descending sort of the current scores, so
    score ties resolve by input position. Each (positive, negative) pair
    contributes rho * |discount delta| / maxDCG, the standard nDCG-delta
    gradient for binary gains.
    """
    n = scores.shape[0]
    order = np.argsort(-scores, kind="mergesort")
    ranks = np.empty(n, dtype=np.int64)
    for p in range(n):
        ranks[order[p]] = p + 1
    lam = np.zeros(n, dtype=np.float64)
    w = np.zeros(n, dtype=np.float64)
    for a in range(n):
        if labels[a] != 1:
            continue
        disc_a = 1.0 / math.log2(1.0 + ranks[a])
        for b in range(n):
            if labels[b] != 0:
                continue
            disc_b = 1.0 / math.log2(1.0 + ranks[b])
            rho = 1.0 / (1.0 + math.exp(scores[a] - scores[b]))
            delta = abs(disc_a - disc_b) / max_dcg
            lam[a] += rho * delta
            lam[b] -= rho * delta
            hess = rho * (1.0 - rho) * delta
            w[a] += hess
            w[b] += hess
    return lam, w


def _best_split(X, targets):
    """Exhaustive SSE split search over all features and thresholds.

    Thresholds are midpoints between consecutive distinct sorted values;
    strict improvement with feature-then-threshold evaluation order keeps
    the choice deterministic. Returns (-1, 0.0, 0.0) when nothing improves.
    """
    n, n_features = X.shape
    total = 0.0
    for i in range(n):
        total += targets[i]
    base = total * total / n
    best_gain = 1e-12
    best_feature = -1
    best_threshold = 0.0
    for j in range(n_features):
        order = np.argsort(X[:, j], kind="mergesort")
        left_sum = 0.0
        for pos in range(n - 1):
            left_sum += targets[order[pos]]
            x_here = X[order[pos], j]
            x_next = X[order[pos + 1], j]
            if x_next == x_here:
                continue
            n_left = pos + 1
            n_right = n - n_left
            right_sum = total - left_sum
            gain = left_sum * left_sum / n_left + right_sum * right_sum / n_right - base
            if gain > best_gain:
                best_gain = gain
                best_feature = j
                best_threshold = (x_here + x_next) / 2.0
    if best_feature < 0:
        return -1, 0.0, 0.0
    return best_feature, best_threshold, best_gain


NUMBA_ACTIVE = False

if os.environ.get("MESHSUGGEST_NO_NUMBA", "") != "1":
    try:
        from numba import njit

        lambda_pass = njit(cache=True)(_lambda_pass)
        best_split = njit(cache=True)(_best_split)
        NUMBA_ACTIVE = True
    except ImportError:
        pass

if not NUMBA_ACTIVE:
    lambda_pass = _lambda_pass
    best_split = _best_split
