"""Multi-output CART regression trees.

Greedy binary splitting on the mean per-output population variance, with
thresholds at midpoints between consecutive distinct sorted feature values
and mean-vector leaves.  Trees grow to purity by default (no depth cap,
``min_samples_leaf=1``), which is what produces the memorization behavior
the benchmark studies.

The split sweep uses incremental sufficient statistics (running sums and
sums of squares per output), so fitting a fully grown tree on 90,000 rows
takes seconds.  Targets are small integers, so all partial sums are exact
in float64 and the sweep is order-independent.

Tie-break between equally good splits: lowest feature index, then lowest
threshold.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
from numba import njit

from .data import Encoding
from .errors import ConfigurationError

__all__ = [
    "TreeConfig",
    "RegressionTree",
    "SplitCandidate",
    "impurity",
    "best_split",
    "fit_tree",
    "predict_tree",
    "tree_stats",
    "dump_tree",
    "tree_to_dict",
    "tree_from_dict",
]

# Impurity decreases below this are float noise from the sufficient-statistic
# arithmetic, not signal: with integer targets any real decrease on these
# node sizes is >= ~1e-6.
MIN_DECREASE_EPS = 1e-12
# Nodes whose impurity is below this are treated as pure.
PURITY_EPS = 1e-9

LEAF = -1


@dataclass(frozen=True)
class TreeConfig:
    min_samples_leaf: int = 1
    max_depth: Optional[int] = None
    min_impurity_decrease: float = 0.0
    feature_subset_size: Optional[int] = None

    def __post_init__(self):
        if self.min_samples_leaf < 1:
            raise ConfigurationError(f"min_samples_leaf must be >= 1, got {self.min_samples_leaf}")
        if self.max_depth is not None and self.max_depth < 0:
            raise ConfigurationError(f"max_depth must be >= 0, got {self.max_depth}")
        if self.min_impurity_decrease < 0:
            raise ConfigurationError("min_impurity_decrease must be >= 0")
        if self.feature_subset_size is not None and self.feature_subset_size < 1:
            raise ConfigurationError("feature_subset_size must be >= 1")


class SplitCandidate(NamedTuple):
    feature: int
    threshold: float
    decrease: float


@njit(cache=True)
def _split_search(X, Y, idx, start, end, feats, min_samples_leaf, min_decrease, s, ss, parent_imp):
    """Best (feature, threshold) for the rows idx[start:end].

    Returns (feature, threshold, decrease); feature == -1 when no candidate
    reduces impurity by more than the noise floor and ``min_decrease``.
    """
    m = end - start
    l = Y.shape[1]
    best_f = -1
    best_t = 0.0
    best_dec = 0.0
    xv = np.empty(m)
    ls = np.empty(l)
    lss = np.empty(l)
    for fi in range(feats.shape[0]):
        f = feats[fi]
        for i in range(m):
            xv[i] = X[idx[start + i], f]
        order = np.argsort(xv)
        for j in range(l):
            ls[j] = 0.0
            lss[j] = 0.0
        for pos in range(m - 1):
            r = idx[start + order[pos]]
            for j in range(l):
                v = Y[r, j]
                ls[j] += v
                lss[j] += v * v
            x_here = xv[order[pos]]
            x_next = xv[order[pos + 1]]
            if x_here == x_next:
                continue
            nl = pos + 1
            nr = m - nl
            if nl < min_samples_leaf or nr < min_samples_leaf:
                continue
            left_imp = 0.0
            right_imp = 0.0
            for j in range(l):
                ml = ls[j] / nl
                left_imp += lss[j] / nl - ml * ml
                mr = (s[j] - ls[j]) / nr
                right_imp += (ss[j] - lss[j]) / nr - mr * mr
            left_imp /= l
            right_imp /= l
            weighted = (nl * left_imp + nr * right_imp) / m
            dec = parent_imp - weighted
            if dec > best_dec and dec > MIN_DECREASE_EPS and dec >= min_decrease:
                best_dec = dec
                best_f = f
                best_t = 0.5 * (x_here + x_next)
    return best_f, best_t, best_dec


@njit(cache=True)
def _node_stats(Y, idx, start, end, s, ss):
    l = Y.shape[1]
    for j in range(l):
        s[j] = 0.0
        ss[j] = 0.0
    for i in range(start, end):
        r = idx[i]
        for j in range(l):
            v = Y[r, j]
            s[j] += v
            ss[j] += v * v
    m = end - start
    imp = 0.0
    for j in range(l):
        mean = s[j] / m
        imp += ss[j] / m - mean * mean
    imp /= l
    if imp < 0.0:
        imp = 0.0
    return imp


@njit(cache=True)
def _grow(X, Y, min_samples_leaf, max_depth, min_decrease, max_features, seed):
    n, k = X.shape
    l = Y.shape[1]
    subsetting = max_features < k
    if subsetting:
        np.random.seed(seed)

    cap = 2 * n + 1
    feature = np.full(cap, LEAF, np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, LEAF, np.int64)
    right = np.full(cap, LEAF, np.int64)
    n_node = np.zeros(cap, np.int64)
    node_imp = np.zeros(cap)
    node_depth = np.zeros(cap, np.int64)
    leaf_of = np.full(cap, LEAF, np.int64)
    leaf_values = np.zeros((n, l))

    idx = np.arange(n)
    buf = np.empty(n, np.int64)
    s = np.empty(l)
    ss = np.empty(l)
    all_feats = np.arange(k)

    stack_node = np.empty(cap, np.int64)
    stack_start = np.empty(cap, np.int64)
    stack_end = np.empty(cap, np.int64)
    stack_depth = np.empty(cap, np.int64)
    sp = 0
    stack_node[sp] = 0
    stack_start[sp] = 0
    stack_end[sp] = n
    stack_depth[sp] = 0
    sp += 1
    node_count = 1
    leaf_count = 0
    depth_reached = 0

    while sp > 0:
        sp -= 1
        node = stack_node[sp]
        start = stack_start[sp]
        end = stack_end[sp]
        depth = stack_depth[sp]
        m = end - start

        imp = _node_stats(Y, idx, start, end, s, ss)
        n_node[node] = m
        node_imp[node] = imp
        node_depth[node] = depth
        if depth > depth_reached:
            depth_reached = depth

        f = LEAF
        t = 0.0
        can_split = m >= 2 * min_samples_leaf and imp > PURITY_EPS
        if max_depth >= 0 and depth >= max_depth:
            can_split = False
        if can_split:
            if subsetting:
                feats = np.sort(np.random.permutation(k)[:max_features])
            else:
                feats = all_feats
            f, t, _ = _split_search(
                X, Y, idx, start, end, feats, min_samples_leaf, min_decrease, s, ss, imp
            )

        if f == LEAF:
            li = leaf_count
            leaf_count += 1
            leaf_of[node] = li
            for j in range(l):
                leaf_values[li, j] = s[j] / m
            continue

        nl = 0
        for i in range(start, end):
            if X[idx[i], f] <= t:
                buf[nl] = idx[i]
                nl += 1
        nr = nl
        for i in range(start, end):
            if X[idx[i], f] > t:
                buf[nr] = idx[i]
                nr += 1
        idx[start:end] = buf[:m]

        feature[node] = f
        threshold[node] = t
        lid = node_count
        rid = node_count + 1
        node_count += 2
        left[node] = lid
        right[node] = rid
        stack_node[sp] = rid
        stack_start[sp] = start + nl
        stack_end[sp] = end
        stack_depth[sp] = depth + 1
        sp += 1
        stack_node[sp] = lid
        stack_start[sp] = start
        stack_end[sp] = start + nl
        stack_depth[sp] = depth + 1
        sp += 1

    return (
        feature[:node_count].copy(),
        threshold[:node_count].copy(),
        left[:node_count].copy(),
        right[:node_count].copy(),
        n_node[:node_count].copy(),
        node_imp[:node_count].copy(),
        node_depth[:node_count].copy(),
        leaf_of[:node_count].copy(),
        leaf_values[:leaf_count].copy(),
        depth_reached,
    )


@njit(cache=True)
def _predict(feature, threshold, left, right, leaf_of, leaf_values, X):
    n = X.shape[0]
    l = leaf_values.shape[1]
    out = np.empty((n, l))
    for i in range(n):
        node = 0
        while feature[node] != LEAF:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        li = leaf_of[node]
        for j in range(l):
            out[i, j] = leaf_values[li, j]
    return out


@dataclass
class RegressionTree:
    """Fitted tree as flat node arrays (feature == -1 marks a leaf)."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    n_node_samples: np.ndarray
    impurity: np.ndarray
    depth: np.ndarray
    leaf_of: np.ndarray
    leaf_values: np.ndarray
    max_depth_reached: int
    config: TreeConfig = field(default_factory=TreeConfig)
    d: Optional[int] = None
    encoding: Optional[Encoding] = None

    @property
    def node_count(self) -> int:
        return self.feature.shape[0]

    @property
    def leaf_count(self) -> int:
        return self.leaf_values.shape[0]

    @property
    def internal_count(self) -> int:
        return self.node_count - self.leaf_count

    @property
    def n_outputs(self) -> int:
        return self.leaf_values.shape[1]

    @property
    def n_features(self) -> int:
        return int(self.feature.max()) + 1 if self.internal_count else 1


def _as_xy(X, Y):
    X = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
    Y = np.ascontiguousarray(np.asarray(Y, dtype=np.float64))
    if X.ndim != 2 or Y.ndim != 2:
        raise ConfigurationError("X and Y must be 2-D arrays")
    if X.shape[0] != Y.shape[0]:
        raise ConfigurationError(f"X has {X.shape[0]} rows but Y has {Y.shape[0]}")
    if X.shape[0] < 1:
        raise ConfigurationError("need at least one training row")
    return X, Y


def impurity(targets) -> float:
    """Mean over outputs of the population variance of each output."""
    Y = np.asarray(targets, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y.reshape(-1, 1)
    if Y.shape[0] < 1:
        raise ConfigurationError("impurity of an empty target set is undefined")
    per_output = np.mean(Y**2, axis=0) - np.mean(Y, axis=0) ** 2
    return float(max(np.mean(per_output), 0.0))


def best_split(
    X,
    Y,
    rows: Optional[Sequence[int]] = None,
    features: Optional[Sequence[int]] = None,
    config: TreeConfig = TreeConfig(),
) -> Optional[SplitCandidate]:
    """Best (feature, threshold) over the given rows and candidate features.

    Thresholds are midpoints between consecutive distinct sorted values.
    Returns None when no split clears ``min_impurity_decrease`` (or every
    candidate column is constant, or the child size constraint fails).
    """
    X, Y = _as_xy(X, Y)
    idx = np.arange(X.shape[0], dtype=np.int64) if rows is None else np.asarray(rows, dtype=np.int64)
    if idx.shape[0] < 2:
        raise ConfigurationError("best_split needs at least two rows")
    feats = (
        np.arange(X.shape[1], dtype=np.int64)
        if features is None
        else np.unique(np.asarray(features, dtype=np.int64))
    )
    if feats.size and (feats.min() < 0 or feats.max() >= X.shape[1]):
        raise ConfigurationError("candidate feature index out of range")
    s = np.empty(Y.shape[1])
    ss = np.empty(Y.shape[1])
    parent_imp = _node_stats(Y, idx, 0, idx.shape[0], s, ss)
    f, t, dec = _split_search(
        X, Y, idx, 0, idx.shape[0], feats,
        config.min_samples_leaf, config.min_impurity_decrease, s, ss, parent_imp,
    )
    if f == LEAF:
        return None
    return SplitCandidate(int(f), float(t), float(dec))


def fit_tree(
    X,
    Y,
    config: TreeConfig = TreeConfig(),
    seed: int = 0,
    *,
    d: Optional[int] = None,
    encoding: Optional[Encoding] = None,
) -> RegressionTree:
    """Grow a tree by greedy recursive splitting until no valid split remains.

    Deterministic given (X, Y, config); the seed is consumed only when
    ``feature_subset_size`` restricts the per-node candidate features.
    """
    X, Y = _as_xy(X, Y)
    k = X.shape[1]
    max_features = config.feature_subset_size if config.feature_subset_size is not None else k
    if max_features > k:
        raise ConfigurationError(f"feature_subset_size {max_features} exceeds {k} features")
    max_depth = -1 if config.max_depth is None else config.max_depth
    arrays = _grow(
        X, Y,
        config.min_samples_leaf, max_depth, config.min_impurity_decrease,
        max_features, np.uint32(seed & 0xFFFFFFFF),
    )
    return RegressionTree(
        feature=arrays[0],
        threshold=arrays[1],
        left=arrays[2],
        right=arrays[3],
        n_node_samples=arrays[4],
        impurity=arrays[5],
        depth=arrays[6],
        leaf_of=arrays[7],
        leaf_values=arrays[8],
        max_depth_reached=int(arrays[9]),
        config=config,
        d=d,
        encoding=Encoding(encoding) if encoding is not None else None,
    )


def predict_tree(tree: RegressionTree, x) -> np.ndarray:
    """Mean vector of the leaf each row reaches (left iff value <= threshold).

    Accepts a single feature row or an (n, k) batch; returns (10,) or (n, 10).
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x.reshape(1, -1)
    if tree.internal_count and x.shape[1] <= int(tree.feature.max()):
        raise ConfigurationError(
            f"feature row has {x.shape[1]} columns but the tree splits on feature {int(tree.feature.max())}"
        )
    out = _predict(
        tree.feature, tree.threshold, tree.left, tree.right,
        tree.leaf_of, tree.leaf_values, np.ascontiguousarray(x),
    )
    return out[0] if single else out


def tree_stats(tree: RegressionTree) -> dict:
    return {
        "leaf_count": tree.leaf_count,
        "internal_count": tree.internal_count,
        "max_depth": tree.max_depth_reached,
    }


def _feature_name(tree: RegressionTree, f: int) -> str:
    if tree.encoding is Encoding.ORIGINAL:
        return "Number"
    if tree.encoding is Encoding.MODIFIED:
        return f"Digit {f + 1}"
    return f"x{f}"


def dump_tree(tree: RegressionTree, max_nodes: int = 6) -> str:
    """Breadth-first text rendering of up to ``max_nodes`` nodes."""
    if max_nodes < 1:
        raise ConfigurationError("max_nodes must be >= 1")
    lines = []
    queue = deque([(0, 0)])
    printed = 0
    next_id = 0
    while queue and printed < max_nodes:
        node, depth = queue.popleft()
        node_id = next_id
        next_id += 1
        printed += 1
        if tree.feature[node] == LEAF:
            mean = tree.leaf_values[tree.leaf_of[node]]
            mean_text = "[" + ", ".join(f"{v:.3f}" for v in mean) + "]"
            lines.append(
                f"#{node_id} [depth={depth}] leaf samples={tree.n_node_samples[node]} mean={mean_text}"
            )
        else:
            lines.append(
                f"#{node_id} [depth={depth}] {_feature_name(tree, int(tree.feature[node]))}"
                f" <= {tree.threshold[node]:.6g}"
                f" | samples={tree.n_node_samples[node]} impurity={tree.impurity[node]:.6f}"
            )
            queue.append((int(tree.left[node]), depth + 1))
            queue.append((int(tree.right[node]), depth + 1))
    return "\n".join(lines)


def tree_to_dict(tree: RegressionTree) -> dict:
    return {
        "kind": "regression_tree",
        "d": tree.d,
        "encoding": tree.encoding.value if tree.encoding else None,
        "config": {
            "min_samples_leaf": tree.config.min_samples_leaf,
            "max_depth": tree.config.max_depth,
            "min_impurity_decrease": tree.config.min_impurity_decrease,
            "feature_subset_size": tree.config.feature_subset_size,
        },
        "max_depth_reached": tree.max_depth_reached,
        "nodes": {
            "feature": tree.feature.tolist(),
            "threshold": tree.threshold.tolist(),
            "left": tree.left.tolist(),
            "right": tree.right.tolist(),
            "n_samples": tree.n_node_samples.tolist(),
            "impurity": tree.impurity.tolist(),
            "depth": tree.depth.tolist(),
            "leaf_of": tree.leaf_of.tolist(),
        },
        "leaf_values": tree.leaf_values.tolist(),
    }


def tree_from_dict(payload: dict) -> RegressionTree:
    if payload.get("kind") != "regression_tree":
        raise ConfigurationError(f"not a serialized tree: kind={payload.get('kind')!r}")
    nodes = payload["nodes"]
    cfg = payload.get("config", {})
    return RegressionTree(
        feature=np.array(nodes["feature"], dtype=np.int64),
        threshold=np.array(nodes["threshold"], dtype=np.float64),
        left=np.array(nodes["left"], dtype=np.int64),
        right=np.array(nodes["right"], dtype=np.int64),
        n_node_samples=np.array(nodes["n_samples"], dtype=np.int64),
        impurity=np.array(nodes["impurity"], dtype=np.float64),
        depth=np.array(nodes["depth"], dtype=np.int64),
        leaf_of=np.array(nodes["leaf_of"], dtype=np.int64),
        leaf_values=np.array(payload["leaf_values"], dtype=np.float64),
        max_depth_reached=payload["max_depth_reached"],
        config=TreeConfig(
            min_samples_leaf=cfg.get("min_samples_leaf", 1),
            max_depth=cfg.get("max_depth"),
            min_impurity_decrease=cfg.get("min_impurity_decrease", 0.0),
            feature_subset_size=cfg.get("feature_subset_size"),
        ),
        d=payload.get("d"),
        encoding=Encoding(payload["encoding"]) if payload.get("encoding") else None,
    )


def save_tree(tree: RegressionTree, path) -> None:
    with open(path, "w") as fh:
        json.dump(tree_to_dict(tree), fh)


def load_tree(path) -> RegressionTree:
    with open(path) as fh:
        return tree_from_dict(json.load(fh))
