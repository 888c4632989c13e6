"""Bagged ensembles of regression trees.

Each member tree trains on its own bootstrap resample (n rows drawn with
replacement) with per-split random feature subsets, and the forest predicts
the arithmetic mean of member predictions.  Per-tree seeds are derived
deterministically from the master seed, so fits are reproducible and could
be parallelized without changing results.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cart import TreeConfig, fit_tree, predict_tree, tree_from_dict, tree_to_dict
from .data import Encoding
from .errors import ConfigurationError
from .seeding import derive_seed

__all__ = ["ForestConfig", "RandomForest", "fit_forest", "predict_forest"]


@dataclass(frozen=True)
class ForestConfig:
    """Forest hyperparameters.

    ``feature_subset_size=None`` resolves to ceil(k/3) at fit time, which
    for the single-column encoding degenerates to using the one feature.
    """

    n_trees: int = 100
    bootstrap: bool = True
    feature_subset_size: Optional[int] = None
    seed: int = 0
    tree: TreeConfig = field(default_factory=TreeConfig)

    def __post_init__(self):
        if self.n_trees < 1:
            raise ConfigurationError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.feature_subset_size is not None and self.feature_subset_size < 1:
            raise ConfigurationError("feature_subset_size must be >= 1")

    def resolve_subset_size(self, k: int) -> int:
        size = self.feature_subset_size
        if size is None:
            size = int(np.ceil(k / 3))
        if size > k:
            raise ConfigurationError(f"feature_subset_size {size} exceeds {k} features")
        return size


@dataclass
class RandomForest:
    trees: list
    tree_seeds: list
    config: ForestConfig
    d: Optional[int] = None
    encoding: Optional[Encoding] = None

    @property
    def n_trees(self) -> int:
        return len(self.trees)


def _bootstrap_indices(seed: int, n: int) -> np.ndarray:
    """The resample a tree with this seed trains on (replayable for audits)."""
    return np.random.default_rng(seed).integers(0, n, size=n)


def fit_forest(
    X,
    Y,
    config: ForestConfig = ForestConfig(),
    *,
    d: Optional[int] = None,
    encoding: Optional[Encoding] = None,
) -> RandomForest:
    X = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
    Y = np.ascontiguousarray(np.asarray(Y, dtype=np.float64))
    if X.shape[0] != Y.shape[0] or X.shape[0] < 1:
        raise ConfigurationError("X and Y must be non-empty with matching row counts")
    n, k = X.shape
    subset = config.resolve_subset_size(k)
    tree_config = TreeConfig(
        min_samples_leaf=config.tree.min_samples_leaf,
        max_depth=config.tree.max_depth,
        min_impurity_decrease=config.tree.min_impurity_decrease,
        feature_subset_size=subset if subset < k else None,
    )
    trees = []
    tree_seeds = []
    for t in range(config.n_trees):
        seed = derive_seed(config.seed, "tree", t)
        tree_seeds.append(seed)
        if config.bootstrap:
            rows = _bootstrap_indices(seed, n)
            Xt, Yt = X[rows], Y[rows]
        else:
            Xt, Yt = X, Y
        trees.append(fit_tree(Xt, Yt, tree_config, seed=seed, d=d, encoding=encoding))
    return RandomForest(trees=trees, tree_seeds=tree_seeds, config=config, d=d,
                        encoding=Encoding(encoding) if encoding is not None else None)


def predict_forest(forest: RandomForest, x) -> np.ndarray:
    """Arithmetic mean over member trees of their leaf predictions."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x.reshape(1, -1)
    total = np.zeros((x.shape[0], forest.trees[0].n_outputs))
    for tree in forest.trees:
        total += predict_tree(tree, x)
    out = total / forest.n_trees
    return out[0] if single else out


def forest_to_dict(forest: RandomForest) -> dict:
    return {
        "kind": "random_forest",
        "d": forest.d,
        "encoding": forest.encoding.value if forest.encoding else None,
        "config": {
            "n_trees": forest.config.n_trees,
            "bootstrap": forest.config.bootstrap,
            "feature_subset_size": forest.config.feature_subset_size,
            "seed": forest.config.seed,
        },
        "tree_seeds": list(forest.tree_seeds),
        "trees": [tree_to_dict(t) for t in forest.trees],
    }


def forest_from_dict(payload: dict) -> RandomForest:
    if payload.get("kind") != "random_forest":
        raise ConfigurationError(f"not a serialized forest: kind={payload.get('kind')!r}")
    cfg = payload["config"]
    return RandomForest(
        trees=[tree_from_dict(t) for t in payload["trees"]],
        tree_seeds=list(payload["tree_seeds"]),
        config=ForestConfig(
            n_trees=cfg["n_trees"],
            bootstrap=cfg["bootstrap"],
            feature_subset_size=cfg.get("feature_subset_size"),
            seed=cfg.get("seed", 0),
        ),
        d=payload.get("d"),
        encoding=Encoding(payload["encoding"]) if payload.get("encoding") else None,
    )


def save_forest(forest: RandomForest, path) -> None:
    with open(path, "w") as fh:
        json.dump(forest_to_dict(forest), fh)


def load_forest(path) -> RandomForest:
    with open(path) as fh:
        return forest_from_dict(json.load(fh))
