"""Decision-threshold tuning by k-fold cross-validation on balanced accuracy.

Both classifiers score instances with a number in [0, 1] (vote fraction,
posterior) and call an instance positive when the score meets a threshold.
The threshold is the only tuned parameter: for each fold, a model trained
on the remaining folds scores the held-out instances, and the grid value
maximizing mean held-out balanced accuracy wins (ties to the smallest).

Folds default to contiguous blocks in row order. Rows are built in time
order, so contiguous blocks are temporal blocks: labels span three-day
windows, and random folds would leak overlapping windows across folds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ValidationError
from .metrics import confusion, rates

TEMPORAL = "temporal"
RANDOM = "random"


@dataclass
class ThresholdSearch:
    threshold: float
    grid: np.ndarray
    mean_bac: np.ndarray          # mean held-out BAC per grid value
    fold_flags: list              # True where a fold had an undefined rate

    @property
    def best_bac(self) -> float:
        return float(self.mean_bac.max())


def fold_indices(n: int, folds: int, strategy: str = TEMPORAL, seed: int = 0) -> list:
    if folds < 2:
        raise ValidationError("need at least 2 folds")
    if n < folds:
        raise ValidationError(f"cannot split {n} rows into {folds} folds")
    if strategy == TEMPORAL:
        return [np.sort(part) for part in np.array_split(np.arange(n), folds)]
    if strategy == RANDOM:
        perm = np.random.default_rng(seed).permutation(n)
        return [np.sort(part) for part in np.array_split(perm, folds)]
    raise ValidationError(f"unknown fold strategy {strategy!r}")


def crossval_threshold(
    score_factory: Callable,
    X: np.ndarray,
    y: np.ndarray,
    grid,
    folds: int = 4,
    strategy: str = TEMPORAL,
    seed: int = 0,
) -> ThresholdSearch:
    """Pick the score threshold maximizing mean held-out balanced accuracy.

    `score_factory(X_train, y_train, fold_index)` must return a function
    scoring a feature matrix; fold models are the factory's business, so
    each fold can derive its own training seed.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValidationError("threshold grid must be a nonempty 1-d array")
    if np.any(grid < 0) or np.any(grid > 1):
        raise ValidationError("threshold grid must lie in [0, 1]")
    grid = np.unique(grid)
    y = np.asarray(y)
    parts = fold_indices(y.size, folds, strategy, seed)
    bac_per_fold = np.empty((len(parts), grid.size))
    flags = []
    for f, held in enumerate(parts):
        mask = np.ones(y.size, dtype=bool)
        mask[held] = False
        scorer = score_factory(X[mask], y[mask], f)
        held_scores = np.asarray(scorer(X[held]), dtype=float)
        held_y = y[held]
        flagged = False
        for g, tau in enumerate(grid):
            r = rates(confusion(held_scores >= tau, held_y))
            bac_per_fold[f, g] = r.bac
            flagged = flagged or r.flagged
        flags.append(flagged)
    mean_bac = bac_per_fold.mean(axis=0)
    best = int(np.argmax(mean_bac))          # first max = smallest threshold
    return ThresholdSearch(float(grid[best]), grid, mean_bac, flags)
