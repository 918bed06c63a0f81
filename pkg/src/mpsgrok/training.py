"""Sweep-level training loop and per-sweep trace records."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diagnostics import SweepDiagnostics, compute_diagnostics
from .mps import (EncodedDataset, MpsClassifier, SweepEngine, accuracy,
                  predict_batch)


@dataclass(frozen=True)
class SweepConfig:
    learning_rate: float = 1e-3
    n_sweeps: int = 30
    chi_max: int = 10
    rel_threshold: float = 1e-12
    rng_seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.n_sweeps < 1:
            raise ValueError("n_sweeps must be >= 1")
        if self.chi_max < 1:
            raise ValueError("chi_max must be >= 1")


@dataclass
class SweepRecord:
    sweep: int
    cost: float
    acc_train: float
    acc_test: float
    acc_train_label: list[float]
    acc_test_label: list[float]
    diagnostics: SweepDiagnostics
    train_scores: np.ndarray  # (T_train, L)
    test_scores: np.ndarray  # (T_test, L)
    discarded_weight: float


def evaluate(mps: MpsClassifier, data: EncodedDataset):
    scores = predict_batch(mps, data)
    overall, per = accuracy(scores, data.labels, mps.label_dim)
    return scores, overall, per


def sweep(mps: MpsClassifier, train: EncodedDataset, config: SweepConfig,
          test: EncodedDataset | None = None, engine: SweepEngine | None = None,
          index: int = 0):
    """One right-then-left optimization pass plus the per-sweep measurements.

    Returns ``(new_mps, SweepRecord)``; the input classifier is left untouched.
    """
    engine = engine or SweepEngine(train)
    new = MpsClassifier(list(mps.sites), mps.center, mps.label_dim, mps.chi_max)
    args = (config.learning_rate, config.chi_max, config.rel_threshold)
    right = engine.right_pass(new, *args)
    left = engine.left_pass(new, *args)

    tr_scores, tr_acc, tr_per = evaluate(new, train)
    cost = 0.5 * float(np.sum((tr_scores - train.one_hot()) ** 2))
    if test is not None and len(test):
        te_scores, te_acc, te_per = evaluate(new, test)
    else:
        te_scores = np.zeros((0, new.label_dim))
        te_acc, te_per = float("nan"), [float("nan")] * new.label_dim
    diag = compute_diagnostics(new, left)
    discarded = float(sum(r.discarded_weight for r in right + left))
    record = SweepRecord(index, cost, tr_acc, te_acc, tr_per, te_per, diag,
                         tr_scores, te_scores, discarded)
    return new, record
