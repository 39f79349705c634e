"""Clustering and outlier-detection metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch

Array = np.ndarray


def _pair_counts(values: Array) -> Array:
    # C(c, 2) per group size c
    return values * (values - 1) // 2


def rand_index(labels_a: Array, labels_b: Array) -> float:
    """Plain (unadjusted) Rand index: agreeing pairs over all point pairs.

    Counts a pair as agreeing when both labelings place it together or both
    place it apart.  Label values are arbitrary; only the partitions matter.
    """
    a = np.asarray(labels_a).ravel()
    b = np.asarray(labels_b).ravel()
    if len(a) != len(b):
        raise LengthMismatch(f"label vectors have lengths {len(a)} and {len(b)}")
    n = len(a)
    if n < 2:
        raise ValueError("need at least two points to compare partitions")

    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)

    together_both = _pair_counts(table).sum()
    together_a = _pair_counts(table.sum(axis=1)).sum()
    together_b = _pair_counts(table.sum(axis=0)).sum()
    all_pairs = n * (n - 1) // 2
    agreements = all_pairs + 2 * together_both - together_a - together_b
    return float(agreements / all_pairs)


def outlier_f_measure(predicted: Array, truth: Array) -> float:
    """F-measure of the outlier class (True = outlier in both masks).

    Returns 0.0 when nothing is predicted as an outlier.
    """
    pred = np.asarray(predicted, dtype=bool).ravel()
    true = np.asarray(truth, dtype=bool).ravel()
    if len(pred) != len(true):
        raise LengthMismatch(f"masks have lengths {len(pred)} and {len(true)}")
    if not true.any():
        raise ValueError("ground truth marks no outliers")
    n_pred = int(pred.sum())
    if n_pred == 0:
        return 0.0
    tp = int((pred & true).sum())
    precision = tp / n_pred
    recall = tp / int(true.sum())
    if precision + recall == 0.0:
        return 0.0
    return float(2.0 * precision * recall / (precision + recall))


@dataclass
class MetricReport:
    """Per-trial metric values with their mean/std summary."""

    rand_values: list[float]
    f_values: list[float] | None = None

    @property
    def trials(self) -> int:
        return len(self.rand_values)

    @property
    def rand_index(self) -> float:
        return float(np.mean(self.rand_values))

    @property
    def rand_std(self) -> float:
        return float(np.std(self.rand_values))

    @property
    def f_measure(self) -> float | None:
        return None if self.f_values is None else float(np.mean(self.f_values))

    @property
    def f_std(self) -> float | None:
        return None if self.f_values is None else float(np.std(self.f_values))

    def as_dict(self) -> dict:
        out: dict = {
            "trials": self.trials,
            "rand": {"values": self.rand_values, "mean": self.rand_index, "std": self.rand_std},
        }
        if self.f_values is not None:
            out["f_measure"] = {"values": self.f_values, "mean": self.f_measure, "std": self.f_std}
        return out
