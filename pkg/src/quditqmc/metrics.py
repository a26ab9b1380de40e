"""Evaluation metrics for classification and density-estimation runs."""

from __future__ import annotations

import numpy as np
from scipy.integrate import trapezoid

__all__ = ["classification_report", "density_report"]


def classification_report(predicted, truth, n_classes: int | None = None) -> dict:
    """Accuracy, per-class precision/recall and the confusion matrix.

    Rows of ``confusion`` are true classes, columns predicted classes.
    Precision of a never-predicted class is reported as 0.
    """
    predicted = np.asarray(predicted, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if predicted.shape != truth.shape:
        raise ValueError(f"{predicted.size} predictions for {truth.size} labels")
    if predicted.size == 0:
        raise ValueError("nothing to evaluate")
    if n_classes is None:
        n_classes = int(max(predicted.max(), truth.max())) + 1
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(confusion, (truth, predicted), 1)
    tp = np.diag(confusion)
    predicted_counts = confusion.sum(axis=0)
    true_counts = confusion.sum(axis=1)
    precision = np.divide(tp, predicted_counts, out=np.zeros(n_classes), where=predicted_counts > 0)
    recall = np.divide(tp, true_counts, out=np.zeros(n_classes), where=true_counts > 0)
    return {
        "kind": "classification",
        "n": int(truth.size),
        "accuracy": float(tp.sum() / truth.size),
        "precision": precision.tolist(),
        "recall": recall.tolist(),
        "confusion": confusion.tolist(),
    }


def density_report(x, estimate, pdf) -> dict:
    """Pearson correlation with the reference pdf and mean absolute error.

    The circuit density is an unnormalized kernel score, so for the MAE it is
    rescaled to integrate to 1 over ``x`` (trapezoid rule) first.
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    estimate = np.asarray(estimate, dtype=np.float64).reshape(-1)
    pdf = np.asarray(pdf, dtype=np.float64).reshape(-1)
    if not (x.size == estimate.size == pdf.size) or x.size < 2:
        raise ValueError("x, estimate and pdf must have equal length >= 2")
    area = trapezoid(estimate, x)
    normalized = estimate / area if area > 0 else estimate
    return {
        "kind": "density",
        "n": int(x.size),
        "pearson": float(np.corrcoef(estimate, pdf)[0, 1]),
        "mae": float(np.mean(np.abs(normalized - pdf))),
        "min_density": float(estimate.min()),
    }
