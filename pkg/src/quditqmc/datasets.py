"""
Seeded synthetic datasets: a 1-D two-Gaussian mixture with its analytic pdf,
test grids, moons and circles.

All randomness comes from ``numpy.random.Generator(PCG64(seed))``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import ndtr

__all__ = [
    "DEFAULT_MIXTURE",
    "LabeledDataset",
    "gen_gaussian_mixture_1d",
    "mixture_pdf",
    "mixture_cdf",
    "gen_test_grid",
    "gen_moons",
    "gen_circles",
    "train_test_split",
    "write_csv",
    "read_csv",
    "format_float",
]

DEFAULT_MIXTURE = {"weights": (0.4, 0.6), "means": (-1.0, 1.5), "stddevs": (0.6, 0.4)}


@dataclass(eq=False)
class LabeledDataset:
    """Samples as an ``(n, k)`` array, optional integer labels, and the generator params."""

    samples: np.ndarray
    labels: Optional[np.ndarray] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim == 1:
            self.samples = self.samples[:, None]
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (len(self.samples),):
                raise ValueError(f"{len(self.samples)} samples but {self.labels.size} labels")

    def __len__(self):
        return len(self.samples)

    @property
    def n_features(self) -> int:
        return self.samples.shape[1]

    def subset(self, idx) -> "LabeledDataset":
        labels = None if self.labels is None else self.labels[idx]
        return LabeledDataset(self.samples[idx], labels, dict(self.params))


def _check_mixture(weights, means, stddevs):
    weights = np.asarray(weights, dtype=np.float64)
    means = np.asarray(means, dtype=np.float64)
    stddevs = np.asarray(stddevs, dtype=np.float64)
    if not (weights.shape == means.shape == stddevs.shape) or weights.ndim != 1:
        raise ValueError("weights, means and stddevs must be equal-length 1-D sequences")
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise ValueError(f"mixture weights must be nonnegative and sum to 1, got {weights.tolist()}")
    if np.any(stddevs <= 0):
        raise ValueError("standard deviations must be positive")
    return weights, means, stddevs


def mixture_pdf(x, weights=DEFAULT_MIXTURE["weights"], means=DEFAULT_MIXTURE["means"],
                stddevs=DEFAULT_MIXTURE["stddevs"]) -> np.ndarray:
    w, mu, sd = _check_mixture(weights, means, stddevs)
    x = np.asarray(x, dtype=np.float64)[..., None]
    z = (x - mu) / sd
    return np.sum(w * np.exp(-0.5 * z**2) / (sd * np.sqrt(2 * np.pi)), axis=-1)


def mixture_cdf(x, weights=DEFAULT_MIXTURE["weights"], means=DEFAULT_MIXTURE["means"],
                stddevs=DEFAULT_MIXTURE["stddevs"]) -> np.ndarray:
    w, mu, sd = _check_mixture(weights, means, stddevs)
    x = np.asarray(x, dtype=np.float64)[..., None]
    return np.sum(w * ndtr((x - mu) / sd), axis=-1)


def gen_gaussian_mixture_1d(
    n: int = 1000,
    weights: Sequence[float] = DEFAULT_MIXTURE["weights"],
    means: Sequence[float] = DEFAULT_MIXTURE["means"],
    stddevs: Sequence[float] = DEFAULT_MIXTURE["stddevs"],
    seed: int = 0,
) -> LabeledDataset:
    """Unlabeled draws: pick a component by weight, then sample it."""
    w, mu, sd = _check_mixture(weights, means, stddevs)
    rng = np.random.default_rng(seed)
    comp = rng.choice(len(w), size=n, p=w)
    x = rng.normal(mu[comp], sd[comp])
    params = {
        "kind": "mixture", "n": int(n), "weights": w.tolist(), "means": mu.tolist(),
        "stddevs": sd.tolist(), "seed": int(seed),
    }
    return LabeledDataset(x[:, None], None, params)


def gen_test_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """``n`` equally spaced points on ``[lo, hi]`` inclusive, as an ``(n, 1)`` array."""
    if not lo < hi:
        raise ValueError(f"need lo < hi, got {lo}, {hi}")
    if n < 2:
        raise ValueError("a grid needs at least two points")
    return np.linspace(lo, hi, n)[:, None]


def gen_moons(n: int = 2000, noise: float = 0.1, seed: int = 0) -> LabeledDataset:
    """Two interleaving half circles.

    Class 0 is the upper unit half circle ``(cos t, sin t)``; class 1 is the
    lower half circle ``(1 - cos t, 0.5 - sin t)``, both for ``t`` in
    ``[0, pi]``. Isotropic Gaussian noise of stddev ``noise`` is added.
    """
    if n < 2:
        raise ValueError("need at least two samples")
    if noise < 0:
        raise ValueError("noise must be nonnegative")
    n0 = n // 2
    n1 = n - n0
    t0 = np.linspace(0, np.pi, n0)
    t1 = np.linspace(0, np.pi, n1)
    x = np.concatenate([
        np.stack([np.cos(t0), np.sin(t0)], axis=1),
        np.stack([1.0 - np.cos(t1), 0.5 - np.sin(t1)], axis=1),
    ])
    y = np.concatenate([np.zeros(n0, dtype=np.int64), np.ones(n1, dtype=np.int64)])
    rng = np.random.default_rng(seed)
    if noise > 0:
        x = x + rng.normal(0.0, noise, size=x.shape)
    params = {"kind": "moons", "n": int(n), "noise": float(noise), "seed": int(seed)}
    return LabeledDataset(x, y, params)


def gen_circles(n: int = 2000, noise: float = 0.1, factor: float = 0.5, seed: int = 0) -> LabeledDataset:
    """Two concentric circles: class 0 has radius 1, class 1 radius ``factor``."""
    if n < 2:
        raise ValueError("need at least two samples")
    if noise < 0:
        raise ValueError("noise must be nonnegative")
    if not 0 < factor < 1:
        raise ValueError("factor must be in (0, 1)")
    n0 = n // 2
    n1 = n - n0
    t0 = np.linspace(0, 2 * np.pi, n0, endpoint=False)
    t1 = np.linspace(0, 2 * np.pi, n1, endpoint=False)
    x = np.concatenate([
        np.stack([np.cos(t0), np.sin(t0)], axis=1),
        factor * np.stack([np.cos(t1), np.sin(t1)], axis=1),
    ])
    y = np.concatenate([np.zeros(n0, dtype=np.int64), np.ones(n1, dtype=np.int64)])
    rng = np.random.default_rng(seed)
    if noise > 0:
        x = x + rng.normal(0.0, noise, size=x.shape)
    params = {"kind": "circles", "n": int(n), "noise": float(noise), "factor": float(factor),
              "seed": int(seed)}
    return LabeledDataset(x, y, params)


def train_test_split(dataset: LabeledDataset, train_count: int, seed: int = 0
                     ) -> Tuple[LabeledDataset, LabeledDataset]:
    """Seeded shuffle, then the first ``train_count`` samples train and the rest test."""
    n = len(dataset)
    if not 0 <= train_count <= n:
        raise ValueError(f"train_count must be in [0, {n}], got {train_count}")
    perm = np.random.default_rng(seed).permutation(n)
    return dataset.subset(perm[:train_count]), dataset.subset(perm[train_count:])


def format_float(x: float) -> str:
    """17 significant digits: enough for an exact float64 round trip."""
    return format(float(x), ".17g")


def write_csv(path, dataset: LabeledDataset):
    """Header row, one sample per line, label last when present."""
    k = dataset.n_features
    header = [f"x{i}" for i in range(k)]
    if dataset.labels is not None:
        header.append("label")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i, row in enumerate(dataset.samples):
            out = [format_float(v) for v in row]
            if dataset.labels is not None:
                out.append(str(int(dataset.labels[i])))
            writer.writerow(out)


def read_csv(path) -> LabeledDataset:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty CSV file") from None
        rows = [r for r in reader if r]
    has_label = bool(header) and header[-1] == "label"
    k = len(header) - has_label
    if k < 1:
        raise ValueError(f"{path}: no feature columns in header {header}")
    try:
        values = np.array([[float(v) for v in r] for r in rows], dtype=np.float64)
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric value ({exc})") from None
    if values.size == 0:
        values = values.reshape(0, len(header))
    if values.ndim != 2 or values.shape[1] != len(header):
        raise ValueError(f"{path}: rows do not all have {len(header)} columns")
    labels = values[:, -1].astype(np.int64) if has_label else None
    if has_label and not np.all(values[:, -1] == labels):
        raise ValueError(f"{path}: labels must be integers")
    return LabeledDataset(values[:, :k], labels)
