"""Quantum feature maps: raw samples to unit-norm single-qudit states."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from .sim import QuditState

__all__ = [
    "RffMap",
    "SoftmaxMap",
    "make_anchor_grid",
    "rff_map",
    "softmax_map",
    "feature_map_from_dict",
]

_ZERO_FEATURE_TOL = 1e-12


def _as_batch(x, input_dim: int) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim <= 1
    arr = np.atleast_1d(arr).reshape(1, -1) if single else arr
    if arr.ndim != 2 or arr.shape[1] != input_dim:
        raise ValueError(f"expected samples with {input_dim} components, got shape {np.shape(x)}")
    return arr, single


@dataclass(frozen=True, eq=False)
class RffMap:
    """Normalized random Fourier features for the Gaussian kernel ``exp(-gamma |x-y|^2)``.

    ``z_i = cos(w_i . x + b_i)`` with ``w_i ~ N(0, 2 gamma I)`` and
    ``b_i ~ U[0, 2 pi)``, then ``z / |z|``. Weights and offsets are drawn
    from ``numpy.random.Generator(PCG64(seed))``, weights first, so the same
    ``(input_dim, dim, gamma, seed)`` always reproduces them bit-exactly.
    """

    input_dim: int
    dim: int
    gamma: float
    seed: int = 0
    weights: np.ndarray = field(init=False, repr=False)
    offsets: np.ndarray = field(init=False, repr=False)

    kind = "rff"

    def __post_init__(self):
        if self.input_dim < 1 or self.dim < 2:
            raise ValueError("input_dim must be >= 1 and dim >= 2")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        rng = np.random.default_rng(self.seed)
        w = rng.normal(0.0, np.sqrt(2.0 * self.gamma), size=(self.dim, self.input_dim))
        b = rng.uniform(0.0, 2.0 * np.pi, size=self.dim)
        w.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "offsets", b)

    def transform(self, x) -> np.ndarray:
        """Feature vectors for one sample (shape ``(dim,)``) or a batch (``(n, dim)``)."""
        arr, single = _as_batch(x, self.input_dim)
        z = np.cos(arr @ self.weights.T + self.offsets)
        norms = np.linalg.norm(z, axis=1, keepdims=True)
        if np.any(norms < _ZERO_FEATURE_TOL):
            raise ValueError("random Fourier feature vector vanished; cannot normalize")
        z = z / norms
        return z[0] if single else z

    def __call__(self, x) -> QuditState:
        return QuditState((self.dim,), self.transform(x))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "input_dim": self.input_dim,
            "dim": self.dim,
            "gamma": float(self.gamma),
            "seed": int(self.seed),
        }


@dataclass(frozen=True, eq=False)
class SoftmaxMap:
    """Square-root softmax responsibilities over a fixed set of anchor points.

    ``p_i(x) = softmax_i(-beta |x - anchor_i|^2)`` and the state amplitudes are
    ``sqrt(p_i)``.
    """

    anchors: np.ndarray = field(repr=False)
    beta: float = 1.0

    kind = "softmax"

    def __post_init__(self):
        a = np.array(self.anchors, dtype=np.float64)
        if a.ndim == 1:
            a = a[:, None]
        if a.ndim != 2 or a.shape[0] < 2:
            raise ValueError("need at least two anchors as an (n_anchors, input_dim) array")
        if len(np.unique(a, axis=0)) != len(a):
            raise ValueError("anchors must be distinct")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        a.flags.writeable = False
        object.__setattr__(self, "anchors", a)

    @property
    def dim(self) -> int:
        return self.anchors.shape[0]

    @property
    def input_dim(self) -> int:
        return self.anchors.shape[1]

    def transform(self, x) -> np.ndarray:
        arr, single = _as_batch(x, self.input_dim)
        sq = ((arr[:, None, :] - self.anchors[None, :, :]) ** 2).sum(axis=-1)
        logits = -self.beta * sq
        logits -= logits.max(axis=1, keepdims=True)
        p = np.exp(logits)
        p /= p.sum(axis=1, keepdims=True)
        amps = np.sqrt(p)
        return amps[0] if single else amps

    def __call__(self, x) -> QuditState:
        return QuditState((self.dim,), self.transform(x))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "beta": float(self.beta),
            "anchors": self.anchors.tolist(),
        }


def rff_map(params: RffMap, x) -> QuditState:
    return params(x)


def softmax_map(params: SoftmaxMap, x) -> QuditState:
    return params(x)


def make_anchor_grid(bounds: Sequence[Tuple[float, float]], counts: Sequence[int]) -> np.ndarray:
    """Regular grid of anchors, one axis per ``(lo, hi)`` interval.

    An axis with count 1 gets the interval midpoint. Rows are ordered with
    the last axis varying fastest.

    >>> make_anchor_grid([(0, 1), (0, 1)], (3, 3))[4]
    array([0.5, 0.5])
    """
    if len(bounds) == 0:
        raise ValueError("bounds must not be empty")
    if len(bounds) != len(counts):
        raise ValueError("need one count per axis")
    axes = []
    for (lo, hi), n in zip(bounds, counts):
        if n < 1:
            raise ValueError(f"grid counts must be >= 1, got {n}")
        axes.append(np.array([(lo + hi) / 2.0]) if n == 1 else np.linspace(lo, hi, n))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def feature_map_from_dict(data: dict):
    kind = data["kind"]
    if kind == "rff":
        return RffMap(int(data["input_dim"]), int(data["dim"]), float(data["gamma"]), int(data["seed"]))
    if kind == "softmax":
        return SoftmaxMap(np.asarray(data["anchors"], dtype=np.float64), float(data["beta"]))
    raise ValueError(f"unknown feature map kind {kind!r}")
