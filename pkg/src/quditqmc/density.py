"""
Classical training phase: per-class density matrices, their spectral
decompositions, class priors and the eigenvalue-loading unitaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .sim import QuditState

__all__ = [
    "DensityError",
    "SpectralDecomposition",
    "ClassDensity",
    "DensityModel",
    "check_density_matrix",
    "build_density_matrix",
    "spectral_decompose",
    "synthesize_u_lambda",
    "fit",
    "expectation_oracle",
    "spectral_expectation",
    "expectation_matrix",
    "validate_model",
]

DENSITY_ATOL = 1e-10
CLAMP_LIMIT = 1e-9
PHASE_TOL = 1e-8


class DensityError(ValueError):
    """Raised when a matrix or eigenvalue vector violates density-matrix invariants."""


def _states_matrix(states, dim: Optional[int]) -> np.ndarray:
    if isinstance(states, np.ndarray) and states.ndim == 2:
        rows = states.astype(np.complex128)
    else:
        rows = []
        for s in states:
            if isinstance(s, QuditState):
                if s.n_wires != 1:
                    raise ValueError("training states must be single-wire")
                s = s.amplitudes
            rows.append(np.asarray(s, dtype=np.complex128).reshape(-1))
        if not rows:
            raise ValueError("cannot build a density matrix from zero states")
        lengths = {len(r) for r in rows}
        if len(lengths) != 1:
            raise ValueError(f"states have mixed dimensions {sorted(lengths)}")
        rows = np.stack(rows)
    if rows.shape[0] == 0:
        raise ValueError("cannot build a density matrix from zero states")
    if dim is not None and rows.shape[1] != dim:
        raise ValueError(f"states have dimension {rows.shape[1]}, expected {dim}")
    norms = np.linalg.norm(rows, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-9):
        raise ValueError("training states must have unit norm")
    return rows


def check_density_matrix(rho: np.ndarray, atol: float = DENSITY_ATOL) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity; return ``rho`` unchanged."""
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DensityError(f"density matrix must be square, got shape {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm >= atol:
        raise DensityError(f"density matrix is not Hermitian (max deviation {herm:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > atol:
        raise DensityError(f"density matrix trace is {tr}, expected 1")
    low = np.linalg.eigvalsh(rho).min()
    if low <= -atol:
        raise DensityError(f"density matrix has negative eigenvalue {low:.3e}")
    return rho


def build_density_matrix(states, dim: Optional[int] = None) -> np.ndarray:
    """Average outer product ``(1/N) sum_i |psi_i><psi_i|``.

    ``states`` may be a list of single-wire :class:`QuditState` objects, a list
    of vectors, or an ``(N, d)`` array of row vectors.
    """
    rows = _states_matrix(states, dim)
    rho = rows.T @ rows.conj() / rows.shape[0]
    # symmetrize away summation-order rounding
    return (rho + rho.conj().T) / 2.0


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """``rho = U diag(lambda) U^dag`` with eigenvalues sorted descending.

    Columns of ``eigenvectors`` are the eigenvectors.
    """

    eigenvectors: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def spectral_decompose(rho: np.ndarray) -> SpectralDecomposition:
    """Hermitian eigendecomposition with a deterministic canonical form.

    Eigenvalues are sorted descending (ties keep solver order), clamped at 0
    and renormalized to sum to 1. Each eigenvector's first component with
    magnitude above ``1e-8`` is rotated to be real and positive.
    """
    rho = check_density_matrix(rho)
    vals, vecs = np.linalg.eigh(rho)
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]

    shift = -vals[vals < 0].sum()
    if shift >= CLAMP_LIMIT:
        raise DensityError(f"negative eigenvalues sum to {-shift:.3e}; input is not a density matrix")
    vals = np.clip(vals, 0.0, None)
    vals = vals / vals.sum()

    for k in range(vecs.shape[1]):
        col = vecs[:, k]
        big = np.nonzero(np.abs(col) > PHASE_TOL)[0]
        if big.size:
            phase = col[big[0]] / abs(col[big[0]])
            vecs[:, k] = col / phase
            vecs[big[0], k] = abs(col[big[0]])
    vecs.flags.writeable = False
    vals.flags.writeable = False
    return SpectralDecomposition(vecs, vals)


def synthesize_u_lambda(eigenvalues: Sequence[float]) -> np.ndarray:
    """Real orthogonal matrix whose first column is ``sqrt(eigenvalues)``.

    Built as one Householder reflection sending ``|0>`` to ``|lambda>``. The
    pivot component ``s_0 - 1`` is evaluated as ``-(1 - s_0^2) / (1 + s_0)``
    to avoid cancellation when ``|lambda>`` is close to ``|0>``.
    """
    lam = np.asarray(eigenvalues, dtype=np.float64)
    if lam.ndim != 1 or lam.size < 2:
        raise DensityError("eigenvalue vector must be 1-D with at least two entries")
    if np.any(lam < 0):
        raise DensityError("eigenvalues must be nonnegative")
    if abs(lam.sum() - 1.0) > DENSITY_ATOL:
        raise DensityError(f"eigenvalues sum to {lam.sum()!r}, expected 1")
    lam = lam / lam.sum()
    s = np.sqrt(lam)
    tail = lam[1:].sum()
    d = lam.size
    if tail == 0.0:
        return np.eye(d)
    v = s.copy()
    v[0] = -tail / (1.0 + s[0])
    # v = s - |0>; H = I - 2 v v^T / (v . v) maps |0> to s
    return np.eye(d) - 2.0 * np.outer(v, v) / (v @ v)


@dataclass(frozen=True, eq=False)
class ClassDensity:
    """Trained artifacts for one class."""

    rho: np.ndarray = field(repr=False)
    spectrum: SpectralDecomposition
    u_lambda: np.ndarray = field(repr=False)
    prior: float
    count: int

    @property
    def eigenvectors(self) -> np.ndarray:
        return self.spectrum.eigenvectors

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.spectrum.eigenvalues

    @property
    def lambda_state(self) -> np.ndarray:
        return np.sqrt(self.spectrum.eigenvalues)


@dataclass(frozen=True, eq=False)
class DensityModel:
    """Per-class density matrices and priors plus the feature map that produced them.

    A single-class model (``n_classes == 1``, prior 1) is a density estimator.
    """

    classes: List[ClassDensity]
    feature_map: object = None

    def __post_init__(self):
        if not self.classes:
            raise ValueError("a model needs at least one class")
        dims = {c.rho.shape[0] for c in self.classes}
        if len(dims) != 1:
            raise ValueError(f"classes have mixed dimensions {sorted(dims)}")
        if self.n_classes > self.dim:
            raise ValueError(f"{self.n_classes} classes do not fit in a qudit of dimension {self.dim}")
        total = sum(c.prior for c in self.classes)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"priors sum to {total!r}, expected 1")
        if self.feature_map is not None and self.feature_map.dim != self.dim:
            raise ValueError(
                f"feature map emits dimension {self.feature_map.dim}, model has {self.dim}"
            )

    @property
    def dim(self) -> int:
        return self.classes[0].rho.shape[0]

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def priors(self) -> np.ndarray:
        return np.array([c.prior for c in self.classes])

    def rho(self, j: int) -> np.ndarray:
        return self.classes[j].rho

    def encode(self, x) -> QuditState:
        if self.feature_map is None:
            raise ValueError("model has no feature map; pass quantum states instead of raw samples")
        return self.feature_map(x)

    @classmethod
    def from_parts(
        cls,
        spectra: Sequence[SpectralDecomposition],
        priors: Sequence[float],
        counts: Optional[Sequence[int]] = None,
        feature_map=None,
        rhos: Optional[Sequence[np.ndarray]] = None,
        u_lambdas: Optional[Sequence[np.ndarray]] = None,
    ) -> "DensityModel":
        """Assemble a model from stored artifacts; missing pieces are recomputed."""
        n = len(spectra)
        counts = counts if counts is not None else [0] * n
        classes = []
        for j, spec in enumerate(spectra):
            if rhos is not None:
                rho = np.asarray(rhos[j], dtype=np.complex128)
            else:
                rho = spec.reconstruct()
                rho = (rho + rho.conj().T) / 2.0
            check_density_matrix(rho)
            if u_lambdas is not None:
                u_lam = np.asarray(u_lambdas[j])
            else:
                u_lam = synthesize_u_lambda(spec.eigenvalues)
            classes.append(ClassDensity(rho, spec, u_lam, float(priors[j]), int(counts[j])))
        return cls(classes, feature_map)


def _class_density(states: np.ndarray, prior: float) -> ClassDensity:
    rho = build_density_matrix(states)
    spec = spectral_decompose(rho)
    return ClassDensity(rho, spec, synthesize_u_lambda(spec.eigenvalues), prior, len(states))


def fit(samples, labels=None, feature_map=None, n_classes: Optional[int] = None) -> DensityModel:
    """Train one density matrix per class.

    ``samples`` are raw inputs passed through ``feature_map``; with
    ``feature_map=None`` they must already be unit-norm state vectors (rows).
    ``labels=None`` trains a single-class density estimator.
    """
    if feature_map is not None:
        states = np.asarray(feature_map.transform(samples), dtype=np.complex128)
        if states.ndim == 1:
            states = states[None, :]
    else:
        states = _states_matrix(samples, None)
    n = states.shape[0]
    if n == 0:
        raise ValueError("no training samples")
    if labels is None:
        labels = np.zeros(n, dtype=np.int64)
    labels = np.asarray(labels)
    if labels.shape != (n,):
        raise ValueError(f"{n} samples but {labels.size} labels")
    if not np.issubdtype(labels.dtype, np.integer):
        if not np.all(labels == np.round(labels)):
            raise ValueError("labels must be integers")
        labels = labels.astype(np.int64)
    if n_classes is None:
        n_classes = int(labels.max()) + 1
    if labels.min() < 0 or labels.max() >= n_classes:
        raise ValueError(f"labels must lie in 0..{n_classes - 1}")
    d = states.shape[1]
    if n_classes > d:
        raise ValueError(f"{n_classes} classes need a qudit of dimension >= {n_classes}, got {d}")

    counts = np.bincount(labels, minlength=n_classes)
    if np.any(counts == 0):
        raise ValueError(f"classes {np.nonzero(counts == 0)[0].tolist()} have no training samples")
    priors = counts / n
    # exact division can leave the sum one ulp off; push the residue onto the largest class
    priors[np.argmax(priors)] += 1.0 - priors.sum()
    classes = [_class_density(states[labels == j], float(priors[j])) for j in range(n_classes)]
    return DensityModel(classes, feature_map)


def _vector(psi) -> np.ndarray:
    if isinstance(psi, QuditState):
        return psi.amplitudes
    return np.asarray(psi, dtype=np.complex128).reshape(-1)


def expectation_oracle(model: DensityModel, j: int, psi) -> float:
    """``<psi|rho_j|psi>`` by a direct dense quadratic form."""
    v = _vector(psi)
    if v.size != model.dim:
        raise ValueError(f"state has dimension {v.size}, model has {model.dim}")
    value = np.vdot(v, model.rho(j) @ v)
    if abs(value.imag) > 1e-12:
        raise ArithmeticError(f"expectation has imaginary part {value.imag:.3e}")
    return float(value.real)


def spectral_expectation(spectrum: SpectralDecomposition, psi) -> float:
    """``sum_i lambda_i |<i|U^dag|psi>|^2``, the eigenbasis form of the same quantity."""
    a = spectrum.eigenvectors.conj().T @ _vector(psi)
    return float(np.sum(spectrum.eigenvalues * np.abs(a) ** 2))


def expectation_matrix(model: DensityModel, states) -> np.ndarray:
    """``<psi_n|rho_j|psi_n>`` for a batch of state rows, shape ``(n, n_classes)``."""
    s = np.atleast_2d(np.asarray(states, dtype=np.complex128))
    if s.shape[1] != model.dim:
        raise ValueError(f"states have dimension {s.shape[1]}, model has {model.dim}")
    out = np.stack([np.einsum("ni,ij,nj->n", s.conj(), model.rho(j), s) for j in range(model.n_classes)], axis=1)
    return out.real


def validate_model(model: DensityModel, atol: float = DENSITY_ATOL) -> DensityModel:
    """Check every trained artifact against its invariants; raise :class:`DensityError`."""
    from .sim import check_unitary

    priors = model.priors
    if np.any(priors < 0) or abs(priors.sum() - 1.0) > 1e-12:
        raise DensityError(f"priors {priors.tolist()} are not a probability vector")
    for j, c in enumerate(model.classes):
        check_density_matrix(c.rho, atol)
        lam = c.eigenvalues
        if np.any(lam < 0) or abs(lam.sum() - 1.0) > atol:
            raise DensityError(f"class {j}: eigenvalues are not a probability vector")
        try:
            check_unitary(c.eigenvectors)
            check_unitary(c.u_lambda)
        except ValueError as exc:
            raise DensityError(f"class {j}: {exc}") from None
        if np.max(np.abs(c.spectrum.reconstruct() - c.rho)) >= 1e-9:
            raise DensityError(f"class {j}: U diag(lambda) U^dag does not reproduce rho")
        if np.max(np.abs(c.u_lambda[:, 0] - np.sqrt(lam))) >= atol:
            raise DensityError(f"class {j}: U_lambda|0> is not |lambda>")
    return model
