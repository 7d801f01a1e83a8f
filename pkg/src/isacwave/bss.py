"""Blind separation of multipath chirp mixtures.

Pipeline: centering, eigendecomposition whitening, parallel complex
fourth-order cumulant matrices, joint approximate diagonalization by
complex Givens rotations, unmixing, and LOS-path selection. The number
of paths equals the number of antennas; it is an input, not estimated.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from . import dsp
from .signal import ComplexSignal
from .validation import check_complex_matrix, check_complex_vector

MIN_SAMPLES_PER_CHANNEL = 100


@dataclass
class WhiteningResult:
    """Whitened observations plus the whitening matrix and covariance spectrum."""

    whitened: np.ndarray
    whitener: np.ndarray
    eigenvalues: np.ndarray


@dataclass
class EigenmatrixSet:
    """Most significant eigenpairs of the fourth-order cumulant operator."""

    eigenvalues: np.ndarray
    matrices: list[np.ndarray] = field(default_factory=list)

    def __len__(self):
        return len(self.matrices)


@dataclass
class SeparationResult:
    """Recovered sources (unit power per row) and the mixing-side unitary."""

    sources: np.ndarray
    unitary: np.ndarray
    quality: np.ndarray | None = None


def center(Y) -> np.ndarray:
    """Remove the per-row sample mean."""
    Y = check_complex_matrix(Y, "Y", min_cols=2)
    return Y - Y.mean(axis=1, keepdims=True)


def whiten(Y) -> WhiteningResult:
    """Whiten centered observations via the covariance eigendecomposition.

    Raises if the sample covariance is effectively rank deficient.
    """
    Y = check_complex_matrix(Y, "Y")
    n_samples = Y.shape[1]
    cov = (Y @ Y.conj().T) / n_samples
    eigvals, eigvecs = np.linalg.eigh(cov)
    if eigvals[0] <= 1e-12 * eigvals[-1]:
        raise ValueError("rank-deficient covariance: observations too correlated")
    W = eigvecs @ np.diag(eigvals**-0.5) @ eigvecs.conj().T
    return WhiteningResult(W @ Y, W, eigvals[::-1].copy())


def cumulant_set(Y_white) -> EigenmatrixSet:
    """Eigenpairs of the complex fourth-order cumulant operator.

    Builds the full cumulant tensor cum(x_i, x_k*, x_l, x_n*) with sample
    moments, eigendecomposes the induced Hermitian operator on the space
    of matrices, and keeps the n_channels largest-magnitude eigenpairs.
    """
    X = check_complex_matrix(Y_white, "Y_white")
    n, t = X.shape
    if t < MIN_SAMPLES_PER_CHANNEL * n:
        raise ValueError(
            f"insufficient samples: need at least {MIN_SAMPLES_PER_CHANNEL * n}, got {t}"
        )
    Xc = X.conj()
    cov = (X @ Xc.T) / t
    pseudo = (X @ X.T) / t
    m4 = np.einsum("it,jt,lt,nt->ijln", X, Xc, X, Xc, optimize=True) / t
    tensor = (
        m4
        - np.einsum("ij,ln->ijln", cov, cov)
        - np.einsum("il,jn->ijln", pseudo, pseudo.conj())
        - np.einsum("in,lj->ijln", cov, cov)
    )
    operator = tensor.transpose(0, 1, 3, 2).reshape(n * n, n * n)
    operator = 0.5 * (operator + operator.conj().T)
    eigvals, eigvecs = np.linalg.eigh(operator)
    order = np.argsort(np.abs(eigvals))[::-1][:n]
    matrices = [eigvecs[:, i].reshape(n, n) for i in order]
    return EigenmatrixSet(eigvals[order].astype(np.float64), matrices)


def off_criterion(matrices, V=None) -> float:
    """Sum of squared off-diagonal magnitudes of V G V^H over the set."""
    total = 0.0
    for G in matrices:
        A = G if V is None else V @ G @ V.conj().T
        total += float(np.sum(np.abs(A) ** 2) - np.sum(np.abs(np.diag(A)) ** 2))
    return total


def joint_diagonalize(
    eigenmatrices: EigenmatrixSet | list,
    tol: float = 1e-8,
    max_sweeps: int = 100,
    return_trace: bool = False,
):
    """Unitary V minimizing the joint off-diagonality of the matrix set.

    Jacobi-style sweeps of complex Givens rotations (closed-form angles
    from the dominant eigenvector of the per-pair 3x3 contraction).
    Terminates when every rotation in a full sweep is below ``tol`` rad.
    """
    mats = (
        list(eigenmatrices.matrices)
        if isinstance(eigenmatrices, EigenmatrixSet)
        else list(eigenmatrices)
    )
    if not mats:
        raise ValueError("empty eigenmatrix set")
    A = np.stack([check_complex_matrix(m, "G") for m in mats])
    n = A.shape[1]
    V = np.eye(n, dtype=np.complex128)
    trace = [off_criterion(A)]

    for _ in range(max_sweeps):
        largest = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                h = np.stack(
                    [
                        A[:, p, p] - A[:, q, q],
                        A[:, p, q] + A[:, q, p],
                        1j * (A[:, q, p] - A[:, p, q]),
                    ]
                )
                G3 = np.real(h @ h.conj().T)
                w, vecs = np.linalg.eigh(G3)
                x, y, z = vecs[:, -1]
                if x < 0:
                    x, y, z = -x, -y, -z
                r = np.sqrt(x * x + y * y + z * z)
                if r <= 0:
                    continue
                c = np.sqrt((x + r) / (2 * r))
                s = (y - 1j * z) / np.sqrt(2 * r * (x + r))
                angle = abs(np.arcsin(min(1.0, abs(s))))
                largest = max(largest, angle)
                if angle <= tol:
                    continue
                rot = np.array([[c, np.conj(s)], [-s, c]])
                A[:, [p, q], :] = np.einsum("ab,kbn->kan", rot, A[:, [p, q], :])
                A[:, :, [p, q]] = np.einsum("knb,ab->kna", A[:, :, [p, q]], rot.conj())
                V[[p, q], :] = rot @ V[[p, q], :]
        trace.append(off_criterion(A))
        if largest <= tol:
            break
    if return_trace:
        return V, np.asarray(trace)
    return V


def unmix(Y, whitener, mixing_unitary) -> SeparationResult:
    """Recover the sources ``U^H W Y`` (rows renormalized to unit power).

    ``mixing_unitary`` is the whitened-domain mixing matrix (the product
    of the whitener and the true mixing matrix); its conjugate transpose
    is the diagonalizer found by :func:`joint_diagonalize`.
    """
    Y = check_complex_matrix(Y, "Y")
    W = check_complex_matrix(whitener, "whitener")
    U = check_complex_matrix(mixing_unitary, "mixing_unitary")
    Yc = Y - Y.mean(axis=1, keepdims=True)
    S = U.conj().T @ W @ Yc
    power = np.sqrt(np.mean(np.abs(S) ** 2, axis=1, keepdims=True))
    power[power == 0] = 1.0
    return SeparationResult(S / power, U)


def source_delays(sources, template: ComplexSignal) -> np.ndarray:
    """Dominant delay of each source row against the clean chirp template.

    Entries are NaN where the correlation peak falls below a floor of
    0.1 of the self-energy bound (no chirp content detected).
    """
    S = check_complex_matrix(sources, "sources")
    tpl = template.samples
    tpl = check_complex_vector(tpl, "template")
    delays = np.full(S.shape[0], np.nan)
    for i, row in enumerate(S):
        corr = dsp.matched_filter(ComplexSignal(row, template.sample_rate), tpl)
        peak = int(np.argmax(np.abs(corr.samples)))
        floor = 0.1 * np.linalg.norm(row) * np.linalg.norm(tpl)
        if np.abs(corr.samples[peak]) >= floor:
            delays[i] = peak - (tpl.size - 1)
    return delays


def select_los(result: SeparationResult | np.ndarray, lfm_template: ComplexSignal) -> ComplexSignal:
    """Source with the shortest template delay (line-of-sight path)."""
    S = result.sources if isinstance(result, SeparationResult) else result
    delays = source_delays(S, lfm_template)
    if np.all(np.isnan(delays)):
        raise ValueError("no chirp-bearing source: all correlation peaks below floor")
    idx = int(np.nanargmin(delays))
    return ComplexSignal(S[idx], lfm_template.sample_rate)


def separation_quality(S, truth) -> np.ndarray:
    """Per-recovered-source |normalized correlation| under greedy matching."""
    S = check_complex_matrix(S, "S")
    T = check_complex_matrix(truth, "truth")
    if S.shape != T.shape:
        raise ValueError("sources and truth must have equal shapes")
    Sn = S / np.linalg.norm(S, axis=1, keepdims=True)
    Tn = T / np.linalg.norm(T, axis=1, keepdims=True)
    corr = np.abs(Sn @ Tn.conj().T)
    quality = np.zeros(S.shape[0])
    free_rows = set(range(S.shape[0]))
    free_cols = set(range(T.shape[0]))
    work = corr.copy()
    while free_rows:
        i, j = np.unravel_index(np.argmax(work), work.shape)
        quality[i] = corr[i, j]
        free_rows.discard(int(i))
        free_cols.discard(int(j))
        work[i, :] = -1.0
        work[:, j] = -1.0
    return quality


class JadeSeparator(BaseEstimator, TransformerMixin):
    """Blind source separation of complex mixtures (JADE).

    Follows the scikit-learn transformer protocol with samples as rows:
    ``fit(X)`` learns the unmixing from an (n_samples, n_channels) complex
    array, ``transform(X)`` returns (n_samples, n_channels) sources.

    Attributes
    ----------
    mean_ : per-channel means removed before unmixing.
    whitener_ : whitening matrix from the covariance eigendecomposition.
    unitary_ : whitened-domain mixing unitary (its conjugate transpose
        diagonalizes the cumulant eigenmatrices).
    unmixing_ : composed matrix mapping centered channels to sources.
    sources_ : unit-power sources recovered from the fitted data.
    """

    def __init__(self, tol: float = 1e-8, max_sweeps: int = 100):
        self.tol = tol
        self.max_sweeps = max_sweeps

    def fit(self, X, y=None):
        X = check_complex_matrix(X, "X", min_rows=2, min_cols=2)
        Y = X.T
        self.n_features_in_ = Y.shape[0]
        self.mean_ = Y.mean(axis=1)
        Yc = Y - self.mean_[:, None]
        white = whiten(Yc)
        omega = cumulant_set(white.whitened)
        V = joint_diagonalize(omega, tol=self.tol, max_sweeps=self.max_sweeps)
        self.whitener_ = white.whitener
        self.unitary_ = V.conj().T
        result = unmix(Y, self.whitener_, self.unitary_)
        self.unmixing_ = self.unitary_.conj().T @ self.whitener_
        self.scale_ = np.sqrt(
            np.mean(np.abs(self.unmixing_ @ Yc) ** 2, axis=1)
        )
        self.scale_[self.scale_ == 0] = 1.0
        self.sources_ = result.sources
        return self

    def transform(self, X):
        X = check_complex_matrix(X, "X", min_rows=1, min_cols=1)
        if X.shape[1] != self.n_features_in_:
            raise ValueError("channel count differs from fit")
        Yc = X.T - self.mean_[:, None]
        return ((self.unmixing_ @ Yc) / self.scale_[:, None]).T
