"""Sensing-assisted channel estimation with the chirp as superimposed pilot.

Cyclic maximum likelihood alternates the weighted least-squares tap
update with a residual-covariance update. With fewer snapshots than the
snapshot length the literal sample covariance is singular, so three
covariance models are offered: the literal regularized full matrix, a
scalar (white) model, and a banded Hermitian Toeplitz projection of the
sample covariance. The Toeplitz model is the small-sample default: the
residual interference is OFDM filtered by an l-tap channel, hence
stationary with correlation support of about l lags, and exploiting
that coloring is what separates the estimator from plain least squares.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg
from sklearn.base import BaseEstimator

from .signal import ComplexSignal
from .validation import (
    check_complex_matrix,
    check_complex_vector,
    check_nonnegative_int,
    check_positive,
)
from .waveform import OfdmConfig, demap_symbols

COVARIANCE_MODES = ("auto", "full", "scalar", "toeplitz")


@dataclass
class ChannelEstimate:
    """Estimated taps plus the fitted interference-plus-noise covariance."""

    h_hat: np.ndarray
    R_hat: np.ndarray
    iterations: int
    converged: bool
    crlb: float
    nll_trace: np.ndarray | None = None


@dataclass
class WeightAnalysis:
    """Closed-form optimal power weight and the SINR shape it maximizes."""

    D: float
    K1: float
    K2: float
    w_star: float
    w_grid: np.ndarray
    objective: np.ndarray


class EqualizedBits(NamedTuple):
    bits: np.ndarray
    erased_subcarriers: int


def build_pilot_matrix(s: ComplexSignal | np.ndarray, l: int) -> np.ndarray:
    """Lower-triangular Toeplitz convolution matrix of the pilot.

    Entry (i, j) is s[i - j] for i >= j and 0 above the diagonal, shape
    (n_samples, l); multiplying a tap vector yields the within-window
    convolution of the pilot with an l-tap channel.
    """
    samples = s.samples if isinstance(s, ComplexSignal) else np.asarray(s)
    samples = check_complex_vector(samples, "s")
    l = check_nonnegative_int(l, "l", minimum=1)
    if l >= samples.size:
        raise ValueError("tap count must be below the pilot length")
    first_row = np.zeros(l, dtype=np.complex128)
    first_row[0] = samples[0]
    return scipy.linalg.toeplitz(samples, first_row)


def _toeplitz_covariance(residuals: np.ndarray, bandwidth: int) -> np.ndarray:
    """Banded Hermitian Toeplitz estimate of the residual covariance.

    Biased autocovariances with a Bartlett taper: both sequences are
    positive semidefinite, so their product (and hence the Toeplitz
    matrix) stays PSD up to roundoff.
    """
    m, n = residuals.shape
    bw = min(bandwidth, n)
    col = np.zeros(n, dtype=np.complex128)
    for d in range(bw):
        acov = np.mean(
            np.sum(residuals[:, d:] * np.conj(residuals[:, : n - d]), axis=1)
        ) / n
        col[d] = acov * (1.0 - d / bw)
    return scipy.linalg.toeplitz(col, col.conj())


def _solve_hermitian(R: np.ndarray, B: np.ndarray, loading: float) -> np.ndarray:
    """R^{-1} B via Cholesky, retrying with diagonal loading if needed."""
    try:
        cho = scipy.linalg.cho_factor(R, check_finite=False)
        return scipy.linalg.cho_solve(cho, B, check_finite=False)
    except np.linalg.LinAlgError:
        pass
    bump = loading * np.trace(R).real / R.shape[0]
    cho = scipy.linalg.cho_factor(R + bump * np.eye(R.shape[0]), check_finite=False)
    return scipy.linalg.cho_solve(cho, B, check_finite=False)


def _gls_taps(S0: np.ndarray, R: np.ndarray, y_mean: np.ndarray, loading: float) -> np.ndarray:
    Ri_S = _solve_hermitian(R, S0, loading)
    fisher = S0.conj().T @ Ri_S
    rhs = Ri_S.conj().T @ y_mean
    try:
        return np.linalg.solve(fisher, rhs)
    except np.linalg.LinAlgError as exc:
        raise ValueError("singular pilot Gram matrix S0^H R^-1 S0") from exc


def cml_estimate(
    snapshots: np.ndarray,
    S0: np.ndarray,
    tol: float = 1e-6,
    max_iter: int = 50,
    covariance: str = "auto",
    loading: float = 1e-3,
    track_likelihood: bool = False,
) -> ChannelEstimate:
    """Cyclic ML channel estimate from M pulse-window snapshots.

    Alternates h = (S0^H R^-1 S0)^-1 S0^H R^-1 y_mean with the residual
    covariance update, starting from R = I, until the relative tap change
    drops below ``tol``. ``covariance`` picks the R model: "full" is the
    literal sample covariance plus diagonal loading, "scalar" fits only a
    noise power (coinciding with plain least squares), "toeplitz" fits a
    banded stationary model, and "auto" selects "full" when M >= 4 N_p
    and "toeplitz" otherwise.
    """
    Y = check_complex_matrix(snapshots, "snapshots")
    S0 = check_complex_matrix(S0, "S0")
    m, n = Y.shape
    if S0.shape[0] != n:
        raise ValueError("snapshot length does not match the pilot matrix")
    l = S0.shape[1]
    if covariance not in COVARIANCE_MODES:
        raise ValueError(f"covariance must be one of {COVARIANCE_MODES}")
    mode = covariance
    if mode == "auto":
        mode = "full" if m >= 4 * n else "toeplitz"

    y_mean = Y.mean(axis=0)
    # Relative floor keeps R invertible without overflow when residuals vanish.
    floor = 1e-30 * float(np.mean(np.abs(Y) ** 2)) + 1e-300
    R = np.eye(n, dtype=np.complex128)
    h = np.zeros(l, dtype=np.complex128)
    converged = False
    trace = [] if track_likelihood else None
    iterations = 0
    for iterations in range(1, max_iter + 1):
        h_new = _gls_taps(S0, R, y_mean, loading)
        residuals = Y - (S0 @ h_new)[None, :]
        if mode == "scalar":
            sigma2 = max(float(np.mean(np.abs(residuals) ** 2)), floor)
            R = sigma2 * np.eye(n, dtype=np.complex128)
        elif mode == "toeplitz":
            R = _toeplitz_covariance(residuals, bandwidth=3 * l)
            bump = max(loading * np.trace(R).real / n, floor)
            R = R + bump * np.eye(n)
        else:
            R = residuals.T @ residuals.conj() / m
            bump = max(loading * np.trace(R).real / n, floor)
            R = R + bump * np.eye(n)
        if track_likelihood:
            sign, logdet = np.linalg.slogdet(R)
            quad = float(
                np.sum(np.real(np.conj(residuals) * _solve_hermitian(R, residuals.T, loading).T))
            )
            trace.append(m * logdet + quad)
        delta = np.linalg.norm(h_new - h) / max(np.linalg.norm(h), 1e-300)
        h = h_new
        if iterations > 1 and delta < tol:
            converged = True
            break
    bound = crlb(S0, R, m)
    return ChannelEstimate(
        h, R, iterations, converged, bound,
        np.asarray(trace) if track_likelihood else None,
    )


def crlb(S0: np.ndarray, R: np.ndarray, n_snapshots: int) -> float:
    """trace((S0^H R^-1 S0)^-1) / M for the given covariance."""
    S0 = check_complex_matrix(S0, "S0")
    R = check_complex_matrix(R, "R")
    n_snapshots = check_nonnegative_int(n_snapshots, "n_snapshots", minimum=1)
    try:
        cho = scipy.linalg.cho_factor(R, check_finite=False)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise ValueError("covariance must be positive definite") from exc
    fisher = S0.conj().T @ scipy.linalg.cho_solve(cho, S0, check_finite=False)
    try:
        inv = np.linalg.inv(fisher)
    except np.linalg.LinAlgError as exc:
        raise ValueError("singular Fisher information matrix") from exc
    return float(np.trace(inv).real) / n_snapshots


def tdls_estimate(snapshots: np.ndarray, S0: np.ndarray) -> np.ndarray:
    """First-order-statistics baseline: plain LS on the snapshot mean."""
    Y = check_complex_matrix(snapshots, "snapshots")
    S0 = check_complex_matrix(S0, "S0")
    if S0.shape[0] != Y.shape[1]:
        raise ValueError("snapshot length does not match the pilot matrix")
    gram = S0.conj().T @ S0
    try:
        return np.linalg.solve(gram, S0.conj().T @ Y.mean(axis=0))
    except np.linalg.LinAlgError as exc:
        raise ValueError("singular pilot Gram matrix S0^H S0") from exc


def optimal_weight(
    D: float, M: int, P: float, noise_power: float, n_grid: int = 1001
) -> WeightAnalysis:
    """Closed-form SINR-optimal power weight.

    K1 = sigma^2 (D + M), K2 = D P - M sigma^2; the SINR is proportional
    to f(w) = (w - w^2) / (K1 + K2 w), maximized at
    w* = (sqrt(K1 (K1 + K2)) - K1) / K2 (or 1/2 when K2 = 0).
    """
    D = check_positive(D, "D")
    M = check_nonnegative_int(M, "M", minimum=1)
    P = check_positive(P, "P")
    noise_power = check_positive(noise_power, "noise_power")
    K1 = noise_power * (D + M)
    K2 = D * P - M * noise_power
    w = np.linspace(0.0, 1.0, n_grid)
    denom = K1 + K2 * w
    if np.any(denom[1:-1] <= 0):
        raise ValueError("invalid regime: K1 + K2 w is not positive on (0, 1)")
    if K2 == 0:
        w_star = 0.5
    else:
        w_star = (np.sqrt(K1 * (K1 + K2)) - K1) / K2
    objective = np.where(denom > 0, (w - w**2) / denom, 0.0)
    return WeightAnalysis(D, float(K1), float(K2), float(w_star), w, objective)


def pilot_gram_constant(pilot_unit: ComplexSignal | np.ndarray, l: int) -> float:
    """D = trace((S0^H S0)^-1) of the unit-power pilot.

    With the pilot scaled by sqrt((1 - w) P), trace((S0^H S0)^-1)
    becomes D / ((1 - w) P), making D weight-invariant.
    """
    S0 = build_pilot_matrix(pilot_unit, l)
    gram = S0.conj().T @ S0
    return float(np.trace(np.linalg.inv(gram)).real)


def sinr(w: float, P: float, h_hat, D: float, M: int, noise_power: float) -> float:
    """Post-cancellation SINR at power weight ``w``."""
    if not 0.0 < w < 1.0:
        raise ValueError("w must lie strictly inside (0, 1)")
    h_norm2 = float(np.sum(np.abs(np.asarray(h_hat)) ** 2))
    num = w * P * h_norm2 * (1.0 - w) * M
    den = D * (noise_power + w * P) + (1.0 - w) * M * noise_power
    return num / den


def throughput(eta: float, signal_power: float, noise_power: float, error_var: float) -> float:
    """eta * log2(1 + P_c / (sigma_n^2 + sigma_e^2)) in bits/s/Hz."""
    for name, v in (("eta", eta), ("signal_power", signal_power), ("noise_power", noise_power)):
        check_positive(v, name)
    if error_var < 0:
        raise ValueError("error_var must be nonnegative")
    return eta * float(np.log2(1.0 + signal_power / (noise_power + error_var)))


def cancel_and_equalize(
    y: ComplexSignal,
    pilot_stream: ComplexSignal,
    h_hat: np.ndarray,
    ofdm_config: OfdmConfig,
    min_gain: float = 1e-9,
) -> EqualizedBits:
    """Subtract the reconstructed pilot through the channel, then ZF demap.

    The pilot stream (zeros outside the pulse windows) is convolved with
    the estimated taps over the whole frame, so the cancellation covers
    the convolution tail spilling past each pulse. Subcarriers where the
    estimated response magnitude falls below ``min_gain`` are erased and
    counted.
    """
    h_hat = check_complex_vector(h_hat, "h_hat")
    if len(pilot_stream) != len(y):
        raise ValueError("pilot stream length does not match the received frame")
    cancelled = y.samples - np.convolve(pilot_stream.samples, h_hat)[: len(y)]
    n_sym = round(ofdm_config.symbol_duration * y.sample_rate)
    blocks = cancelled.reshape(ofdm_config.n_symbols, n_sym)
    spectrum = np.fft.fft(blocks, axis=1)[:, : ofdm_config.n_subcarriers]
    spectrum *= np.sqrt(ofdm_config.n_subcarriers) / n_sym
    k = np.arange(ofdm_config.n_subcarriers)
    taps = np.arange(h_hat.size)
    response = np.exp(-2j * np.pi * np.outer(k, taps) / n_sym) @ h_hat
    weak = np.abs(response) < min_gain
    safe = np.where(weak, 1.0, response)
    equalized = spectrum / safe[None, :]
    equalized[:, weak] = 0.0
    bits = demap_symbols(equalized.ravel(), ofdm_config.constellation)
    return EqualizedBits(bits, int(np.count_nonzero(weak)))


class CmlChannelEstimator(BaseEstimator):
    """Cyclic-ML channel estimator with a scikit-learn API.

    ``fit(Y)`` takes an (n_snapshots, n_samples) complex array of
    pulse-window observations; the pilot and tap count are constructor
    parameters so fitted estimators are cloneable.
    """

    def __init__(
        self,
        pilot,
        n_taps: int,
        tol: float = 1e-6,
        max_iter: int = 50,
        covariance: str = "auto",
    ):
        self.pilot = pilot
        self.n_taps = n_taps
        self.tol = tol
        self.max_iter = max_iter
        self.covariance = covariance

    def fit(self, X, y=None):
        X = check_complex_matrix(X, "X")
        S0 = build_pilot_matrix(np.asarray(self.pilot), self.n_taps)
        est = cml_estimate(
            X, S0, tol=self.tol, max_iter=self.max_iter, covariance=self.covariance
        )
        self.taps_ = est.h_hat
        self.covariance_ = est.R_hat
        self.n_iter_ = est.iterations
        self.converged_ = est.converged
        self.crlb_ = est.crlb
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X) -> np.ndarray:
        """Pilot-through-channel reconstruction for given snapshots' length."""
        X = check_complex_matrix(X, "X")
        S0 = build_pilot_matrix(np.asarray(self.pilot), self.n_taps)
        model = S0 @ self.taps_
        return np.broadcast_to(model, X.shape).copy()
