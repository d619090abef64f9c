"""Completion quality metrics."""

import numpy as np

from .tensor import frobenius_norm

PEAK = 255.0


def _pair(real, est):
    real = np.asarray(real, dtype=np.float64)
    est = np.asarray(est, dtype=np.float64)
    if real.shape != est.shape:
        raise ValueError(f"dimension mismatch: {real.shape} vs {est.shape}")
    return real, est


def rse(real, est):
    """Relative square error ``||real - est||_F / ||real||_F``."""
    real, est = _pair(real, est)
    ref = frobenius_norm(real)
    if ref == 0:
        raise ValueError("reference tensor has zero norm")
    return frobenius_norm(real - est) / ref


def mse(real, est):
    real, est = _pair(real, est)
    diff = real - est
    return float(np.sum(diff * diff)) / real.size


def psnr(real, est, peak=PEAK):
    """Peak signal-to-noise ratio in dB; ``inf`` when the tensors are equal."""
    err = mse(real, est)
    if err == 0:
        return float("inf")
    return float(10 * np.log10(peak**2 / err))
