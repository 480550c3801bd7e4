"""Synthetic data with known structure, used by tests and demos."""

import numpy as np

from .signal import FrameMatrix, Signal
from .transform import dct_matrix


def exact_fit_frames(M, N, K, seed=0, hop=None):
    """Frames whose DCT-IV power spectrogram is exactly ``W* H*``.

    Returns
    -------
    frames : FrameMatrix
    w, h : ndarray
        Ground-truth factors, ``w`` with unit-sum columns.
    """
    rng = np.random.default_rng(seed)
    w = rng.gamma(0.5, size=(M, K)) + 1e-3
    w /= w.sum(axis=0)
    h = rng.gamma(1.0, size=(K, N)) + 1e-3
    signs = rng.choice([-1.0, 1.0], size=(M, N))
    x = signs * np.sqrt(w @ h)
    y = dct_matrix(M).T @ x
    return FrameMatrix(y, hop or max(M // 2, 1)), w, h


def hop_periodic_signal(sample_rate, n_samples, hop, seed=0, amplitude=0.5):
    """Signal repeating with period ``hop``.

    All frames of a hop-aligned framing are identical, so the spectrogram
    has rank one whatever the transform. Useful as a WAV-level exact-fit
    fixture.
    """
    rng = np.random.default_rng(seed)
    period = rng.uniform(-1.0, 1.0, hop)
    period *= amplitude / np.abs(period).max()
    reps = -(-n_samples // hop)
    return Signal(np.tile(period, reps)[:n_samples], sample_rate)


def _band_noise(rng, n, sample_rate, lo, hi):
    spec = np.fft.rfft(rng.standard_normal(n))
    f = np.fft.rfftfreq(n, 1.0 / sample_rate)
    spec[(f < lo) | (f >= hi)] = 0.0
    return np.fft.irfft(spec, n)


def disjoint_band_sources(sample_rate=4000, duration=1.0, split_hz=1000.0, seed=0,
                          rms=0.25, syllable_hz=4.0):
    """Two sources whose spectra tile the band ``[0, sample_rate / 2]``.

    The "speech" source is Gaussian noise restricted to ``[0, split_hz)``
    with a slow syllable-like amplitude envelope; the "noise" source is
    stationary Gaussian noise restricted to ``[split_hz, sample_rate / 2]``.
    Every frequency therefore belongs to exactly one source, and with the
    DCT the only overlap comes from window leakage near ``split_hz``.

    Returns
    -------
    speech, noise : Signal
        Both with RMS ``rms``.
    """
    rng = np.random.default_rng(seed)
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    envelope = 0.2 + 0.8 * np.sin(2 * np.pi * syllable_hz * t) ** 2
    speech = _band_noise(rng, n, sample_rate, 0.0, split_hz) * envelope
    noise = _band_noise(rng, n, sample_rate, split_hz, sample_rate / 2)

    def scaled(x):
        return rms * x / np.sqrt(np.mean(x ** 2))

    return Signal(scaled(speech), sample_rate), Signal(scaled(noise), sample_rate)
