"""Mono signals, WAV input/output and short-time framing.

Frames are taken with a sine-bell window ``w(m) = sin(pi (m + 1/2) / M)``.
At 50% overlap the squared window sums to one, so applying the same window
again at synthesis time (weighted overlap-add) reconstructs the signal
exactly away from the two edges.
"""

from __future__ import annotations

import wave
from dataclasses import dataclass, field

import numpy as np


class WavFormatError(ValueError):
    """Raised for WAV files this module cannot decode."""


@dataclass(frozen=True)
class Signal:
    """Mono sample sequence.

    Parameters
    ----------
    samples : array-like
        Real amplitudes, nominally within [-1, 1].
    sample_rate : int
        Sampling frequency in Hz.
    """

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        if int(self.sample_rate) <= 0:
            raise ValueError("sample_rate must be positive")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self):
        return self.samples.shape[0]

    @property
    def duration(self):
        return len(self) / self.sample_rate


@dataclass(frozen=True)
class FramingConfig:
    frame_ms: float = 40.0
    overlap_fraction: float = 0.5
    window: str = "sine"

    def __post_init__(self):
        if self.frame_ms <= 0:
            raise ValueError("frame_ms must be positive")
        if not 0 <= self.overlap_fraction < 1:
            raise ValueError("overlap_fraction must lie in [0, 1)")
        if self.window != "sine":
            raise ValueError(f"unsupported window {self.window!r}")

    def frame_length(self, sample_rate):
        return int(round(self.frame_ms * sample_rate / 1000.0))

    def hop_length(self, sample_rate):
        return int(round(self.frame_length(sample_rate) * (1.0 - self.overlap_fraction)))


@dataclass(frozen=True)
class FrameMatrix:
    """``M x N`` matrix whose columns are windowed signal frames.

    ``sample_rate`` is carried along for resynthesis and may be ``None``
    for frame matrices that were not cut from a signal.
    """

    data: np.ndarray
    hop: int
    window: str = "sine"
    sample_rate: int | None = field(default=None, compare=False)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2:
            raise ValueError("frame data must be a 2-D array")
        if not np.all(np.isfinite(data)):
            raise ValueError("frame data must be finite")
        if int(self.hop) < 1:
            raise ValueError("hop must be >= 1")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "hop", int(self.hop))

    @property
    def frame_len(self):
        return self.data.shape[0]

    @property
    def n_frames(self):
        return self.data.shape[1]

    @property
    def shape(self):
        return self.data.shape


def sine_bell(M):
    """Sine-bell window of length ``M``."""
    return np.sin(np.pi * (np.arange(M) + 0.5) / M)


# --------------------------------------------------------------------------
# WAV

_PCM_DTYPES = {1: np.uint8, 2: np.dtype("<i2"), 4: np.dtype("<i4")}


def read_wav(path, downmix=False):
    """Read a PCM WAV file into a :class:`Signal` scaled to [-1, 1].

    8-, 16-, 24- and 32-bit integer PCM are accepted. Multichannel files
    raise unless ``downmix`` is set, in which case channels are averaged.
    """
    try:
        with wave.open(str(path), "rb") as wf:
            n_channels = wf.getnchannels()
            width = wf.getsampwidth()
            rate = wf.getframerate()
            raw = wf.readframes(wf.getnframes())
    except wave.Error as exc:
        raise WavFormatError(f"{path}: {exc}") from exc
    except EOFError as exc:
        raise WavFormatError(f"{path}: corrupt header") from exc

    if width == 3:
        b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        ints = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        ints = np.where(ints >= 1 << 23, ints - (1 << 24), ints)
        data = ints / float(1 << 23)
    elif width in _PCM_DTYPES:
        ints = np.frombuffer(raw, dtype=_PCM_DTYPES[width])
        if width == 1:
            data = (ints.astype(float) - 128.0) / 128.0
        else:
            data = ints.astype(float) / float(1 << (8 * width - 1))
    else:
        raise WavFormatError(f"{path}: unsupported sample width {width}")

    data = data.reshape(-1, n_channels)
    if n_channels > 1:
        if not downmix:
            raise WavFormatError(f"{path}: multichannel file ({n_channels} channels); "
                                 "pass downmix=True to average channels")
        data = data.mean(axis=1)
    else:
        data = data[:, 0]
    return Signal(data, rate)


def write_wav(signal, path):
    """Write ``signal`` as 16-bit PCM mono.

    Samples are rounded to the nearest step of 2**-15 and saturated to
    [-32768, 32767], so 1.0 is stored as 32767.
    """
    ints = np.clip(np.round(signal.samples * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(signal.sample_rate)
        wf.writeframes(ints.tobytes())


# --------------------------------------------------------------------------
# framing

def n_frames_for(T, M, hop):
    """Number of frames cut from ``T`` samples, counting a zero-padded tail."""
    if T < M:
        raise ValueError(f"signal of {T} samples is shorter than one frame ({M})")
    n, rem = divmod(T - M, hop)
    return n + 1 + (rem > 0)


def frame_array(y, M, hop):
    """Window and stack overlapping frames of the 1-D array ``y``."""
    y = np.asarray(y, dtype=float)
    T = y.shape[0]
    N = n_frames_for(T, M, hop)
    padded = np.zeros((N - 1) * hop + M)
    padded[:T] = y
    idx = hop * np.arange(N)[None, :] + np.arange(M)[:, None]
    return sine_bell(M)[:, None] * padded[idx]


def frame(signal, cfg=FramingConfig()):
    """Cut ``signal`` into windowed, overlapping frames.

    The trailing partial frame, if any, is zero-padded.

    Returns
    -------
    FrameMatrix
        Frames as columns, with ``M = round(frame_ms * sr / 1000)``.
    """
    M = cfg.frame_length(signal.sample_rate)
    hop = cfg.hop_length(signal.sample_rate)
    if M < 2:
        raise ValueError("frame length must be at least 2 samples")
    if hop < 1:
        raise ValueError("hop must be at least one sample")
    return FrameMatrix(frame_array(signal.samples, M, hop), hop,
                       cfg.window, sample_rate=signal.sample_rate)


def overlap_add_array(data, hop, total_len):
    """Window each column again and overlap-add into ``total_len`` samples."""
    M, N = data.shape
    out = np.zeros(max((N - 1) * hop + M, total_len))
    weighted = sine_bell(M)[:, None] * data
    for n in range(N):
        out[n * hop:n * hop + M] += weighted[:, n]
    return out[:total_len]


def overlap_add(frames, total_len, sample_rate=None):
    """Weighted overlap-add of ``frames`` back into a signal.

    The synthesis window is the same sine bell as the analysis window. Only
    samples ``[M/2, total_len - M/2)`` are exactly recovered at 50% overlap;
    the edges keep the taper of a single window.
    """
    if frames.window != "sine":
        raise ValueError(f"unsupported window {frames.window!r}")
    rate = sample_rate or frames.sample_rate
    if rate is None:
        raise ValueError("sample rate unknown; pass sample_rate")
    return Signal(overlap_add_array(frames.data, frames.hop, total_len), rate)
