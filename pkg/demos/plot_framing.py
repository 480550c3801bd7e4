"""
Framing and overlap-add
=======================

Signals are cut into 50%-overlapping frames weighted by a sine bell. The
squared window sums to one across overlapping frames, so windowing once at
analysis and once at synthesis gives back the signal away from the edges.
"""

import numpy as np

from tlnmf import FramingConfig, Signal, frame, overlap_add
from tlnmf.signal import sine_bell

# one second of noise at 16 kHz, 40 ms frames
x = np.random.default_rng(0).standard_normal(16000)
sig = Signal(x, 16000)
cfg = FramingConfig(frame_ms=40, overlap_fraction=0.5)
frames = frame(sig, cfg)
print("frame length", frames.frame_len, "hop", frames.hop, "frames", frames.n_frames)

# the window satisfies w[m]**2 + w[m + hop]**2 == 1
w = sine_bell(frames.frame_len)
print("COLA deviation", np.abs(w[:frames.hop] ** 2 + w[frames.hop:] ** 2 - 1).max())

back = overlap_add(frames, len(x)).samples
M = frames.frame_len
print("interior reconstruction error", np.abs(back[M:-M] - x[M:-M]).max())
print("edge samples are attenuated:", np.round(back[:3] / x[:3], 4))
