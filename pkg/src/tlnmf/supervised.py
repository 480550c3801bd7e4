"""Supervised separation with a learnt transform.

The dictionaries are not free: they are the power spectrograms of the
speech and noise training frames under the current transform,
``W = |Phi [Y_sp, Y_no]|**2``. Each iteration recomputes ``W``, updates
the stacked activations and takes one transform step. Source signals are
then obtained by Wiener filtering in the learnt transform domain followed
by overlap-add.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .driver import INIT_LOW, RunConfig, initial_transform, relative_decrease, seed_streams
from .manifold import armijo_step, gradient_phi_supervised, natural_gradient
from .objective import objective_supervised
from .signal import FrameMatrix, Signal, overlap_add_array
from .transform import normalize_sign, power_spectrogram, spectrogram_floor
from .updates import update_h_supervised

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SupervisedHyperparams:
    lambda_sp: float = 0.0
    lambda_no: float = 0.0
    tau: float = 1e-7

    def __post_init__(self):
        if self.lambda_sp < 0 or self.lambda_no < 0:
            raise ValueError("sparsity weights must be >= 0")
        if not self.tau > 0:
            raise ValueError("tau must be > 0")


@dataclass(frozen=True)
class TrainingSet:
    frames_sp: FrameMatrix
    frames_no: FrameMatrix

    def __post_init__(self):
        if self.frames_sp.frame_len != self.frames_no.frame_len:
            raise ValueError("speech and noise training frames differ in length")

    @property
    def n_sp(self):
        return self.frames_sp.n_frames

    @property
    def n_no(self):
        return self.frames_no.n_frames

    @property
    def data(self):
        """Training frames side by side, ``[Y_sp, Y_no]``."""
        return np.hstack([self.frames_sp.data, self.frames_no.data])


@dataclass
class SeparationResult:
    phi: np.ndarray
    h_sp: np.ndarray
    h_no: np.ndarray
    vhat_sp: np.ndarray
    vhat_no: np.ndarray
    est_sp: Signal
    est_no: Signal
    objective_history: list = field(default_factory=list)
    epsilon_history: list = field(default_factory=list)

    @property
    def iterations(self):
        return len(self.epsilon_history)


def wiener_masks(vhat_sp, vhat_no):
    """Soft masks ``vhat_sp / (vhat_sp + vhat_no)`` and its complement.

    Bins where both estimates vanish get 0.5.
    """
    vhat_sp = np.asarray(vhat_sp, dtype=float)
    vhat_no = np.asarray(vhat_no, dtype=float)
    if vhat_sp.shape != vhat_no.shape:
        raise ValueError(f"shape mismatch: {vhat_sp.shape} vs {vhat_no.shape}")
    total = vhat_sp + vhat_no
    with np.errstate(invalid="ignore", divide="ignore"):
        m_sp = np.where(total > 0, vhat_sp / total, 0.5)
    return m_sp, 1.0 - m_sp


def wiener_frames(phi, frames_mix, vhat_sp, vhat_no):
    """Framewise source estimates ``Phi^T (mask * Phi Y)``."""
    y = np.asarray(getattr(frames_mix, "data", frames_mix), dtype=float)
    if np.shape(vhat_sp) != y.shape:
        raise ValueError(f"spectrogram estimates of shape {np.shape(vhat_sp)} "
                         f"do not match frames {y.shape}")
    m_sp, m_no = wiener_masks(vhat_sp, vhat_no)
    x = phi @ y
    return phi.T @ (m_sp * x), phi.T @ (m_no * x)


def wiener_reconstruct(phi, frames_mix, vhat_sp, vhat_no, total_len=None, sample_rate=None):
    """Wiener-filter the mixture and overlap-add both estimates.

    Returns
    -------
    (Signal, Signal)
        Speech and noise estimates of ``total_len`` samples.
    """
    y_sp, y_no = wiener_frames(phi, frames_mix, vhat_sp, vhat_no)
    M, N = y_sp.shape
    hop = frames_mix.hop
    if total_len is None:
        total_len = (N - 1) * hop + M
    rate = sample_rate or frames_mix.sample_rate
    if rate is None:
        raise ValueError("sample rate unknown; pass sample_rate")
    return (Signal(overlap_add_array(y_sp, hop, total_len), rate),
            Signal(overlap_add_array(y_no, hop, total_len), rate))


def _split(h, n_sp):
    return h[:n_sp], h[n_sp:]


def run_supervised(frames_mix, train, shp, cfg=RunConfig(), total_len=None,
                   sample_rate=None, callback=None):
    """Estimate the transform and activations, then separate the mixture.

    In ``"dct"`` mode the transform is fixed to DCT-IV, which is classical
    supervised IS-NMF.

    Parameters
    ----------
    frames_mix : FrameMatrix
        Frames of the mixture.
    train : TrainingSet
    shp : SupervisedHyperparams
    cfg : RunConfig
        ``mode``, ``max_iters``, ``seed``, ``line_search``, ``phi_init``
        and ``warmup_iters`` are used; ``cfg.hp`` is ignored. Starting from
        the DCT (``phi_init="dct"``) with a few hundred warm-up iterations
        lets the activations settle before the transform moves, which
        avoids poor stationary points driven by the random initial ``H``.
    total_len : int, optional
        Length of the reconstructed signals.
    callback : callable, optional
        ``callback(iteration, objective)`` after each iteration.
    """
    y = frames_mix.data
    y_tr = train.data
    M, N = y.shape
    if y_tr.shape[0] != M:
        raise ValueError("training and mixture frames differ in length")
    n_sp, n_no = train.n_sp, train.n_no
    floor = spectrogram_floor(y)
    ls = cfg.line_search

    rng_factors, rng_phi = seed_streams(cfg.seed)
    h = rng_factors.uniform(INIT_LOW, 1.0, size=(n_sp + n_no, N))
    phi = initial_transform(M, cfg, rng_phi)

    def objective(p, h):
        h_sp, h_no = _split(h, n_sp)
        return objective_supervised(p, y, train.frames_sp.data, train.frames_no.data,
                                    h_sp, h_no, shp.lambda_sp, shp.lambda_no, floor)

    history = [objective(phi, h)]
    eps_history = []
    gamma0 = ls.gamma_init
    for it in range(1, cfg.max_iters + 1):
        v = power_spectrogram(phi, y, floor)
        w = np.square(phi @ y_tr)
        h = update_h_supervised(v, w, h, n_sp, n_no, shp.lambda_sp, shp.lambda_no, floor)

        if cfg.mode == "tlnmf" and it > cfg.warmup_iters:
            omega = natural_gradient(phi, gradient_phi_supervised(phi, y, y_tr, h, floor))
            if np.any(omega):
                gamma, new_phi, _ = armijo_step(phi, omega, lambda p: objective(p, h),
                                                ls, gamma0=gamma0)
                if gamma > 0:
                    phi = normalize_sign(new_phi)
                    gamma0 = gamma * ls.grow

        c = objective(phi, h)
        eps_history.append(relative_decrease(history[-1], c))
        history.append(c)
        if callback is not None:
            callback(it, c)
        if it % 100 == 0:
            logger.info("iter %d  C=%.10g  eps=%.3g", it, c, eps_history[-1])
        if it > cfg.warmup_iters and eps_history[-1] <= shp.tau:
            break

    h_sp, h_no = _split(h, n_sp)
    vhat_sp = np.square(phi @ train.frames_sp.data) @ h_sp
    vhat_no = np.square(phi @ train.frames_no.data) @ h_no
    est_sp, est_no = wiener_reconstruct(phi, frames_mix, vhat_sp, vhat_no,
                                        total_len, sample_rate)
    return SeparationResult(phi, h_sp, h_no, vhat_sp, vhat_no, est_sp, est_no,
                            history, eps_history)
