"""Block-coordinate descent for transform-learning NMF.

One iteration updates ``H``, then ``W``, renormalizes the dictionary and,
in ``"tlnmf"`` mode, takes one projected natural-gradient step on the
transform. In ``"dct"`` mode the transform stays at the DCT-IV matrix and
the loop reduces to plain (penalized) IS-NMF.
"""

from __future__ import annotations

import copy
import logging
from dataclasses import dataclass, field

import numpy as np

from .manifold import LineSearchConfig, armijo_step, gradient_phi, natural_gradient
from .objective import model_spectrogram, objective_tlnmf
from .transform import (dct_matrix, normalize_sign, power_spectrogram,
                        random_orthogonal, spectrogram_floor)
from .updates import normalize_columns, update_h, update_w

logger = logging.getLogger(__name__)

MODES = ("tlnmf", "dct")
#: lower end of the uniform distribution used to initialize W and H
INIT_LOW = 1e-6


@dataclass(frozen=True)
class Hyperparams:
    K: int
    lam: float = 0.0
    tau: float = 1e-7

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if not self.tau > 0:
            raise ValueError("tau must be > 0")


@dataclass(frozen=True)
class RunConfig:
    """Settings of one driver run.

    ``phi_init`` chooses the starting transform in ``"tlnmf"`` mode
    (``"random"`` Haar draw or ``"dct"``); ``"dct"`` mode always uses and
    keeps the DCT-IV matrix. During the first ``warmup_iters`` iterations
    the transform is held fixed and the stopping rule is not applied.
    """

    hp: Hyperparams | None = None
    max_iters: int = 50_000
    mode: str = "tlnmf"
    line_search: LineSearchConfig = field(default_factory=LineSearchConfig)
    seed: int = 0
    phi_init: str = "random"
    warmup_iters: int = 0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.phi_init not in ("random", "dct"):
            raise ValueError(f"phi_init must be 'random' or 'dct', got {self.phi_init!r}")
        if self.warmup_iters < 0:
            raise ValueError("warmup_iters must be >= 0")


@dataclass
class RunState:
    phi: np.ndarray
    w: np.ndarray
    h: np.ndarray
    objective_history: list = field(default_factory=list)
    epsilon_history: list = field(default_factory=list)
    iteration: int = 0
    rng_seed: int = 0
    gamma: float = 1.0  # first step tried by the next line search

    @property
    def objective(self):
        return self.objective_history[-1]

    @property
    def epsilon(self):
        return self.epsilon_history[-1] if self.epsilon_history else np.inf


def seed_streams(seed):
    """Independent generators for the factor and transform initializations.

    Both modes share the factor stream, so a ``"dct"`` and a ``"tlnmf"``
    run with the same seed start from the same ``W`` and ``H``.
    """
    factors, transform = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(factors), np.random.default_rng(transform)


def initial_transform(M, cfg, rng):
    if cfg.mode == "dct" or cfg.phi_init == "dct":
        return dct_matrix(M)
    return random_orthogonal(M, rng)


def relative_decrease(prev, cur):
    """Stopping statistic ``(C_prev - C_cur) / C_prev``."""
    return (prev - cur) / prev if prev != 0 else 0.0


def init_state(frames, cfg):
    """Random nonnegative factors and the starting transform."""
    if cfg.hp is None:
        raise ValueError("RunConfig.hp is required")
    y = frames.data
    M, N = y.shape
    K = cfg.hp.K
    rng_factors, rng_phi = seed_streams(cfg.seed)
    w = rng_factors.uniform(INIT_LOW, 1.0, size=(M, K))
    h = rng_factors.uniform(INIT_LOW, 1.0, size=(K, N))
    w, h = normalize_columns(w, h)
    phi = initial_transform(M, cfg, rng_phi)
    c0 = objective_tlnmf(phi, y, w, h, cfg.hp.lam, spectrogram_floor(y))
    return RunState(phi=phi, w=w, h=h, objective_history=[c0], rng_seed=cfg.seed,
                    gamma=cfg.line_search.gamma_init)


def _advance(state, frames, cfg):
    # in-place version of iterate()
    y = frames.data
    M = y.shape[0]
    lam_scaled = cfg.hp.lam * M / cfg.hp.K
    floor = spectrogram_floor(y)

    v = power_spectrogram(state.phi, y, floor)
    h = update_h(v, state.w, state.h, lam_scaled, floor)
    w = update_w(v, state.w, h, lam_scaled, floor)
    w, h = normalize_columns(w, h)
    state.w, state.h = w, h

    if cfg.mode == "tlnmf" and state.iteration >= cfg.warmup_iters:
        grad = gradient_phi(state.phi, y, model_spectrogram(w, h, floor), floor)
        omega = natural_gradient(state.phi, grad)
        if np.any(omega):
            gamma, phi, _ = armijo_step(
                state.phi, omega,
                lambda p: objective_tlnmf(p, y, w, h, cfg.hp.lam, floor),
                cfg.line_search, gamma0=state.gamma)
            if gamma > 0:
                state.phi = normalize_sign(phi)
                state.gamma = gamma * cfg.line_search.grow
            else:
                logger.debug("line search stalled at iteration %d", state.iteration + 1)

    c = objective_tlnmf(state.phi, y, w, h, cfg.hp.lam, floor)
    state.epsilon_history.append(relative_decrease(state.objective_history[-1], c))
    state.objective_history.append(c)
    state.iteration += 1
    return state


def iterate(state, frames, cfg):
    """One iteration; returns a new :class:`RunState` and leaves ``state`` intact."""
    return _advance(copy.deepcopy(state), frames, cfg)


def run(frames, cfg, state=None, callback=None):
    """Iterate until the relative decrease drops to ``tau`` or ``max_iters``.

    Parameters
    ----------
    frames : FrameMatrix
    cfg : RunConfig
    state : RunState, optional
        Resume from this state (modified in place) instead of initializing.
    callback : callable, optional
        Called as ``callback(state)`` after every iteration.
    """
    if state is None:
        state = init_state(frames, cfg)
    while state.iteration < cfg.max_iters:
        _advance(state, frames, cfg)
        if callback is not None:
            callback(state)
        if state.iteration % 100 == 0:
            logger.info("iter %d  C=%.10g  eps=%.3g", state.iteration,
                        state.objective, state.epsilon)
        if state.iteration > cfg.warmup_iters and state.epsilon <= cfg.hp.tau:
            break
    logger.info("stopped after %d iterations, C=%.10g", state.iteration, state.objective)
    return state


def rank_atoms(phi, frames, top=None):
    """Atoms sorted by the energy they carry, ``||phi_m Y||_2``.

    ``phi`` may be a transform or a :class:`RunState`. Ties go to the lower
    index.

    Returns
    -------
    indices : ndarray of int
    scores : ndarray of float
    """
    phi = getattr(phi, "phi", phi)
    y = getattr(frames, "data", frames)
    scores = np.linalg.norm(phi @ y, axis=1)
    M = scores.shape[0]
    top = M if top is None else top
    if not 0 <= top <= M:
        raise ValueError(f"top must lie in [0, {M}]")
    order = np.argsort(-scores, kind="stable")[:top]
    return order, scores[order]
