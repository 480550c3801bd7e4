"""Transform update on the orthogonal group.

The Euclidean gradient is turned into the natural (Riemannian) descent
direction ``Omega = Phi G^T Phi - G``; a backtracking Armijo search then
picks a step ``gamma`` such that the polar projection of
``Phi + gamma * Omega`` decreases the objective enough.
"""

from dataclasses import dataclass

import numpy as np

from .transform import spectrogram_floor


class ProjectionError(ArithmeticError):
    """The matrix to project is numerically singular."""


@dataclass(frozen=True)
class LineSearchConfig:
    gamma_init: float = 1.0
    shrink: float = 0.5
    armijo_c: float = 1e-4
    max_backtracks: int = 60
    grow: float = 2.0

    def __post_init__(self):
        if self.gamma_init <= 0:
            raise ValueError("gamma_init must be positive")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink must lie in (0, 1)")
        if not 0 < self.armijo_c < 1:
            raise ValueError("armijo_c must lie in (0, 1)")
        if self.max_backtracks < 0:
            raise ValueError("max_backtracks must be >= 0")
        if self.grow < 1:
            raise ValueError("grow must be >= 1")


def gradient_phi(phi, frames, vhat, floor=None):
    """Euclidean gradient of the IS fit with respect to the transform.

    Returns ``2 (Delta * X) Y^T`` where ``X = Phi Y``, ``V = |X|^2`` and
    ``Delta = 1/vhat - 1/V``.
    """
    y = np.asarray(getattr(frames, "data", frames), dtype=float)
    phi = np.asarray(phi, dtype=float)
    vhat = np.asarray(vhat, dtype=float)
    if phi.shape != (y.shape[0], y.shape[0]) or vhat.shape != y.shape:
        raise ValueError(f"inconsistent shapes Phi{phi.shape} Y{y.shape} Vhat{vhat.shape}")
    if floor is None:
        floor = spectrogram_floor(y)
    x = phi @ y
    delta = 1.0 / vhat - 1.0 / np.maximum(x * x, floor)
    return 2.0 * (delta * x) @ y.T


def gradient_phi_supervised(phi, frames_mix, frames_tr, h, floor=None):
    """Gradient of the supervised IS fit, where the dictionary depends on ``Phi``.

    ``frames_tr`` holds the training frames ``[Y_sp, Y_no]`` side by side
    and ``h`` the stacked activations. The dictionary ``W = |Phi Y_tr|^2``
    is recomputed here.
    """
    y = np.asarray(getattr(frames_mix, "data", frames_mix), dtype=float)
    y_tr = np.asarray(getattr(frames_tr, "data", frames_tr), dtype=float)
    phi = np.asarray(phi, dtype=float)
    h = np.asarray(h, dtype=float)
    if y_tr.shape[0] != y.shape[0] or h.shape != (y_tr.shape[1], y.shape[1]):
        raise ValueError(f"inconsistent shapes Y{y.shape} Y_tr{y_tr.shape} H{h.shape}")
    if floor is None:
        floor = spectrogram_floor(y)
    x_tr = phi @ y_tr
    vhat = np.maximum(np.square(x_tr) @ h, floor)
    x = phi @ y
    v = np.maximum(x * x, floor)
    mix_term = 2.0 * ((1.0 / vhat - 1.0 / v) * x) @ y.T
    xi = ((vhat - v) / (vhat * vhat)) @ h.T
    return mix_term + 2.0 * (xi * x_tr) @ y_tr.T


def natural_gradient(phi, grad):
    """Descent direction ``Phi grad^T Phi - grad`` tangent to the group at ``Phi``."""
    return phi @ grad.T @ phi - grad


def project_orthogonal(a):
    """Nearest orthogonal matrix in Frobenius norm (polar factor ``U V^T``)."""
    u, s, vt = np.linalg.svd(np.asarray(a, dtype=float))
    if s[-1] <= 1e-12 * s[0]:
        raise ProjectionError("degenerate projection: matrix is numerically singular")
    return u @ vt


def armijo_step(phi, omega, evaluate, cfg=LineSearchConfig(), gamma0=None, f0=None):
    """Backtracking search along ``omega`` followed by polar projection.

    Tries ``gamma0 * shrink**j`` for ``j = 0 .. max_backtracks`` and
    accepts the first (largest) step with
    ``evaluate(pi(phi + gamma omega)) <= f0 - armijo_c * gamma * |omega|^2``.

    Parameters
    ----------
    evaluate : callable
        Objective as a function of the transform.
    gamma0 : float, optional
        First step to try; defaults to ``cfg.gamma_init``. Callers seed it
        with ``cfg.grow`` times the previously accepted step.
    f0 : float, optional
        ``evaluate(phi)`` if already known.

    Returns
    -------
    gamma : float
        Accepted step, or 0.0 if every trial failed (``phi`` is returned).
    phi_new : ndarray
    f_new : float
    """
    sq = float(np.sum(omega * omega))
    if not sq > 0:
        raise ValueError("zero search direction")
    if f0 is None:
        f0 = evaluate(phi)
    gamma = cfg.gamma_init if gamma0 is None else gamma0
    for _ in range(cfg.max_backtracks + 1):
        try:
            cand = project_orthogonal(phi + gamma * omega)
        except ProjectionError:
            gamma *= cfg.shrink
            continue
        f = evaluate(cand)
        if np.isfinite(f) and f <= f0 - cfg.armijo_c * gamma * sq:
            return gamma, cand, f
        gamma *= cfg.shrink
    return 0.0, phi, f0
