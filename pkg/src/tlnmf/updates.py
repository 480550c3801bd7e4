"""Multiplicative majorization-minimization updates for IS-NMF.

All updates use the exponent 1/2, which makes each of them a true MM step
for the Itakura-Saito divergence: the objective cannot increase. Entries
that are exactly zero stay zero.
"""

import logging

import numpy as np

from .transform import FLOOR_ABSOLUTE, FLOOR_RELATIVE

logger = logging.getLogger(__name__)


def _default_floor(v):
    m = float(np.mean(v))
    return FLOOR_RELATIVE * m if m > 0 else FLOOR_ABSOLUTE


def _check(v, w, h):
    if v.shape != (w.shape[0], h.shape[1]) or w.shape[1] != h.shape[0]:
        raise ValueError(f"inconsistent shapes V{v.shape} W{w.shape} H{h.shape}")


def update_h(v, w, h, penalty=0.0, floor=None):
    """One multiplicative update of the activations.

    ``H * [W^T(V / (WH)^2) / (W^T (WH)^-1 + penalty)]^(1/2)``

    Parameters
    ----------
    v : ndarray (M, N)
        Power spectrogram.
    w : ndarray (M, K)
    h : ndarray (K, N)
    penalty : float or ndarray broadcastable to (K, N)
        Derivative of the sparsity term, e.g. ``lam * M / K``.
    floor : float, optional
        Lower bound applied to ``W H`` before inversion.
    """
    v, w, h = (np.asarray(a, dtype=float) for a in (v, w, h))
    _check(v, w, h)
    if floor is None:
        floor = _default_floor(v)
    inv = 1.0 / np.maximum(w @ h, floor)
    num = w.T @ (v * inv * inv)
    den = w.T @ inv + penalty
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(den > 0, num / den, 1.0)
    return h * np.sqrt(ratio)


def update_w(v, w, h, lambda_scaled=0.0, floor=None):
    """One multiplicative update of the dictionary.

    ``W * [(V / (WH)^2) H^T / ((WH)^-1 + lambda_scaled) H^T]^(1/2)``

    With ``lambda_scaled = lam * M / K`` this is the MM step for
    ``D(V | W H) + lambda_scaled * sum_k |w_k|_1 |h_k|_1``, which coincides
    with the penalized objective once the columns are renormalized.
    """
    v, w, h = (np.asarray(a, dtype=float) for a in (v, w, h))
    _check(v, w, h)
    if floor is None:
        floor = _default_floor(v)
    inv = 1.0 / np.maximum(w @ h, floor)
    num = (v * inv * inv) @ h.T
    den = inv @ h.T + lambda_scaled * h.sum(axis=1)[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = num / den
    # a zero row of H leaves the matching column without information
    ratio[:, h.sum(axis=1) == 0] = 1.0
    return w * np.sqrt(ratio)


def normalize_columns(w, h):
    """Rescale so that each column of ``w`` sums to one.

    ``h`` is rescaled row-wise so that ``w @ h`` is unchanged. An all-zero
    column is replaced by the uniform column ``1/M`` and its activation row
    is zeroed.

    Returns
    -------
    (w, h) : tuple of ndarray
    """
    w = np.array(w, dtype=float)
    h = np.array(h, dtype=float)
    scale = w.sum(axis=0)
    dead = scale <= 0
    if np.any(dead):
        logger.warning("resetting %d all-zero dictionary column(s)", int(dead.sum()))
        w[:, dead] = 1.0 / w.shape[0]
        h[dead] = 0.0
        scale[dead] = 1.0
    return w / scale, h * scale[:, None]


def supervised_penalty(M, n_sp, n_no, lambda_sp, lambda_no):
    """Column vector of per-row penalties ``M * [lam_sp/N_sp, lam_no/N_no]``.

    Broadcasts against activations of shape ``(n_sp + n_no, N)``.
    """
    return M * np.concatenate([np.full(n_sp, lambda_sp / n_sp),
                               np.full(n_no, lambda_no / n_no)])[:, None]


def update_h_supervised(v, w, h, n_sp, n_no, lambda_sp=0.0, lambda_no=0.0, floor=None):
    """Activation update with a separate sparsity weight for each source.

    ``w`` stacks the speech and noise training spectrograms column-wise
    and ``h`` stacks the matching activation rows.
    """
    w = np.asarray(w)
    h = np.asarray(h)
    if h.shape[0] != n_sp + n_no or w.shape[1] != n_sp + n_no:
        raise ValueError(f"expected {n_sp} + {n_no} atoms, got W{w.shape} H{h.shape}")
    penalty = supervised_penalty(w.shape[0], n_sp, n_no, lambda_sp, lambda_no)
    return update_h(v, w, h, penalty, floor)
