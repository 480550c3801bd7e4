"""Itakura-Saito divergence and the penalized TL-NMF objectives."""

import numpy as np

from .transform import power_spectrogram, spectrogram_floor


def is_divergence(a, b):
    """Itakura-Saito divergence ``sum(a/b - log(a/b) - 1)``.

    Both arguments must be strictly positive arrays of the same shape.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if np.any(a <= 0) or np.any(b <= 0):
        raise ValueError("IS divergence requires strictly positive arguments")
    r = a / b
    return float(np.sum(r - np.log(r) - 1.0))


def model_spectrogram(w, h, floor):
    """``max(W H, floor)``."""
    return np.maximum(w @ h, floor)


def objective_tlnmf(phi, frames, w, h, lam=0.0, floor=None):
    """Penalized TL-NMF objective.

    ``D_IS(|Phi Y|**2 | W H) + lam * (M / K) * sum(H)``, with both
    spectrograms floored at ``floor`` (default: the frame floor).
    """
    y = getattr(frames, "data", frames)
    w = np.asarray(w, dtype=float)
    h = np.asarray(h, dtype=float)
    M, N = y.shape
    if w.shape[0] != M or h.shape != (w.shape[1], N):
        raise ValueError(f"inconsistent shapes W{w.shape} H{h.shape} for Y{y.shape}")
    if floor is None:
        floor = spectrogram_floor(y)
    v = power_spectrogram(phi, y, floor)
    K = w.shape[1]
    return is_divergence(v, model_spectrogram(w, h, floor)) + lam * (M / K) * h.sum()


def objective_supervised(phi, frames_mix, frames_sp, frames_no, h_sp, h_no,
                         lambda_sp=0.0, lambda_no=0.0, floor=None):
    r"""Supervised objective with dictionaries tied to the transform.

    .. math::

        D_{IS}(|\Phi Y|^2 \mid |\Phi Y_{sp}|^2 H_{sp} + |\Phi Y_{no}|^2 H_{no})
        + \lambda_{sp} \frac{M}{N_{sp}} \|H_{sp}\|_1
        + \lambda_{no} \frac{M}{N_{no}} \|H_{no}\|_1
    """
    y = getattr(frames_mix, "data", frames_mix)
    y_sp = getattr(frames_sp, "data", frames_sp)
    y_no = getattr(frames_no, "data", frames_no)
    h_sp = np.asarray(h_sp, dtype=float)
    h_no = np.asarray(h_no, dtype=float)
    M, N = y.shape
    n_sp, n_no = y_sp.shape[1], y_no.shape[1]
    if y_sp.shape[0] != M or y_no.shape[0] != M:
        raise ValueError("all frame matrices must share the frame length")
    if h_sp.shape != (n_sp, N) or h_no.shape != (n_no, N):
        raise ValueError(f"activation shapes {h_sp.shape}, {h_no.shape} do not "
                         f"match ({n_sp}, {N}), ({n_no}, {N})")
    if floor is None:
        floor = spectrogram_floor(y)
    phi = np.asarray(phi, dtype=float)
    v = power_spectrogram(phi, y, floor)
    vhat = np.square(phi @ y_sp) @ h_sp + np.square(phi @ y_no) @ h_no
    fit = is_divergence(v, np.maximum(vhat, floor))
    return (fit + lambda_sp * (M / n_sp) * h_sp.sum()
            + lambda_no * (M / n_no) * h_no.sum())
