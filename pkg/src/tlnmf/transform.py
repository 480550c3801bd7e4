"""Square orthogonal short-time transforms and power spectrograms.

Transforms are plain ``(M, M)`` float arrays whose rows are the atoms.
"""

import numpy as np

#: relative floor applied to power spectrograms and model spectrograms
FLOOR_RELATIVE = 1e-10
#: absolute floor used when the data has zero energy
FLOOR_ABSOLUTE = 1e-30


def dct_matrix(M):
    """Orthonormal DCT-IV matrix.

    ``Phi[q, m] = sqrt(2 / M) * cos(pi (q + 1/2)(m + 1/2) / M)``.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    k = np.arange(M) + 0.5
    return np.sqrt(2.0 / M) * np.cos(np.pi * np.outer(k, k) / M)


def random_orthogonal(M, seed=None):
    """Haar-distributed random orthogonal matrix.

    Drawn from the QR factorization of a standard normal matrix, with the
    columns of ``Q`` multiplied by the signs of ``diag(R)`` so that the
    distribution is uniform on the orthogonal group.

    Parameters
    ----------
    M : int
        Dimension.
    seed : int, numpy.random.SeedSequence or numpy.random.Generator, optional
        Anything accepted by :func:`numpy.random.default_rng`.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((M, M)))
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d


def orthogonality_error(phi):
    """``max |Phi^T Phi - I|``."""
    phi = np.asarray(phi)
    return np.abs(phi.T @ phi - np.eye(phi.shape[0])).max()


def is_orthogonal(phi, tol=1e-8):
    phi = np.asarray(phi)
    return (phi.ndim == 2 and phi.shape[0] == phi.shape[1]
            and np.all(np.isfinite(phi)) and orthogonality_error(phi) <= tol)


def normalize_sign(phi):
    """Flip atoms so that the first column of ``phi`` is positive.

    A row whose first entry is exactly zero is signed by its first nonzero
    entry instead.
    """
    phi = np.array(phi, dtype=float)
    pivot = np.argmax(phi != 0, axis=1)
    phi[phi[np.arange(phi.shape[0]), pivot] < 0] *= -1.0
    return phi


def spectrogram_floor(frames):
    """Floor used for a given frame matrix.

    ``1e-10`` times the mean frame energy ``mean(Y**2)``, which equals
    ``mean(|Phi Y|**2)`` for any orthogonal ``Phi``. The floor therefore
    does not move while the transform is being learnt.
    """
    y = getattr(frames, "data", frames)
    energy = float(np.mean(np.square(y)))
    return FLOOR_RELATIVE * energy if energy > 0 else FLOOR_ABSOLUTE


def _check_dims(phi, y):
    if phi.ndim != 2 or phi.shape[0] != phi.shape[1]:
        raise ValueError(f"transform must be square, got {phi.shape}")
    if phi.shape[1] != y.shape[0]:
        raise ValueError(f"transform of size {phi.shape[0]} does not match "
                         f"frame length {y.shape[0]}")


def power_spectrogram(phi, frames, floor=None):
    """``V = max(|Phi Y|**2, floor)``.

    ``frames`` may be a :class:`~tlnmf.signal.FrameMatrix` or a bare array.
    ``floor`` defaults to :func:`spectrogram_floor` of the frames.
    """
    phi = np.asarray(phi, dtype=float)
    y = np.asarray(getattr(frames, "data", frames), dtype=float)
    _check_dims(phi, y)
    if floor is None:
        floor = spectrogram_floor(y)
    return np.maximum(np.square(phi @ y), floor)
