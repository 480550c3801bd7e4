"""BSS-eval style SDR / SIR / SAR with gain-only projections.

The estimate is split into orthogonal parts::

    estimate = s_target + e_interf + e_artif

``s_target`` is the projection onto the target reference, ``s_target +
e_interf`` the projection onto the span of all references, and ``e_artif``
what is left. Distortion filters are a single gain, so values are not
comparable in absolute terms with the 512-tap toolkit.
"""

from dataclasses import dataclass

import numpy as np

#: stand-in for an infinite ratio
DB_CAP = 300.0


@dataclass(frozen=True)
class BssScores:
    sdr: float
    sir: float
    sar: float


@dataclass(frozen=True)
class Decomposition:
    s_target: np.ndarray
    e_interf: np.ndarray
    e_artif: np.ndarray


def _samples(x):
    return np.asarray(getattr(x, "samples", x), dtype=float)


def _db(num, den):
    if den <= 0 or num >= den * 10 ** (DB_CAP / 10):
        return DB_CAP
    if num <= 0:
        return -DB_CAP
    return max(-DB_CAP, min(DB_CAP, 10.0 * np.log10(num / den)))


def decompose(estimate, references, target_index):
    """Orthogonal decomposition of ``estimate`` against ``references``."""
    e = _samples(estimate)
    refs = np.stack([_samples(r) for r in references])
    if refs.shape[1] != e.shape[0]:
        raise ValueError("estimate and references must have the same length")
    if not 0 <= target_index < refs.shape[0]:
        raise IndexError(f"target_index {target_index} out of range")
    if not np.any(e):
        raise ValueError("zero-energy estimate")
    energies = np.einsum("ij,ij->i", refs, refs)
    if np.any(energies == 0):
        raise ValueError("zero-energy reference")
    if np.linalg.matrix_rank(refs) < refs.shape[0]:
        raise ValueError("references are linearly dependent")

    s = refs[target_index]
    s_target = (e @ s) / energies[target_index] * s
    coef, *_ = np.linalg.lstsq(refs.T, e, rcond=None)
    p_all = refs.T @ coef
    return Decomposition(s_target, p_all - s_target, e - p_all)


def bss_eval(estimate, references, target_index):
    """SDR, SIR and SAR in dB of ``estimate`` for ``references[target_index]``.

    Infinite ratios are reported as ``DB_CAP`` (300 dB).
    """
    d = decompose(estimate, references, target_index)
    t = float(d.s_target @ d.s_target)
    i = float(d.e_interf @ d.e_interf)
    a = float(d.e_artif @ d.e_artif)
    # numerically zero components count as exactly zero
    scale = t + i + a
    i = 0.0 if i <= 1e-28 * scale else i
    a = 0.0 if a <= 1e-28 * scale else a
    return BssScores(sdr=_db(t, i + a), sir=_db(t, i), sar=_db(t + i, a))
