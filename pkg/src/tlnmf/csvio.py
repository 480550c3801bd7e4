"""CSV formats for frames, matrices, checkpoints, histories and scores.

Floats are written with 17 significant digits, so identical arrays always
produce identical bytes and values round-trip exactly.
"""

import csv
from pathlib import Path

import numpy as np

from .driver import RunState
from .signal import FrameMatrix

FLOAT_FMT = "%.17g"


def _fmt(x):
    return FLOAT_FMT % x


def write_matrix(path, a):
    np.savetxt(path, np.atleast_2d(a), delimiter=",", fmt=FLOAT_FMT)


def read_matrix(path):
    return np.atleast_2d(np.loadtxt(path, delimiter=",", ndmin=2))


def write_frames(path, frames):
    """Frame matrix as ``M,N,hop`` header, its values, then ``M`` data rows."""
    M, N = frames.shape
    with open(path, "w", newline="") as f:
        f.write("M,N,hop\n")
        f.write(f"{M},{N},{frames.hop}\n")
        np.savetxt(f, frames.data, delimiter=",", fmt=FLOAT_FMT)


def read_frames(path, sample_rate=None):
    with open(path) as f:
        header = f.readline().strip()
        if header != "M,N,hop":
            raise ValueError(f"{path}: expected header 'M,N,hop', got {header!r}")
        M, N, hop = (int(s) for s in f.readline().split(","))
        data = np.loadtxt(f, delimiter=",", ndmin=2)
    if data.shape != (M, N):
        raise ValueError(f"{path}: declared {M}x{N}, found {data.shape}")
    return FrameMatrix(data, hop, sample_rate=sample_rate)


def write_history(path, objectives, epsilons):
    """``iteration,objective,epsilon``; row 0 is the initial point and has no epsilon."""
    with open(path, "w", newline="") as f:
        out = csv.writer(f, lineterminator="\n")
        out.writerow(["iteration", "objective", "epsilon"])
        for i, c in enumerate(objectives):
            out.writerow([i, _fmt(c), _fmt(epsilons[i - 1]) if i else ""])


def read_history(path):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    objectives = [float(r["objective"]) for r in rows]
    epsilons = [float(r["epsilon"]) for r in rows[1:]]
    return objectives, epsilons


def save_checkpoint(state, directory):
    """Write ``phi.csv``, ``w.csv``, ``h.csv`` and ``history.csv``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_matrix(d / "phi.csv", state.phi)
    write_matrix(d / "w.csv", state.w)
    write_matrix(d / "h.csv", state.h)
    write_history(d / "history.csv", state.objective_history, state.epsilon_history)


def load_checkpoint(directory, rng_seed=0):
    d = Path(directory)
    objectives, epsilons = read_history(d / "history.csv")
    return RunState(phi=read_matrix(d / "phi.csv"), w=read_matrix(d / "w.csv"),
                    h=read_matrix(d / "h.csv"), objective_history=objectives,
                    epsilon_history=epsilons, iteration=len(epsilons), rng_seed=rng_seed)


def write_atoms(path, atoms):
    write_matrix(path, atoms)


def write_atom_scores(path, indices, scores):
    with open(path, "w", newline="") as f:
        out = csv.writer(f, lineterminator="\n")
        out.writerow(["rank", "atom", "score"])
        for r, (i, s) in enumerate(zip(indices, scores)):
            out.writerow([r, int(i), _fmt(s)])


def write_scores(path, rows):
    """Rows of ``(method, source, BssScores)`` as ``method,source,sdr,sir,sar``."""
    with open(path, "w", newline="") as f:
        out = csv.writer(f, lineterminator="\n")
        out.writerow(["method", "source", "sdr", "sir", "sar"])
        for method, source, s in rows:
            out.writerow([method, source, _fmt(s.sdr), _fmt(s.sir), _fmt(s.sar)])


def read_scores(path):
    with open(path, newline="") as f:
        return [{**r, **{k: float(r[k]) for k in ("sdr", "sir", "sar")}}
                for r in csv.DictReader(f)]
