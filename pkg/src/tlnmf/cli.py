"""Command-line interface: ``tlnmf decompose | separate | mix``.

Every option can also be given in a flat ``key = value`` config file
(``--config``), using the option name with underscores; flags on the
command line win. Exit codes: 0 success, 2 bad configuration, 3 I/O
failure, 4 numerical failure. ``TLNMF_LOG`` sets the log level.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import csvio
from .driver import Hyperparams, RunConfig, rank_atoms, run
from .manifold import LineSearchConfig
from .metrics import bss_eval
from .signal import FramingConfig, Signal, WavFormatError, frame, read_wav, write_wav
from .supervised import (SupervisedHyperparams, TrainingSet, run_supervised,
                         wiener_masks)

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

logger = logging.getLogger("tlnmf")

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4


class ConfigError(Exception):
    pass


COMMON_DEFAULTS = {
    "seed": 0,
    "frame_ms": 40.0,
    "overlap": 0.5,
    "tau": 1e-7,
    "max_iters": 50_000,
    "downmix": False,
    "gamma_init": 1.0,
    "shrink": 0.5,
    "armijo_c": 1e-4,
    "max_backtracks": 60,
    "grow": 2.0,
}

DEFAULTS = {
    "decompose": {**COMMON_DEFAULTS, "rank": 10, "lambda": 0.0, "mode": "tlnmf",
                  "top": 6, "phi_init": "random", "warmup_iters": 0, "out": "."},
    "separate": {**COMMON_DEFAULTS, "lambda_sp": 0.0, "lambda_no": 0.0, "mode": "tlnmf",
                 "phi_init": "dct", "warmup_iters": 300, "references": None,
                 "save_masks": False, "out": "."},
    "mix": {"snr_db": 0.0, "strict": False, "downmix": False, "out": "."},
}


def _common(p):
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--frame-ms", type=float, dest="frame_ms")
    p.add_argument("--overlap", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--max-iters", type=int, dest="max_iters")
    p.add_argument("--downmix", action="store_const", const=True,
                   help="average the channels of multichannel inputs")
    p.add_argument("--phi-init", choices=("random", "dct"), dest="phi_init")
    p.add_argument("--warmup-iters", type=int, dest="warmup_iters",
                   help="initial iterations with the transform held fixed")
    for name in ("gamma_init", "shrink", "armijo_c", "grow"):
        p.add_argument("--" + name.replace("_", "-"), type=float, dest=name)
    p.add_argument("--max-backtracks", type=int, dest="max_backtracks")


def build_parser():
    parser = argparse.ArgumentParser(prog="tlnmf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="factorize one WAV file")
    p.add_argument("input", nargs="?")
    _common(p)
    p.add_argument("--rank", "-K", type=int)
    p.add_argument("--lambda", type=float, dest="lambda")
    p.add_argument("--mode", choices=("tlnmf", "dct"))
    p.add_argument("--top", type=int, help="number of ranked atoms to export")

    p = sub.add_parser("separate", help="supervised speech / noise separation")
    p.add_argument("--mixture")
    p.add_argument("--speech", help="speech training WAV")
    p.add_argument("--noise", help="noise training WAV")
    p.add_argument("--references", nargs=2, metavar=("SPEECH", "NOISE"),
                   help="clean stems for BSS-eval scoring")
    _common(p)
    p.add_argument("--lambda-sp", type=float, dest="lambda_sp")
    p.add_argument("--lambda-no", type=float, dest="lambda_no")
    p.add_argument("--mode", choices=("tlnmf", "dct", "both"))
    p.add_argument("--save-masks", action="store_const", const=True, dest="save_masks")

    p = sub.add_parser("mix", help="mix speech and noise at a given SNR")
    p.add_argument("--speech")
    p.add_argument("--noise")
    p.add_argument("--snr-db", type=float, dest="snr_db")
    p.add_argument("--strict", action="store_const", const=True,
                   help="fail on length mismatch instead of tiling the shorter file")
    p.add_argument("--downmix", action="store_const", const=True)
    p.add_argument("--config")
    p.add_argument("--out")
    return parser


def resolve(args):
    """Merge built-in defaults, config file values and command-line flags."""
    defaults = DEFAULTS[args.command]
    values = dict(defaults)
    if args.config:
        try:
            with open(args.config, "rb") as f:
                file_values = tomllib.load(f)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{args.config}: {exc}") from exc
        for key, val in file_values.items():
            key = key.replace("-", "_")
            if key not in defaults and key not in vars(args):
                raise ConfigError(f"{args.config}: unknown key {key!r}")
            if isinstance(val, dict):
                raise ConfigError(f"{args.config}: tables are not supported ({key!r})")
            values[key] = val
    for key, val in vars(args).items():
        if val is not None and key not in ("command", "config"):
            values[key] = val
    return values


def _framing(v):
    try:
        return FramingConfig(frame_ms=float(v["frame_ms"]), overlap_fraction=float(v["overlap"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _line_search(v):
    try:
        return LineSearchConfig(gamma_init=float(v["gamma_init"]), shrink=float(v["shrink"]),
                                armijo_c=float(v["armijo_c"]),
                                max_backtracks=int(v["max_backtracks"]), grow=float(v["grow"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _required(v, *keys):
    for key in keys:
        if not v.get(key):
            raise ConfigError(f"missing required option --{key.replace('_', '-')}")


def _out_dir(v):
    out = Path(v["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _read(path, v):
    return read_wav(path, downmix=bool(v.get("downmix")))


def _peak_normalized(x, peak=0.9):
    m = np.abs(x).max()
    return x * (peak / m) if m > 0 else x


def cmd_decompose(v):
    _required(v, "input")
    sig = _read(v["input"], v)
    frames = frame(sig, _framing(v))
    try:
        cfg = RunConfig(hp=Hyperparams(K=int(v["rank"]), lam=float(v["lambda"]),
                                       tau=float(v["tau"])),
                        max_iters=int(v["max_iters"]), mode=v["mode"],
                        line_search=_line_search(v), seed=int(v["seed"]),
                        phi_init=v["phi_init"], warmup_iters=int(v["warmup_iters"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    top = int(v["top"])
    if not 0 <= top <= frames.frame_len:
        raise ConfigError(f"--top must lie in [0, {frames.frame_len}]")

    logger.info("decomposing %s: M=%d N=%d mode=%s", v["input"], *frames.shape, cfg.mode)
    state = run(frames, cfg)

    out = _out_dir(v)
    csvio.save_checkpoint(state, out)
    idx, scores = rank_atoms(state.phi, frames, top)
    csvio.write_atoms(out / f"atoms_top{top}.csv", state.phi[idx])
    csvio.write_atom_scores(out / "atom_scores.csv", idx, scores)
    atom_dir = out / "atoms"
    atom_dir.mkdir(exist_ok=True)
    for rank, i in enumerate(idx):
        write_wav(Signal(_peak_normalized(state.phi[i]), sig.sample_rate),
                  atom_dir / f"atom_{rank:02d}_{int(i):04d}.wav")
    print(f"{state.iteration} iterations, objective {state.objective:.10g}")
    return EXIT_OK


def cmd_separate(v):
    _required(v, "mixture", "speech", "noise")
    mix = _read(v["mixture"], v)
    sp_train = _read(v["speech"], v)
    no_train = _read(v["noise"], v)
    if not sp_train.sample_rate == no_train.sample_rate == mix.sample_rate:
        raise ConfigError("mixture and training files must share the sample rate")
    framing = _framing(v)
    frames_mix = frame(mix, framing)
    train = TrainingSet(frame(sp_train, framing), frame(no_train, framing))
    try:
        shp = SupervisedHyperparams(float(v["lambda_sp"]), float(v["lambda_no"]),
                                    float(v["tau"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    refs = None
    if v.get("references"):
        refs = [_read(p, v) for p in v["references"]]

    methods = ("tlnmf", "dct") if v["mode"] == "both" else (v["mode"],)
    out = _out_dir(v)
    score_rows = []
    for method in methods:
        try:
            cfg = RunConfig(max_iters=int(v["max_iters"]), mode=method,
                            line_search=_line_search(v), seed=int(v["seed"]),
                            phi_init=v["phi_init"], warmup_iters=int(v["warmup_iters"]))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        logger.info("separating with mode=%s", method)
        res = run_supervised(frames_mix, train, shp, cfg, total_len=len(mix))
        target = out / method if len(methods) > 1 else out
        target.mkdir(exist_ok=True)
        write_wav(res.est_sp, target / "est_sp.wav")
        write_wav(res.est_no, target / "est_no.wav")
        csvio.write_history(target / "history.csv", res.objective_history,
                            res.epsilon_history)
        if v.get("save_masks"):
            csvio.write_matrix(target / "mask_sp.csv", wiener_masks(res.vhat_sp, res.vhat_no)[0])
            csvio.write_matrix(target / "vhat_sp.csv", res.vhat_sp)
            csvio.write_matrix(target / "vhat_no.csv", res.vhat_no)
        if refs is not None:
            n = min(len(mix), *(len(r) for r in refs))
            ref_arrays = [r.samples[:n] for r in refs]
            for k, (name, est) in enumerate((("sp", res.est_sp), ("no", res.est_no))):
                score_rows.append((method, name, bss_eval(est.samples[:n], ref_arrays, k)))
    if score_rows:
        csvio.write_scores(out / "scores.csv", score_rows)
        for method, name, s in score_rows:
            print(f"{method:6s} {name}: SDR {s.sdr:7.2f}  SIR {s.sir:7.2f}  SAR {s.sar:7.2f}")
    return EXIT_OK


def _match_length(x, n, strict, name):
    if len(x) == n:
        return x
    if strict:
        raise ConfigError(f"length mismatch: {name} has {len(x)} samples, expected {n}")
    return np.resize(x, n)  # tiles cyclically


def cmd_mix(v):
    _required(v, "speech", "noise")
    sp = _read(v["speech"], v)
    no = _read(v["noise"], v)
    if sp.sample_rate != no.sample_rate:
        raise ConfigError("speech and noise must share the sample rate")
    n = max(len(sp), len(no))
    s = _match_length(sp.samples, n, v["strict"], "speech")
    x = _match_length(no.samples, n, v["strict"], "noise")
    p_s, p_n = np.mean(s ** 2), np.mean(x ** 2)
    if p_s == 0 or p_n == 0:
        raise ConfigError("zero-power reference")
    snr = float(v["snr_db"])
    noise_gain = np.sqrt(p_s / (p_n * 10 ** (snr / 10)))
    mixture = s + noise_gain * x
    # common rescaling keeps the SNR and avoids clipping at 16 bits
    peak = np.abs(mixture).max()
    speech_gain = min(1.0, (1 - 2 ** -15) / peak) if peak > 0 else 1.0
    noise_gain *= speech_gain

    out = _out_dir(v)
    rate = sp.sample_rate
    write_wav(Signal(speech_gain * s + noise_gain * x, rate), out / "mixture.wav")
    write_wav(Signal(speech_gain * s, rate), out / "ref_sp.wav")
    write_wav(Signal(noise_gain * x, rate), out / "ref_no.wav")
    with open(out / "mix.csv", "w") as f:
        f.write("snr_db,speech_gain,noise_gain\n")
        f.write(f"{csvio.FLOAT_FMT % snr},{csvio.FLOAT_FMT % speech_gain},"
                f"{csvio.FLOAT_FMT % noise_gain}\n")
    print(f"noise gain {noise_gain:.6g}, speech gain {speech_gain:.6g}")
    return EXIT_OK


COMMANDS = {"decompose": cmd_decompose, "separate": cmd_separate, "mix": cmd_mix}


def _setup_logging():
    level = os.environ.get("TLNMF_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv=None):
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        values = resolve(args)
        return COMMANDS[args.command](values)
    except ConfigError as exc:
        print(f"tlnmf {args.command}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, WavFormatError) as exc:
        print(f"tlnmf {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"tlnmf {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"tlnmf {args.command}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
