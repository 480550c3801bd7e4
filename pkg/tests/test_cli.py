import subprocess
import sys

import numpy as np
import pytest

from tlnmf import csvio
from tlnmf.cli import main
from tlnmf.signal import Signal, read_wav, write_wav
from tlnmf.synthetic import disjoint_band_sources, hop_periodic_signal

RATE = 8000
FRAME_MS = 8  # M = 64, hop = 32


@pytest.fixture
def periodic_wav(tmp_path):
    n = 63 * 32 + 64  # 64 whole frames
    path = tmp_path / "periodic.wav"
    write_wav(hop_periodic_signal(RATE, n, 32, seed=1), path)
    return path


@pytest.fixture
def band_wavs(tmp_path):
    sp, no = disjoint_band_sources(seed=0)
    write_wav(sp, tmp_path / "sp.wav")
    write_wav(no, tmp_path / "no.wav")
    return tmp_path / "sp.wav", tmp_path / "no.wav"


def decompose_args(wav, out, *extra):
    return ["decompose", str(wav), "--out", str(out), "--frame-ms", str(FRAME_MS),
            "--rank", "2", "--max-iters", "30", *extra]


class TestDecompose:
    def test_outputs(self, periodic_wav, tmp_path):
        out = tmp_path / "out"
        assert main(decompose_args(periodic_wav, out, "--top", "3")) == 0
        for name in ("phi.csv", "w.csv", "h.csv", "history.csv", "atoms_top3.csv",
                     "atom_scores.csv"):
            assert (out / name).exists()
        assert csvio.read_matrix(out / "phi.csv").shape == (64, 64)
        assert csvio.read_matrix(out / "atoms_top3.csv").shape == (3, 64)
        wavs = sorted((out / "atoms").glob("atom_*.wav"))
        assert len(wavs) == 3
        assert np.abs(read_wav(wavs[0]).samples).max() == pytest.approx(0.9, abs=1e-4)
        objectives, _ = csvio.read_history(out / "history.csv")
        c = np.array(objectives)
        assert np.all(c[1:] <= c[:-1] * (1 + 1e-9))

    def test_exact_fit_dct(self, periodic_wav, tmp_path):
        out = tmp_path / "out"
        code = main(decompose_args(periodic_wav, out, "--mode", "dct", "--rank", "1",
                                   "--max-iters", "200", "--tau", "1e-300"))
        assert code == 0
        objectives, _ = csvio.read_history(out / "history.csv")
        assert objectives[-1] <= 1e-6 * 64 * 64

    def test_reference_protocol_flags(self, periodic_wav, tmp_path):
        args = ["decompose", str(periodic_wav), "--out", str(tmp_path), "-K", "10",
                "--lambda", "1e6", "--tau", "1e-7", "--max-iters", "2", "--frame-ms", "40",
                "--overlap", "0.5"]
        assert main(args) == 0

    def test_config_file_and_override(self, periodic_wav, tmp_path):
        cfg = tmp_path / "c.toml"
        cfg.write_text('rank = 2\nmax_iters = 3\nframe_ms = 8\nmode = "dct"\n')
        assert main(["decompose", str(periodic_wav), "--config", str(cfg),
                     "--out", str(tmp_path / "o"), "--max-iters", "5"]) == 0
        objectives, _ = csvio.read_history(tmp_path / "o" / "history.csv")
        assert len(objectives) == 6

    def test_unknown_config_key(self, periodic_wav, tmp_path):
        cfg = tmp_path / "c.toml"
        cfg.write_text("bogus = 1\n")
        assert main(["decompose", str(periodic_wav), "--config", str(cfg)]) == 2

    def test_missing_file(self, tmp_path):
        assert main(["decompose", str(tmp_path / "nope.wav"), "--out", str(tmp_path)]) == 3

    def test_bad_rank(self, periodic_wav, tmp_path):
        assert main(decompose_args(periodic_wav, tmp_path, "--rank", "0")) == 2

    def test_bad_top(self, periodic_wav, tmp_path):
        assert main(decompose_args(periodic_wav, tmp_path, "--top", "65")) == 2

    def test_too_short(self, tmp_path):
        write_wav(Signal(np.zeros(10), RATE), tmp_path / "s.wav")
        assert main(decompose_args(tmp_path / "s.wav", tmp_path)) == 2

    def test_module_entry_point(self, periodic_wav, tmp_path):
        proc = subprocess.run([sys.executable, "-m", "tlnmf", *decompose_args(
            periodic_wav, tmp_path, "--max-iters", "2")], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        assert "iterations" in proc.stdout


class TestMix:
    def test_snr(self, band_wavs, tmp_path):
        sp, no = band_wavs
        out = tmp_path / "m"
        assert main(["mix", "--speech", str(sp), "--noise", str(no), "--snr-db", "-5",
                     "--out", str(out)]) == 0
        s = read_wav(out / "ref_sp.wav").samples
        n = read_wav(out / "ref_no.wav").samples
        snr = 10 * np.log10(np.mean(s ** 2) / np.mean(n ** 2))
        assert snr == pytest.approx(-5.0, abs=0.01)
        mix = read_wav(out / "mixture.wav").samples
        assert np.abs(mix - s - n).max() <= 3 / 32768
        assert (out / "mix.csv").read_text().startswith("snr_db,speech_gain,noise_gain\n")

    def test_equal_power_unit_gain(self, tmp_path):
        r = np.random.default_rng(1)
        x = r.standard_normal(400)
        x *= 0.1 / np.sqrt(np.mean(x ** 2))
        write_wav(Signal(x, RATE), tmp_path / "a.wav")
        write_wav(Signal(-x, RATE), tmp_path / "b.wav")
        assert main(["mix", "--speech", str(tmp_path / "a.wav"), "--noise",
                     str(tmp_path / "b.wav"), "--snr-db", "0", "--out", str(tmp_path)]) == 0
        _, values = (tmp_path / "mix.csv").read_text().splitlines()
        snr, speech_gain, noise_gain = map(float, values.split(","))
        assert noise_gain / speech_gain == pytest.approx(1.0, abs=1e-9)

    def test_minus_ten_db(self, band_wavs, tmp_path):
        sp, no = band_wavs
        assert main(["mix", "--speech", str(sp), "--noise", str(no), "--snr-db", "-10",
                     "--out", str(tmp_path / "m")]) == 0
        s = read_wav(tmp_path / "m" / "ref_sp.wav").samples
        n = read_wav(tmp_path / "m" / "ref_no.wav").samples
        assert np.mean(n ** 2) / np.mean(s ** 2) == pytest.approx(10.0, rel=1e-3)

    def test_length_tiling_and_strict(self, tmp_path):
        r = np.random.default_rng(0)
        write_wav(Signal(0.1 * r.standard_normal(100), RATE), tmp_path / "a.wav")
        write_wav(Signal(0.1 * r.standard_normal(60), RATE), tmp_path / "b.wav")
        base = ["mix", "--speech", str(tmp_path / "a.wav"), "--noise", str(tmp_path / "b.wav"),
                "--out", str(tmp_path / "m")]
        assert main(base) == 0
        assert len(read_wav(tmp_path / "m" / "mixture.wav")) == 100
        assert main(base + ["--strict"]) == 2

    def test_zero_power(self, tmp_path):
        write_wav(Signal(np.zeros(50), RATE), tmp_path / "z.wav")
        write_wav(Signal(np.full(50, 0.1), RATE), tmp_path / "c.wav")
        assert main(["mix", "--speech", str(tmp_path / "z.wav"), "--noise",
                     str(tmp_path / "c.wav"), "--out", str(tmp_path)]) == 2


def separate_args(sp, no, mixture, out, *extra):
    return ["separate", "--mixture", str(mixture), "--speech", str(sp), "--noise", str(no),
            "--references", str(sp), str(no), "--frame-ms", "16", "--out", str(out), *extra]


class TestSeparate:
    @pytest.fixture
    def mixture(self, band_wavs, tmp_path):
        sp, no = band_wavs
        main(["mix", "--speech", str(sp), "--noise", str(no), "--out", str(tmp_path / "m")])
        return tmp_path / "m"

    def test_dct_oracle_separation(self, mixture, tmp_path):
        m = mixture
        out = tmp_path / "sep"
        code = main(separate_args(m / "ref_sp.wav", m / "ref_no.wav", m / "mixture.wav", out,
                                  "--mode", "dct", "--lambda-sp", "0.1", "--lambda-no", "0.1",
                                  "--max-iters", "500", "--save-masks"))
        assert code == 0
        rows = csvio.read_scores(out / "scores.csv")
        assert len(rows) == 2
        assert all(r["sir"] >= 20 for r in rows)
        mask = csvio.read_matrix(out / "mask_sp.csv")
        assert np.all((mask >= 0) & (mask <= 1))
        assert (out / "est_sp.wav").exists() and (out / "est_no.wav").exists()

    def test_both_modes(self, mixture, tmp_path):
        m = mixture
        out = tmp_path / "sep"
        assert main(separate_args(m / "ref_sp.wav", m / "ref_no.wav", m / "mixture.wav", out,
                                  "--mode", "both", "--max-iters", "3",
                                  "--warmup-iters", "1")) == 0
        assert (out / "tlnmf" / "history.csv").exists()
        assert (out / "dct" / "history.csv").exists()
        assert {r["method"] for r in csvio.read_scores(out / "scores.csv")} == {"tlnmf", "dct"}

    def test_missing_option(self, band_wavs, tmp_path):
        assert main(["separate", "--mixture", str(band_wavs[0]), "--out", str(tmp_path)]) == 2

    def test_rate_mismatch(self, band_wavs, tmp_path):
        write_wav(Signal(np.zeros(4000), 8000), tmp_path / "other.wav")
        sp, no = band_wavs
        assert main(separate_args(sp, no, tmp_path / "other.wav", tmp_path)) == 2


class TestDeterminism:
    def test_decompose_byte_identical(self, periodic_wav, tmp_path):
        for d in ("a", "b"):
            assert main(decompose_args(periodic_wav, tmp_path / d, "--seed", "7")) == 0
        for name in ("phi.csv", "w.csv", "h.csv", "history.csv", "atom_scores.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
