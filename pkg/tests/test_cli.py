import json

import numpy as np
import pytest

from diffstego.chaos import RealKey
from diffstego.cli import main
from diffstego.images import PixelGrid
from diffstego.synth import blocky_secret


@pytest.fixture
def keyfile(tmp_path):
    p = tmp_path / "k.key"
    p.write_text("mu=3.799200023214331;a0=0.8888564633215454\n")
    return str(p)


@pytest.fixture
def secret_png(tmp_path):
    p = tmp_path / "secret.png"
    blocky_secret(seed=21).save(p)
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestKeygen:
    def test_writes_valid_key_and_codeword(self, tmp_path, capsys):
        out = tmp_path / "k.key"
        code, stdout, _ = run(capsys, "keygen", "--out", str(out), "--seed", "3")
        assert code == 0
        key = RealKey.from_file_text(out.read_text())
        assert "codeword:" in stdout
        hex_word = stdout.split("codeword:")[1].split()[0]
        assert len(hex_word) == 26
        assert RealKey.from_file_text(hex_word) == key
        assert "(102 bits)" in stdout

    def test_explicit_parameters(self, tmp_path, capsys):
        code, stdout, _ = run(
            capsys, "keygen", "--mu", "3.799200023214331", "--a0", "0.8888564633215454"
        )
        assert code == 0
        assert stdout.startswith("mu=3.799200023214331;a0=0.8888564633215454")


class TestCapacity:
    def test_reports_eligible_and_payload_bits(self, secret_png, capsys):
        code, stdout, _ = run(capsys, "capacity", secret_png, "--mode", "cdjb")
        assert code == 0
        rep = json.loads(stdout)
        assert rep["payload_bits"] == rep["eligible"] // 5
        assert rep["required_per_bit"] == 5

    def test_rgb_capacity_sums_planes(self, tmp_path, capsys):
        from PIL import Image

        rng = np.random.default_rng(1)
        base = np.repeat(np.repeat(rng.integers(30, 220, (8, 8)), 8, 0), 8, 1)
        arr = np.stack([base, base, base], axis=-1).astype(np.uint8)
        p = tmp_path / "rgb.png"
        Image.fromarray(arr, "RGB").save(p)
        code, stdout, _ = run(capsys, "capacity", str(p))
        rep = json.loads(stdout)
        assert code == 0 and rep["planes"] == 3


class TestHideRevealVerify:
    def test_full_cycle(self, tmp_path, secret_png, keyfile, capsys):
        stego = str(tmp_path / "stego.png")
        out = str(tmp_path / "rec.png")
        code, stdout, _ = run(
            capsys, "hide", secret_png, "--out", stego, "--kpri", "p1", "--kpub", "p2",
            "--key", keyfile,
        )
        assert code == 0
        assert json.loads(stdout)["mode"] == "real-key"

        code, stdout, _ = run(capsys, "verify", stego, "--key", keyfile)
        assert code == 0
        assert json.loads(stdout)["verdict"] == "authentic"

        code, stdout, _ = run(capsys, "reveal", stego, "--out", out, "--key", keyfile)
        assert code == 0
        rep = json.loads(stdout)
        assert rep["verdict"] == "authentic"
        assert rep["k_pri"] == "p1" and rep["k_pub"] == "p2"
        assert PixelGrid.load(out).array.shape == (64, 64)

    def test_without_key_warns(self, tmp_path, secret_png, capsys):
        stego = str(tmp_path / "stego.png")
        code, _, stderr = run(
            capsys, "hide", secret_png, "--out", stego, "--kpri", "a", "--kpub", "b",
            "--mode", "without-key",
        )
        assert code == 0
        assert "warning" in stderr

        code, stdout, _ = run(capsys, "verify", stego)
        assert code == 0 and json.loads(stdout)["verdict"] == "authentic"

    def test_real_key_mode_requires_key(self, tmp_path, secret_png, capsys):
        code, _, stderr = run(
            capsys, "hide", secret_png, "--out", str(tmp_path / "s.png"),
            "--kpri", "a", "--kpub", "b", "--mode", "real-key",
        )
        assert code == 1

    def test_tampered_exit_code(self, tmp_path, secret_png, keyfile, capsys):
        stego_path = tmp_path / "stego.png"
        run(capsys, "hide", secret_png, "--out", str(stego_path), "--kpri", "a",
            "--kpub", "b", "--key", keyfile)
        g = PixelGrid.load(stego_path)
        a = g.array.copy()
        a[5, 5] = (int(a[5, 5]) + 1) % 256
        PixelGrid(a).save(stego_path)
        code, stdout, _ = run(capsys, "verify", str(stego_path), "--key", keyfile)
        assert code in (2, 3)
        assert json.loads(stdout)["verdict"] in ("tampered", "malformed")

    def test_malformed_exit_code(self, tmp_path, keyfile, capsys):
        plain = tmp_path / "plain.png"
        blocky_secret(seed=33).save(plain)
        code, stdout, _ = run(capsys, "verify", str(plain), "--key", keyfile)
        assert code in (2, 3)

    def test_capacity_exit_code(self, tmp_path, keyfile, capsys):
        tiny = tmp_path / "tiny.png"
        blocky_secret(seed=2, size=12).save(tiny)
        code, _, stderr = run(
            capsys, "hide", str(tiny), "--out", str(tmp_path / "s.png"),
            "--kpri", "a-very-long-condition", "--kpub", "another-long-condition",
            "--key", keyfile,
        )
        assert code == 4
        assert "capacity" in stderr

    def test_usage_error_exit_code(self, capsys):
        code, _, stderr = run(capsys, "hide")
        assert code == 1


class TestAttackSim:
    def test_detected_flag(self, tmp_path, secret_png, keyfile, capsys):
        stego = str(tmp_path / "stego.png")
        run(capsys, "hide", secret_png, "--out", stego, "--kpri", "a", "--kpub", "b",
            "--key", keyfile)
        other = str(tmp_path / "other.png")
        blocky_secret(seed=64).save(other)
        code, stdout, _ = run(capsys, "attack-sim", stego, other, "--key", keyfile)
        assert code == 0
        assert json.loads(stdout)["detected"] is True

        code, stdout, _ = run(capsys, "attack-sim", stego, stego, "--key", keyfile)
        assert json.loads(stdout)["detected"] is False


class TestHistogram:
    def test_csv_output(self, secret_png, tmp_path, capsys):
        out = tmp_path / "h.csv"
        code, _, _ = run(capsys, "histogram", secret_png, "--out", str(out))
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "value,count"
        rows = dict(line.split(",") for line in lines[1:])
        assert "0" in rows and int(rows["0"]) > 0


class TestConfig:
    def test_env_overrides_config_file_but_not_flag(self, tmp_path, secret_png, keyfile,
                                                    capsys, monkeypatch):
        cfgfile = tmp_path / "c.cfg"
        cfgfile.write_text("backend=toy:zero\nsub_steps=25\n")
        monkeypatch.setenv("STEGANO_BACKEND", "toy:const")
        stego = str(tmp_path / "s.png")
        code, stdout, _ = run(
            capsys, "hide", secret_png, "--out", stego, "--kpri", "a", "--kpub", "b",
            "--key", keyfile, "--config", str(cfgfile),
        )
        assert code == 0
        assert json.loads(stdout)["backend"] == "toy:const"
        code, stdout, _ = run(
            capsys, "hide", secret_png, "--out", stego, "--kpri", "a", "--kpub", "b",
            "--key", keyfile, "--config", str(cfgfile), "--backend", "toy:tiled",
        )
        assert json.loads(stdout)["backend"] == "toy:tiled"

    def test_repeat_runs_byte_identical(self, tmp_path, secret_png, keyfile, capsys):
        a = tmp_path / "a.png"
        b = tmp_path / "b.png"
        for out in (a, b):
            run(capsys, "hide", secret_png, "--out", str(out), "--kpri", "x",
                "--kpub", "y", "--key", keyfile)
        assert a.read_bytes() == b.read_bytes()


class TestSessionLedger:
    def test_counter_across_commands(self, tmp_path, keyfile, capsys):
        session = str(tmp_path / "session.json")
        run(capsys, "keygen", "--out", str(tmp_path / "fresh.key"), "--seed", "9",
            "--session", session)
        cfg = tmp_path / "fast.cfg"
        cfg.write_text("sub_steps=10\n")
        for i in range(10):
            secret = tmp_path / f"s{i}.png"
            blocky_secret(seed=200 + i).save(secret)
            code, _, _ = run(
                capsys, "hide", str(secret), "--out", str(tmp_path / f"st{i}.png"),
                "--kpri", f"p{i}", "--kpub", f"q{i}", "--key", keyfile,
                "--session", session, "--config", str(cfg),
            )
            assert code == 0
        report = json.loads((tmp_path / "session.json").read_text())
        assert report["key_exchange_bits"] == 102
        assert report["images"] == 10
        assert report["pseudo_key_baseline_bits"] == 3568
