import json
import subprocess
import sys

import pytest

from chromalg.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def na_minus1(tmp_path, capsys):
    path = tmp_path / "na.json"
    assert run(capsys, "gen", "na", "--p", 3, "--N", 8, "--a", -1, "--out", path)[0] == 0
    return path


class TestModules:
    def test_validate_ok(self, capsys, na_minus1):
        code, out, _ = run(capsys, "validate", na_minus1)
        assert code == 0 and json.loads(out)["ok"] is True

    def test_validate_fails(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"ring": {"p": 2, "d": 1, "N": 4}, "rank": 1,
                                   "F": [[{"coords": [1]}]], "V": [[{"coords": [1]}]]}))
        code, out, _ = run(capsys, "validate", bad)
        assert code == 1 and json.loads(out)["ok"] is False

    def test_exterior_then_detect(self, capsys, tmp_path, na_minus1):
        top = tmp_path / "top.json"
        assert run(capsys, "exterior", na_minus1, "--m", 2, "--out", top)[0] == 0
        assert json.loads(top.read_text())["rank"] == 1
        code, out, _ = run(capsys, "detect-gm", na_minus1)
        assert code == 0 and json.loads(out)["verdict"] == "ISO"

    def test_detect_honda_p3(self, capsys, tmp_path):
        path = tmp_path / "honda.json"
        run(capsys, "gen", "honda-module", "--p", 3, "--h", 2, "--N", 6, "--out", path)
        code, out, _ = run(capsys, "detect-gm", path)
        assert code == 1 and json.loads(out)["verdict"] == "NOT-ISO"

    def test_table_format(self, capsys, na_minus1):
        code, out, _ = run(capsys, "validate", na_minus1, "--format", "table")
        assert code == 0 and "ok: True" in out

    def test_bad_json(self, capsys, tmp_path):
        p = tmp_path / "x.json"
        p.write_text("{nope")
        code, _, err = run(capsys, "validate", p)
        assert code == 2 and "invalid JSON" in err

    def test_missing_file(self, capsys, tmp_path):
        assert run(capsys, "validate", tmp_path / "absent.json")[0] == 2

    def test_malformed_module(self, capsys, tmp_path):
        p = tmp_path / "m.json"
        p.write_text(json.dumps({"rank": 2}))
        assert run(capsys, "validate", p)[0] == 2


class TestLaws:
    @pytest.fixture
    def honda32(self, tmp_path, capsys):
        path = tmp_path / "h.json"
        run(capsys, "gen", "honda-law", "--p", 3, "--h", 2, "--D", 30, "--out", path)
        return path

    def test_pseries_and_height(self, capsys, honda32):
        code, out, _ = run(capsys, "fgl", "pseries", honda32, "--degree", 27)
        assert code == 0 and json.loads(out)["pseries"] == [[9, 1]]
        code, out, _ = run(capsys, "fgl", "height", honda32)
        assert json.loads(out) == {"p": 3, "D": 27, "height": 2, "exact": True}

    def test_detect_no_hom(self, capsys, honda32):
        code, out, _ = run(capsys, "fgl", "detect", honda32, "--degree", 30)
        assert code == 1 and json.loads(out)["verdict"] == "NO-NONZERO-HOM-TO-DEGREE-30"

    def test_detect_gm(self, capsys, tmp_path):
        path = tmp_path / "gm.json"
        run(capsys, "gen", "gm-law", "--p", 2, "--D", 8, "--out", path)
        code, out, _ = run(capsys, "fgl", "detect", path)
        obj = json.loads(out)
        assert code == 0 and obj["verdict"] == "ISO-TO-DEGREE-8"
        assert obj["witness"] == {"n": 0, "g": [[1, 1]], "g_degree": 8}

    def test_westerland(self, capsys, tmp_path):
        path = tmp_path / "gm.json"
        run(capsys, "gen", "gm-law", "--p", 2, "--D", 6, "--out", path)
        code, out, _ = run(capsys, "fgl", "westerland", path)
        assert code == 0 and json.loads(out)["count"] == 8

    def test_degree_too_large(self, capsys, honda32):
        assert run(capsys, "fgl", "height", honda32, "--degree", 31)[0] == 2

    def test_config_default_degree(self, capsys, tmp_path, honda32):
        cfg = tmp_path / "c.toml"
        cfg.write_text("[defaults]\nD = 9\n")
        code, out, _ = run(capsys, "--config", cfg, "fgl", "pseries", honda32)
        assert json.loads(out)["D"] == 9
        # flags override the config
        code, out, _ = run(capsys, "--config", cfg, "fgl", "pseries", honda32, "--degree", 12)
        assert json.loads(out)["D"] == 12

    def test_bad_config(self, capsys, tmp_path, honda32):
        cfg = tmp_path / "c.toml"
        cfg.write_text("Q = 1\n")
        assert run(capsys, "--config", cfg, "fgl", "pseries", honda32)[0] == 2


class TestHopf:
    def test_verify_and_replay(self, capsys, tmp_path):
        cert = tmp_path / "cert.json"
        code, _, _ = run(capsys, "hopf", "verify-xpzero", "--p", 2, "--h", 1, "--n", 3, "--out", cert)
        assert code == 0 and json.loads(cert.read_text())["verdict"] == "VERIFIED"
        code, out, _ = run(capsys, "hopf", "replay", cert)
        assert code == 0 and json.loads(out) == {"identical": True, "verdict": "VERIFIED"}

    def test_replay_mismatch(self, capsys, tmp_path):
        cert = tmp_path / "cert.json"
        run(capsys, "hopf", "verify-xpzero", "--p", 2, "--h", 0, "--n", 2, "--out", cert)
        obj = json.loads(cert.read_text())
        obj["steps"][0]["rule"] = "magic"
        cert.write_text(json.dumps(obj))
        code, out, _ = run(capsys, "hopf", "replay", cert)
        assert code == 1 and json.loads(out)["identical"] is False

    def test_small_n_is_input_error(self, capsys):
        code, _, err = run(capsys, "hopf", "verify-xpzero", "--p", 2, "--h", 1, "--n", 2)
        assert code == 2 and "n > h + 1" in err

    def test_replay_needs_file(self, capsys):
        assert run(capsys, "hopf", "replay")[0] == 2

    def test_f0(self, capsys):
        code, out, _ = run(capsys, "hopf", "f0", "--p", 2, "--h", 1, "--m", 5)
        obj = json.loads(out)
        assert code == 0 and not obj["nilpotent"]
        assert [r["vh_power"] for r in obj["rows"]] == [1, 3, 7, 15, 31]

    def test_missing_param(self, capsys):
        code, _, err = run(capsys, "hopf", "f0", "--p", 2, "--h", 1)
        assert code == 2 and "--m" in err


class TestBP:
    def test_pseries(self, capsys):
        code, out, _ = run(capsys, "bp", "pseries", "--p", 2, "--h", 1, "--r", 1, "--D", 8)
        assert code == 0 and json.loads(out) == [[2, {"v1": 1}]]

    def test_fsum(self, capsys):
        code, out, _ = run(capsys, "bp", "fsum", "--p", 3, "--h", 2, "--r", 0, "--D", 9)
        assert json.loads(out) == [[3, {"v1": 1}], [9, {"v2": 1}]]

    def test_nu(self, capsys):
        code, out, _ = run(capsys, "bp", "nu", "--p", 2, "--h", 3)
        assert json.loads(out) == {"p": 2, "nu": [1, 3, 7, 15]}

    def test_bad_r(self, capsys):
        assert run(capsys, "bp", "pseries", "--p", 2, "--h", 1, "--r", 2)[0] == 2


def test_gen_na_needs_d1(capsys):
    assert run(capsys, "gen", "na", "--p", 2, "--d", 2)[0] == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "chromalg", "bp", "nu", "--p", "3", "--h", "2"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and json.loads(res.stdout)["nu"] == [1, 4, 13]
