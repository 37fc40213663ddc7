import json

import pytest

from mcim.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_generate_writes_bundle(tmp_path, capsys):
    out = tmp_path / "fb"
    code, text, _ = run(capsys, "generate", "--arch", "fb", "--width-a", "16", "--width-b", "16", "--ct", "2",
                        "--out", str(out))
    assert code == 0 and "latency 2" in text
    assert len(list(out.iterdir())) == 5
    assert json.loads((out / "manifest.json").read_text())["L"] == 2
    code, _, err = run(capsys, "generate", "--arch", "fb", "--width-a", "16", "--width-b", "16", "--ct", "2",
                       "--out", str(out))
    assert code == 3 and "refusing" in err
    code, _, _ = run(capsys, "generate", "--arch", "fb", "--width-a", "16", "--width-b", "16", "--ct", "2",
                     "--out", str(out), "--force")
    assert code == 0


def test_config_errors_list_everything(capsys):
    code, _, err = run(capsys, "generate", "--arch", "karatsuba", "--ct", "2", "--fa", "3ca", "--levels", "9")
    assert code == 2
    assert "InvalidCT" in err and "InvalidFA" in err and "InvalidLevels" in err
    assert run(capsys, "simulate", "--arch", "nonsense")[0] == 2


def test_config_file_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"arch": "fb", "width_a": 8, "width_b": 8, "ct": 3}))
    code, text, _ = run(capsys, "simulate", "--config", str(cfg), "--ct", "4", "--vectors", "50")
    assert code == 0 and "mcim_fb_8x8_ct4" in text and "PASS 50/50" in text
    assert run(capsys, "simulate", "--config", str(tmp_path / "missing.json"))[0] == 3
    cfg.write_text("{not json")
    assert run(capsys, "simulate", "--config", str(cfg))[0] == 2


def test_simulate(capsys):
    code, text, _ = run(capsys, "simulate", "--arch", "star", "--width-a", "8", "--width-b", "8", "--ct", "1")
    assert code == 0 and "PASS 200/200" in text
    code, text, _ = run(capsys, "simulate", "--arch", "star", "--width-a", "8", "--width-b", "8", "--ct", "1",
                        "--vectors", "0")
    assert code == 0 and "PASS 0/0" in text
    code, text, _ = run(capsys, "simulate", "--arch", "ff", "--width-a", "8", "--width-b", "8", "--ct", "2",
                        "--inject-fault")
    assert code == 1 and "first failure: vector 0 (cycle 2)" in text


def test_estimate(capsys):
    code, text, _ = run(capsys, "estimate", "--arch", "fb", "--width-a", "16", "--width-b", "16", "--ct", "4")
    assert code == 0
    assert text.count("savings") == 4


def test_sweep(tmp_path, capsys):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps([{"arch": "fb", "width_a": 8, "width_b": 8, "ct": [2, 3]}, {"arch": "star", "ct": 2}]))
    code, text, _ = run(capsys, "sweep", str(grid), "--out", str(tmp_path / "sw"))
    assert code == 0
    rows = (tmp_path / "sw" / "sweep.csv").read_text().splitlines()
    assert rows[0].startswith("arch,ct,ppm,comp,fa,K,P,M,N,cells_FA")
    assert len(rows) == 4 and rows[-1].endswith("ERROR")
    assert run(capsys, "sweep", str(grid), "--out", str(tmp_path / "sw"))[0] == 3
    grid.write_text("[{")
    assert run(capsys, "sweep", str(grid))[0] == 4
    assert run(capsys, "sweep", str(tmp_path / "nope.json"))[0] == 4
    grid.write_text(json.dumps({"ct": [9, 2]}))
    assert run(capsys, "sweep", str(grid))[0] == 4


def test_same_seed_same_output(tmp_path, capsys):
    texts = []
    for i in range(2):
        run(capsys, "generate", "--arch", "karatsuba", "--width-a", "12", "--width-b", "12", "--ct", "3",
            "--seed", "5", "--out", str(tmp_path / str(i)))
        texts.append({p.name: p.read_text() for p in (tmp_path / str(i)).iterdir()})
    assert texts[0] == texts[1]
