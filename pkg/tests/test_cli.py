import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from nyquist_tdm.cli import main


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _col(path, name):
    return np.array([float(r[name]) for r in _rows(path)])


def test_gen_nss_peak(tmp_path):
    out = tmp_path / "n.csv"
    assert main(["gen", "--kind", "nss", "--n", "4", "--df", "10e9", "--t-start", "0",
                 "--t-end", "1e-10", "--samples", "11", "--out", str(out)]) == 0
    rows = _rows(out)
    assert list(rows[0]) == ["t_seconds", "amplitude"]
    assert float(rows[0]["t_seconds"]) == 0.0 and float(rows[0]["amplitude"]) == 1.0


def test_gen_cnss_peak(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["gen", "--kind", "cnss", "--n", "4", "--df", "10e9", "--samples", "40001",
                 "--out", str(out)]) == 0
    assert _col(out, "amplitude").max() == pytest.approx(4 / (3 * math.sqrt(3)), abs=1e-6)


def test_gen_parity_error(capsys):
    assert main(["gen", "--kind", "cnss", "--n", "5"]) == 2
    assert "even" in capsys.readouterr().err


def test_gen_fdonss_zero_identical_to_nss(tmp_path):
    zero = tmp_path / "zero.csv"
    zero.write_text("t_seconds,alpha\n-1,0\n1,0\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    common = ["--n", "8", "--df", "10e9", "--samples", "501"]
    assert main(["gen", "--kind", "fdonss", "--trajectory", str(zero), "--out", str(a)] + common) == 0
    assert main(["gen", "--kind", "nss", "--out", str(b)] + common) == 0
    assert a.read_bytes() == b.read_bytes()


def test_gen_trajectory_only_for_fdonss(tmp_path):
    assert main(["gen", "--kind", "nss", "--trajectory", "x.csv"]) == 2
    assert main(["gen", "--kind", "fdonss"]) == 2


def test_gen_raised_cosine(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["gen", "--kind", "raised-cosine", "--delta-t", "1", "--rolloff", "0.5",
                 "--t-start", "-2", "--t-end", "2", "--samples", "5", "--out", str(out)]) == 0
    np.testing.assert_allclose(_col(out, "amplitude"), [0, math.pi / 4 * np.sinc(1.0), 1,
                                                        math.pi / 4 * np.sinc(1.0), 0], atol=1e-15)


def test_delay_phases(tmp_path):
    c0, c1, c2 = (tmp_path / f"c{k}.csv" for k in range(3))
    for k, path in enumerate((c0, c1, c2)):
        assert main(["delay", "--n", "7", "--k", str(k), "--out-comb", str(path)]) == 0
    assert np.all(_col(c0, "phase_rad") == 0)
    m = np.arange(4)
    np.testing.assert_allclose(_col(c1, "phase_rad"), -2 * np.pi * m / 7, atol=1e-12)
    np.testing.assert_allclose(_col(c2, "phase_rad"), 2 * _col(c1, "phase_rad"), atol=1e-12)


def test_delay_waveform_and_range(tmp_path):
    w = tmp_path / "w.csv"
    assert main(["delay", "--n", "7", "--k", "1", "--df", "1", "--out-comb", str(tmp_path / "c.csv"),
                 "--out-waveform", str(w), "--t-start", "0", "--t-end", "1", "--samples", "8"]) == 0
    amp = _col(w, "amplitude")
    assert amp[1] == pytest.approx(1.0, abs=1e-12)  # peak moved to t = 1/7
    assert main(["delay", "--n", "7", "--k", "7"]) == 2
    assert main(["delay", "--n", "7"]) == 2


def test_ber_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["ber", "--bits", "8191", "--seed", "7", "--ebn0-stop", "8"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b), "--workers", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert list(_rows(a)[0]) == ["ebn0_db", "bits", "errors", "ber", "reliable"]


def test_ber_noise_free(tmp_path):
    out = tmp_path / "z.csv"
    assert main(["ber", "--kind", "cnss", "--receiver", "peak", "--n", "4", "--noise-free",
                 "--bits", "4096", "--out", str(out)]) == 0
    assert np.all(_col(out, "ber") == 0)


def test_ber_unreliable_exit(tmp_path, capsys):
    out = tmp_path / "u.csv"
    code = main(["ber", "--bits", "400", "--ebn0-start", "14", "--ebn0-stop", "14", "--out", str(out)])
    assert code == 1
    assert _rows(out)[0]["reliable"] == "false"
    assert "unreliable" in capsys.readouterr().err


def test_compare(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    a.write_text("ebn0_db,bits,errors,ber,reliable\n0,10,5,0.5,true\n1,10,4,0.4,true\n")
    b.write_text("ebn0_db,bits,errors,ber,reliable\n0,10,6,0.6,true\n1,10,2,0.2,true\n")
    assert main(["compare", str(a), str(b), "--from-db", "1"]) == 0
    out = capsys.readouterr().out
    assert "crossover_ebn0_db=0.333333" in out
    assert "second_le_first_from_1_db=true" in out


def test_fracdim_trajectory(tmp_path):
    out = tmp_path / "t.csv"
    assert main(["fracdim", "trajectory", "--out", str(out)]) == 0
    t, a = _col(out, "t_seconds"), _col(out, "alpha")
    i = np.argmin(np.abs(t - 2 * math.pi))
    assert a[i] == pytest.approx(1.0, abs=1e-12)


def test_fracdim_dimtrans(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["fracdim", "dimtrans", "--omega", "1", "--window", str(2 * math.pi),
                 "--alpha-start", "0", "--alpha-stop", "1", "--alpha-step", "0.5", "--out", str(out)]) == 0
    vals = _col(out, "value")
    assert len(vals) == 3 and abs(vals[0]) < 1e-12
    meta = json.loads((tmp_path / "d.csv.meta.json").read_text())
    assert "stated" in meta["note"] and len(meta["stated_result"]) == 3


def test_fracdim_residual(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["fracdim", "residual", "--i", "0", "--convention", "unnorm", "--out", str(out)]) == 0
    assert float(_rows(out)[0]["residual"]) == pytest.approx(math.pi - 1, abs=2e-3)


def test_solve_fdonss_zero(tmp_path):
    tr, log = tmp_path / "t.csv", tmp_path / "l.csv"
    assert main(["solve", "--target", "fdonss", "--init", "zero", "--out-trajectory", str(tr),
                 "--out-log", str(log)]) == 0
    rows = _rows(log)
    assert len(rows) == 1 and float(rows[0]["residual"]) < 1e-9
    assert len(_rows(tr)) == 9


def test_solve_monotone_log(tmp_path):
    log = tmp_path / "l.csv"
    assert main(["solve", "--init", "const:0.1", "--max-iter", "30", "--out-trajectory",
                 str(tmp_path / "t.csv"), "--out-log", str(log)]) == 0
    r = _col(log, "residual")
    assert np.all(np.diff(r) <= 0) and r[-1] < r[0]


def test_solve_cfdonss_first_step(tmp_path):
    log = tmp_path / "l.csv"
    assert main(["solve", "--target", "cfdonss", "--init", "zero", "--max-iter", "2",
                 "--out-trajectory", str(tmp_path / "t.csv"), "--out-log", str(log)]) == 0
    assert _col(log, "step_norm")[1] > 0


def test_solve_file_init_and_divergence(tmp_path):
    init = tmp_path / "i.csv"
    init.write_text("t_seconds,alpha\n0,400\n2,400\n")
    tr = tmp_path / "t.csv"
    assert main(["solve", "--init", f"file:{init}", "--out-trajectory", str(tr)]) == 3
    assert np.all(_col(tr, "alpha") == 400)
    assert main(["solve", "--init", "banana"]) == 2


def test_config_file_flags_win(tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("# eight-line sine series\nkind = cnss\nn=8\nsamples=3\n")
    out = tmp_path / "o.csv"
    assert main(["--config", str(cfg), "gen", "--samples", "5", "--out", str(out)]) == 0
    assert len(_rows(out)) == 5
    direct = tmp_path / "p.csv"
    main(["gen", "--kind", "cnss", "--n", "8", "--samples", "5", "--out", str(direct)])
    assert out.read_bytes() == direct.read_bytes()


def test_config_booleans_and_unknown_keys(tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("noise-free=true\nbits=400\nebn0-stop=2\n")
    out = tmp_path / "o.csv"
    assert main(["--config", str(cfg), "ber", "--out", str(out)]) == 0
    assert np.all(_col(out, "errors") == 0)
    cfg.write_text("colour=blue\n")
    assert main(["--config", str(cfg), "ber"]) == 2


def test_console_script_runs():
    res = subprocess.run(
        [sys.executable, "-m", "nyquist_tdm.cli", "delay", "--n", "3", "--k", "0"],
        capture_output=True, text=True, check=True,
    )
    assert res.stdout.splitlines()[0] == "frequency_hz,amplitude,phase_rad"
