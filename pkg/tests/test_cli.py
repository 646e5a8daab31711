import subprocess
import sys

import numpy as np
import pytest

from helfrich_ch.cli import main
from helfrich_ch.io import read_diagnostics

SMALL = """[discretization]
lmax = 6
dt = 1e-3
t_final = 0.03
[output]
diagnostics_every = 10
checkpoint_every = 10
"""


@pytest.fixture
def cfg_file(tmp_path):
    f = tmp_path / "small.ini"
    f.write_text(SMALL)
    return f


def test_bad_config_exit_code(tmp_path, capsys):
    f = tmp_path / "bad.ini"
    f.write_text("[model]\nkapa = 2\n")
    assert main(["run", "--config", str(f)]) == 2
    assert "unknown key model.kapa" in capsys.readouterr().err
    assert main(["selftest", "--config", str(tmp_path / "missing.ini")]) == 2


def test_run_and_resume(cfg_file, tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg_file), "--out", str(out)]) == 0
    d = read_diagnostics(out / "diagnostics.csv")
    np.testing.assert_allclose(d["t"], [0.0, 0.01, 0.02, 0.03])
    assert main(["run", "--config", str(cfg_file), "--out", str(out),
                 "--resume", str(out / "checkpoint_10.mcps")]) == 0
    d2 = read_diagnostics(out / "diagnostics.csv")
    for k in d:
        np.testing.assert_array_equal(d[k], d2[k])


def test_bad_checkpoint_exit_code(cfg_file, tmp_path):
    bad = tmp_path / "junk.mcps"
    bad.write_bytes(b"junk")
    assert main(["run", "--config", str(cfg_file), "--out", str(tmp_path / "o"), "--resume", str(bad)]) == 2


def test_breakdown_exit_code(tmp_path, capsys):
    f = tmp_path / "unstable.ini"
    f.write_text("[discretization]\nlmax = 8\ndt = 1e-3\nt_final = 0.1\nstabilization = 0\n"
                 "[init]\namplitude = 0.2\nu_amplitude = 0.1\n[output]\ncheckpoint_every = 0\n")
    assert main(["run", "--config", str(f), "--out", str(tmp_path / "o")]) == 1
    assert "solver breakdown" in capsys.readouterr().err


@pytest.mark.slow
def test_selftest_subprocess(cfg_file):
    r = subprocess.run([sys.executable, "-m", "helfrich_ch.cli", "selftest", "--config", str(cfg_file)],
                       capture_output=True, text=True, timeout=600)
    lines = r.stdout.splitlines()
    assert lines[-1].startswith("verdict overall")
    assert all(l.startswith("verdict ") for l in lines)
    assert r.returncode == (0 if lines[-1].endswith("PASS") else 1)
