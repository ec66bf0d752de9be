import json
import subprocess
import sys

import pytest
from test_experiments import BASIC

from rdqsim.cli import EXIT_CONFIG, EXIT_RUNTIME, main
from rdqsim.experiments import experiment_csv, parse_config, read_csv
from rdqsim.pauli import PseudoHamiltonian
from rdqsim.synthesis import Circuit


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "basic.ini"
    path.write_text(BASIC)
    return path


def test_run_to_stdout(config_file, capsys):
    assert main(["run", str(config_file)]) == 0
    assert capsys.readouterr().out == experiment_csv(parse_config(BASIC))


def test_run_to_file_with_override(config_file, tmp_path):
    out = tmp_path / "out.csv"
    assert main(["run", str(config_file), "--out", str(out), "--override", "run.engine=oracle"]) == 0
    assert out.read_text().splitlines()[0] == "t,n_total_oracle,p(*o)_oracle"


def test_bad_config_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text(BASIC.replace("dt = 1/10", "dt = fast"))
    assert main(["run", str(bad)]) == EXIT_CONFIG
    assert "line 9" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.ini")]) == EXIT_CONFIG


def test_decode_failure_exit_code(capsys):
    assert main(["preset", "pair-annihilation-7", "--override", "t_max=10"]) == EXIT_RUNTIME
    assert "t=" in capsys.readouterr().err


def test_dump_hamiltonian(config_file, capsys):
    assert main(["dump-hamiltonian", str(config_file)]) == 0
    ham = PseudoHamiltonian.loads(capsys.readouterr().out)
    assert ham.width == 2 and ham.constant == pytest.approx(1.0)


def test_dump_circuit(config_file, capsys):
    assert main(["dump-circuit", str(config_file), "--steps", "2"]) == 0
    text = capsys.readouterr().out
    assert text.startswith("QUBITS 3\n")
    circ = Circuit.loads(text)
    assert main(["dump-circuit", str(config_file), "--steps", "1"]) == 0
    one = Circuit.loads(capsys.readouterr().out)
    assert circ == one.repeat(2)
    assert main(["dump-circuit", str(config_file), "--steps", "-1"]) == EXIT_CONFIG


def test_list_presets(capsys):
    assert main(["list-presets"]) == 0
    catalog = json.loads(capsys.readouterr().out)
    assert catalog == sorted(catalog, key=lambda c: c["name"])
    dp = next(c for c in catalog if c["name"] == "dp")
    assert dp["sweep"] == {"key": "model.decay", "values": ["0.1", "0.2", "0.4", "1"]}
    for entry in catalog:
        parse_config(entry["config"])


def test_preset_sweep_writes_files(tmp_path, capsys):
    out_dir = tmp_path / "sweep"
    rc = main(["preset", "single-site", "--out-dir", str(out_dir), "--jobs", "2",
               "--override", "t_max=1/2"])
    assert rc == 0
    files = sorted(p.name for p in out_dir.iterdir())
    assert files == ["single-site_generation=0.2.csv", "single-site_generation=1.csv",
                     "single-site_generation=5.csv"]
    cols = read_csv((out_dir / files[0]).read_text())
    assert cols["t"][-1] == pytest.approx(0.5)
    assert main(["preset", "single-site", "--out", str(tmp_path / "x.csv")]) == EXIT_CONFIG


def test_preset_is_byte_identical(capsys):
    args = ["preset", "hopping", "--override", "t_max=1"]
    main(args)
    first = capsys.readouterr().out
    main(args)
    assert capsys.readouterr().out == first


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rdqsim", "list-presets"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)
