import json

import pytest

from smilansky import cli
from smilansky.cli import ConfigError, main, parse_config, run


def _read(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown"):
        parse_config("density", {"mu": [1.0], "E": [0.0], "energy": 3})


@pytest.mark.parametrize("grid", [[], [1.0, 0.5], [0.2, 0.2]])
def test_bad_grids_rejected(grid):
    with pytest.raises(ConfigError):
        parse_config("density", {"mu": [1.0], "E": grid})


def test_mu_xor_alpha():
    with pytest.raises(ConfigError):
        parse_config("spectrum-j0", {})
    with pytest.raises(ConfigError):
        parse_config("spectrum-j0", {"mu": [1.0], "alpha": [1.0]})


def test_linspace_grid():
    cfg = parse_config("density", {"mu": [1.0], "E": {"linspace": [-1, 1, 5]}})
    assert cfg.params["E"] == [-1.0, -0.5, 0.0, 0.5, 1.0]


def test_complex_grid_order():
    cfg = parse_config("recurrence", {"mu": [1.0], "Lambda": "-1,1j,0.25"})
    assert cfg.params["Lambda"] == [-1, 1j, 0.25]
    with pytest.raises(ConfigError):
        parse_config("recurrence", {"mu": [1.0], "Lambda": "-1,0.25,1j"})


def test_resolvent_limits():
    base = {"mu": [1.5], "Lambda": ["1j"]}
    with pytest.raises(ConfigError):
        parse_config("resolvent-check", {**base, "M": 65})
    with pytest.raises(ConfigError):
        parse_config("resolvent-check", {**base, "M": 8, "N_jacobi": 31})
    with pytest.raises(ConfigError):
        parse_config("resolvent-check", {**base, "X": 1.0, "h": 0.3})


def test_echo_round_trips():
    cfg = parse_config("recurrence", {"mu": [0.5, 1.0], "Lambda": [[0, 1], [0.25, -0.5]]})
    again = parse_config("recurrence", json.loads(json.dumps(cfg.echo())))
    assert again.params == cfg.params


def test_density_example(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["density", "--mu", "1", "--E", "-1", "--output", str(out)]) == 0
    lines = _read(out).decode().split("\n")
    assert lines[0].startswith("# schema=smilansky-rows/1")
    assert lines[1] == "mu,E,tau,stability,trusted"
    tau = float(lines[2].split(",")[2])
    assert abs(tau) < 1e-6


def test_csv_format(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["spectrum-j0", "--mu", "1.5", "--N", "128", "--k", "3",
                 "--output", str(out)]) == 0
    raw = _read(out)
    assert b"\r" not in raw and raw.endswith(b"\n")
    rows = raw.decode().splitlines()[2:]
    assert len(rows) == 3
    value = rows[0].split(",")[3]
    assert float(value) == float(format(float(value), ".17g"))
    assert rows[0].split(",")[4] in ("true", "false")


def test_json_envelope(tmp_path):
    out = tmp_path / "m.json"
    assert main(["multiplicity-map", "--mu", "0.5", "--E", "0", "1", "1.5",
                 "--format", "json", "--output", str(out)]) == 0
    doc = json.loads(_read(out))
    assert doc["schema"] == "smilansky-rows/1"
    assert doc["columns"] == ["mu", "E", "base", "extra", "total", "boundary"]
    assert doc["config_echo"]["command"] == "multiplicity-map"
    assert [r[4] for r in doc["rows"]] == [1, 3, None]


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"mu": [1.5], "N": 64, "k": 2}))
    out = tmp_path / "o.csv"
    assert main(["spectrum-j0", "--config", str(cfg), "--k", "1", "--output", str(out)]) == 0
    assert len(_read(out).decode().splitlines()) == 3


def test_config_error_writes_nothing(tmp_path):
    out = tmp_path / "x.csv"
    assert main(["density", "--mu", "1", "--E", "--output", str(out)]) == 2
    assert main(["density", "--mu", "1", "--E", "2", "1", "--output", str(out)]) == 2
    assert not out.exists()


def test_numerical_failure_exit(tmp_path):
    out = tmp_path / "r.csv"
    code = main(["resolvent-check", "--mu", "1.5", "--Lambda", "1j", "--M", "2",
                 "--h", "5", "--X", "20", "--output", str(out)])
    assert code == 3
    assert len(_read(out).decode().splitlines()) == 2


def test_unstable_truncation_exit(tmp_path):
    out = tmp_path / "p.csv"
    assert main(["point-spectrum", "--mu", "1.00125", "--N", "256",
                 "--output", str(out)]) == 4


def test_numerical_outranks_unstable(monkeypatch):
    from smilansky.errors import QuadratureError, TruncationUnstable

    def fake(mu, p):
        raise (TruncationUnstable if mu < 1 else QuadratureError)("boom")

    monkeypatch.setattr(cli, "_spectrum_j0", fake)
    env, code = run(parse_config("spectrum-j0", {"mu": [0.5, 1.5]}))
    assert code == 3
    assert len(env.diagnostics) == 2


def test_threads_do_not_change_output(tmp_path):
    args = ["density", "--mu", "0.5", "1.5", "--E", "-1", "0.3", "2"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--threads", "1", "--output", str(a)]) == 0
    assert main(args + ["--threads", "8", "--output", str(b)]) == 0
    assert _read(a) == _read(b)


def test_recurrence_rows():
    env, code = run(parse_config("recurrence", {"mu": [1.5], "Lambda": ["1j"], "N": 2000}))
    assert code == 0
    (row,) = env.rows
    assert row["regime"] == "SuperCritical"
    assert row["fit_residual"] < 0.1


def test_module_entry_point():
    import subprocess
    import sys
    r = subprocess.run([sys.executable, "-m", "smilansky", "multiplicity-map", "--mu", "2",
                        "--E", "1"], capture_output=True, text=True)
    assert r.returncode == 0
    assert r.stdout.splitlines()[2] == "2,1,2,0,2,false"
