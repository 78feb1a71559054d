import json
from pathlib import Path

import pytest

from pqsim.cli import main
from pqsim.config import PRESET_NAMES, ConfigError, load_config, parse_config, preset_text

try:
    import tomllib
except ImportError:  # pragma: no cover
    import tomli as tomllib


SMALL = """
cut = [2, 2]
observables = ["identity", "magnetization", "loschmidt"]
oracle = true

[model]
kind = "tfim"
n = 4
h = 0.8

[time]
T = 1.0
grid = [0.5, 1.0]

[sampler]
n_samples = 1500
seed = 3

[output]
path = "small"
"""


def write(tmp_path, text, name="cfg.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_presets_listed(capsys):
    assert main(["presets"]) == 0
    assert capsys.readouterr().out.split() == list(PRESET_NAMES)


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_presets_parse(name):
    cfg = load_config(name)
    assert cfg.n_samples >= 2 and cfg.grid[-1] <= cfg.T


def test_bound_dqpt(capsys):
    assert main(["bound", "dqpt"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["lower_bound"] == pytest.approx(2.0)
    assert rep["explicit_cost_rate"] == 2.0
    assert rep["condition1"] is True


def test_run_writes_table_and_manifest(tmp_path):
    cfg = write(tmp_path, SMALL)
    assert main(["run", str(cfg), "--threads", "1", "--out", str(tmp_path / "o")]) == 0
    csv_text = (tmp_path / "o" / "small.csv").read_text().splitlines()
    assert csv_text[0] == "t,observable,mean,stderr,imag_diag,overhead_C,n_samples,oracle_value,abs_error"
    assert len(csv_text) == 1 + 2 * 3
    man = json.loads((tmp_path / "o" / "small.manifest.json").read_text())
    assert man["seed"] == 3 and man["lambda_total"] == 1.0
    assert man["overhead_C"] == pytest.approx(2.718281828459045**2)
    assert {"numpy", "scipy", "pqsim", "python"} <= set(man["versions"])


def test_run_deterministic_across_threads_and_manifest(tmp_path):
    cfg = write(tmp_path, SMALL)
    main(["run", str(cfg), "--threads", "1", "--out", str(tmp_path / "a")])
    main(["run", str(cfg), "--threads", "4", "--out", str(tmp_path / "b")])
    main(["run", str(tmp_path / "a" / "small.manifest.json"), "--threads", "2", "--out", str(tmp_path / "c")])
    a = (tmp_path / "a" / "small.csv").read_bytes()
    assert a == (tmp_path / "b" / "small.csv").read_bytes()
    assert a == (tmp_path / "c" / "small.csv").read_bytes()


def test_csv_floats_round_trip(tmp_path):
    cfg = write(tmp_path, SMALL)
    main(["run", str(cfg), "--threads", "1", "--out", str(tmp_path)])
    for line in (tmp_path / "small.csv").read_text().splitlines()[1:]:
        for field in line.split(",")[2:6]:
            assert repr(float(field)) == field


def test_json_format(tmp_path):
    cfg = write(tmp_path, SMALL.replace('path = "small"', 'path = "small"\nformat = "json"'))
    assert main(["run", str(cfg), "--threads", "1", "--out", str(tmp_path)]) == 0
    rows = json.loads((tmp_path / "small.results.json").read_text())
    assert len(rows) == 6 and "oracle_value" in rows[0]


def test_oracle_subcommand(tmp_path, capsys):
    cfg = write(tmp_path, SMALL)
    assert main(["oracle", str(cfg)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "t,observable,oracle_value" and len(lines) == 7


def test_bad_cut_exit_2(tmp_path, capsys):
    text = preset_text("dqpt").replace("cut = [4, 4]", "cut = [5, 4]")
    assert main(["run", str(write(tmp_path, text))]) == 2
    assert "cut" in capsys.readouterr().err


def test_oracle_too_large_exit_3(tmp_path):
    text = preset_text("dqpt").replace("n = 8", "n = 24").replace("cut = [4, 4]", "cut = [12, 12]")
    assert main(["oracle", str(write(tmp_path, text))]) == 3


def test_run_oracle_too_large_exit_3(tmp_path):
    text = SMALL.replace("n = 4", "n = 24").replace("cut = [2, 2]", "cut = [12, 12]")
    assert main(["run", str(write(tmp_path, text)), "--out", str(tmp_path)]) == 3


def test_evolution_failure_exit_4(tmp_path, monkeypatch):
    import pqsim.cli
    from pqsim import EvolutionError

    def fail(*args, **kwargs):
        raise EvolutionError("no convergence", residual=1.0)

    monkeypatch.setattr(pqsim.cli, "oracle_observables", fail)
    assert main(["oracle", str(write(tmp_path, SMALL))]) == 4


@pytest.mark.parametrize(
    "edit,field",
    [
        (("[sampler]", "[sampler]\nbogus = 1"), "sampler.bogus"),
        (("oracle = true", "oracle = true\nextra = 2"), "extra"),
        (('kind = "tfim"', 'kind = "nope"'), "model.kind"),
        (("n_samples = 1500", "n_samples = 1.5"), "sampler.n_samples"),
        (("grid = [0.5, 1.0]", "grid = [1.0, 0.5]"), "time.grid"),
        (("grid = [0.5, 1.0]", "grid = [0.5, 2.0]"), "time.grid"),
        (("seed = 3", 'seed = 3\nmode = "dyson"'), "sampler.dyson_order"),
        (("seed = 3", "seed = 3\ndyson_order = 2"), "sampler.dyson_order"),
        (('"loschmidt"', '"what"'), "observables"),
        (("h = 0.8", "h = 0.8\ntrotter_steps = 3"), "time.grid"),
    ],
)
def test_schema_errors_name_field(tmp_path, capsys, edit, field):
    text = SMALL.replace(*edit)
    assert main(["run", str(write(tmp_path, text)), "--out", str(tmp_path)]) == 2
    assert field in capsys.readouterr().err


def test_missing_field():
    raw = tomllib.loads(SMALL)
    del raw["sampler"]
    with pytest.raises(ConfigError) as info:
        parse_config(raw)
    assert info.value.field == "sampler"


def test_initial_table_and_string():
    raw = tomllib.loads(SMALL)
    raw["initial"] = "all-zero"
    assert parse_config(raw).initial == "all-zero"
    raw["initial"] = {"preset": "all-zero", "sites": [1]}
    with pytest.raises(ConfigError, match="initial.sites"):
        parse_config(raw)


def test_missing_file_exit_2(tmp_path):
    assert main(["run", str(tmp_path / "nope.toml")]) == 2


def test_multicluster_seeded_couplings():
    a = load_config("multicluster").model.boundary_couplings
    b = load_config("multicluster").model.boundary_couplings
    assert a == b and len(a) == 5 and all(0 <= f <= 0.5 for f in a)
