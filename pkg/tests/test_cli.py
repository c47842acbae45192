"""CLI contract: determinism, exit codes, artifacts, config validation."""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from quasilocal.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main
from quasilocal.config import DEFAULT_CONFIG, apply_overrides, load_config, validate_config
from quasilocal.errors import ConfigError

SCENARIOS = Path(__file__).resolve().parent.parent / "demos" / "scenarios"

FAST = [
    "--set", "surface.d=[50,100,200,400]",
    "--set", "numerics.l_max=8",
    "--set", "numerics.tolerance=1e-9",
    "--set", "numerics.radial_samples=40",
    "--set", "numerics.geometry_resolution=32",
    "--set", "geometry.gauss_bonnet_tol=1e-4",
]


def run(args):
    return main([str(a) for a in args])


# ----------------------------------------------------------------------
# config machinery
# ----------------------------------------------------------------------


def test_defaults_validate():
    conf = validate_config({})
    assert conf["mode"]["ell"] == 2
    assert conf["surface"]["substitution"] == "exact"


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError):
        validate_config({"bogus": 1})
    with pytest.raises(ConfigError):
        validate_config({"numerics": {"l_maximum": 8}})


def test_semantic_validation():
    with pytest.raises(ConfigError):
        validate_config({"background": {"m": 30.0}})  # d_min <= 2m + 1
    with pytest.raises(ConfigError):
        validate_config({"mode": {"kind": "polar", "sigma": 0.5,
                                  "boundary": {"type": "anchor", "r": 30.0, "z": 0.0, "dz": 1.0}}})


def test_overrides():
    doc = apply_overrides({}, ["numerics.l_max=24", "mode.boundary.z=0.5", "surface.substitution=paper"])
    assert doc["numerics"]["l_max"] == 24
    assert doc["mode"]["boundary"]["z"] == 0.5
    assert doc["surface"]["substitution"] == "paper"
    with pytest.raises(ConfigError):
        apply_overrides({}, ["no_equals_sign"])


@pytest.mark.parametrize("name", sorted(p.name for p in SCENARIOS.glob("*.json")))
def test_shipped_scenarios_validate(name):
    load_config(SCENARIOS / name)


# ----------------------------------------------------------------------
# exit codes and error reporting
# ----------------------------------------------------------------------


def test_config_error_exit(tmp_path, capsys):
    code = run(["sweep", "--out", tmp_path, "--set", "background.m=-1"])
    assert code == EXIT_CONFIG
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["category"] == "config"
    assert list(tmp_path.iterdir()) == []  # no artifacts on config error


def test_unknown_key_exit(tmp_path, capsys):
    code = run(["sweep", "--out", tmp_path, "--set", "bogus=3"])
    assert code == EXIT_CONFIG
    assert "bogus" in json.loads(capsys.readouterr().err)["error"]["message"]


def test_numerical_error_exit(tmp_path, capsys):
    # radial range reaching inside the horizon is a numerical-domain failure
    code = run([
        "radial", "--out", tmp_path,
        "--set", "numerics.radial_range=[1.0,3.0]",
        "--set", "mode.boundary.r=2.5",
    ])
    assert code == EXIT_NUMERICAL
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["category"] == "numerical"


# ----------------------------------------------------------------------
# artifacts
# ----------------------------------------------------------------------


def test_sweep_artifacts_and_determinism(tmp_path, capsys):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run(["sweep", "--out", out1] + FAST) == EXIT_OK
    assert run(["sweep", "--out", out2] + FAST) == EXIT_OK
    capsys.readouterr()
    for name in ("sweep.csv", "sweep.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    assert (out1 / "sweep_falloff.svg").read_bytes() == (out2 / "sweep_falloff.svg").read_bytes()
    doc = json.loads((out1 / "sweep.json").read_text())
    assert {"c1", "c2", "c3", "residual", "condition", "t"} <= set(doc["fits"][0])
    assert len(doc["e1"]) == 4
    assert doc["config"]["numerics"]["l_max"] == 8  # resolved config embedded
    first = (out1 / "sweep.csv").read_text().splitlines()
    assert first[0].startswith("# config: ")
    assert first[1] == "t,d,e,dedt"


def test_radial_artifact_header(tmp_path, capsys):
    assert run(["radial", "--config", SCENARIOS / "radial_profile.json", "--out", tmp_path,
                "--set", "numerics.radial_samples=30"]) == EXIT_OK
    capsys.readouterr()
    lines = (tmp_path / "radial.csv").read_text().splitlines()
    assert lines[1] == "r,r_star,z,dz_drstar,v,a,a_prime,a_double_prime"
    assert len(lines) == 2 + 30
    doc = json.loads((tmp_path / "radial.json").read_text())
    assert doc["residual_max"] < 1e-7


def test_embed_artifacts(tmp_path, capsys):
    assert run(["embed", "--config", SCENARIOS / "embed_kernel.json", "--out", tmp_path,
                "--set", "numerics.l_max=8"]) == EXIT_OK
    capsys.readouterr()
    tau_lines = (tmp_path / "embed_tau.csv").read_text().splitlines()
    assert tau_lines[1] == "l,m,coefficient"
    assert len(tau_lines) == 2 + sum(2 * l + 1 for l in range(9))
    doc = json.loads((tmp_path / "embed.json").read_text())
    norm = float(doc["kernel_residual_n"])
    assert norm < 1e-10


def test_energy_artifacts(tmp_path, capsys):
    assert run(["energy", "--out", tmp_path,
                "--set", "surface.t=[0.0,0.4,0.8,1.2]",
                "--set", "surface.d=[100.0]",
                "--set", "numerics.l_max=8"]) == EXIT_OK
    capsys.readouterr()
    lines = (tmp_path / "energy.csv").read_text().splitlines()
    assert lines[1] == "t,d,e,dedt"
    assert len(lines) == 2 + 4
    assert (tmp_path / "energy_e_vs_t.svg").exists()
    svg = (tmp_path / "energy_e_vs_t.svg").read_text()
    assert "<desc>" in svg and "polyline" in svg


def test_geometry_artifacts(tmp_path, capsys):
    assert run(["geometry", "--out", tmp_path,
                "--set", "surface.d=[50.0]",
                "--set", "numerics.geometry_resolution=32",
                "--set", "geometry.gauss_bonnet_tol=1e-4"]) == EXIT_OK
    capsys.readouterr()
    lines = (tmp_path / "geometry.csv").read_text().splitlines()
    assert lines[1] == "theta,phi,k_gauss,h_norm,hawking_line"
    assert len(lines) == 2 + 32 * 64
    doc = json.loads((tmp_path / "geometry.json").read_text())
    assert abs(doc["gauss_bonnet"][0] - 4 * math.pi) < 1e-4


def test_loop_artifacts(tmp_path, capsys):
    assert run(["loop", "--config", SCENARIOS / "loop_equator.json", "--out", tmp_path]) == EXIT_OK
    capsys.readouterr()
    doc = json.loads((tmp_path / "loop.json").read_text())
    assert doc["total"] == pytest.approx(2.0 * math.pi, abs=1e-10)
    lines = (tmp_path / "loop.csv").read_text().splitlines()
    assert lines[1] == "s,theta,phi,integrand"
    assert len(lines) == 2 + 256


def test_jobs_deterministic(tmp_path, capsys):
    out1, out2 = tmp_path / "serial", tmp_path / "par"
    assert run(["sweep", "--out", out1, "--jobs", 1] + FAST) == EXIT_OK
    assert run(["sweep", "--out", out2, "--jobs", 3] + FAST) == EXIT_OK
    capsys.readouterr()
    assert (out1 / "sweep.csv").read_bytes() == (out2 / "sweep.csv").read_bytes()


def test_set_override_changes_output(tmp_path, capsys):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run(["loop", "--out", out1]) == EXIT_OK
    assert run(["loop", "--out", out2, "--set", "loop.n_samples=128"]) == EXIT_OK
    capsys.readouterr()
    assert (out1 / "loop.csv").read_text() != (out2 / "loop.csv").read_text()
    doc = json.loads((out2 / "loop.json").read_text())
    assert doc["n_samples"] == 128
