import os
import pathlib
import subprocess

import pytest

import kplate


def cli():
    path = os.environ.get("KPLATE_CLI")
    if not path:
        pytest.skip("KPLATE_CLI not set")
    return path


def test_structured_mesh_counts():
    mesh = kplate.structured_unit_square(2)
    assert mesh.num_vertices == 9
    assert mesh.num_triangles == 8
    assert mesh.num_edges == 16
    assert mesh.area() == pytest.approx(1.0)


def test_refinement_keeps_area():
    mesh = kplate.rgb_refine(kplate.structured_unit_square(2), [0, 3])
    assert mesh.area() == pytest.approx(1.0)
    assert kplate.uniform_refine(mesh).num_triangles == 4 * mesh.num_triangles


def test_config_round_trip():
    config = kplate.preset_defaults(kplate.Preset.elastic)
    assert kplate.parse_config(kplate.serialise(config)) == config


def test_config_error_is_value_error():
    with pytest.raises(ValueError):
        kplate.parse_config("theta = 2")


def test_solve_and_estimate():
    config = kplate.preset_defaults(kplate.Preset.rigid)
    solution = kplate.solve(config, kplate.structured_unit_square(4))
    assert solution.converged
    assert solution.num_dofs == 206
    errors = kplate.estimate(solution)
    assert errors.total > 0
    assert len(errors.indicator) == 32
    marked = kplate.mark_elements(errors.indicator, 0.5)
    assert marked and max(errors.indicator[k] for k in marked) == max(errors.indicator)


def test_run_experiment(tmp_path):
    config = kplate.preset_defaults(kplate.Preset.elastic)
    config.initial_subdivision = 2
    config.steps = 2
    config.resolution = 16
    config.output = str(tmp_path)
    result = kplate.run_experiment(config)
    assert result.failure is None
    assert [row.step for row in result.history] == [0, 1]
    assert (tmp_path / "history.csv").exists()
    assert (tmp_path / "field_1.csv").exists()


def test_cli_success(tmp_path):
    out = tmp_path / "run"
    done = subprocess.run(
        [cli(), "solve", "--preset", "elastic", "--mode", "uniform", "--steps", "1", "--out", str(out)],
        capture_output=True,
    )
    assert done.returncode == 0, done.stderr
    header = (out / "history.csv").read_text().splitlines()[0]
    assert header.startswith("step,N,eta,S")


def test_cli_config_error(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("eps = -1\n")
    done = subprocess.run([cli(), "solve", "--config", str(bad), "--out", str(tmp_path / "o")], capture_output=True)
    assert done.returncode == 2
    assert b"eps" in done.stderr


def test_cli_solver_failure(tmp_path):
    cfg = tmp_path / "nan.cfg"
    cfg.write_text("preset = custom\nload = 0/0\nobstacle = none\nmode = uniform\nsteps = 1\n")
    done = subprocess.run([cli(), "solve", "--config", str(cfg), "--out", str(tmp_path / "o")], capture_output=True)
    assert done.returncode == 3
    assert b"solver failure" in done.stderr
