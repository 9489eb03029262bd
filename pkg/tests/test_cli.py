import csv
import json
import logging

import numpy as np
import pytest
from PIL import Image

from femtovox.cli import (
    EXIT_FORMAT,
    EXIT_INFEASIBLE,
    EXIT_NOT_CONVERGED,
    EXIT_OK,
    EXIT_VALIDATION,
    image_to_spots,
    main,
)
from femtovox.config import RunConfig, load_config
from femtovox.io import FormatError, encode_pgm, read_phase_map, read_plan, read_spots, write_cloud
from femtovox.cgh import reconstruct
from femtovox.scheduler import VoxelCloud

from scenarios import random_cloud, squares_cloud


@pytest.fixture
def spots(tmp_path):
    p = tmp_path / "spots.txt"
    p.write_text("# square\n40 40 1\n80 40 1\n40 80 1\n80 80 1\n")
    return p


@pytest.fixture
def small_spots(tmp_path):
    p = tmp_path / "small.txt"
    p.write_text("5 5 1\n20 5 1\n5 20 2\n")
    return p


def run(*argv):
    return main([str(a) for a in argv])


def test_synth_square(tmp_path, spots):
    out = tmp_path / "o"
    assert run("synth", spots, "--out", out) == EXIT_OK
    rep = json.loads((out / "synth_report.json").read_text())
    assert rep["schema_version"] == 1 and rep["converged"]
    assert rep["uniformity"] >= 0.9
    assert read_phase_map(out / "phase.pgm").size_n == 256


def test_synth_deterministic_by_seed(tmp_path, small_spots):
    for name, seed in (("a", 4), ("b", 4), ("c", 5)):
        assert run("synth", small_spots, "--grid", 64, "--seed", seed, "--out", tmp_path / name) == 0
    a, b, c = ((tmp_path / n / "phase.pgm").read_bytes() for n in "abc")
    assert a == b and a != c


def test_synth_dc_spot_is_flat(tmp_path):
    p = tmp_path / "dc.txt"
    p.write_text("0 0 1\n")
    assert run("synth", p, "--grid", 32, "--out", tmp_path) == 0
    phases = read_phase_map(tmp_path / "phase.pgm").phases
    assert np.all(phases == phases[0, 0])


def test_synth_duplicate_is_validation_error(tmp_path, caplog):
    p = tmp_path / "dup.txt"
    p.write_text("1 1 1\n2 2 1\n1 1 1\n")
    with caplog.at_level(logging.ERROR, "femtovox"):
        assert run("synth", p, "--out", tmp_path) == EXIT_VALIDATION
    assert "duplicate spot (1, 1)" in caplog.text


def test_synth_malformed_is_format_error(tmp_path, caplog):
    p = tmp_path / "bad.txt"
    p.write_text("1 1 1\n2 two 1\n")
    with caplog.at_level(logging.ERROR, "femtovox"):
        assert run("synth", p, "--out", tmp_path) == EXIT_FORMAT
    assert "line 2" in caplog.text


def test_synth_nonconvergence_exit(tmp_path, small_spots):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("ora_max_iterations = 1\nora_tolerance = 1e-12\ngrid_size = 64\n")
    assert run("synth", small_spots, "--config", cfg, "--out", tmp_path) == EXIT_NOT_CONVERGED
    rep = json.loads((tmp_path / "synth_report.json").read_text())
    assert rep["converged"] is False


def test_reconstruct_recovers_targets(tmp_path, spots):
    assert run("synth", spots, "--out", tmp_path) == 0
    assert run("reconstruct", tmp_path / "phase.pgm", "--spots", spots, "--out", tmp_path) == 0
    side = json.loads((tmp_path / "intensity.json").read_text())
    assert side["total_energy"] == pytest.approx(256**2)
    I = reconstruct(read_phase_map(tmp_path / "phase.pgm")).intensity()
    top = {(int(c), int(r)) for r, c in np.argwhere(I >= np.sort(I.ravel())[-4])}
    assert top == {(t.index_vx, t.index_vy) for t in read_spots(spots)}
    assert {(t["vx"], t["vy"]) for t in side["targets"]} == top


def test_reconstruct_zero_phase_peak_at_centre(tmp_path):
    p = tmp_path / "zero.pgm"
    p.write_bytes(encode_pgm(np.zeros((16, 16), dtype=int)))
    assert run("reconstruct", p, "--out", tmp_path) == 0
    side = json.loads((tmp_path / "intensity.json").read_text())
    assert side["peak_pixel"] == [8, 8]


def test_reconstruct_corrupt_header(tmp_path):
    p = tmp_path / "bad.pgm"
    p.write_bytes(b"P5\n16\n")
    assert run("reconstruct", p, "--out", tmp_path) == EXIT_FORMAT
    p.write_bytes(encode_pgm(np.zeros((4, 4), dtype=int), maxval=255))
    assert run("reconstruct", p, "--out", tmp_path) == EXIT_FORMAT


def test_budget_system_a(tmp_path):
    out = tmp_path / "b.json"
    assert run("budget", "--preset", "system_a", "--pulse-width-fs", 30, "--out", out) == 0
    doc = json.loads(out.read_text())
    assert doc["schema_version"] == 1
    assert doc["energies_j"]["breakdown_threshold"] == 0.2e-3
    assert doc["n_dot"] == 10


def test_budget_100fs_gives_four(tmp_path):
    out = tmp_path / "b.json"
    assert run("budget", "--pulse-width-fs", 100, "--out", out) == 0
    assert json.loads(out.read_text())["n_dot"] == 4


def test_budget_system_b(tmp_path):
    out = tmp_path / "b.json"
    assert run("budget", "--preset", "system_b", "--out", out) == 0
    doc = json.loads(out.read_text())
    assert doc["n_dot"] == 1 and doc["dots_per_second"] == 200_000


def test_budget_below_threshold(tmp_path):
    out = tmp_path / "b.json"
    assert run("budget", "--energy-mj", 0.1, "--out", out) == 0
    doc = json.loads(out.read_text())
    assert doc["n_dot"] == 0 and "below the breakdown threshold" in doc["message"]


def test_budget_unknown_preset(caplog):
    with caplog.at_level(logging.ERROR, "femtovox"):
        assert run("budget", "--preset", "nope") == EXIT_VALIDATION
    assert "system_a" in caplog.text and "system_b" in caplog.text


def test_budget_unknown_pulse_width(caplog):
    with caplog.at_level(logging.ERROR, "femtovox"):
        assert run("budget", "--pulse-width-fs", 55) == EXIT_VALIDATION
    assert run("budget", "--pulse-width-fs", 55, "--elbd-mj", 0.3, "--out", "-") == 0


def test_plan_squares(tmp_path):
    cloud = tmp_path / "c.csv"
    write_cloud(cloud, squares_cloud())
    out = tmp_path / "plan.json"
    assert run("plan", cloud, "--elbd-mj", 0.45, "--out", out) == 0
    plan = read_plan(out)
    assert len(plan.slots) == 100


def test_plan_empty_cloud(tmp_path):
    cloud = tmp_path / "c.csv"
    cloud.write_text("x_mm,y_mm,z_mm\n")
    out = tmp_path / "plan.json"
    assert run("plan", cloud, "--out", out) == 0
    assert read_plan(out).slots == ()


def test_plan_slm_bound(tmp_path, caplog):
    cloud = tmp_path / "c.csv"
    write_cloud(cloud, random_cloud(300))
    with caplog.at_level(logging.ERROR, "femtovox"):
        assert run("plan", cloud, "--elbd-mj", 0.45, "--out", tmp_path / "p.json") == EXIT_INFEASIBLE
    assert "bottleneck: slm" in caplog.text


def test_plan_bad_cloud(tmp_path):
    cloud = tmp_path / "c.csv"
    cloud.write_text("x,y,z\n")
    assert run("plan", cloud) == EXIT_FORMAT


def test_simulate_writes_timeline(tmp_path):
    cloud = tmp_path / "c.csv"
    write_cloud(cloud, squares_cloud())
    out = tmp_path / "s"
    assert run("simulate", cloud, "--elbd-mj", 0.45, "--out", out) == 0
    rep = json.loads((out / "sim_report.json").read_text())
    assert rep["achieved_dots_per_s"] == 4000 and rep["schema_version"] == 1
    rows = list(csv.DictReader((out / "timeline.csv").open()))
    assert len(rows) == 10 and all(r["dots"] == "400" for r in rows)
    # replaying the written plan gives the same report
    assert run("simulate", "--plan", out / "plan.json", "--out", tmp_path / "s2") == 0
    assert (tmp_path / "s2" / "sim_report.json").read_text() == (out / "sim_report.json").read_text()


def test_simulate_needs_input():
    with pytest.raises(SystemExit):
        run("simulate")


def _pgm8(path, img):
    path.write_bytes(encode_pgm(np.asarray(img, dtype=int), maxval=255))


def test_image2spots_cases(tmp_path):
    black = tmp_path / "black.pgm"
    _pgm8(black, np.zeros((8, 8)))
    out = tmp_path / "s.txt"
    assert run("image2spots", black, "--out", out) == 0
    assert read_spots(out) == []

    one = np.zeros((8, 8))
    one[2, 5] = 200
    _pgm8(tmp_path / "one.pgm", one)
    assert run("image2spots", tmp_path / "one.pgm", "--out", out) == 0
    (t,) = read_spots(out)
    assert (t.index_vx, t.index_vy, t.desired_intensity) == (5, 2, 1.0)

    board = (np.indices((8, 8)).sum(axis=0) % 2 == 0) * 255
    png = tmp_path / "board.png"
    Image.fromarray(board.astype(np.uint8)).save(png)
    assert run("image2spots", png, "--max-spots", 32, "--out", out) == 0
    got = read_spots(out)
    assert len(got) == 32 and all(board[s.index_vy, s.index_vx] for s in got)


def test_image_to_spots_subsamples_and_scales():
    img = np.linspace(0, 1, 100).reshape(10, 10)
    spots = image_to_spots(img, 5, 0.5)
    assert len(spots) == 5
    assert max(s.desired_intensity for s in spots) == 1.0
    assert all(s.desired_intensity > 0 for s in spots)


def test_image2spots_unreadable(tmp_path):
    p = tmp_path / "x.png"
    p.write_bytes(b"not an image")
    assert run("image2spots", p) == EXIT_FORMAT


def test_config_loading(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("grid_size = 64\nprofile = system_b\n")
    rc = load_config(cfg, seed=3)
    assert rc.grid_size == 64 and rc.seed == 3 and rc.wavelength == pytest.approx(1045e-9)
    cfg.write_text("grid = 64\n")
    with pytest.raises(FormatError, match="unknown config key"):
        load_config(cfg)
    cfg.write_text("grid_size = big\n")
    with pytest.raises(FormatError):
        load_config(cfg)
    with pytest.raises(ValueError):
        RunConfig(profile="missing")
    assert RunConfig().updated(seed=None, grid_size=32).grid_size == 32


def test_unknown_config_key_exit(tmp_path, spots):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("colour = blue\n")
    assert run("synth", spots, "--config", cfg) == EXIT_FORMAT


def test_plan_honours_energy_override(tmp_path):
    cloud = tmp_path / "c.csv"
    write_cloud(cloud, squares_cloud(2))
    out = tmp_path / "p.json"
    # 0.9 mJ over 0.45 mJ voxels: two voxels per pulse instead of four
    assert run("plan", cloud, "--elbd-mj", 0.45, "--energy-mj", 0.9, "--allow-hologram-changes",
               "--frame-time-ms", 1000, "--out", out) == 0
    assert max(len(s.voxel_indices) for s in read_plan(out).slots) == 2


def test_simulate_plan_uses_its_profile(tmp_path):
    cloud = tmp_path / "c.csv"
    write_cloud(cloud, VoxelCloud(np.array([[0, 0, 0.08], [1e-3, 0, 0.08]])))
    assert run("plan", cloud, "--profile", "system_b", "--frame-time-ms", 1, "--out", tmp_path / "p.json") == 0
    assert run("simulate", "--plan", tmp_path / "p.json", "--out", tmp_path / "s") == 0
    rep = json.loads((tmp_path / "s" / "sim_report.json").read_text())
    assert rep["profile"] == "system_b" and rep["achieved_dots_per_s"] == 2000


def test_image2spots_16bit_png(tmp_path):
    img = np.zeros((4, 4), dtype=np.uint16)
    img[1, 2] = 60000
    img[3, 0] = 20000
    p = tmp_path / "deep.png"
    Image.fromarray(img).save(p)
    out = tmp_path / "s.txt"
    assert run("image2spots", p, "--out", out) == 0
    assert [(s.index_vx, s.index_vy) for s in read_spots(out)] == [(2, 1)]
