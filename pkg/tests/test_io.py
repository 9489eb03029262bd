import json

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from femtovox.cgh import PhaseHologram, SpotTarget, reconstruct
from femtovox.cgh.fields import TWO_PI
from femtovox.io import (
    FormatError,
    SpotsValidationError,
    counts_to_phase,
    decode_pgm,
    dumps_plan,
    encode_pgm,
    format_cloud,
    format_spots,
    loads_plan,
    parse_cloud,
    parse_keyvalue,
    parse_spots,
    phase_to_counts,
    read_phase_map,
    write_intensity_map,
    write_phase_map,
)
from femtovox.presets import load_profile
from femtovox.scheduler import VoxelCloud, plan_frame

from scenarios import FOUR_PER_PULSE, ONE_PER_PULSE, flat_cloud, squares_cloud

counts16 = st.integers(1, 12).flatmap(
    lambda h: st.integers(1, 12).flatmap(
        lambda w: arrays(np.int64, (h, w), elements=st.integers(0, 65535))
    )
)


@given(counts16)
def test_pgm_bytes_roundtrip(counts):
    data = encode_pgm(counts)
    back, maxval = decode_pgm(data)
    assert maxval == 65535 and np.array_equal(back, counts)
    assert encode_pgm(back) == data


def test_pgm_is_big_endian():
    data = encode_pgm(np.array([[258]]))
    assert data.endswith(b"\x01\x02")
    assert data.startswith(b"P5\n1 1\n65535\n")


def test_pgm_header_comments_and_8bit():
    counts, maxval = decode_pgm(b"P5\n# made by hand\n2 1\n255\n\x00\xff")
    assert maxval == 255 and counts.tolist() == [[0, 255]]


@pytest.mark.parametrize(
    "data",
    [
        b"",
        b"P2\n1 1\n255\n0",
        b"P5\n2 2\n65535\n\x00\x00",
        b"P5\nx 2\n65535\n",
        b"P5\n1 1\n70000\n\x00\x00",
        b"P5\n1 1\n255\n\x00\x00",
        b"P5\n1 1\n10\n\x0b",
    ],
)
def test_pgm_rejects_corruption(data):
    with pytest.raises(FormatError):
        decode_pgm(data)


@settings(max_examples=30, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(n=st.sampled_from([2, 4, 8, 16]), seed=st.integers(0, 2**32 - 1))
def test_phase_map_file_roundtrip(tmp_path, n, seed):
    rng = np.random.default_rng(seed)
    holo = PhaseHologram(rng.uniform(0, TWO_PI, (n, n)))
    a, b = tmp_path / "a.pgm", tmp_path / "b.pgm"
    write_phase_map(a, holo)
    back = read_phase_map(a)
    write_phase_map(b, back)
    assert a.read_bytes() == b.read_bytes()
    err = np.angle(np.exp(1j * (back.phases - holo.phases)))
    assert np.max(np.abs(err)) <= np.pi / 65536 + 1e-12


@given(arrays(np.int64, (4, 4), elements=st.integers(0, 65535)))
def test_counts_phase_inverse(counts):
    assert np.array_equal(phase_to_counts(counts_to_phase(counts)), counts)


def test_phase_map_checks(tmp_path):
    p = tmp_path / "m.pgm"
    p.write_bytes(encode_pgm(np.zeros((2, 2)), maxval=255))
    with pytest.raises(FormatError, match="maxval"):
        read_phase_map(p)
    p.write_bytes(encode_pgm(np.zeros((2, 4))))
    with pytest.raises(FormatError, match="square"):
        read_phase_map(p)
    p.write_bytes(encode_pgm(np.zeros((3, 3))))
    with pytest.raises(FormatError, match="even"):
        read_phase_map(p)
    p.write_bytes(encode_pgm(np.zeros((4, 4))))
    with pytest.raises(FormatError, match="expected"):
        read_phase_map(p, expected_size=8)


def test_intensity_map_sidecar(tmp_path):
    holo = PhaseHologram(np.zeros((8, 8)))
    side = write_intensity_map(tmp_path / "i.pgm", reconstruct(holo), [SpotTarget(0, 0)])
    assert side["peak_pixel"] == [4, 4]  # zero order centred
    assert side["peak_index"] == [0, 0]
    assert side["total_energy"] == pytest.approx(64)
    assert side["targets"][0]["intensity"] == pytest.approx(64)
    on_disk = json.loads((tmp_path / "i.json").read_text())
    assert on_disk["schema_version"] == 1


# --- spots ------------------------------------------------------------------


def test_parse_spots():
    text = "# comment\n3 4 1.0\n\n5 6 2 100  # lensed\n"
    t = parse_spots(text)
    assert t == [SpotTarget(3, 4, 1.0), SpotTarget(5, 6, 2.0, 0.1)]


@pytest.mark.parametrize(
    "text,exc,match",
    [
        ("1 2\n", FormatError, "line 1"),
        ("1 2 3\n1 x 3\n", FormatError, "line 2"),
        ("1 2 1\n1 2 1\n", SpotsValidationError, "first given on line 1"),
        ("1 2 0\n", SpotsValidationError, "line 1"),
    ],
)
def test_spot_errors(text, exc, match):
    with pytest.raises(exc, match=match):
        parse_spots(text)


spot_lists = st.lists(
    st.tuples(
        st.integers(0, 511),
        st.integers(0, 511),
        st.floats(1e-6, 1e6, allow_nan=False),
        st.one_of(st.none(), st.floats(1e-3, 1e3)),
    ),
    max_size=20,
    unique_by=lambda t: (t[0], t[1]),
)


@given(spot_lists)
def test_spots_roundtrip(items):
    targets = [SpotTarget(*t) for t in items]
    text = format_spots(targets)
    assert format_spots(parse_spots(text)) == text


# --- clouds -----------------------------------------------------------------


def test_parse_cloud_units():
    cloud = parse_cloud("x_mm,y_mm,z_mm,weight\n1,2,80,0.5\n")
    assert np.allclose(cloud.points, [[1e-3, 2e-3, 80e-3]])
    assert cloud.weights.tolist() == [0.5]


@pytest.mark.parametrize(
    "text,match",
    [("", "header"), ("x,y,z\n1,2,3\n", "header"), ("x_mm,y_mm,z_mm\n1,2\n", "line 2"), ("x_mm,y_mm,z_mm\n1,a,2\n", "line 2")],
)
def test_cloud_errors(text, match):
    with pytest.raises(FormatError, match=match):
        parse_cloud(text)


coords = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@given(st.lists(st.tuples(coords, coords, coords), max_size=20), st.booleans())
def test_cloud_roundtrip(points, weighted):
    cloud = VoxelCloud(np.array(points, dtype=float).reshape(-1, 3))
    text = format_cloud(cloud, weighted)
    assert format_cloud(parse_cloud(text), weighted) == text


# --- plans ------------------------------------------------------------------


def test_plan_json_roundtrip_squares():
    plan = plan_frame(squares_cloud(), load_profile("system_a"), FOUR_PER_PULSE, 0.1)
    text = dumps_plan(plan)
    back = loads_plan(text)
    assert back == plan
    assert dumps_plan(back) == text


@settings(max_examples=25, deadline=None)
@given(n=st.integers(0, 150), seed=st.integers(0, 10_000))
def test_plan_json_roundtrip_fuzzed(n, seed):
    plan = plan_frame(flat_cloud(n, seed=seed), load_profile("system_b"), ONE_PER_PULSE, 0.01)
    text = dumps_plan(plan)
    assert dumps_plan(loads_plan(text)) == text


@pytest.mark.parametrize(
    "text,match",
    [
        ("{", "line 1"),
        ('{"kind": "other"}', "not a frame plan"),
        ('{"kind": "frame_plan", "schema_version": 99}', "schema_version"),
        ('{"kind": "frame_plan", "schema_version": 1}', "malformed"),
    ],
)
def test_plan_errors(text, match):
    with pytest.raises(FormatError, match=match):
        loads_plan(text)


def test_keyvalue():
    assert parse_keyvalue("a = 1\n# c\nb=x # t\na = 2\n") == {"a": "2", "b": "x"}
    with pytest.raises(FormatError, match="line 1"):
        parse_keyvalue("novalue\n")
