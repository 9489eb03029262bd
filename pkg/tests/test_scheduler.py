import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from femtovox.energy import EnergyBudget, ExposureGuard, dots_per_pulse
from femtovox.presets import load_profile
from femtovox.scheduler import (
    InfeasiblePlanError,
    VoxelCloud,
    galvano_to_xy,
    nearest_neighbor_order,
    path_length,
    plan_frame,
    simulate,
    validate_plan,
    xy_to_galvano,
)

from scenarios import FOUR_PER_PULSE, ONE_PER_PULSE, flat_cloud, random_cloud, squares_cloud

A = load_profile("system_a")
B = load_profile("system_b")


def test_four_voxel_squares_plan():
    plan = plan_frame(squares_cloud(), A, FOUR_PER_PULSE, 0.1)
    assert len(plan.slots) == 100
    assert plan.duration == pytest.approx(0.1)
    assert plan.hologram_changes() == 0 and len(plan.holograms) == 1
    assert validate_plan(plan, A) == []
    assert all(len(s.voxel_indices) == 4 for s in plan.slots)


def test_four_voxel_squares_simulate():
    plan = plan_frame(squares_cloud(), A, FOUR_PER_PULSE, 0.1)
    rep = simulate(plan, A, 1.0, n_dot=4)
    assert rep.achieved_dots_per_s == 4000
    assert rep.frames_completed == 10 and rep.violations == []
    assert rep.peak_window_dots <= 4 * 1000


def test_system_b_single_voxel_throughput():
    plan = plan_frame(flat_cloud(2000, seed=1), B, ONE_PER_PULSE, 0.01)
    rep = simulate(plan, B, 1.0, n_dot=1)
    assert rep.achieved_dots_per_s == 200_000
    assert rep.max_dots_per_pulse == 1 and rep.violations == []
    assert all(s.hologram_id is None for s in plan.slots)


def test_no_slm_caps_dots_per_pulse():
    plan = plan_frame(flat_cloud(50, seed=2), B, EnergyBudget(50e-6, 5e-6), 0.01)
    assert max(len(s.voxel_indices) for s in plan.slots) == 1


def test_slm_bound_is_reported():
    with pytest.raises(InfeasiblePlanError) as err:
        plan_frame(random_cloud(300, seed=0), A, FOUR_PER_PULSE, 0.1)
    assert err.value.bottleneck == "slm"
    assert "slm" in str(err.value)


def test_slm_bound_even_when_changes_allowed():
    with pytest.raises(InfeasiblePlanError) as err:
        plan_frame(random_cloud(40, seed=0), A, FOUR_PER_PULSE, 0.1, allow_hologram_changes=True)
    assert err.value.bottleneck == "slm"


def test_laser_bound():
    # 400 single-voxel groups need 400 pulses at 1 kHz
    with pytest.raises(InfeasiblePlanError) as err:
        plan_frame(squares_cloud(), A, EnergyBudget(0.5e-3, 0.45e-3), 0.1)
    assert err.value.bottleneck in ("laser", "galvano")


def test_varifocal_bound():
    # Many depth layers at the System B pulse rate: the lens cannot keep up.
    with pytest.raises(InfeasiblePlanError) as err:
        plan_frame(random_cloud(500, seed=3), B, ONE_PER_PULSE, 5e-4)
    assert err.value.bottleneck == "varifocal"


def test_below_threshold_is_infeasible():
    with pytest.raises(InfeasiblePlanError) as err:
        plan_frame(random_cloud(5), A, EnergyBudget(1e-4, 2e-4), 0.1)
    assert err.value.bottleneck == "laser"


def test_empty_cloud():
    plan = plan_frame(VoxelCloud(np.zeros((0, 3))), A, FOUR_PER_PULSE, 0.1)
    assert plan.slots == () and plan.duration == 0
    rep = simulate(plan, A, 1.0)
    assert rep.dots_fired == 0 and rep.violations == []


def test_validate_plan_flags_tampering():
    plan = plan_frame(squares_cloud(2), A, FOUR_PER_PULSE, 0.1)
    s0, s1 = plan.slots[:2]
    bad = type(plan)(
        (s0, type(s1)(s0.time_offset + 1e-4, *list(vars(s1).values())[1:])) + plan.slots[2:],
        plan.frame_time,
        plan.repetition_rate,
        plan.voxel_positions,
        plan.holograms,
    )
    problems = validate_plan(bad, A)
    assert any("pulse spacing" in p for p in problems)
    assert any("galvano" in p for p in problems)
    rep = simulate(bad, A, 0.2)
    assert rep.violations


def test_galvano_mapping_roundtrip_and_range():
    ax = xy_to_galvano((5e-3, -2.5e-3), A)
    assert ax == pytest.approx((0.17, -0.085))
    assert galvano_to_xy(ax, A) == pytest.approx((5e-3, -2.5e-3))
    with pytest.raises(ValueError):
        xy_to_galvano((6e-3, 0), A)
    with pytest.raises(ValueError):
        galvano_to_xy((0.2, 0), A)


def test_exposure_accumulates_over_horizon():
    plan = plan_frame(squares_cloud(2), A, FOUR_PER_PULSE, 0.1)
    guard = ExposureGuard()
    rep = simulate(plan, A, 1.0, guard=guard)
    # each voxel is hit 10 times at 1 ms dwell
    assert set(rep.exposure_ms.values()) == {10.0}
    assert rep.exposure_alerts == []
    long = simulate(plan, A, 300.0, guard=ExposureGuard())
    assert long.exposure_alerts and long.exposure_alerts[0][1] == "limit_exceeded"


def test_simulate_partial_last_frame():
    plan = plan_frame(squares_cloud(), A, FOUR_PER_PULSE, 0.1)
    rep = simulate(plan, A, 0.15)
    assert rep.frames_completed == 1
    assert rep.timeline[1]["pulses"] == 50 and not rep.timeline[1]["complete"]


pts2d = st.lists(
    st.tuples(st.floats(-1, 1, allow_nan=False), st.floats(-1, 1, allow_nan=False)),
    min_size=0,
    max_size=40,
)


@given(pts2d)
def test_nearest_neighbor_is_permutation_and_no_longer(points):
    pts = np.array(points, dtype=float).reshape(-1, 2)
    order = nearest_neighbor_order(pts)
    assert sorted(order) == list(range(len(pts)))
    assert path_length(pts, order) <= path_length(pts, list(range(len(pts)))) + 1e-12


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 120), seed=st.integers(0, 10_000), etot=st.floats(50e-6, 2e-3))
def test_random_plans_are_valid_or_explained(n, seed, etot):
    budget = EnergyBudget(etot, 45e-6)
    cloud = random_cloud(n, seed=seed)
    for profile, ft in ((B, 0.05), (A, 10.0)):
        try:
            plan = plan_frame(cloud, profile, budget, ft, allow_hologram_changes=True)
        except InfeasiblePlanError as err:
            assert err.bottleneck in ("laser", "galvano", "varifocal", "slm")
            continue
        assert validate_plan(plan, profile) == []
        covered = sorted(v for s in plan.slots for v in s.voxel_indices)
        assert covered == list(range(n))
        cap = dots_per_pulse(budget) if profile.has_slm else 1
        assert max(len(s.voxel_indices) for s in plan.slots) <= cap
        assert plan.duration <= ft + 1e-12


def test_plan_is_deterministic():
    cloud = flat_cloud(200, seed=5)
    p1 = plan_frame(cloud, B, ONE_PER_PULSE, 0.01)
    p2 = plan_frame(cloud, B, ONE_PER_PULSE, 0.01)
    assert p1 == p2
