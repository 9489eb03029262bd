"""Pulse-slot planning and timing simulation for galvano/SLM/varifocal scanning.

A frame plan is a time-ordered list of pulse slots. Each slot fires one
laser pulse whose energy the SLM hologram splits among up to ``N_dot``
voxels; the galvano mirror steers the whole group to its centroid and the
varifocal lens selects the depth layer.

Voxels are bucketed into depth layers, chunked into simultaneous groups
along a nearest-neighbour scan path, and the groups are ordered so that
hologram changes (slowest device) happen least often, then by layer, then
along a nearest-neighbour galvano path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .energy import EnergyBudget, ExposureGuard, Verdict, dots_per_pulse
from .optics import LaserProfile

DEVICES = ("laser", "galvano", "varifocal", "slm")
_EPS = 1e-12


class InfeasiblePlanError(RuntimeError):
    """The voxels cannot be scanned within one frame; `bottleneck` names the device."""

    def __init__(self, bottleneck: str, required_time: float, frame_time: float, detail: str = ""):
        self.bottleneck = bottleneck
        self.required_time = required_time
        self.frame_time = frame_time
        msg = (
            f"infeasible frame: needs {required_time:.6g} s but frame time is {frame_time:.6g} s; "
            f"bottleneck: {bottleneck}"
        )
        super().__init__(msg + (f" ({detail})" if detail else ""))


@dataclass(frozen=True)
class DeviceProfile:
    """Timing and range limits of one display system.

    Parameters
    ----------
    laser : LaserProfile
    galvano_rate : float
        Repositioning rate [Hz]; each move costs ``1 / galvano_rate``.
    galvano_range : float
        Half range of mirror angle [rad].
    scan_half_width : float
        Half width [m] of the square lateral field mapped onto the mirror range.
    slm_response, varifocal_response : float
        Settling times [s].
    varifocal_range : (float, float)
        Focal length range [m].
    has_slm : bool
        Without an SLM every pulse addresses a single voxel.
    galvano_error : float
        Pointing error [rad], informational.
    """

    laser: LaserProfile
    galvano_rate: float = 1000.0
    galvano_range: float = 0.17
    scan_half_width: float = 5e-3
    slm_response: float = 0.1
    varifocal_response: float = 2.5e-3
    varifocal_range: Tuple[float, float] = (0.045, 0.120)
    has_slm: bool = True
    galvano_error: float = 5e-6
    name: str = "custom"

    def __post_init__(self):
        for attr in ("galvano_rate", "galvano_range", "scan_half_width", "slm_response", "varifocal_response"):
            if not getattr(self, attr) > 0:
                raise ValueError(f"{attr} must be positive")
        lo, hi = self.varifocal_range
        if not 0 < lo < hi:
            raise ValueError("varifocal range must satisfy 0 < min < max")

    @property
    def galvano_settle(self) -> float:
        return 1.0 / self.galvano_rate

    @property
    def pulse_period(self) -> float:
        return self.laser.pulse_period


@dataclass(frozen=True, eq=False)
class VoxelCloud:
    """Voxel positions [m] as an ``(M, 3)`` array with optional weights and bounds.

    Bounds default to the bounding box of the points.
    """

    points: np.ndarray
    weights: Optional[np.ndarray] = None
    bounds: Optional[Tuple[Tuple[float, float], ...]] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 3)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        w = np.ones(len(pts)) if self.weights is None else np.asarray(self.weights, dtype=float)
        if w.shape != (len(pts),):
            raise ValueError("weights must have one entry per point")
        object.__setattr__(self, "weights", w)
        if self.bounds is None:
            if len(pts):
                b = tuple((float(lo), float(hi)) for lo, hi in zip(pts.min(axis=0), pts.max(axis=0)))
            else:
                b = ((0.0, 0.0),) * 3
            object.__setattr__(self, "bounds", b)
        lo = np.array([b[0] for b in self.bounds])
        hi = np.array([b[1] for b in self.bounds])
        if len(pts) and (np.any(pts < lo - _EPS) or np.any(pts > hi + _EPS)):
            raise ValueError("voxel cloud has points outside its workspace bounds")

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class Slot:
    time_offset: float
    galvano_xy: Tuple[float, float]
    varifocal_f: float
    hologram_id: Optional[int]
    voxel_indices: Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class FramePlan:
    """Ordered pulse slots for one frame.

    `holograms` maps hologram ids to the lateral voxel offsets [m] from the
    galvano aim point that the hologram must produce.
    """

    slots: Tuple[Slot, ...]
    frame_time: float
    repetition_rate: float
    voxel_positions: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    holograms: Dict[int, Tuple[Tuple[float, float], ...]] = field(default_factory=dict)
    profile_name: str = "custom"

    @property
    def duration(self) -> float:
        """Time from the first pulse to the end of the last pulse period."""
        if not self.slots:
            return 0.0
        return self.slots[-1].time_offset + 1.0 / self.repetition_rate

    @property
    def n_voxels(self) -> int:
        return len(self.voxel_positions)

    def hologram_changes(self) -> int:
        return sum(a.hologram_id != b.hologram_id for a, b in zip(self.slots, self.slots[1:]))

    def __eq__(self, other):
        if not isinstance(other, FramePlan):
            return NotImplemented
        return (
            self.slots == other.slots
            and self.frame_time == other.frame_time
            and self.repetition_rate == other.repetition_rate
            and np.array_equal(self.voxel_positions, other.voxel_positions)
            and self.holograms == other.holograms
            and self.profile_name == other.profile_name
        )


def xy_to_galvano(position_xy, profile: DeviceProfile) -> Tuple[float, float]:
    """Linear map from lateral position [m] to mirror angles [rad]."""
    x, y = (float(v) for v in position_xy)
    half = profile.scan_half_width
    if abs(x) > half * (1 + 1e-12) or abs(y) > half * (1 + 1e-12):
        raise ValueError(f"position ({x:.6g}, {y:.6g}) m outside the +/-{half:.6g} m scan field")
    scale = profile.galvano_range / half
    return (x * scale, y * scale)


def galvano_to_xy(angles, profile: DeviceProfile) -> Tuple[float, float]:
    ax, ay = (float(v) for v in angles)
    if max(abs(ax), abs(ay)) > profile.galvano_range * (1 + 1e-12):
        raise ValueError(f"angles ({ax:.6g}, {ay:.6g}) rad exceed +/-{profile.galvano_range} rad")
    scale = profile.scan_half_width / profile.galvano_range
    return (ax * scale, ay * scale)


def path_length(points: np.ndarray, order: Sequence[int], start=None) -> float:
    if len(order) == 0:
        return 0.0
    path = points[np.asarray(order)]
    if start is not None:
        path = np.vstack([np.asarray(start, dtype=float)[None, :], path])
    return float(np.sum(np.linalg.norm(np.diff(path, axis=0), axis=1)))


def nearest_neighbor_order(points, start=None) -> List[int]:
    """Greedy nearest-neighbour visiting order over 2-D `points`.

    Ties go to the lowest index. Starts at `start` if given, else at point 0.
    The input order is returned instead whenever it is shorter, so the
    result never travels further than the caller's own order.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(pts)
    if n == 0:
        return []
    xs, ys = pts[:, 0].copy(), pts[:, 1].copy()
    # visited points get +inf so they are never chosen again
    penalty = np.zeros(n)
    order = []
    cx, cy = pts[0] if start is None else np.asarray(start, dtype=float)
    for _ in range(n):
        d = (xs - cx) ** 2 + (ys - cy) ** 2 + penalty
        nxt = int(np.argmin(d))  # argmin returns the first (lowest) index on ties
        order.append(nxt)
        penalty[nxt] = np.inf
        cx, cy = xs[nxt], ys[nxt]
    identity = list(range(n))
    if path_length(pts, identity, start) < path_length(pts, order, start):
        return identity
    return order


def _varifocal_for_layer(z: float, z_bounds, profile: DeviceProfile) -> float:
    lo, hi = z_bounds
    f_lo, f_hi = profile.varifocal_range
    if hi - lo <= 0:
        return 0.5 * (f_lo + f_hi)
    frac = min(max((z - lo) / (hi - lo), 0.0), 1.0)
    return f_lo + frac * (f_hi - f_lo)


def _transition(prev: Slot, nxt: Slot, profile: DeviceProfile) -> Dict[str, float]:
    """Minimum spacing each device imposes between two consecutive slots."""
    gaps = {"laser": profile.pulse_period}
    if nxt.galvano_xy != prev.galvano_xy:
        gaps["galvano"] = profile.galvano_settle
    if nxt.varifocal_f != prev.varifocal_f:
        gaps["varifocal"] = profile.varifocal_response
    if nxt.hologram_id != prev.hologram_id:
        gaps["slm"] = profile.slm_response
    return gaps


def _binding(gaps: Dict[str, float]) -> str:
    # Ties resolve in DEVICES order, laser first.
    return max(DEVICES, key=lambda d: (gaps.get(d, -1.0), -DEVICES.index(d)))


def _pulses_for(gap: float, rate: float) -> int:
    return max(1, math.ceil(gap * rate - 1e-9))


def plan_frame(
    cloud: VoxelCloud,
    profile: DeviceProfile,
    budget: EnergyBudget,
    frame_time: float,
    *,
    layer_thickness: float = 51.2e-6,
    offset_cell: float = 6.4e-6,
    allow_hologram_changes: bool = False,
) -> FramePlan:
    """Schedule every voxel of `cloud` into pulse slots of one frame.

    Parameters
    ----------
    layer_thickness : float
        Depth quantum [m] for varifocal layers; defaults to the axial spot
        length of the default optical train.
    offset_cell : float
        Quantum [m] used to decide whether two groups share a hologram;
        defaults to the lateral spot diameter.
    allow_hologram_changes : bool
        If False, a frame needing more than one hologram is rejected with
        ``bottleneck == "slm"``.

    Raises
    ------
    InfeasiblePlanError
        When the required slots do not fit in `frame_time`.
    """
    if not frame_time > 0:
        raise ValueError("frame_time must be positive")
    rate = profile.laser.repetition_rate
    pts = cloud.points
    if len(pts) == 0:
        return FramePlan((), frame_time, rate, pts.copy(), {}, profile.name)

    n_dot = dots_per_pulse(budget)
    if not profile.has_slm:
        n_dot = min(n_dot, 1)
    if n_dot < 1:
        raise InfeasiblePlanError(
            "laser", math.inf, frame_time, "pulse energy is below the breakdown threshold"
        )

    z_lo = cloud.bounds[2][0]
    layer_of = np.floor((pts[:, 2] - z_lo) / layer_thickness + 1e-9).astype(int)

    # (hologram_key, layer, centroid, members)
    groups = []
    cursor = np.zeros(2)
    for layer in np.unique(layer_of):
        members = np.flatnonzero(layer_of == layer)
        order = members[nearest_neighbor_order(pts[members, :2], start=cursor)]
        for k in range(0, len(order), n_dot):
            chunk = tuple(int(i) for i in order[k : k + n_dot])
            centroid = pts[list(chunk), :2].mean(axis=0)
            offsets = np.round((pts[list(chunk), :2] - centroid) / offset_cell).astype(int)
            key = tuple(sorted(map(tuple, offsets.tolist()))) if profile.has_slm else None
            groups.append((key, int(layer), centroid, chunk))
        cursor = pts[order[-1], :2]

    hologram_ids: Dict[object, int] = {}
    for key, *_ in groups:
        if key is not None and key not in hologram_ids:
            hologram_ids[key] = len(hologram_ids)
    if len(hologram_ids) > 1 and not allow_hologram_changes:
        needed = len(hologram_ids) * profile.slm_response
        raise InfeasiblePlanError(
            "slm",
            needed,
            frame_time,
            f"{len(hologram_ids)} distinct holograms but mid-frame hologram changes are disabled",
        )

    # Outer: hologram, then layer, then nearest-neighbour galvano path.
    ordered = []
    cursor = np.zeros(2)
    for key in [None] if not hologram_ids else list(hologram_ids):
        for layer in sorted({g[1] for g in groups if g[0] == key}):
            batch = [g for g in groups if g[0] == key and g[1] == layer]
            cents = np.array([g[2] for g in batch])
            for i in nearest_neighbor_order(cents, start=cursor):
                ordered.append(batch[i])
            cursor = ordered[-1][2]

    layer_z = {}
    for layer in np.unique(layer_of):
        layer_z[int(layer)] = float(pts[layer_of == layer, 2].mean())

    # Time slots on the pulse grid, earliest pulse satisfying every device.
    slots: List[Slot] = []
    spent = dict.fromkeys(DEVICES, 0.0)
    pulse = 0
    for key, layer, centroid, chunk in ordered:
        slot = Slot(
            0.0,
            xy_to_galvano(centroid, profile),
            _varifocal_for_layer(layer_z[layer], cloud.bounds[2], profile),
            hologram_ids.get(key),
            chunk,
        )
        if slots:
            gaps = _transition(slots[-1], slot, profile)
            step = _pulses_for(max(gaps.values()), rate)
            pulse += step
            spent[_binding(gaps)] += step / rate
        slots.append(Slot(pulse / rate, slot.galvano_xy, slot.varifocal_f, slot.hologram_id, chunk))

    wrap_gaps = _transition(slots[-1], slots[0], profile)
    wrap = _pulses_for(max(wrap_gaps.values()), rate)
    spent[_binding(wrap_gaps)] += wrap / rate
    needed_pulses = pulse + wrap
    if needed_pulses > math.floor(frame_time * rate + 1e-9):
        bottleneck = max(DEVICES, key=lambda d: (spent[d], -DEVICES.index(d)))
        raise InfeasiblePlanError(bottleneck, needed_pulses / rate, frame_time)

    holograms = {
        hid: tuple((float(dx * offset_cell), float(dy * offset_cell)) for dx, dy in key)
        for key, hid in hologram_ids.items()
    }
    return FramePlan(tuple(slots), frame_time, rate, pts.copy(), holograms, profile.name)


def validate_plan(plan: FramePlan, profile: DeviceProfile) -> List[str]:
    """Invariant violations of `plan` under `profile` (empty when valid)."""
    problems = []
    slots = plan.slots
    if plan.repetition_rate != profile.laser.repetition_rate:
        problems.append(
            f"plan repetition rate {plan.repetition_rate} Hz differs from laser "
            f"{profile.laser.repetition_rate} Hz"
        )
    for i, (a, b) in enumerate(zip(slots, slots[1:]), start=1):
        dt = b.time_offset - a.time_offset
        if dt <= 0:
            problems.append(f"slot {i}: not after slot {i - 1} (dt={dt:.6g} s)")
            continue
        for device, gap in _transition(a, b, profile).items():
            if dt < gap * (1 - 1e-9):
                label = "pulse spacing" if device == "laser" else f"{device} settling"
                problems.append(f"slot {i}: {label} violated, dt={dt:.6g} s < {gap:.6g} s")
    if slots:
        if slots[0].time_offset < 0:
            problems.append("slot 0: negative time offset")
        dt = plan.frame_time + slots[0].time_offset - slots[-1].time_offset
        for device, gap in _transition(slots[-1], slots[0], profile).items():
            if dt < gap * (1 - 1e-9):
                problems.append(
                    f"frame wrap: {device} needs {gap:.6g} s but only {dt:.6g} s remain"
                )
    counts = np.zeros(plan.n_voxels, dtype=int)
    for i, s in enumerate(slots):
        for v in s.voxel_indices:
            if not 0 <= v < plan.n_voxels:
                problems.append(f"slot {i}: voxel index {v} out of range")
            else:
                counts[v] += 1
        for ax in s.galvano_xy:
            if abs(ax) > profile.galvano_range * (1 + 1e-12):
                problems.append(f"slot {i}: galvano angle {ax:.6g} rad out of range")
        if s.hologram_id is not None and not profile.has_slm:
            problems.append(f"slot {i}: hologram assigned but profile has no SLM")
    for v in np.flatnonzero(counts != 1):
        problems.append(f"voxel {int(v)} covered {int(counts[v])} times")
    return problems


@dataclass
class SimReport:
    horizon: float
    dots_fired: int
    pulses_fired: int
    frames_completed: int
    achieved_dots_per_s: float
    achieved_fps: float
    busy_time: Dict[str, float]
    violations: List[str]
    max_dots_per_pulse: int
    peak_window_dots: int
    exposure_ms: Dict[int, float] = field(default_factory=dict)
    exposure_alerts: List[Tuple[int, str]] = field(default_factory=list)
    timeline: List[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "horizon_s": self.horizon,
            "dots_fired": self.dots_fired,
            "pulses_fired": self.pulses_fired,
            "frames_completed": self.frames_completed,
            "achieved_dots_per_s": self.achieved_dots_per_s,
            "achieved_fps": self.achieved_fps,
            "busy_time_s": dict(self.busy_time),
            "violations": list(self.violations),
            "max_dots_per_pulse": self.max_dots_per_pulse,
            "peak_window_dots": self.peak_window_dots,
            "exposure_ms": {str(k): v for k, v in sorted(self.exposure_ms.items())},
            "exposure_alerts": [[k, v] for k, v in self.exposure_alerts],
        }


def simulate(
    plan: FramePlan,
    profile: DeviceProfile,
    horizon: float = 1.0,
    guard: Optional[ExposureGuard] = None,
    n_dot: Optional[int] = None,
    window: float = 1.0,
) -> SimReport:
    """Replay `plan` every ``plan.frame_time`` seconds for `horizon` seconds.

    Violations are reported rather than raised. Exposure is aggregated per
    voxel over the horizon (one pulse period of dwell per hit) and
    forwarded to `guard` when given. `n_dot`, if given, bounds the dots any
    single pulse may address.
    """
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    violations = validate_plan(plan, profile)
    n_slots = len(plan.slots)
    offsets = np.array([s.time_offset for s in plan.slots])
    slot_dots = np.array([len(s.voxel_indices) for s in plan.slots], dtype=int)
    times, dots, fired, timeline = [], [], [], []
    frames_completed = 0
    k = 0
    while n_slots and k * plan.frame_time < horizon - _EPS:
        start = k * plan.frame_time
        mask = start + offsets < horizon - _EPS
        complete = bool(mask.all())
        times.append(start + offsets[mask])
        dots.append(slot_dots[mask])
        fired.append(np.flatnonzero(mask))
        frames_completed += complete
        timeline.append(
            {
                "frame": k,
                "start_s": start,
                "pulses": int(mask.sum()),
                "dots": int(slot_dots[mask].sum()),
                "complete": complete,
            }
        )
        k += 1
    times_arr = np.concatenate(times) if times else np.zeros(0)
    dots_arr = np.concatenate(dots) if dots else np.zeros(0, dtype=int)
    fired_slots = np.concatenate(fired) if fired else np.zeros(0, dtype=int)

    # Replays follow plan order, so slot a is always followed by slot (a + 1) % n.
    busy = dict.fromkeys(DEVICES, 0.0)
    if len(fired_slots):
        step_cost = {d: np.zeros(n_slots) for d in DEVICES}
        for i in range(n_slots):
            for device, gap in _transition(plan.slots[i], plan.slots[(i + 1) % n_slots], profile).items():
                step_cost[device][i] = gap
        for device in ("galvano", "varifocal", "slm"):
            busy[device] = float(step_cost[device][fired_slots[:-1]].sum())
        busy["laser"] = len(fired_slots) * profile.pulse_period

    peak = 0
    if len(times_arr):
        ends = np.searchsorted(times_arr, times_arr + window - _EPS, side="left")
        csum = np.concatenate([[0], np.cumsum(dots_arr)])
        peak = int(np.max(csum[ends] - csum[np.arange(len(times_arr))]))
    max_per_pulse = int(dots_arr.max()) if len(dots_arr) else 0
    if n_dot is not None:
        if max_per_pulse > n_dot:
            violations.append(f"a pulse addresses {max_per_pulse} voxels, above N_dot={n_dot}")
        limit = n_dot * math.ceil(window * profile.laser.repetition_rate - 1e-9)
        if peak > limit:
            violations.append(f"{peak} dots within {window} s exceeds N_dot x F_rep bound {limit}")

    hits = np.zeros(plan.n_voxels, dtype=int)
    fires = np.bincount(fired_slots, minlength=n_slots)
    for i in np.flatnonzero(fires):
        members = [v for v in plan.slots[i].voxel_indices if 0 <= v < plan.n_voxels]
        np.add.at(hits, members, fires[i])
    dwell_ms = 1000.0 * profile.pulse_period
    exposure = {int(v): float(hits[v] * dwell_ms) for v in np.flatnonzero(hits)}
    alerts = []
    if guard is not None:
        for v, ms in exposure.items():
            verdict = guard.record(plan.voxel_positions[v], ms)
            if verdict.status is not Verdict.OK:
                alerts.append((v, verdict.status.value))

    return SimReport(
        horizon=horizon,
        dots_fired=int(dots_arr.sum()),
        pulses_fired=len(fired_slots),
        frames_completed=frames_completed,
        achieved_dots_per_s=float(dots_arr.sum()) / horizon,
        achieved_fps=frames_completed / horizon,
        busy_time=busy,
        violations=violations,
        max_dots_per_pulse=max_per_pulse,
        peak_window_dots=peak,
        exposure_ms=exposure,
        exposure_alerts=alerts,
        timeline=timeline,
    )
