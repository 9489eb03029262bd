"""16-bit binary PGM (P5) phase and intensity maps.

Phase maps store ``v = round(phase * 65536 / 2 pi) mod 65536`` so that
``phase = 2 pi v / 65536``; rows are written top to bottom, samples big
endian as the Netpbm format requires.
"""

from __future__ import annotations

import json
import os
import re

import numpy as np

from ..cgh.fields import TWO_PI, ComplexField, PhaseHologram

PHASE_LEVELS = 65536
MAXVAL = 65535
SCHEMA_VERSION = 1


class FormatError(ValueError):
    """A file does not follow the expected on-disk format."""


def encode_pgm(counts: np.ndarray, maxval: int = MAXVAL) -> bytes:
    counts = np.asarray(counts)
    if counts.ndim != 2:
        raise ValueError("PGM data must be 2-D")
    if counts.min(initial=0) < 0 or counts.max(initial=0) > maxval:
        raise ValueError(f"PGM samples must lie in [0, {maxval}]")
    height, width = counts.shape
    header = f"P5\n{width} {height}\n{maxval}\n".encode("ascii")
    dtype = ">u2" if maxval > 255 else "u1"
    return header + counts.astype(dtype).tobytes()


_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def decode_pgm(data: bytes):
    """Parse binary PGM bytes into ``(counts, maxval)``."""
    pos = 0
    tokens = []
    for _ in range(4):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise FormatError("truncated PGM header")
        tokens.append(m.group(1))
        pos = m.end()
    magic, width, height, maxval = tokens
    if magic != b"P5":
        raise FormatError(f"not a binary PGM (magic {magic!r})")
    try:
        width, height, maxval = int(width), int(height), int(maxval)
    except ValueError:
        raise FormatError("non-numeric PGM header field") from None
    if width <= 0 or height <= 0 or not 0 < maxval <= MAXVAL:
        raise FormatError(f"invalid PGM geometry {width}x{height} maxval {maxval}")
    if pos >= len(data) or data[pos : pos + 1] not in (b" ", b"\t", b"\n", b"\r"):
        raise FormatError("missing whitespace after PGM header")
    pos += 1
    bytes_per = 2 if maxval > 255 else 1
    expected = width * height * bytes_per
    payload = data[pos:]
    if len(payload) != expected:
        raise FormatError(f"PGM payload has {len(payload)} bytes, expected {expected}")
    dtype = ">u2" if bytes_per == 2 else "u1"
    counts = np.frombuffer(payload, dtype=dtype).reshape(height, width).astype(np.int64)
    if counts.max(initial=0) > maxval:
        raise FormatError("PGM sample exceeds maxval")
    return counts, maxval


def read_pgm(path):
    with open(path, "rb") as fh:
        return decode_pgm(fh.read())


def write_pgm(path, counts, maxval: int = MAXVAL) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_pgm(counts, maxval))


def phase_to_counts(phases) -> np.ndarray:
    scaled = np.rint(np.asarray(phases, dtype=float) * (PHASE_LEVELS / TWO_PI)).astype(np.int64)
    return np.mod(scaled, PHASE_LEVELS)


def counts_to_phase(counts) -> np.ndarray:
    return TWO_PI * np.asarray(counts, dtype=float) / PHASE_LEVELS


def write_phase_map(path, holo: PhaseHologram) -> None:
    write_pgm(path, phase_to_counts(holo.phases))


def read_phase_map(path, pixel_pitch: float = 20e-6, expected_size: int | None = None) -> PhaseHologram:
    """Load a phase map; only square 16-bit (maxval 65535) maps are accepted."""
    counts, maxval = read_pgm(path)
    if maxval != MAXVAL:
        raise FormatError(f"phase maps need maxval {MAXVAL}, found {maxval}")
    h, w = counts.shape
    if h != w:
        raise FormatError(f"phase map must be square, got {w}x{h}")
    if expected_size is not None and h != expected_size:
        raise FormatError(f"phase map is {h}x{h}, expected {expected_size}x{expected_size}")
    if h % 2:
        raise FormatError(f"phase map side must be even, got {h}")
    return PhaseHologram(counts_to_phase(counts), pixel_pitch)


def intensity_counts(field: ComplexField):
    """Peak-normalized 16-bit counts of ``|U|^2`` with the zero order centred."""
    intensity = np.fft.fftshift(field.intensity())
    peak = float(intensity.max())
    if peak <= 0:
        return np.zeros(intensity.shape, dtype=np.int64), 0.0
    return np.rint(intensity / peak * MAXVAL).astype(np.int64), peak


def write_intensity_map(path, field: ComplexField, targets=(), extra: dict | None = None) -> dict:
    """Write the intensity PGM plus a ``.json`` sidecar; returns the sidecar dict.

    ``peak_pixel`` is (column, row) in the written, centred image;
    ``peak_index`` is (vx, vy) in the unshifted reconstruction layout used
    by spot targets.
    """
    counts, peak = intensity_counts(field)
    write_pgm(path, counts)
    raw = field.intensity()
    vy, vx = np.unravel_index(int(np.argmax(raw)), raw.shape)
    row, col = np.unravel_index(int(np.argmax(counts)), counts.shape)
    sidecar = {
        "schema_version": SCHEMA_VERSION,
        "kind": "intensity_map",
        "image": os.path.basename(str(path)),
        "size_n": field.size_n,
        "normalization_peak": peak,
        "peak_pixel": [int(col), int(row)],
        "peak_index": [int(vx), int(vy)],
        "total_energy": float(raw.sum()),
        "targets": [
            {"vx": t.index_vx, "vy": t.index_vy, "intensity": float(raw[t.index_vy, t.index_vx])}
            for t in targets
        ],
    }
    if extra:
        sidecar.update(extra)
    with open(sidecar_path(path), "w") as fh:
        json.dump(sidecar, fh, indent=2)
        fh.write("\n")
    return sidecar


def sidecar_path(path) -> str:
    root, _ = os.path.splitext(str(path))
    return root + ".json"
