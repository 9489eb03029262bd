"""Readers and writers for phase maps, spot lists, voxel clouds, plans and configs."""

from .formats import (
    SpotsValidationError,
    dumps_json,
    dumps_plan,
    format_cloud,
    format_keyvalue,
    format_spots,
    loads_plan,
    parse_cloud,
    parse_keyvalue,
    parse_spots,
    plan_from_dict,
    plan_to_dict,
    read_cloud,
    read_keyvalue,
    read_plan,
    read_spots,
    write_cloud,
    write_plan,
    write_spots,
)
from .pgm import (
    SCHEMA_VERSION,
    FormatError,
    counts_to_phase,
    decode_pgm,
    encode_pgm,
    phase_to_counts,
    read_phase_map,
    read_pgm,
    write_intensity_map,
    write_pgm,
    write_phase_map,
)
