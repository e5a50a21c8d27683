"""
JSON schemas for calibration and scenario files (validated with jsonschema).
"""

_POINT = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_POINTS = {"type": "array", "items": _POINT, "minItems": 2}
_BAND = {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 2, "maxItems": 2}

_CURVE_SECTION = {
    "type": "object",
    "required": ["points"],
    "properties": {"points": _POINTS, "source": {"type": "string"}},
}

_MEDIUM = {
    "type": "object",
    "required": ["density", "sound_speed", "attenuation_coeff", "noise_floor_spl"],
    "properties": {
        "density": {"type": "number", "exclusiveMinimum": 0},
        "sound_speed": {"type": "number", "exclusiveMinimum": 0},
        "attenuation_coeff": {"type": "number", "minimum": 0},
        "noise_floor_spl": {"type": "number"},
        "salinity": {"type": "number"},
        "temperature_c": {"type": "number"},
        "spl_distance_curve": {
            "type": "object",
            "required": ["points", "source_spl"],
            "properties": {"points": _POINTS, "source_spl": {"type": "number"}},
        },
    },
}

_SOLID = {
    "type": "object",
    "required": ["density", "lame_lambda", "lame_mu", "shear_modulus", "acoustic_impedance"],
    "properties": {k: {"type": "number", "minimum": 0} for k in
                   ("density", "lame_lambda", "lame_mu", "shear_modulus", "acoustic_impedance")},
}

CALIBRATION_SCHEMA_V1 = {
    "type": "object",
    "required": ["format", "version", "media", "resonance_profile", "angle_table",
                 "position_factors", "degradation_curves", "pes_curve", "cache", "db_latency"],
    "properties": {
        "format": {"const": "udc-calibration"},
        "version": {"type": "string"},
        "amplitude_convention": {"enum": ["20log10"]},
        "media": {"type": "object", "additionalProperties": _MEDIUM, "minProperties": 1},
        "solids": {"type": "object", "additionalProperties": _SOLID},
        "resonance_profile": {
            "type": "object",
            "required": ["bands"],
            "properties": {
                "bands": {
                    "type": "array", "minItems": 1,
                    "items": {
                        "type": "object",
                        "required": ["center_hz", "half_width_hz", "gain"],
                        "properties": {
                            "center_hz": {"type": "number", "exclusiveMinimum": 0},
                            "half_width_hz": {"type": "number", "minimum": 0},
                            "gain": {"type": "number", "minimum": 0, "maximum": 1},
                        },
                    },
                },
                "off_band_gain": {"type": "number", "minimum": 0, "maximum": 1},
            },
        },
        "angle_table": _CURVE_SECTION,
        "position_factors": {
            "type": "object",
            "required": ["points"],
            "properties": {"points": {"type": "object", "additionalProperties": {
                "type": "number", "exclusiveMinimum": 0, "maximum": 1}}},
        },
        "degradation_curves": {"type": "object", "additionalProperties": _CURVE_SECTION},
        "pes_curve": _CURVE_SECTION,
        "cache": {
            "type": "object",
            "required": ["hit_ratios", "latency_bands_ms"],
            "properties": {
                "hit_ratios": {"type": "object", "additionalProperties": {
                    "type": "object", "additionalProperties": {"type": "number", "minimum": 0, "maximum": 1}}},
                "latency_bands_ms": {"type": "object", "required": ["hit", "miss_benign", "miss_attacked"],
                                     "additionalProperties": _BAND},
            },
        },
        "db_latency": {"type": "object"},
        "vm_inflation": {"type": "object"},
        "disk_defaults": {"type": "object"},
        "displacement_reference": {"type": "object"},
        "benchmark_budgets_s": {"type": "object", "additionalProperties": {"type": "number", "exclusiveMinimum": 0}},
    },
}


_SCHEDULE = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "steps": {"type": "array", "items": _POINT},
        "step_db": {"type": "number"},
        "step_period_s": {"type": "number", "exclusiveMinimum": 0},
        "ramp_start_s": {"type": "number", "minimum": 0},
        "ramp_stop_s": {"type": "number", "minimum": 0},
        "off_after_s": {"type": "number", "minimum": 0},
    },
}

SCENARIO_KEYS = {
    "top": ["name", "description", "horizon_s", "seed", "calibration", "environment",
            "passive_attenuation_db", "threshold_jitter_db", "source", "disks", "arrays",
            "nodes", "vms", "db", "workload", "parameters"],
    "source": ["frequency_hz", "spl", "delta_spl", "distance_m", "orientation_deg", "location",
               "propagation", "schedule"],
    "disk": ["id", "kind", "baseline_throughput", "coupling", "unresponsive_threshold_db",
             "unresponsive_dwell_s", "permanent_damage_rate"],
    "array": ["id", "members", "drop_timeout_s", "degraded_drop_timeout_s"],
    "node": ["id", "location", "storage"],
    "vms": ["count", "interval_s", "start_s", "base_durations", "hosts", "storage_weight"],
    "host": ["id", "node", "capacity", "max_vms"],
    "db": ["underwater_node_count"],
}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["name", "horizon_s"],
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "description": {"type": "string"},
        "horizon_s": {"type": "number", "exclusiveMinimum": 0},
        "seed": {"type": "integer", "minimum": 0},
        "calibration": {"type": "string"},
        "environment": {"enum": ["lab", "open_water", "seawater"]},
        "passive_attenuation_db": {"type": "number", "minimum": 0},
        "threshold_jitter_db": {"type": "number", "minimum": 0},
        "source": {
            "type": "object",
            "properties": {
                "frequency_hz": {"type": "number", "exclusiveMinimum": 0},
                "spl": {"type": "number", "minimum": 0},
                "delta_spl": {"type": "number"},
                "distance_m": {"type": "number", "minimum": 0},
                "orientation_deg": {"type": "number", "minimum": 0, "maximum": 180},
                "location": {"type": "integer", "minimum": 1},
                "propagation": {"enum": ["analytic", "empirical"]},
                "schedule": _SCHEDULE,
            },
        },
        "disks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id"],
                "properties": {
                    "id": {"type": "string"},
                    "kind": {"enum": ["mechanical", "solid_state"]},
                    "baseline_throughput": {"type": "number", "exclusiveMinimum": 0},
                    "coupling": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                    "unresponsive_threshold_db": {"type": "number"},
                    "unresponsive_dwell_s": {"type": "number", "minimum": 0},
                    "permanent_damage_rate": {"type": "number", "minimum": 0},
                },
            },
        },
        "arrays": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "members"],
                "properties": {
                    "id": {"type": "string"},
                    "members": {"type": "array", "items": {"type": "string"}},
                    "drop_timeout_s": {"type": "number", "minimum": 0},
                    "degraded_drop_timeout_s": {"type": "number", "minimum": 0},
                },
            },
        },
        "nodes": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "location"],
                "properties": {
                    "id": {"type": "string"},
                    "location": {"enum": ["underwater", "on_land"]},
                    "storage": {"type": "string"},
                },
            },
        },
        "vms": {
            "type": "object",
            "properties": {
                "count": {"type": "integer", "minimum": 0},
                "interval_s": {"type": "number", "minimum": 0},
                "start_s": {"type": "number", "minimum": 0},
                "base_durations": {"type": "object", "additionalProperties": {"type": "number", "exclusiveMinimum": 0}},
                "storage_weight": {"type": "number", "minimum": 0, "maximum": 1},
                "hosts": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["id", "node"],
                        "properties": {
                            "id": {"type": "string"},
                            "node": {"type": "string"},
                            "capacity": {"type": "number", "exclusiveMinimum": 0},
                            "max_vms": {"type": "integer", "minimum": 1},
                        },
                    },
                },
            },
        },
        "db": {
            "type": "object",
            "properties": {"underwater_node_count": {"type": "integer", "minimum": 0}},
        },
        "workload": {"enum": ["sequential-write", "sequential-read", "random-write", "random-read"]},
        "parameters": {"type": "object"},
    },
}
