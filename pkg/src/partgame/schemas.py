"""JSON Schemas for run configurations and emitted reports."""

CONFIG_SCHEMA_ID = "partgame/config/v1"
REPORT_SCHEMA_ID = "partgame/report/v1"

_RATIONAL = {
    "type": "string",
    "pattern": r"^\s*[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?(\s*/\s*\d+)?\s*$",
}
_COUNT = {"type": "integer", "minimum": 1}
_VARIANTS = ["basic", "retraction", "universal_basic", "universal_retraction"]
_PROFILE = {"type": "string", "pattern": "^[ACFRacfr]+$"}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["schema", "game"],
    "properties": {
        "schema": {"const": CONFIG_SCHEMA_ID},
        "game": {
            "type": "object",
            "additionalProperties": False,
            "required": ["n", "k", "q", "alpha", "r", "variant"],
            "properties": {
                "n": _COUNT,
                "k": _COUNT,
                "q": {"oneOf": [_RATIONAL, {"type": "array", "items": _RATIONAL, "minItems": 1}]},
                "alpha": _RATIONAL,
                "beta": _RATIONAL,
                "r": _RATIONAL,
                "v": _RATIONAL,
                "variant": {"enum": _VARIANTS},
            },
            "if": {"properties": {"variant": {"enum": ["retraction", "universal_retraction"]}}},
            "then": {"required": ["beta"]},
        },
        "numeric": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mode": {"enum": ["exact", "float"]},
                "epsilon": _RATIONAL,
            },
        },
        "guard": _COUNT,
        "enumerate": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "methods": {
                    "type": "array",
                    "items": {"enum": ["structure", "brute_force"]},
                    "minItems": 1,
                    "uniqueItems": True,
                },
                "strong_check": {"type": "boolean"},
            },
        },
        "calibrate": {
            "type": "object",
            "additionalProperties": False,
            "required": ["target"],
            "properties": {
                "target": {"oneOf": [{"const": "all-in"}, {"type": "integer", "minimum": 1}]},
                "pair_universal": {"type": "boolean"},
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["parameter", "start", "stop", "step"],
            "properties": {
                "parameter": {"enum": ["r", "alpha", "beta", "q", "k"]},
                "start": _RATIONAL,
                "stop": _RATIONAL,
                "step": _RATIONAL,
            },
        },
        "simulate": {
            "type": "object",
            "additionalProperties": False,
            "required": ["profile"],
            "properties": {
                "profile": _PROFILE,
                "trials": _COUNT,
                "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
                "dynamics": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "initial": _PROFILE,
                        "order": {"enum": ["round_robin", "random"]},
                        "max_rounds": _COUNT,
                        "seed": {"type": "integer", "minimum": 0},
                    },
                },
            },
        },
    },
}

# Exact values are "p/q" strings, float-mode values are JSON numbers.
_NUM = {"oneOf": [{"type": "string", "pattern": r"^-?\d+/\d+$"}, {"type": "number"}]}
_NUM_PAIR = {
    "type": "object",
    "additionalProperties": False,
    "required": ["exact", "decimal"],
    "properties": {"exact": {"type": ["string", "null"]}, "decimal": {"type": "string"}},
}
_COMPOSITION = {
    "type": "object",
    "required": ["label", "contributors", "free_riders", "abstainers", "counts"],
    "properties": {
        "label": {"type": "string"},
        "profile": {"type": "string"},
        "contributors": {"type": "array", "items": {"type": "integer"}},
        "free_riders": {"type": "array", "items": {"type": "integer"}},
        "abstainers": {"type": "array", "items": {"type": "integer"}},
        "counts": {"type": "array", "items": {"type": "integer"}, "minItems": 3, "maxItems": 3},
        "verified_by": {"enum": ["brute_force", "structure", "both"]},
        "margins": {
            "type": "object",
            "additionalProperties": {"type": "object", "additionalProperties": _NUM},
        },
    },
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema", "tool", "command", "config", "result"],
    "properties": {
        "schema": {"const": REPORT_SCHEMA_ID},
        "tool": {
            "type": "object",
            "required": ["name", "version"],
            "properties": {"name": {"type": "string"}, "version": {"type": "string"}},
        },
        "command": {"enum": ["enumerate", "calibrate", "simulate"]},
        "config": {"type": "object"},
        "result": {"type": "object"},
    },
    "allOf": [
        {
            "if": {"properties": {"command": {"const": "enumerate"}}},
            "then": {
                "properties": {
                    "result": {
                        "type": "object",
                        "required": ["equilibria", "structure", "brute_force"],
                        "properties": {
                            "equilibria": {"type": "array", "items": _COMPOSITION},
                            "agreement": {"type": ["boolean", "null"]},
                        },
                    }
                }
            },
        },
        {
            "if": {"properties": {"command": {"const": "calibrate"}}},
            "then": {
                "properties": {
                    "result": {
                        "type": "object",
                        "required": ["status", "target"],
                        "properties": {
                            "status": {"enum": ["ok", "infeasible"]},
                            "r_min": _NUM_PAIR,
                            "expenditure": _NUM_PAIR,
                        },
                    }
                }
            },
        },
        {
            "if": {"properties": {"command": {"const": "simulate"}}},
            "then": {
                "properties": {
                    "result": {
                        "type": "object",
                        "required": ["simulation", "analytic"],
                    }
                }
            },
        },
    ],
}
