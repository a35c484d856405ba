"""Run configuration: JSON files validated against a versioned schema.

A configuration is resolved from a packaged defaults set ("paper" or
"desk"), then a user file, then command-line overrides. Unknown keys are
rejected at every level.
"""

import copy
import hashlib
import json
from dataclasses import fields
from importlib import resources

import jsonschema
import numpy as np

from .circuitmodel import DeviceParams, PrespaDrive
from .codes import EXPERIMENTAL, OPTIMAL, CodeWords
from .errors import InvalidInput

SCHEMA_VERSION = 1
DEFAULT_SETS = ("paper", "desk")

_num = {"type": "number"}
_pos_int = {"type": "integer", "minimum": 1}
_rate = {"oneOf": [_num, {"type": "array", "items": _num, "minItems": 4, "maxItems": 4}]}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "additionalProperties": False,
            "required": list(required)}


SCHEMA = _obj({
    "version": {"const": SCHEMA_VERSION},
    "device": _obj({f.name: {"type": "number", "minimum": 0} for f in fields(DeviceParams)}),
    "code": {"oneOf": [{"enum": ["experimental", "optimal"]},
                       {"type": "array", "items": _num, "minItems": 4, "maxItems": 4}]},
    "drive": _obj({"lam_khz": _rate, "omega_khz": _rate, "spurious": {"type": "boolean"}}),
    "noise_off": {"type": "array", "items": {"type": "string"}},
    "seed": {"type": "integer", "minimum": 0},
    "threads": _pos_int,
    "cavity_dim": {"type": "integer", "minimum": 8, "maximum": 14},
    "lifetime": _obj({"mode": {"enum": ["free", "free-fock", "ideal-prespa", "full", "full-idle"]},
                      "tmax_us": {"type": "number", "exclusiveMinimum": 0},
                      "npoints": {"type": "integer", "minimum": 4},
                      "jmax": _pos_int}),
    "trajectory": _obj({"state": {"enum": ["pZ", "mZ", "pX", "mX", "pY", "mY"]},
                        "kappa_t": {"type": "number", "minimum": 0},
                        "ntraj": _pos_int, "jmax": _pos_int}),
    "spectroscopy": _obj({"init": {"type": "string"}, "time_us": {"type": "number", "minimum": 0},
                          "npoints": _pos_int}),
    "spectroscopy2d": _obj({"init_fock": {"enum": [0, 2, 4, 6]}, "span_mhz": {"type": "number", "exclusiveMinimum": 0},
                            "npoints": _pos_int, "duration_us": {"type": "number", "exclusiveMinimum": 0}}),
    "ramsey": _obj({"levels": {"type": "array", "items": {"type": "integer", "minimum": 0},
                               "minItems": 2, "maxItems": 2},
                    "alpha": _num, "tmax_us": {"type": "number", "exclusiveMinimum": 0},
                    "npoints": {"type": "integer", "minimum": 6}, "co_rotate": {"type": "boolean"}}),
    "wigner": _obj({"state": {"type": "string"}, "extent": {"type": "number", "exclusiveMinimum": 0},
                    "npoints": _pos_int}),
    "chi": _obj({"duration_us": {"type": "number", "minimum": 0}, "model": {"enum": ["ideal", "noisy"]}}),
    "steady": _obj({"cavity_dim": {"type": "integer", "minimum": 8, "maximum": 10}}),
    "heating": _obj({"omega_khz": {"type": "array", "items": {"type": "number", "minimum": 0}},
                     "driven": {"type": "boolean"}}),
    "grape": _obj({"target": {"enum": ["prep", "decode"]},
                   "dims": {"type": "array", "items": _pos_int, "minItems": 2, "maxItems": 2},
                   "duration_us": {"type": "number", "exclusiveMinimum": 0},
                   "dt_ns": {"type": "number", "exclusiveMinimum": 0},
                   "max_iter": {"type": "integer", "minimum": 0},
                   "eta0": {"type": "number", "exclusiveMinimum": 0}, "beta": {"type": "number", "minimum": 0},
                   "alpha2": {"type": "number", "minimum": 0}, "alpha3": {"type": "number", "minimum": 0},
                   "alpha4": {"type": "number", "minimum": 0},
                   "c1_threshold": {"type": "number", "minimum": 0},
                   "init_scale": {"type": "number", "minimum": 0}}),
    "budget": _obj({"input": {"type": ["string", "null"]}, "derived": {"type": "boolean"}}),
})


def validate(cfg):
    """Raise InvalidInput unless ``cfg`` conforms to the schema."""
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InvalidInput(f"config error at {where}: {exc.message}") from exc
    return cfg


def load_defaults(name="desk"):
    if name not in DEFAULT_SETS:
        raise InvalidInput(f"unknown defaults {name!r}; choose from {DEFAULT_SETS}")
    text = resources.files("prespa").joinpath(f"data/defaults_{name}.json").read_text()
    return validate(json.loads(text))


def merge(base, override):
    """Recursive dict merge; lists and scalars in ``override`` replace."""
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def load_config(path=None, defaults="desk", overrides=None):
    """Resolved configuration: defaults, then the file at ``path``, then ``overrides``."""
    cfg = load_defaults(defaults)
    if path is not None:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInput(f"cannot read config {path}: {exc}") from exc
        validate(user)
        cfg = merge(cfg, user)
    if overrides:
        cfg = merge(cfg, overrides)
    return validate(cfg)


def config_hash(cfg):
    """SHA-256 of the canonical JSON form."""
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def device_params(cfg):
    return DeviceParams(**cfg.get("device", {}))


def code_words(cfg):
    code = cfg.get("code", "experimental")
    if isinstance(code, str):
        return {"experimental": EXPERIMENTAL, "optimal": OPTIMAL}[code]
    return CodeWords(*code)


def drive(cfg):
    d = cfg.get("drive", {})
    lam = d.get("lam_khz", 28.0)
    om = d.get("omega_khz", 90.0)
    return PrespaDrive(np.broadcast_to(np.asarray(lam, dtype=complex), (4,)).copy(),
                       np.broadcast_to(np.asarray(om, dtype=complex), (4,)).copy(),
                       spurious=d.get("spurious", True))
