"""JSON formats for matrices, Laurent data, boundary samples, factors and fields.

Every loader validates against a JSON schema first and then checks the
mathematical constraints (hermitian symmetry, positivity, power-of-two n).
Complex numbers are ``[re, im]`` pairs; a bare number is read as real.
"""

from __future__ import annotations

import json

import jsonschema
import numpy as np

from .circle import BoundarySamples, DiscSpec
from .curvature import Constant, DualFlatSum, FlatSum
from .dirichlet import FlatMetric
from .errors import InputError
from .linalg import hermitian, is_psd
from .poly import MatrixLaurentPolynomial, MatrixPolynomial

__all__ = [
    "SCHEMAS",
    "validate",
    "load_json",
    "dumps",
    "matrix_to_json",
    "matrix_from_json",
    "laurent_to_json",
    "laurent_from_json",
    "samples_to_json",
    "samples_from_json",
    "poly_to_json",
    "poly_from_json",
    "disc_to_json",
    "disc_from_json",
    "flat_to_json",
    "flat_from_json",
    "field_to_json",
    "field_from_json",
    "discs_from_json",
    "points_from_json",
]

_DEFS = {
    "complex": {
        "oneOf": [
            {"type": "number"},
            {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        ]
    },
    "matrix": {
        "type": "object",
        "required": ["dim", "entries"],
        "properties": {
            "dim": {"type": "integer", "minimum": 1},
            "entries": {
                "type": "array",
                "items": {"type": "array", "items": {"$ref": "#/$defs/complex"}},
            },
            "kind": {"enum": ["hermitian", "psd"]},
        },
    },
    "disc": {
        "type": "object",
        "required": ["z0", "r"],
        "properties": {
            "z0": {"$ref": "#/$defs/complex"},
            "r": {"type": "number", "exclusiveMinimum": 0},
        },
    },
    "laurent": {
        "type": "object",
        "required": ["dim", "N", "coeffs"],
        "properties": {
            "dim": {"type": "integer", "minimum": 1},
            "N": {"type": "integer", "minimum": 0},
            "coeffs": {
                "type": "object",
                "patternProperties": {"^-?[0-9]+$": {"$ref": "#/$defs/matrix"}},
                "additionalProperties": False,
            },
        },
    },
    "samples": {
        "type": "object",
        "required": ["z0", "r", "n", "values"],
        "properties": {
            "z0": {"$ref": "#/$defs/complex"},
            "r": {"type": "number", "exclusiveMinimum": 0},
            "n": {"type": "integer", "minimum": 4},
            "values": {"type": "array", "items": {"$ref": "#/$defs/matrix"}},
        },
    },
    "poly": {
        "type": "object",
        "required": ["dim", "degree", "coeffs"],
        "properties": {
            "dim": {"type": "integer", "minimum": 1},
            "degree": {"type": "integer", "minimum": 0},
            "coeffs": {"type": "array", "minItems": 1, "items": {"$ref": "#/$defs/matrix"}},
        },
    },
    "flat": {
        "type": "object",
        "required": ["domain", "H"],
        "properties": {"domain": {"$ref": "#/$defs/disc"}, "H": {"$ref": "#/$defs/poly"}},
    },
    "field": {
        "type": "object",
        "required": ["variant"],
        "properties": {
            "variant": {"enum": ["flat_sum", "dual_flat_sum", "constant"]},
            "terms": {"type": "array", "items": {"$ref": "#/$defs/poly"}},
            "matrix": {"$ref": "#/$defs/matrix"},
            "domain": {"$ref": "#/$defs/disc"},
        },
    },
    "discs": {
        "type": "object",
        "required": ["discs"],
        "properties": {"discs": {"type": "array", "items": {"$ref": "#/$defs/disc"}}},
    },
    "points": {
        "type": "object",
        "required": ["points"],
        "properties": {"points": {"type": "array", "items": {"$ref": "#/$defs/complex"}}},
    },
}

SCHEMAS = {name: {"$defs": _DEFS, "$ref": f"#/$defs/{name}"} for name in _DEFS}


def validate(obj, name):
    try:
        jsonschema.validate(obj, SCHEMAS[name])
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise InputError(f"{name} JSON invalid: {exc.message}", path=path) from None
    return obj


def load_json(path, name):
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc.msg}", line=exc.lineno) from None
    return validate(obj, name)


def dumps(obj):
    """Canonical JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def _cx(v):
    return complex(v) if not isinstance(v, list) else complex(v[0], v[1])


def _cx_json(z):
    z = complex(z)
    return [z.real, z.imag]


def matrix_to_json(m, kind=None):
    m = np.asarray(m, dtype=np.complex128)
    out = {"dim": int(m.shape[0]), "entries": [[_cx_json(x) for x in row] for row in m]}
    if kind:
        out["kind"] = kind
    return out


def matrix_from_json(obj):
    validate(obj, "matrix")
    d = obj["dim"]
    rows = obj["entries"]
    if len(rows) != d or any(len(r) != d for r in rows):
        raise InputError("matrix entries do not match dim", dim=d)
    m = np.array([[_cx(v) for v in r] for r in rows], dtype=np.complex128)
    kind = obj.get("kind")
    if kind in ("hermitian", "psd"):
        m = hermitian(m)
    if kind == "psd":
        ok, margin = is_psd(m)
        if not ok:
            raise InputError("matrix marked psd is not PSD", margin=margin)
    return m


def laurent_to_json(f):
    N = f.degree
    return {
        "dim": f.dim,
        "N": N,
        "coeffs": {str(n): matrix_to_json(f.coeff(n)) for n in range(-N, N + 1)},
    }


def laurent_from_json(obj):
    validate(obj, "laurent")
    d, N = obj["dim"], obj["N"]
    coeffs = np.zeros((2 * N + 1, d, d), dtype=np.complex128)
    seen = set()
    for key, mat in obj["coeffs"].items():
        n = int(key)
        if abs(n) > N:
            raise InputError("coefficient index exceeds N", index=n, N=N)
        m = matrix_from_json(mat)
        if m.shape != (d, d):
            raise InputError("coefficient has wrong dimension", index=n)
        coeffs[N + n] = m
        seen.add(n)
    # a one-sided listing is completed by the symmetry F_{-n} = F_n^*
    for n in range(1, N + 1):
        if n in seen and -n not in seen:
            coeffs[N - n] = coeffs[N + n].conj().T
        elif -n in seen and n not in seen:
            coeffs[N + n] = coeffs[N - n].conj().T
    return MatrixLaurentPolynomial(coeffs)


def disc_to_json(disc):
    return {"z0": _cx_json(disc.z0), "r": disc.r}


def disc_from_json(obj):
    validate(obj, "disc")
    return DiscSpec(_cx(obj["z0"]), obj["r"])


def samples_to_json(s):
    return {
        "z0": _cx_json(s.disc.z0),
        "r": s.disc.r,
        "n": s.n,
        "values": [matrix_to_json(v, "hermitian") for v in s.values],
    }


def samples_from_json(obj):
    validate(obj, "samples")
    if len(obj["values"]) != obj["n"]:
        raise InputError("number of values differs from n", n=obj["n"], got=len(obj["values"]))
    vals = np.stack([matrix_from_json(v) for v in obj["values"]])
    return BoundarySamples(DiscSpec(_cx(obj["z0"]), obj["r"]), vals)


def poly_to_json(h):
    return {
        "dim": h.dim,
        "degree": h.degree,
        "coeffs": [matrix_to_json(c) for c in h.coeffs],
    }


def poly_from_json(obj):
    validate(obj, "poly")
    if len(obj["coeffs"]) != obj["degree"] + 1:
        raise InputError("coefficient count differs from degree + 1")
    c = np.stack([matrix_from_json(m) for m in obj["coeffs"]])
    if c.shape[1] != obj["dim"]:
        raise InputError("coefficient dimension differs from dim")
    return MatrixPolynomial(c)


def flat_to_json(fm):
    out = {"domain": disc_to_json(fm.domain), "H": poly_to_json(fm.h)}
    if fm.report is not None:
        out["report"] = fm.report.to_dict()
    if np.isfinite(fm.truncation_error):
        out["truncation_error"] = fm.truncation_error
        out["truncation"] = fm.truncation
    return out


def flat_from_json(obj):
    validate(obj, "flat")
    return FlatMetric(poly_from_json(obj["H"]), disc_from_json(obj["domain"]))


_VARIANTS = {FlatSum: "flat_sum", DualFlatSum: "dual_flat_sum"}


def field_to_json(field):
    out = {"domain": disc_to_json(field.domain)}
    if isinstance(field, Constant):
        out.update(variant="constant", matrix=matrix_to_json(field.matrix, "psd"))
        return out
    name = _VARIANTS.get(type(field))
    if name is None or not all(isinstance(t, MatrixPolynomial) for t in field.terms):
        raise InputError(f"no JSON form for {type(field).__name__}")
    out.update(variant=name, terms=[poly_to_json(t) for t in field.terms])
    return out


def field_from_json(obj):
    validate(obj, "field")
    domain = disc_from_json(obj["domain"]) if "domain" in obj else DiscSpec()
    variant = obj["variant"]
    if variant == "constant":
        if "matrix" in obj:
            return Constant(matrix_from_json(obj["matrix"]), domain)
        terms = [poly_from_json(t) for t in obj.get("terms", [])]
        if len(terms) != 1 or terms[0].degree != 0:
            raise InputError("constant field needs 'matrix' or one degree-0 term")
        h = terms[0].coeffs[0]
        return Constant(h.conj().T @ h, domain)
    terms = [poly_from_json(t) for t in obj.get("terms", [])]
    if not terms:
        raise InputError("field needs at least one term")
    cls = FlatSum if variant == "flat_sum" else DualFlatSum
    return cls(terms, domain)


def discs_from_json(obj):
    validate(obj, "discs")
    return [disc_from_json(d) for d in obj["discs"]]


def points_from_json(obj):
    validate(obj, "points")
    return np.array([_cx(p) for p in obj["points"]], dtype=np.complex128)
