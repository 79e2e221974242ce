"""Exact, byte-deterministic serialization for matrices, instances, traces.

Matrix values are rationals; any value whose denominator has only the
prime factors 2 and 5 has a finite decimal expansion and is written as a
plain JSON number token, exact by construction. Other denominators fall
back to a quoted "p/q" string. Reading goes through Fraction in both
cases, so write/read round trips are bit-exact and never touch binary
floating point. The encoder is hand rolled because the stdlib json module
cannot emit custom number tokens.

Formats:
  instance JSON: {"n":…, "entries":[[i,j,value],…]} with only nonzero
      entries, sorted by (i, j); generated instances add the metadata keys
      "family", "params", "seed".
  matrix text: first line n, then one "i j value" line per nonzero entry.
  trace JSON: {"initial": {"n":…, "sha256":…}, "steps":[{"k","l","w","dr"},…]}
      where sha256 fingerprints the canonical matrix bytes of the starting
      matrix, w is the exact applied update and dr the DR after the step.
"""

from __future__ import annotations

import hashlib
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Iterable

from .core import QuboMatrix
from .problems import ProblemInstance


def _decimal_token(fr: Fraction) -> str | None:
    """Finite decimal string for fr, or None when no exact one exists."""
    q = fr.denominator
    two = 0
    while q % 2 == 0:
        q //= 2
        two += 1
    five = 0
    while q % 5 == 0:
        q //= 5
        five += 1
    if q != 1:
        return None
    k = max(two, five)
    if k == 0:
        return str(fr.numerator)
    scaled = abs(fr.numerator) * 10**k // fr.denominator
    digits = str(scaled).rjust(k + 1, "0")
    whole, frac = digits[:-k], digits[-k:].rstrip("0")
    sign = "-" if fr.numerator < 0 else ""
    return f"{sign}{whole}.{frac}" if frac else f"{sign}{whole}"


def value_token(value) -> str:
    """Canonical serialization token for one exact value."""
    fr = Fraction(value)
    dec = _decimal_token(fr)
    if dec is not None:
        return dec
    return f'"{fr.numerator}/{fr.denominator}"'


def _encode(obj, out: list[str]) -> None:
    if isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                out.append(",")
            out.append(json.dumps(key))
            out.append(":")
            _encode(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _encode(item, out)
        out.append("]")
    elif isinstance(obj, bool) or obj is None:
        out.append(json.dumps(obj))
    elif isinstance(obj, Fraction):
        out.append(value_token(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError("non-finite float is not serializable")
        out.append(repr(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_json(obj) -> str:
    """Deterministic compact JSON with exact rational number tokens."""
    out: list[str] = []
    _encode(obj, out)
    return "".join(out)


def _parse(text: str):
    return json.loads(text, parse_float=Fraction)


def matrix_to_obj(Q: QuboMatrix) -> dict:
    entries = [[i, j, v] for i, j, v in Q.iter_upper() if v != 0]
    return {"n": Q.n, "entries": entries}


def matrix_from_obj(obj: dict) -> QuboMatrix:
    n = obj["n"]
    if not isinstance(n, int):
        raise ValueError("field 'n' must be an integer")
    entries = []
    for item in obj.get("entries", []):
        if len(item) != 3:
            raise ValueError("entries must be [i, j, value] triples")
        i, j, v = item
        if isinstance(v, str):
            v = Fraction(v)
        entries.append((i, j, v))
    return QuboMatrix.from_entries(n, entries)


def canonical_matrix_bytes(Q: QuboMatrix) -> bytes:
    return canonical_json(matrix_to_obj(Q)).encode()


def matrix_sha256(Q: QuboMatrix) -> str:
    return hashlib.sha256(canonical_matrix_bytes(Q)).hexdigest()


def instance_to_obj(inst: ProblemInstance) -> dict:
    obj = matrix_to_obj(inst.matrix)
    obj["family"] = inst.family
    obj["params"] = inst.params
    obj["seed"] = inst.seed
    return obj


def instance_from_obj(obj: dict) -> ProblemInstance:
    matrix = matrix_from_obj(obj)
    family = obj.get("family", "matrix")
    params = obj.get("params", {})
    seed = obj.get("seed", 0)
    return ProblemInstance(family, params, seed, matrix)


def write_instance(path, inst: ProblemInstance) -> None:
    Path(path).write_text(canonical_json(instance_to_obj(inst)) + "\n")


def read_instance(path) -> ProblemInstance:
    """Load an instance; accepts instance JSON or the plain-text matrix form."""
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return instance_from_obj(_parse(text))
    return ProblemInstance("matrix", {}, 0, matrix_from_text(text))


def matrix_to_text(Q: QuboMatrix) -> str:
    lines = [str(Q.n)]
    for i, j, v in Q.iter_upper():
        if v != 0:
            token = value_token(v).strip('"')
            lines.append(f"{i} {j} {token}")
    return "\n".join(lines) + "\n"


def matrix_from_text(text: str) -> QuboMatrix:
    lines = [ln for ln in (raw.strip() for raw in text.splitlines()) if ln]
    if not lines:
        raise ValueError("empty matrix text")
    n = int(lines[0])
    entries = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 3:
            raise ValueError(f"malformed entry line: {ln!r}")
        entries.append((int(parts[0]), int(parts[1]), Fraction(parts[2])))
    return QuboMatrix.from_entries(n, entries)


def trace_to_obj(
    initial: QuboMatrix, steps: Iterable, preserve: str = "inclusion"
) -> dict:
    obj = {
        "initial": {"n": initial.n, "sha256": matrix_sha256(initial)},
        "steps": [
            {"k": rec.action[0], "l": rec.action[1], "w": rec.w, "dr": rec.dr_after}
            for rec in steps
        ],
    }
    if preserve != "inclusion":
        obj["preserve"] = preserve
    return obj


def write_trace(
    path, initial: QuboMatrix, steps: Iterable, preserve: str = "inclusion"
) -> None:
    Path(path).write_text(canonical_json(trace_to_obj(initial, steps, preserve)) + "\n")


def read_trace(path) -> tuple[dict, list[tuple[int, int, Fraction, float]], str]:
    """Returns (initial reference, steps as (k, l, w, dr) tuples, preserve mode)."""
    obj = _parse(Path(path).read_text())
    steps = []
    for rec in obj.get("steps", []):
        w = rec["w"]
        if isinstance(w, str):
            w = Fraction(w)
        steps.append((rec["k"], rec["l"], Fraction(w), float(rec["dr"])))
    return obj.get("initial", {}), steps, obj.get("preserve", "inclusion")
