"""JSON file formats.

Kraus file::

    {"version": "1", "n": 3, "operators": [[[[re, im], ...], ...], ...]}

Density file::

    {"version": "1", "n": 3, "density": [[[re, im], ...], ...]}

Complex numbers are always ``[re, im]`` pairs. Canonical form is
``json.dumps(obj, sort_keys=True, separators=(",", ":"))``; digests are the
SHA-256 of the canonical UTF-8 bytes.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .channel import KrausSet

FORMAT_VERSION = "1"
SUPPORTED_VERSIONS = {"1"}


class FormatError(ValueError):
    """A JSON document does not match the expected file format."""


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_matrix(data, n: int, what: str) -> np.ndarray:
    try:
        arr = np.array(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{what}: entries must be [re, im] number pairs") from exc
    if arr.shape != (n, n, 2):
        raise FormatError(f"{what}: expected shape ({n}, {n}, 2), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise FormatError(f"{what}: non-finite entry")
    return arr[..., 0] + 1j * arr[..., 1]


def kraus_to_doc(ks: KrausSet) -> dict:
    return {
        "version": FORMAT_VERSION,
        "n": ks.n,
        "operators": [encode_matrix(v) for v in ks.operators],
    }


def density_to_doc(density, n: int) -> dict:
    return {"version": FORMAT_VERSION, "n": n, "density": encode_matrix(density)}


def _check_header(doc) -> int:
    if not isinstance(doc, dict):
        raise FormatError("top-level JSON value must be an object")
    if doc.get("version") not in SUPPORTED_VERSIONS:
        raise FormatError(f"unsupported version {doc.get('version')!r}")
    n = doc.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise FormatError("'n' must be a positive integer")
    return n


def doc_kind(doc) -> str:
    """``"kraus"`` or ``"density"`` depending on which payload is present."""
    _check_header(doc)
    if "operators" in doc and "density" not in doc:
        return "kraus"
    if "density" in doc and "operators" not in doc:
        return "density"
    raise FormatError("document must contain exactly one of 'operators' or 'density'")


def kraus_from_doc(doc) -> KrausSet:
    n = _check_header(doc)
    ops = doc.get("operators")
    if not isinstance(ops, list) or not ops:
        raise FormatError("'operators' must be a non-empty list")
    mats = [decode_matrix(op, n, f"operator {i}") for i, op in enumerate(ops)]
    try:
        return KrausSet(np.array(mats))
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def density_from_doc(doc) -> tuple[np.ndarray, int]:
    n = _check_header(doc)
    return decode_matrix(doc.get("density"), n * n, "density"), n


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True, allow_nan=False)


def digest(obj) -> str:
    return "sha256:" + hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


def parse_document(text: str) -> dict:
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    doc_kind(doc)
    return doc


def _reject_constant(name):
    raise FormatError(f"non-finite number {name} in JSON")
