"""Versioned binary file formats for scheme artifacts.

Common layout: 4 magic bytes ``FEQ1``, one format-version byte, one type
byte, then the type-specific body.  Multi-byte integers are big-endian.

===========  ====  ==========================================================
type byte    ext   body
===========  ====  ==========================================================
``M``        msk   dim:u32, dim x 32B scalar s[i], dim x 32B scalar t[i]
``K``        fek   dim:u32, 32B function digest, 96B G2 point
``C``        ct    dim:u32, 48B randomizer G1, dim x (48B, 48B) x-side pairs,
                   dim x (96B, 96B) y-side pairs
===========  ====  ==========================================================

``envelope_json`` / ``envelope_parse`` provide the JSON-wrapped base64
variant used on the wire.
"""

from __future__ import annotations

import base64
import hashlib
import json

from .errors import FescoreError
from .pairing import G1Point, G2Point, scalar_from_bytes, scalar_to_bytes
from .sgp import Ciphertext, FeKey, MasterKey

MAGIC = b"FEQ1"
VERSION = 1

_TYPE_MSK = ord("M")
_TYPE_FEK = ord("K")
_TYPE_CT = ord("C")


class FormatError(FescoreError, ValueError):
    """Bytes do not parse as the expected artifact format."""


def _header(type_byte: int, dim: int) -> bytes:
    return MAGIC + bytes([VERSION, type_byte]) + dim.to_bytes(4, "big")


def _check_header(buf: bytes, type_byte: int) -> tuple[int, int]:
    """Validate magic/version/type; return (dim, body offset)."""
    if len(buf) < 10 or buf[:4] != MAGIC:
        raise FormatError("bad magic bytes")
    if buf[4] != VERSION:
        raise FormatError(f"unsupported format version {buf[4]}")
    if buf[5] != type_byte:
        raise FormatError(f"expected type {chr(type_byte)!r}, found {chr(buf[5])!r}")
    return int.from_bytes(buf[6:10], "big"), 10


def master_key_to_bytes(msk: MasterKey) -> bytes:
    out = [_header(_TYPE_MSK, msk.dim)]
    out.extend(scalar_to_bytes(v) for v in msk.s)
    out.extend(scalar_to_bytes(v) for v in msk.t)
    return b"".join(out)


def master_key_from_bytes(buf: bytes) -> MasterKey:
    dim, off = _check_header(buf, _TYPE_MSK)
    need = off + 64 * dim
    if len(buf) != need:
        raise FormatError(f"master key body must be {need} bytes, got {len(buf)}")
    s = tuple(scalar_from_bytes(buf[off + 32 * i:off + 32 * (i + 1)]) for i in range(dim))
    off += 32 * dim
    t = tuple(scalar_from_bytes(buf[off + 32 * i:off + 32 * (i + 1)]) for i in range(dim))
    return MasterKey(s=s, t=t, dim=dim)


def fe_key_to_bytes(fek: FeKey) -> bytes:
    return _header(_TYPE_FEK, fek.dim) + fek.f_digest + fek.k.to_bytes()


def fe_key_from_bytes(buf: bytes) -> FeKey:
    dim, off = _check_header(buf, _TYPE_FEK)
    if len(buf) != off + 32 + 96:
        raise FormatError("fe key body has wrong length")
    digest = buf[off:off + 32]
    k = G2Point.from_bytes(buf[off + 32:])
    return FeKey(k=k, dim=dim, f_digest=digest)


def ciphertext_to_bytes(c: Ciphertext) -> bytes:
    out = [_header(_TYPE_CT, c.dim), c.gamma_g1.to_bytes()]
    for a, b in c.cx:
        out.append(a.to_bytes())
        out.append(b.to_bytes())
    for a, b in c.cy:
        out.append(a.to_bytes())
        out.append(b.to_bytes())
    return b"".join(out)


def ciphertext_from_bytes(buf: bytes) -> Ciphertext:
    dim, off = _check_header(buf, _TYPE_CT)
    need = off + 48 + dim * 96 + dim * 192
    if len(buf) != need:
        raise FormatError(f"ciphertext body must be {need} bytes, got {len(buf)}")
    gamma = G1Point.from_bytes(buf[off:off + 48])
    off += 48
    cx = []
    for _ in range(dim):
        cx.append((G1Point.from_bytes(buf[off:off + 48]), G1Point.from_bytes(buf[off + 48:off + 96])))
        off += 96
    cy = []
    for _ in range(dim):
        cy.append((G2Point.from_bytes(buf[off:off + 96]), G2Point.from_bytes(buf[off + 96:off + 192])))
        off += 192
    return Ciphertext(gamma_g1=gamma, cx=tuple(cx), cy=tuple(cy), dim=dim)


# -- JSON/base64 envelope ----------------------------------------------------

def payload_digest(payload: bytes) -> str:
    return hashlib.sha256(payload).hexdigest()


def envelope_json(msg_type: str, payload: bytes, cid: str, version: int = VERSION) -> str:
    """One newline-free JSON envelope carrying a binary payload."""
    return json.dumps(
        {
            "v": version,
            "type": msg_type,
            "cid": cid,
            "payload": base64.b64encode(payload).decode("ascii"),
            "digest": payload_digest(payload),
        },
        sort_keys=True,
        separators=(",", ":"),
    )


def envelope_parse(line: str) -> tuple[str, bytes, str]:
    """Return (msg_type, payload, cid); raises FormatError on any mismatch."""
    try:
        doc = json.loads(line)
    except json.JSONDecodeError as exc:
        raise FormatError(f"envelope is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise FormatError("envelope must be a JSON object")
    if doc.get("v") != VERSION:
        raise FormatError(f"unsupported envelope version {doc.get('v')!r}")
    for field in ("type", "cid", "payload", "digest"):
        if field not in doc:
            raise FormatError(f"envelope missing field {field!r}")
    try:
        payload = base64.b64decode(doc["payload"], validate=True)
    except Exception as exc:
        raise FormatError("payload is not valid base64") from exc
    if payload_digest(payload) != doc["digest"]:
        raise FormatError("payload digest mismatch")
    return doc["type"], payload, doc["cid"]
