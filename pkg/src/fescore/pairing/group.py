"""Curve-agnostic bilinear-group interface.

Everything above this module sees two source groups, a target group, a
pairing map and an exponent ring of prime order; the BLS12-381 machinery
stays behind these wrappers.  Group operations use multiplicative
notation: ``a * b`` combines, ``a ** k`` exponentiates.

Scalars are plain Python ints reduced modulo the group order; negative
integers act as ``order - |k|``.
"""

from __future__ import annotations

import random

from gmpy2 import mpz

from ..errors import DimensionMismatch
from . import curve, pairing as _pairing
from .fields import F12_ONE, P, f12_eq, f12_from_coeffs, f12_coeffs, f12_inv, f12_mul, f12_pow

ORDER = int(curve.R)


def random_scalar(rng) -> int:
    """Uniform exponent in [0, ORDER); rng supplies randrange."""
    return rng.randrange(ORDER)


def new_rng(seed=None):
    """Injectable randomness source: OS entropy unless a seed is given."""
    return random.SystemRandom() if seed is None else random.Random(seed)


def scalar_to_bytes(v: int) -> bytes:
    return (int(v) % ORDER).to_bytes(32, "big")


def scalar_from_bytes(buf: bytes) -> int:
    if len(buf) != 32:
        raise ValueError("scalar must be 32 bytes")
    v = int.from_bytes(buf, "big")
    if v >= ORDER:
        raise ValueError("scalar out of range")
    return v


class _SourcePoint:
    """Shared behaviour of G1Point / G2Point (affine tuple or None inside)."""

    __slots__ = ("pt",)
    _ops = None
    _table = None  # FixedBaseTable for the generator, set lazily by setup()

    def __init__(self, pt):
        self.pt = pt

    def __mul__(self, other):
        if not isinstance(other, type(self)):
            return NotImplemented
        ops = self._ops
        return type(self)(ops.to_affine(ops.add(ops.to_jac(self.pt), ops.to_jac(other.pt))))

    def __pow__(self, k):
        return type(self)(curve.scalar_mul(self._ops, self.pt, int(k)))

    def inverse(self):
        return type(self)(self._ops.neg(self.pt))

    def is_identity(self) -> bool:
        return self.pt is None

    def __eq__(self, other):
        return isinstance(other, type(self)) and self.to_bytes() == other.to_bytes()

    def __hash__(self):
        return hash(self.to_bytes())

    def __repr__(self):
        return f"{type(self).__name__}({self.to_bytes().hex()[:16]}…)"


class G1Point(_SourcePoint):
    _ops = curve.G1_OPS

    def to_bytes(self) -> bytes:
        return curve.g1_to_bytes(self.pt)

    @classmethod
    def from_bytes(cls, buf: bytes) -> "G1Point":
        return cls(curve.g1_from_bytes(buf))

    @classmethod
    def identity(cls) -> "G1Point":
        return cls(None)

    ENCODED_LEN = 48


class G2Point(_SourcePoint):
    _ops = curve.G2_OPS

    def to_bytes(self) -> bytes:
        return curve.g2_to_bytes(self.pt)

    @classmethod
    def from_bytes(cls, buf: bytes) -> "G2Point":
        return cls(curve.g2_from_bytes(buf))

    @classmethod
    def identity(cls) -> "G2Point":
        return cls(None)

    ENCODED_LEN = 96


class GtPoint:
    """Target-group element (an Fq12 value of order dividing ORDER)."""

    __slots__ = ("raw",)
    ENCODED_LEN = 576

    def __init__(self, raw):
        self.raw = raw

    def __mul__(self, other):
        if not isinstance(other, GtPoint):
            return NotImplemented
        return GtPoint(f12_mul(self.raw, other.raw))

    def __pow__(self, k):
        return GtPoint(f12_pow(self.raw, int(k)))

    def inverse(self):
        return GtPoint(f12_inv(self.raw))

    def is_identity(self) -> bool:
        return f12_eq(self.raw, F12_ONE)

    def __eq__(self, other):
        return isinstance(other, GtPoint) and f12_eq(self.raw, other.raw)

    def __hash__(self):
        return hash(self.to_bytes())

    def to_bytes(self) -> bytes:
        return b"".join(int(c).to_bytes(48, "big") for c in f12_coeffs(self.raw))

    @classmethod
    def from_bytes(cls, buf: bytes) -> "GtPoint":
        if len(buf) != cls.ENCODED_LEN:
            raise ValueError("gt element must be 576 bytes")
        cs = []
        for i in range(12):
            c = int.from_bytes(buf[48 * i:48 * (i + 1)], "big")
            if c >= P:
                raise ValueError("gt coefficient out of range")
            cs.append(c)
        return cls(f12_from_coeffs(cs))

    @classmethod
    def identity(cls) -> "GtPoint":
        return cls(F12_ONE)

    def __repr__(self):
        return f"GtPoint({self.to_bytes().hex()[:16]}…)"


class GroupContext:
    """The pairing substrate: generators, group order and fast-exp tables.

    Construction is deterministic — the curve, generators and table layout
    are fixed constants, so independently created contexts serialize
    identically.
    """

    def __init__(self):
        self.order = ORDER
        self.g1 = G1Point(curve.G1_GEN)
        self.g2 = G2Point(curve.G2_GEN)
        self._g1_table = curve.FixedBaseTable(curve.G1_OPS, curve.G1_GEN)
        self._g2_table = curve.FixedBaseTable(curve.G2_OPS, curve.G2_GEN)
        self.gt = pair(self.g1, self.g2)

    def g1_exp(self, k: int) -> G1Point:
        """Fixed-base g1**k via the precomputed window table."""
        return G1Point(self._g1_table.mul(int(k) % ORDER))

    def g2_exp(self, k: int) -> G2Point:
        return G2Point(self._g2_table.mul(int(k) % ORDER))

    def gt_exp(self, k: int) -> GtPoint:
        return self.gt ** k


_CONTEXT = None


def setup() -> GroupContext:
    """Return the fixed BLS12-381 context (memoized; construction is pure)."""
    global _CONTEXT
    if _CONTEXT is None:
        _CONTEXT = GroupContext()
    return _CONTEXT


def pair(a: G1Point, b: G2Point) -> GtPoint:
    return GtPoint(_pairing.pairing(a.pt, b.pt))


def multi_pair(pairs) -> GtPoint:
    """Product of pairings e(a_i, b_i) with a single final exponentiation."""
    return GtPoint(_pairing.multi_pairing([(a.pt, b.pt) for a, b in pairs]))


def multi_exp_combine(points, coeffs):
    """Π points[i]**coeffs[i] for a homogeneous list of group points."""
    if len(points) != len(coeffs):
        raise DimensionMismatch(f"{len(points)} points vs {len(coeffs)} coefficients")
    if not points:
        raise DimensionMismatch("empty multi-exponentiation")
    kind = type(points[0])
    if any(type(p) is not kind for p in points):
        raise DimensionMismatch("mixed group points in multi-exponentiation")
    if kind in (G1Point, G2Point):
        raw = curve.multi_scalar_mul(kind._ops, [p.pt for p in points], coeffs)
        return kind(raw)
    if kind is GtPoint:
        acc = F12_ONE
        for p, c in zip(points, coeffs):
            c = int(c) % ORDER
            if c:
                acc = f12_mul(acc, f12_pow(p.raw, c))
        return GtPoint(acc)
    raise DimensionMismatch(f"unsupported point type {kind.__name__}")
