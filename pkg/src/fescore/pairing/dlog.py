"""Bounded discrete logarithm in the target group via baby-step giant-step.

A table of ceil(sqrt(2*bound+1)) baby steps is built once per (base, bound)
and cached; giant steps then walk outward from zero so small-magnitude
exponents (the common case for quantized scores) resolve quickly.  Table
entries are 64-bit fingerprints of the group element; every fingerprint hit
is verified by re-exponentiation before being returned, so collisions can
cost time but never produce a wrong answer.
"""

from __future__ import annotations

import math
import threading

from ..errors import DlogOutOfRangeError
from .fields import F12_ONE, f12_eq, f12_inv, f12_mul, f12_pow
from .group import GtPoint

_FP_MASK = (1 << 64) - 1


def _fingerprint(raw) -> int:
    return int(raw[0][0][0]) & _FP_MASK


class BsgsTable:
    """Reusable baby-step table for one (base, bound) pair."""

    def __init__(self, base: GtPoint, bound: int):
        if bound < 0:
            raise ValueError("dlog bound must be non-negative")
        self.bound = int(bound)
        self.base = base
        self.m = math.isqrt(2 * self.bound) + 1 if bound else 1
        while self.m * self.m < 2 * self.bound + 1:
            self.m += 1
        table: dict[int, int] = {}
        spill: dict[int, list[int]] = {}
        raw = base.raw
        acc = F12_ONE
        for j in range(self.m):
            fp = _fingerprint(acc)
            if fp in table:
                spill.setdefault(fp, []).append(j)
            else:
                table[fp] = j
            acc = f12_mul(acc, raw)
        self._table = table
        self._spill = spill
        # acc is now base^m
        self._giant_fwd = f12_inv(acc)   # base^(-m)
        self._giant_bwd = acc            # base^(+m)

    def _verify(self, v: int, target_raw) -> bool:
        cand = f12_pow(self.base.raw, abs(v))
        if v < 0:
            cand = f12_inv(cand)
        return f12_eq(cand, target_raw)

    def _candidates(self, fp: int):
        j = self._table.get(fp)
        if j is not None:
            yield j
        for j in self._spill.get(fp, ()):
            yield j

    def solve(self, target: GtPoint):
        """Return v with base**v == target and |v| <= bound, else None."""
        t = target.raw
        max_i = self.bound // self.m + 1
        pos = t
        neg = None
        for i in range(0, max_i + 1):
            for j in self._candidates(_fingerprint(pos)):
                v = i * self.m + j
                if v <= self.bound and self._verify(v, t):
                    return v
            neg = f12_mul(t if neg is None else neg, self._giant_bwd)
            for j in self._candidates(_fingerprint(neg)):
                v = -(i + 1) * self.m + j
                if abs(v) <= self.bound and self._verify(v, t):
                    return v
            pos = f12_mul(pos, self._giant_fwd)
        return None


_cache_lock = threading.Lock()
_table_cache: dict[tuple[bytes, int], BsgsTable] = {}


def get_table(base: GtPoint, bound: int) -> BsgsTable:
    key = (base.to_bytes(), int(bound))
    with _cache_lock:
        hit = _table_cache.get(key)
    if hit is not None:
        return hit
    table = BsgsTable(base, bound)
    with _cache_lock:
        return _table_cache.setdefault(key, table)


def clear_table_cache():
    with _cache_lock:
        _table_cache.clear()


def dlog_bounded(target: GtPoint, base: GtPoint, bound: int) -> int:
    """The unique v with |v| <= bound and base**v == target.

    Raises DlogOutOfRangeError when no such v exists within the window —
    the signal that quantization scales overflowed the configured budget.
    """
    table = get_table(base, bound)
    v = table.solve(target)
    if v is None:
        raise DlogOutOfRangeError(f"no exponent within ±{bound} matches the target element")
    return v
