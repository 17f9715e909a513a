"""Symmetric-key quadratic functional encryption with projection.

The scheme encrypts two integer vectors x, y of dimension n and hands out
function keys for integer matrices F; decrypting with the key for F reveals
exactly the bilinear form x^T F y and nothing else about x, y.

Construction: the master key is a pair of uniform exponent vectors (s, t).
Each encryption draws a fresh invertible 2x2 matrix W and scalar gamma and
publishes, per coordinate,

    cx[i] = g1 ^ (W^-T (x_i, gamma*s_i))        (two G1 points)
    cy[i] = g2 ^ (W    (y_i, t_i))              (two G2 points)

plus the randomizer component g1^gamma.  The pairing of matching component
pairs telescopes W away:  <cx[i], cy[j]> pairs to gt^(x_i y_j + gamma s_i t_j),
so the product over F's support is gt^(x^T F y) * (gt^(s^T F t))^gamma, and
the function key g2^(-(s^T F t)) cancels the masking term.  A bounded
discrete log recovers the signed integer result.

Both projections are linear maps on this structure: combining ciphertext
coordinates (respectively key coordinates) with the columns of an n-by-d
integer matrix yields a valid dimension-d ciphertext (key) for the projected
plaintext, because W and gamma are shared across coordinates.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from gmpy2 import invert

from .errors import DimensionMismatch, KeyFunctionMismatch, MessageBoundError
from .pairing import (G1Point, G2Point, GroupContext, dlog_bounded, multi_exp_combine, multi_pair,
                      random_scalar)
from .pairing.curve import multi_scalar_mul
from .pairing.group import ORDER

# Ceiling on |x_i|, |y_i| accepted by encrypt when no explicit bound is
# configured; pipelines derive a tighter bound from their quantization
# scales.
DEFAULT_MESSAGE_BOUND = 1 << 32


@dataclass(frozen=True)
class MasterKey:
    """Secret masking vectors; never leaves the trusted side untransformed."""

    s: tuple[int, ...]
    t: tuple[int, ...]
    dim: int

    def __post_init__(self):
        if len(self.s) != self.dim or len(self.t) != self.dim:
            raise DimensionMismatch("master key vectors must match dim")


@dataclass(frozen=True)
class FMatrix:
    """Integer function matrix; the digest binds keys to exactly this F."""

    entries: tuple[tuple[int, ...], ...]
    dim: int

    @classmethod
    def from_rows(cls, rows) -> "FMatrix":
        entries = tuple(tuple(int(v) for v in row) for row in rows)
        dim = len(entries)
        if any(len(row) != dim for row in entries):
            raise DimensionMismatch("function matrix must be square")
        return cls(entries=entries, dim=dim)

    @classmethod
    def diagonal(cls, diag) -> "FMatrix":
        d = len(diag)
        return cls.from_rows([[int(diag[i]) if i == j else 0 for j in range(d)] for i in range(d)])

    @property
    def entry_bound(self) -> int:
        return max((abs(v) for row in self.entries for v in row), default=0)

    def digest(self) -> bytes:
        h = hashlib.sha256()
        h.update(b"fescore.fmatrix.v1\x00")
        h.update(str(self.dim).encode())
        for row in self.entries:
            for v in row:
                h.update(b",")
                h.update(str(v).encode())
        return h.digest()

    def evaluate(self, x, y) -> int:
        """Plaintext bilinear form; the oracle decrypt must agree with."""
        if len(x) != self.dim or len(y) != self.dim:
            raise DimensionMismatch("vector length does not match matrix dim")
        return sum(self.entries[i][j] * int(x[i]) * int(y[j])
                   for i in range(self.dim) for j in range(self.dim))


@dataclass(frozen=True)
class FeKey:
    """Function key: a single G2 element bound to one F by digest."""

    k: G2Point
    dim: int
    f_digest: bytes


@dataclass(frozen=True)
class Ciphertext:
    """Encryption of (x, y); cx/cy hold the per-coordinate component pairs."""

    gamma_g1: G1Point
    cx: tuple[tuple[G1Point, G1Point], ...]
    cy: tuple[tuple[G2Point, G2Point], ...]
    dim: int

    def __post_init__(self):
        if len(self.cx) != self.dim or len(self.cy) != self.dim:
            raise DimensionMismatch("ciphertext component count must match dim")


def generate_master_key(dim: int, ctx: GroupContext, rng) -> MasterKey:
    if dim < 1:
        raise DimensionMismatch("dimension must be a positive integer")
    s = tuple(random_scalar(rng) for _ in range(dim))
    t = tuple(random_scalar(rng) for _ in range(dim))
    return MasterKey(s=s, t=t, dim=dim)


def encrypt(x, y, msk: MasterKey, ctx: GroupContext, rng,
            message_bound: int = DEFAULT_MESSAGE_BOUND) -> Ciphertext:
    x = [int(v) for v in x]
    y = [int(v) for v in y]
    if len(x) != msk.dim or len(y) != msk.dim:
        raise DimensionMismatch(f"expected vectors of length {msk.dim}, got {len(x)}/{len(y)}")
    over = [v for v in x + y if abs(v) > message_bound]
    if over:
        raise MessageBoundError(f"plaintext entry {over[0]} exceeds message bound {message_bound}")

    gamma = random_scalar(rng)
    while True:
        a, b, c, d = (random_scalar(rng) for _ in range(4))
        det = (a * d - b * c) % ORDER
        if det:
            break
    det_inv = int(invert(det, ORDER))
    # rows of W^-T are the columns of W^-1:  W^-1 = det^-1 * [[d, -b], [-c, a]]
    w_inv_t = ((d * det_inv % ORDER, -c * det_inv % ORDER),
               (-b * det_inv % ORDER, a * det_inv % ORDER))

    cx = []
    cy = []
    for i in range(msk.dim):
        u = (x[i], gamma * msk.s[i] % ORDER)
        cx.append((ctx.g1_exp(w_inv_t[0][0] * u[0] + w_inv_t[0][1] * u[1]),
                   ctx.g1_exp(w_inv_t[1][0] * u[0] + w_inv_t[1][1] * u[1])))
        v = (y[i], msk.t[i])
        cy.append((ctx.g2_exp(a * v[0] + b * v[1]),
                   ctx.g2_exp(c * v[0] + d * v[1])))
    return Ciphertext(gamma_g1=ctx.g1_exp(gamma), cx=tuple(cx), cy=tuple(cy), dim=msk.dim)


def derive_key(msk: MasterKey, f: FMatrix, ctx: GroupContext) -> FeKey:
    if f.dim != msk.dim:
        raise DimensionMismatch(f"function matrix dim {f.dim} != master key dim {msk.dim}")
    acc = 0
    for i in range(msk.dim):
        si = msk.s[i]
        row = f.entries[i]
        for j in range(msk.dim):
            if row[j]:
                acc += row[j] * si * msk.t[j]
    return FeKey(k=ctx.g2_exp(-acc % ORDER), dim=msk.dim, f_digest=f.digest())


def decrypt_pairing(c: Ciphertext, fekey: FeKey, f: FMatrix):
    """Pair the ciphertext down to gt^(x^T F y); the dlog step is separate."""
    if f.dim != c.dim or fekey.dim != c.dim:
        raise DimensionMismatch("ciphertext, key and matrix dimensions disagree")
    if f.digest() != fekey.f_digest:
        raise KeyFunctionMismatch("function matrix does not match the digest in the key")
    # Fold the G1 side per column j:  prod_i cx[i]^F[i][j] pairs against cy[j].
    pairs = [(c.gamma_g1, fekey.k)]
    for j in range(c.dim):
        col = [f.entries[i][j] for i in range(c.dim)]
        if not any(col):
            continue
        left0 = multi_scalar_mul(G1Point._ops, [c.cx[i][0].pt for i in range(c.dim)], col)
        left1 = multi_scalar_mul(G1Point._ops, [c.cx[i][1].pt for i in range(c.dim)], col)
        pairs.append((G1Point(left0), c.cy[j][0]))
        pairs.append((G1Point(left1), c.cy[j][1]))
    return multi_pair(pairs)


def decrypt(c: Ciphertext, fekey: FeKey, f: FMatrix, bound: int, ctx: GroupContext) -> int:
    """Recover x^T F y exactly, provided its magnitude is within bound."""
    return dlog_bounded(decrypt_pairing(c, fekey, f), ctx.gt, bound)


def project_encryption(c: Ciphertext, pr, out_dim: int | None = None) -> Ciphertext:
    """Ciphertext for the projected plaintext (Pr^T x, Pr^T y), dimension d.

    pr is an n-by-d integer matrix, n == c.dim.  Works coordinate-wise with
    multi-exponentiations over the ciphertext components; the randomizer
    component carries over unchanged.
    """
    n = len(pr)
    if n != c.dim:
        raise DimensionMismatch(f"projection expects {c.dim} rows, got {n}")
    d = out_dim if out_dim is not None else len(pr[0])
    if any(len(row) != d for row in pr):
        raise DimensionMismatch("projection matrix rows must have equal length")
    if d < 1 or d > n:
        raise DimensionMismatch(f"projected dimension must be in [1, {n}]")
    cx = []
    cy = []
    for k in range(d):
        col = [int(pr[i][k]) for i in range(n)]
        cx.append((multi_exp_combine([c.cx[i][0] for i in range(n)], col),
                   multi_exp_combine([c.cx[i][1] for i in range(n)], col)))
        cy.append((multi_exp_combine([c.cy[i][0] for i in range(n)], col),
                   multi_exp_combine([c.cy[i][1] for i in range(n)], col)))
    return Ciphertext(gamma_g1=c.gamma_g1, cx=tuple(cx), cy=tuple(cy), dim=d)


def project_secret_key(msk: MasterKey, pr) -> MasterKey:
    """Master key matching project_encryption: s' = Pr^T s, t' = Pr^T t."""
    n = len(pr)
    if n != msk.dim:
        raise DimensionMismatch(f"projection expects {msk.dim} rows, got {n}")
    d = len(pr[0])
    if any(len(row) != d for row in pr):
        raise DimensionMismatch("projection matrix rows must have equal length")
    if d < 1 or d > n:
        raise DimensionMismatch(f"projected dimension must be in [1, {n}]")
    s = tuple(sum(int(pr[i][k]) * msk.s[i] for i in range(n)) % ORDER for k in range(d))
    t = tuple(sum(int(pr[i][k]) * msk.t[i] for i in range(n)) % ORDER for k in range(d))
    return MasterKey(s=s, t=t, dim=d)
