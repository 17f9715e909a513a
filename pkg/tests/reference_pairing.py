"""Slow, obviously-correct pairing used as an independent oracle in tests.

Untwists G2 points into the full degree-12 extension, runs the textbook
Miller loop with affine slopes and generic field inversions, and finishes
with a single generic exponentiation by 3*(p^12-1)/r.  No sparse tricks, no
Frobenius shortcuts, no cyclotomic arithmetic — nothing shared with the
production Miller loop beyond the base field-tower operations.
"""

from gmpy2 import mpz

from fescore.pairing.fields import (BLS_X, F2_ONE, F2_ZERO, F6_ZERO, F12_ONE, P, f12_add, f12_conj,
                                    f12_eq, f12_inv, f12_mul, f12_pow, f12_sqr)
from fescore.pairing.curve import R

_EXP = 3 * (int(P) ** 12 - 1) // int(R)
_X_BITS = bin(-BLS_X)[3:]

W = (F6_ZERO, (F2_ONE, F2_ZERO, F2_ZERO))          # the degree-12 generator w
W2 = f12_mul(W, W)
W3 = f12_mul(W2, W)
W2_INV = f12_inv(W2)
W3_INV = f12_inv(W3)


def embed_fq(a):
    return (((mpz(a), mpz(0)), F2_ZERO, F2_ZERO), F6_ZERO)


def embed_fq2(a):
    return (((mpz(a[0]), mpz(a[1])), F2_ZERO, F2_ZERO), F6_ZERO)


def untwist(q_affine):
    """Map a twist point (Fq2 coords) onto the curve over the full extension."""
    x, y = q_affine
    return (f12_mul(embed_fq2(x), W2_INV), f12_mul(embed_fq2(y), W3_INV))


def _sub(a, b):
    return f12_add(a, f12_mul(embed_fq(P - 1), b))


def _line(t, q, p):
    """Value at p of the line through t and q (t == q means the tangent)."""
    xt, yt = t
    xq, yq = q
    xp, yp = p
    if f12_eq(xt, xq) and f12_eq(yt, yq):
        num = f12_mul(embed_fq(3), f12_mul(xt, xt))
        den = f12_add(yt, yt)
    else:
        num = _sub(yq, yt)
        den = _sub(xq, xt)
    lam = f12_mul(num, f12_inv(den))
    return _sub(_sub(yp, yt), f12_mul(lam, _sub(xp, xt)))


def _add_points(t, q):
    xt, yt = t
    xq, yq = q
    if f12_eq(xt, xq) and f12_eq(yt, yq):
        lam = f12_mul(f12_mul(embed_fq(3), f12_mul(xt, xt)), f12_inv(f12_add(yt, yt)))
    else:
        lam = f12_mul(_sub(yq, yt), f12_inv(_sub(xq, xt)))
    x3 = _sub(_sub(f12_mul(lam, lam), xt), xq)
    y3 = _sub(f12_mul(lam, _sub(xt, x3)), yt)
    return (x3, y3)


def reference_pairing(p_affine, q_affine):
    """e(P, Q) for non-identity affine points, matching fescore's pairing."""
    p12 = (embed_fq(p_affine[0]), embed_fq(p_affine[1]))
    q12 = untwist(q_affine)
    f = F12_ONE
    t = q12
    for bit in _X_BITS:
        f = f12_mul(f12_sqr(f), _line(t, t, p12))
        t = _add_points(t, t)
        if bit == "1":
            f = f12_mul(f, _line(t, q12, p12))
            t = _add_points(t, q12)
    return f12_pow(f12_conj(f), _EXP)
