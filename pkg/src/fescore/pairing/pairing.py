"""Optimal ate pairing on BLS12-381.

The Miller loop runs over the sextic twist with affine point arithmetic
(gmpy2 inversions are cheap relative to Python-level multiplication
dispatch) and accumulates line values as sparse Fq12 elements.  A line
through twist points, evaluated at a G1 point (xp, yp) and scaled by the
subfield constant xi, is

    L = xi*yp  +  (lambda*xq - yq) * w^3  -  (lambda*xp) * w^5

where lambda is the slope on the twist.  Subfield scaling is erased by the
final exponentiation.  The final exponentiation itself computes
f^(3*(p^12-1)/r) via the standard (x-1)^2*(x+p)*(x^2+p^2-1)+3 decomposition
of three times the hard part; the cube of an optimal ate pairing is again a
non-degenerate bilinear pairing, and every consumer in this package works
relative to the same map.
"""

from gmpy2 import invert, mpz

from .fields import (BLS_X, F12_ONE, P, cyc_sqr, f2_add, f2_mul, f2_mul_scalar, f2_mul_xi, f2_neg,
                     f2_reduce, f2_sqr, f2_sub, f12_conj, f12_frob, f12_frob2, f12_inv, f12_mul,
                     f12_sqr, f2_inv)

_X_ABS = -BLS_X
_X_BITS = bin(_X_ABS)[3:]          # loop bits below the leading one
_X_PLUS_1_BITS = bin(_X_ABS + 1)[3:]


def _sparse_mul(f, l0, l3, l5):
    """Multiply f by (l0 + l3*w^3 + l5*w^5), all l* in Fq2."""
    a0, a1 = f
    # A = (l0, 0, 0), B = (0, l3, l5); result = (a0*A + v*(a1*B), a0*B + a1*A)
    t00 = f2_mul(a0[0], l0)
    t01 = f2_mul(a0[1], l0)
    t02 = f2_mul(a0[2], l0)
    # a1 * B with B = l3*v + l5*v^2 (Fq6 coefficients)
    b10, b11, b12 = a1
    u0 = f2_mul(b10, l3)
    u1 = f2_mul(b11, l3)
    u2 = f2_mul(b12, l3)
    v0 = f2_mul(b10, l5)
    v1 = f2_mul(b11, l5)
    v2 = f2_mul(b12, l5)
    # a1*B = (xi*(u2 + v1), u0 + xi*v2, u1 + v0)
    ab0 = f2_mul_xi(f2_add(u2, v1))
    ab1 = f2_add(u0, f2_mul_xi(v2))
    ab2 = f2_add(u1, v0)
    # v * (a1*B) rotates: (xi*ab2, ab0, ab1)
    c00 = f2_add(t00, f2_mul_xi(ab2))
    c01 = f2_add(t01, ab0)
    c02 = f2_add(t02, ab1)
    # a0 * B
    b00, b01, b02 = a0
    u0 = f2_mul(b00, l3)
    u1 = f2_mul(b01, l3)
    u2 = f2_mul(b02, l3)
    v0 = f2_mul(b00, l5)
    v1 = f2_mul(b01, l5)
    v2 = f2_mul(b02, l5)
    c10 = f2_add(f2_mul_xi(f2_add(u2, v1)), f2_mul(a1[0], l0))
    c11 = f2_add(f2_add(u0, f2_mul_xi(v2)), f2_mul(a1[1], l0))
    c12 = f2_add(f2_add(u1, v0), f2_mul(a1[2], l0))
    return (
        (f2_reduce(c00), f2_reduce(c01), f2_reduce(c02)),
        (f2_reduce(c10), f2_reduce(c11), f2_reduce(c12)),
    )


def _dbl_step(t, xp_neg, yp_xi):
    """Double twist point t=(x,y) affine; return (2t, line coefficients)."""
    x, y = t
    lam = f2_mul(f2_mul_scalar(f2_sqr(x), 3), f2_inv(f2_add(y, y)))
    x3 = f2_sub(f2_sqr(lam), f2_add(x, x))
    y3 = f2_sub(f2_mul(lam, f2_sub(x, x3)), y)
    l3 = f2_sub(f2_mul(lam, x), y)
    l5 = f2_mul(lam, xp_neg)
    return (f2_reduce(x3), f2_reduce(y3)), (yp_xi, l3, l5)


def _add_step(t, q, xp_neg, yp_xi):
    """Add twist points t + q (affine, distinct); return (t+q, line coefficients)."""
    x1, y1 = t
    x2, y2 = q
    lam = f2_mul(f2_sub(y1, y2), f2_inv(f2_sub(x1, x2)))
    x3 = f2_sub(f2_sub(f2_sqr(lam), x1), x2)
    y3 = f2_sub(f2_mul(lam, f2_sub(x1, x3)), y1)
    l3 = f2_sub(f2_mul(lam, x2), y2)
    l5 = f2_mul(lam, xp_neg)
    return (f2_reduce(x3), f2_reduce(y3)), (yp_xi, l3, l5)


def miller_loop(pairs):
    """Shared-squaring Miller loop over [(g1_affine, g2_affine), ...].

    Pairs with either point at infinity contribute the identity.  Returns
    the unreduced Miller value (final exponentiation still required).
    """
    live = []
    for pt, qt in pairs:
        if pt is None or qt is None:
            continue
        xp, yp = pt
        xp_neg = (-xp % P, mpz(0))
        yp_xi = f2_mul_xi((yp, mpz(0)))
        live.append([qt, qt, xp_neg, yp_xi])  # [current T, base Q, precomp...]
    f = F12_ONE
    if not live:
        return f
    for bit in _X_BITS:
        f = f12_sqr(f)
        for st in live:
            st[0], coeffs = _dbl_step(st[0], st[2], st[3])
            f = _sparse_mul(f, *coeffs)
        if bit == "1":
            for st in live:
                st[0], coeffs = _add_step(st[0], st[1], st[2], st[3])
                f = _sparse_mul(f, *coeffs)
    return f12_conj(f)  # curve parameter is negative


def _cyc_pow_bits(a, bits):
    out = a
    for bit in bits:
        out = cyc_sqr(out)
        if bit == "1":
            out = f12_mul(out, a)
    return out


def final_exponentiation(f):
    # easy part: f^((p^6-1)(p^2+1))
    t = f12_mul(f12_conj(f), f12_inv(f))
    t = f12_mul(f12_frob2(t), t)
    # hard part (times 3): f^((x-1)^2 (x+p) (x^2+p^2-1) + 3) with x < 0.
    f1 = f12_conj(_cyc_pow_bits(t, _X_PLUS_1_BITS))        # t^(x-1)
    f2 = f12_conj(_cyc_pow_bits(f1, _X_PLUS_1_BITS))       # t^((x-1)^2)
    f3 = f12_mul(f12_conj(_cyc_pow_bits(f2, _X_BITS)), f12_frob(f2))   # f2^(x+p)
    f3x = _cyc_pow_bits(_cyc_pow_bits(f3, _X_BITS), _X_BITS)           # f3^(x^2)
    f4 = f12_mul(f12_mul(f3x, f12_frob2(f3)), f12_conj(f3))            # f3^(x^2+p^2-1)
    return f12_mul(f4, f12_mul(f12_sqr(t), t))


def pairing(p_affine, q_affine):
    """Full pairing e(P, Q) for P in G1, Q in G2 (affine or None)."""
    return final_exponentiation(miller_loop([(p_affine, q_affine)]))


def multi_pairing(pairs):
    """Product of pairings with one shared final exponentiation."""
    return final_exponentiation(miller_loop(pairs))
