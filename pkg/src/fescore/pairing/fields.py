"""Extension-field tower for the BLS12-381 pairing.

Layout: Fq2 = Fq[u]/(u^2+1), Fq6 = Fq2[v]/(v^3 - xi) with xi = 1+u,
Fq12 = Fq6[w]/(w^2 - v).  Elements are nested tuples of gmpy2 mpz values
and all arithmetic lives in module-level functions; this keeps the hot
paths (Miller loop, target-group multiplications) free of attribute and
method dispatch overhead.

Reduction discipline: outputs of mul/sqr/inv/conj/neg are canonical
(components in [0, P)); add/sub results may be unreduced and are only
ever fed back into multiplications, never compared or serialized.
"""

from gmpy2 import invert, mpz

# Base field modulus of BLS12-381 and the curve parameter x (negative).
P = mpz(0x1A0111EA397FE69A4B1BA7B6434BACD764774B84F38512BF6730D2A0F6B0F6241EABFFFEB153FFFFB9FEFFFFFFFFAAAB)
BLS_X = -0xD201000000010000

F2_ZERO = (mpz(0), mpz(0))
F2_ONE = (mpz(1), mpz(0))
F6_ZERO = (F2_ZERO, F2_ZERO, F2_ZERO)
F6_ONE = (F2_ONE, F2_ZERO, F2_ZERO)
F12_ZERO = (F6_ZERO, F6_ZERO)
F12_ONE = (F6_ONE, F6_ZERO)


# -- Fq2 -------------------------------------------------------------------

def f2_add(a, b):
    return (a[0] + b[0], a[1] + b[1])


def f2_sub(a, b):
    return (a[0] - b[0], a[1] - b[1])


def f2_neg(a):
    return (-a[0] % P, -a[1] % P)


def f2_conj(a):
    return (a[0] % P, -a[1] % P)


def f2_mul(a, b):
    a0, a1 = a
    b0, b1 = b
    t0 = a0 * b0
    t1 = a1 * b1
    return ((t0 - t1) % P, ((a0 + a1) * (b0 + b1) - t0 - t1) % P)


def f2_sqr(a):
    a0, a1 = a
    return ((a0 + a1) * (a0 - a1) % P, (a0 * a1 << 1) % P)


def f2_mul_scalar(a, k):
    return (a[0] * k % P, a[1] * k % P)


def f2_mul_xi(a):
    # multiply by xi = 1 + u
    a0, a1 = a
    return ((a0 - a1) % P, (a0 + a1) % P)


def f2_inv(a):
    a0, a1 = a[0] % P, a[1] % P
    d = invert(a0 * a0 + a1 * a1, P)
    return (a0 * d % P, -a1 * d % P)


def f2_eq(a, b):
    return (a[0] - b[0]) % P == 0 and (a[1] - b[1]) % P == 0


def f2_is_zero(a):
    return a[0] % P == 0 and a[1] % P == 0


def f2_reduce(a):
    return (a[0] % P, a[1] % P)


def f2_pow(a, e):
    out = F2_ONE
    if e < 0:
        a = f2_inv(a)
        e = -e
    for bit in bin(e)[2:]:
        out = f2_sqr(out)
        if bit == "1":
            out = f2_mul(out, a)
    return out


# -- Fq6 -------------------------------------------------------------------

def f6_add(a, b):
    return (f2_add(a[0], b[0]), f2_add(a[1], b[1]), f2_add(a[2], b[2]))


def f6_sub(a, b):
    return (f2_sub(a[0], b[0]), f2_sub(a[1], b[1]), f2_sub(a[2], b[2]))


def f6_neg(a):
    return (f2_neg(a[0]), f2_neg(a[1]), f2_neg(a[2]))


def f6_mul(a, b):
    a0, a1, a2 = a
    b0, b1, b2 = b
    t0 = f2_mul(a0, b0)
    t1 = f2_mul(a1, b1)
    t2 = f2_mul(a2, b2)
    c0 = f2_add(t0, f2_mul_xi(f2_sub(f2_mul(f2_add(a1, a2), f2_add(b1, b2)), f2_add(t1, t2))))
    c1 = f2_add(f2_sub(f2_mul(f2_add(a0, a1), f2_add(b0, b1)), f2_add(t0, t1)), f2_mul_xi(t2))
    c2 = f2_add(f2_sub(f2_mul(f2_add(a0, a2), f2_add(b0, b2)), f2_add(t0, t2)), t1)
    return (f2_reduce(c0), f2_reduce(c1), f2_reduce(c2))


def f6_sqr(a):
    a0, a1, a2 = a
    s0 = f2_sqr(a0)
    s1 = f2_mul(a0, a1)
    s1 = (s1[0] << 1, s1[1] << 1)
    s2 = f2_sqr(f2_add(f2_sub(a0, a1), a2))
    s3 = f2_mul(a1, a2)
    s3 = (s3[0] << 1, s3[1] << 1)
    s4 = f2_sqr(a2)
    c0 = f2_add(s0, f2_mul_xi(s3))
    c1 = f2_add(s1, f2_mul_xi(s4))
    c2 = f2_sub(f2_add(f2_add(s1, s2), s3), f2_add(s0, s4))
    return (f2_reduce(c0), f2_reduce(c1), f2_reduce(c2))


def f6_mul_v(a):
    # multiply by v (the cubic generator): (a0, a1, a2) -> (xi*a2, a0, a1)
    return (f2_mul_xi(a[2]), a[0], a[1])


def f6_inv(a):
    a0, a1, a2 = a
    t0 = f2_sqr(a0)
    t1 = f2_sqr(a1)
    t2 = f2_sqr(a2)
    t3 = f2_mul(a0, a1)
    t4 = f2_mul(a0, a2)
    t5 = f2_mul(a1, a2)
    c0 = f2_sub(t0, f2_mul_xi(t5))
    c1 = f2_sub(f2_mul_xi(t2), t3)
    c2 = f2_sub(t1, t4)
    f = f2_add(f2_mul(a0, c0), f2_mul_xi(f2_add(f2_mul(a2, c1), f2_mul(a1, c2))))
    fi = f2_inv(f)
    return (f2_mul(c0, fi), f2_mul(c1, fi), f2_mul(c2, fi))


def f6_eq(a, b):
    return f2_eq(a[0], b[0]) and f2_eq(a[1], b[1]) and f2_eq(a[2], b[2])


# -- Fq12 ------------------------------------------------------------------

def f12_add(a, b):
    return (f6_add(a[0], b[0]), f6_add(a[1], b[1]))


def f12_mul(a, b):
    a0, a1 = a
    b0, b1 = b
    t0 = f6_mul(a0, b0)
    t1 = f6_mul(a1, b1)
    c0 = f6_add(t0, f6_mul_v(t1))
    c1 = f6_sub(f6_mul(f6_add(a0, a1), f6_add(b0, b1)), f6_add(t0, t1))
    return (tuple(f2_reduce(x) for x in c0), tuple(f2_reduce(x) for x in c1))


def f12_sqr(a):
    a0, a1 = a
    t = f6_mul(a0, a1)
    c0 = f6_sub(f6_mul(f6_add(a0, a1), f6_add(a0, f6_mul_v(a1))), f6_add(t, f6_mul_v(t)))
    c1 = f6_add(t, t)
    return (tuple(f2_reduce(x) for x in c0), tuple(f2_reduce(x) for x in c1))


def f12_conj(a):
    # a^(p^6): the w-component is negated
    return (tuple(f2_reduce(x) for x in a[0]), f6_neg(a[1]))


def f12_inv(a):
    a0, a1 = a
    d = f6_inv(f6_sub(f6_sqr(a0), f6_mul_v(f6_sqr(a1))))
    return (f6_mul(a0, d), f6_neg(f6_mul(a1, d)))


def f12_eq(a, b):
    return f6_eq(a[0], b[0]) and f6_eq(a[1], b[1])


def f12_pow(a, e):
    if e < 0:
        a = f12_inv(a)
        e = -e
    out = F12_ONE
    for bit in bin(e)[2:]:
        out = f12_sqr(out)
        if bit == "1":
            out = f12_mul(out, a)
    return out


def f12_coeffs(a):
    """Flatten to 12 canonical Fq coefficients, w-power major order."""
    out = []
    for j in range(6):
        c = a[j & 1][j >> 1]
        out.append(c[0] % P)
        out.append(c[1] % P)
    return out


def f12_from_coeffs(cs):
    pairs = [(mpz(cs[2 * j]), mpz(cs[2 * j + 1])) for j in range(6)]
    return ((pairs[0], pairs[2], pairs[4]), (pairs[1], pairs[3], pairs[5]))


# -- Frobenius -------------------------------------------------------------
# gamma_k[j] = xi^(j*(p^k - 1)/6); frob^k multiplies the w^j coefficient by
# gamma_k[j], conjugating the Fq2 coefficient for odd k.

XI = (mpz(1), mpz(1))
_G1 = [f2_pow(XI, j * (P - 1) // 6) for j in range(6)]
_G2 = [f2_pow(XI, j * (P * P - 1) // 6) for j in range(6)]
_G3 = [f2_pow(XI, j * (P * P * P - 1) // 6) for j in range(6)]


def _frob(a, gammas, odd):
    cs = []
    for j in range(6):
        c = a[j & 1][j >> 1]
        if odd:
            c = f2_conj(c)
        cs.append(f2_mul(c, gammas[j]) if j else f2_reduce(c))
    return ((cs[0], cs[2], cs[4]), (cs[1], cs[3], cs[5]))


def f12_frob(a):
    return _frob(a, _G1, True)


def f12_frob2(a):
    return _frob(a, _G2, False)


def f12_frob3(a):
    return _frob(a, _G3, True)


# -- Cyclotomic subgroup ---------------------------------------------------
# Valid only for unitary elements (outputs of the easy part of the final
# exponentiation); their inverse is conjugation and squaring compresses.

def _f4_sqr(a, b):
    t0 = f2_sqr(a)
    t1 = f2_sqr(b)
    c0 = f2_add(f2_mul_xi(t1), t0)
    c1 = f2_sub(f2_sub(f2_sqr(f2_add(a, b)), t0), t1)
    return (c0, c1)


def cyc_sqr(a):
    z0, z4, z3 = a[0]
    z2, z1, z5 = a[1]
    t0, t1 = _f4_sqr(z0, z1)
    z0 = f2_sub(t0, z0)
    z0 = f2_add(f2_add(z0, z0), t0)
    z1 = f2_add(t1, z1)
    z1 = f2_add(f2_add(z1, z1), t1)
    t0, t1 = _f4_sqr(z2, z3)
    t2, t3 = _f4_sqr(z4, z5)
    z4 = f2_sub(t0, z4)
    z4 = f2_add(f2_add(z4, z4), t0)
    z5 = f2_add(t1, z5)
    z5 = f2_add(f2_add(z5, z5), t1)
    t0 = f2_mul_xi(t3)
    z2 = f2_add(t0, z2)
    z2 = f2_add(f2_add(z2, z2), t0)
    z3 = f2_sub(t2, z3)
    z3 = f2_add(f2_add(z3, z3), t2)
    return (
        (f2_reduce(z0), f2_reduce(z4), f2_reduce(z3)),
        (f2_reduce(z2), f2_reduce(z1), f2_reduce(z5)),
    )


def cyc_pow(a, e):
    """a^e for unitary a, e >= 0, using cyclotomic squarings."""
    out = F12_ONE
    for bit in bin(e)[2:]:
        out = cyc_sqr(out)
        if bit == "1":
            out = f12_mul(out, a)
    return out
