"""Short-Weierstrass group arithmetic for BLS12-381 G1 and its sextic twist G2.

Affine points are (x, y) tuples (Fq values for G1, Fq2 tuples for G2) and
None is the point at infinity.  Jacobian triples (X, Y, Z) are used inside
scalar multiplication; formulas are dbl-2009-l / add-2007-bl / madd-2007-bl.

Compressed serialization follows the common 48/96-byte encoding: top three
bits of the first byte carry (compressed, infinity, y-is-lexically-largest).
"""

from gmpy2 import invert, mpz, powmod

from .fields import (P, f2_add, f2_eq, f2_inv, f2_is_zero, f2_mul, f2_mul_scalar, f2_neg, f2_pow,
                     f2_reduce, f2_sqr, f2_sub)

# Order of G1, G2 and the target group.
R = mpz(0x73EDA753299D7D483339D80809A1D80553BDA402FFFE5BFEFFFFFFFF00000001)

B1 = mpz(4)
B2 = (mpz(4), mpz(4))

G1_GEN = (
    mpz(0x17F1D3A73197D7942695638C4FA9AC0FC3688C4F9774B905A14E3A3F171BAC586C55E83FF97A1AEFFB3AF00ADB22C6BB),
    mpz(0x08B3F481E3AAA0F1A09E30ED741D8AE4FCF5E095D5D00AF600DB18CB2C04B3EDD03CC744A2888AE40CAA232946C5E7E1),
)
G2_GEN = (
    (
        mpz(0x024AA2B2F08F0A91260805272DC51051C6E47AD4FA403B02B4510B647AE3D1770BAC0326A805BBEFD48056C8C121BDB8),
        mpz(0x13E02B6052719F607DACD3A088274F65596BD0D09920B61AB5DA61BBDC7F5049334CF11213945D57E5AC7D055D042B7E),
    ),
    (
        mpz(0x0CE5D527727D6E118CC9CDC6DA2E351AADFD9BAA8CBDD3A76D429A695160D12C923AC9CC3BACA289E193548608B82801),
        mpz(0x0606C4A02EA734CC32ACD2B02BC28B99CB3E287E85A763AF267492AB572E99AB3F370D275CEC1DA1AAA9075FF05F79BE),
    ),
)


# -- G1 (Fq coordinates) ----------------------------------------------------

def g1_neg(pt):
    if pt is None:
        return None
    return (pt[0], -pt[1] % P)


def g1_is_on_curve(pt):
    if pt is None:
        return True
    x, y = pt
    return (y * y - x * x * x - B1) % P == 0


def g1_to_jac(pt):
    if pt is None:
        return None
    return (pt[0], pt[1], mpz(1))


def g1_jac_dbl(pt):
    if pt is None:
        return None
    X, Y, Z = pt
    A = X * X % P
    B = Y * Y % P
    C = B * B % P
    D = ((X + B) ** 2 - A - C) * 2 % P
    E = 3 * A
    X3 = (E * E - 2 * D) % P
    Y3 = (E * (D - X3) - 8 * C) % P
    Z3 = 2 * Y * Z % P
    return (X3, Y3, Z3)


def g1_jac_add(p1, p2):
    if p1 is None:
        return p2
    if p2 is None:
        return p1
    X1, Y1, Z1 = p1
    X2, Y2, Z2 = p2
    Z1Z1 = Z1 * Z1 % P
    Z2Z2 = Z2 * Z2 % P
    U1 = X1 * Z2Z2 % P
    U2 = X2 * Z1Z1 % P
    S1 = Y1 * Z2 * Z2Z2 % P
    S2 = Y2 * Z1 * Z1Z1 % P
    H = (U2 - U1) % P
    rr = 2 * (S2 - S1) % P
    if H == 0:
        if rr == 0:
            return g1_jac_dbl(p1)
        return None
    I = 4 * H * H % P
    J = H * I % P
    V = U1 * I % P
    X3 = (rr * rr - J - 2 * V) % P
    Y3 = (rr * (V - X3) - 2 * S1 * J) % P
    Z3 = ((Z1 + Z2) ** 2 - Z1Z1 - Z2Z2) * H % P
    return (X3, Y3, Z3)


def g1_jac_madd(p1, a2):
    """Mixed addition: p1 Jacobian (or None), a2 affine non-infinity."""
    if p1 is None:
        return (a2[0], a2[1], mpz(1))
    X1, Y1, Z1 = p1
    X2, Y2 = a2
    Z1Z1 = Z1 * Z1 % P
    U2 = X2 * Z1Z1 % P
    S2 = Y2 * Z1 * Z1Z1 % P
    H = (U2 - X1) % P
    rr = 2 * (S2 - Y1) % P
    if H == 0:
        if rr == 0:
            return g1_jac_dbl(p1)
        return None
    HH = H * H % P
    I = 4 * HH % P
    J = H * I % P
    V = X1 * I % P
    X3 = (rr * rr - J - 2 * V) % P
    Y3 = (rr * (V - X3) - 2 * Y1 * J) % P
    Z3 = ((Z1 + H) ** 2 - Z1Z1 - HH) % P
    return (X3, Y3, Z3)


def g1_jac_to_affine(pt):
    if pt is None:
        return None
    X, Y, Z = pt
    if Z == 0:
        return None
    zi = invert(Z, P)
    zi2 = zi * zi % P
    return (X * zi2 % P, Y * zi2 * zi % P)


def g1_batch_to_affine(pts):
    """Normalize many Jacobian points with a single field inversion."""
    idx = [i for i, p in enumerate(pts) if p is not None and p[2] != 0]
    if not idx:
        return [None] * len(pts)
    acc = mpz(1)
    prefix = []
    for i in idx:
        prefix.append(acc)
        acc = acc * pts[i][2] % P
    inv_acc = invert(acc, P)
    out = [None] * len(pts)
    for k in range(len(idx) - 1, -1, -1):
        i = idx[k]
        zi = inv_acc * prefix[k] % P
        inv_acc = inv_acc * pts[i][2] % P
        zi2 = zi * zi % P
        out[i] = (pts[i][0] * zi2 % P, pts[i][1] * zi2 * zi % P)
    return out


# -- G2 (Fq2 coordinates) ---------------------------------------------------

def g2_neg(pt):
    if pt is None:
        return None
    return (pt[0], f2_neg(pt[1]))


def g2_is_on_curve(pt):
    if pt is None:
        return True
    x, y = pt
    lhs = f2_sqr(y)
    rhs = f2_add(f2_mul(f2_sqr(x), x), B2)
    return f2_eq(lhs, rhs)


def g2_to_jac(pt):
    if pt is None:
        return None
    return (pt[0], pt[1], (mpz(1), mpz(0)))


def g2_jac_dbl(pt):
    if pt is None:
        return None
    X, Y, Z = pt
    A = f2_sqr(X)
    B = f2_sqr(Y)
    C = f2_sqr(B)
    D = f2_sub(f2_sqr(f2_add(X, B)), f2_add(A, C))
    D = f2_add(D, D)
    E = f2_add(f2_add(A, A), A)
    X3 = f2_sub(f2_sqr(E), f2_add(D, D))
    c8 = f2_mul_scalar(C, 8)
    Y3 = f2_sub(f2_mul(E, f2_sub(D, X3)), c8)
    Z3 = f2_mul(f2_add(Y, Y), Z)
    return (f2_reduce(X3), f2_reduce(Y3), Z3)


def g2_jac_add(p1, p2):
    if p1 is None:
        return p2
    if p2 is None:
        return p1
    X1, Y1, Z1 = p1
    X2, Y2, Z2 = p2
    Z1Z1 = f2_sqr(Z1)
    Z2Z2 = f2_sqr(Z2)
    U1 = f2_mul(X1, Z2Z2)
    U2 = f2_mul(X2, Z1Z1)
    S1 = f2_mul(f2_mul(Y1, Z2), Z2Z2)
    S2 = f2_mul(f2_mul(Y2, Z1), Z1Z1)
    H = f2_sub(U2, U1)
    rr = f2_sub(S2, S1)
    rr = f2_add(rr, rr)
    if f2_is_zero(H):
        if f2_is_zero(rr):
            return g2_jac_dbl(p1)
        return None
    I = f2_sqr(f2_add(H, H))
    J = f2_mul(H, I)
    V = f2_mul(U1, I)
    X3 = f2_sub(f2_sqr(rr), f2_add(J, f2_add(V, V)))
    S1J = f2_mul(S1, J)
    Y3 = f2_sub(f2_mul(rr, f2_sub(V, X3)), f2_add(S1J, S1J))
    Z3 = f2_mul(f2_sub(f2_sqr(f2_add(Z1, Z2)), f2_add(Z1Z1, Z2Z2)), H)
    return (f2_reduce(X3), f2_reduce(Y3), Z3)


def g2_jac_madd(p1, a2):
    if p1 is None:
        return (a2[0], a2[1], (mpz(1), mpz(0)))
    X1, Y1, Z1 = p1
    X2, Y2 = a2
    Z1Z1 = f2_sqr(Z1)
    U2 = f2_mul(X2, Z1Z1)
    S2 = f2_mul(f2_mul(Y2, Z1), Z1Z1)
    H = f2_sub(U2, X1)
    rr = f2_sub(S2, Y1)
    rr = f2_add(rr, rr)
    if f2_is_zero(H):
        if f2_is_zero(rr):
            return g2_jac_dbl(p1)
        return None
    HH = f2_sqr(H)
    I = f2_mul_scalar(HH, 4)
    J = f2_mul(H, I)
    V = f2_mul(X1, I)
    X3 = f2_sub(f2_sqr(rr), f2_add(J, f2_add(V, V)))
    YJ = f2_mul(Y1, J)
    Y3 = f2_sub(f2_mul(rr, f2_sub(V, X3)), f2_add(YJ, YJ))
    Z3 = f2_sub(f2_sqr(f2_add(Z1, H)), f2_add(Z1Z1, HH))
    return (f2_reduce(X3), f2_reduce(Y3), Z3)


def g2_jac_to_affine(pt):
    if pt is None:
        return None
    X, Y, Z = pt
    if f2_is_zero(Z):
        return None
    zi = f2_inv(Z)
    zi2 = f2_sqr(zi)
    return (f2_mul(X, zi2), f2_mul(f2_mul(Y, zi2), zi))


def g2_batch_to_affine(pts):
    idx = [i for i, p in enumerate(pts) if p is not None and not f2_is_zero(p[2])]
    if not idx:
        return [None] * len(pts)
    acc = (mpz(1), mpz(0))
    prefix = []
    for i in idx:
        prefix.append(acc)
        acc = f2_mul(acc, pts[i][2])
    inv_acc = f2_inv(acc)
    out = [None] * len(pts)
    for k in range(len(idx) - 1, -1, -1):
        i = idx[k]
        zi = f2_mul(inv_acc, prefix[k])
        inv_acc = f2_mul(inv_acc, pts[i][2])
        zi2 = f2_sqr(zi)
        out[i] = (f2_mul(pts[i][0], zi2), f2_mul(f2_mul(pts[i][1], zi2), zi))
    return out


# -- Group-generic dispatch tables ------------------------------------------

class GroupOps:
    """Bundle of the per-group primitive operations; two instances exist."""

    def __init__(self, name, dbl, add, madd, to_jac, to_affine, batch_to_affine, neg, on_curve, generator):
        self.name = name
        self.dbl = dbl
        self.add = add
        self.madd = madd
        self.to_jac = to_jac
        self.to_affine = to_affine
        self.batch_to_affine = batch_to_affine
        self.neg = neg
        self.on_curve = on_curve
        self.generator = generator


G1_OPS = GroupOps("g1", g1_jac_dbl, g1_jac_add, g1_jac_madd, g1_to_jac, g1_jac_to_affine,
                  g1_batch_to_affine, g1_neg, g1_is_on_curve, G1_GEN)
G2_OPS = GroupOps("g2", g2_jac_dbl, g2_jac_add, g2_jac_madd, g2_to_jac, g2_jac_to_affine,
                  g2_batch_to_affine, g2_neg, g2_is_on_curve, G2_GEN)


def scalar_mul(ops, pt_affine, k):
    """Sliding 4-bit window multiplication; pt_affine may be None."""
    k = int(k) % R
    if k == 0 or pt_affine is None:
        return None
    # odd multiples 1P..15P
    base = ops.to_jac(pt_affine)
    dbl2 = ops.dbl(base)
    table = [base]
    for _ in range(7):
        table.append(ops.add(table[-1], dbl2))
    acc = None
    bits = bin(k)[2:]
    i = 0
    nbits = len(bits)
    while i < nbits:
        if bits[i] == "0":
            acc = ops.dbl(acc)
            i += 1
            continue
        j = min(i + 4, nbits)
        while bits[j - 1] == "0":
            j -= 1
        window = int(bits[i:j], 2)
        for _ in range(j - i):
            acc = ops.dbl(acc)
        acc = ops.add(acc, table[window >> 1])
        i = j
    return ops.to_affine(acc)


class FixedBaseTable:
    """Windowed table of affine multiples for fast fixed-base exponentiation."""

    def __init__(self, ops, base_affine, width=6, max_bits=None):
        self.ops = ops
        self.width = width
        bits = max_bits or int(R).bit_length()
        self.windows = -(-bits // width)
        rows = []
        step = ops.to_jac(base_affine)
        for _ in range(self.windows):
            row = [step]
            for _ in range((1 << width) - 2):
                row.append(ops.add(row[-1], step))
            rows.append(row)
            step = ops.add(row[-1], row[0])
        flat = [p for row in rows for p in row]
        flat = ops.batch_to_affine(flat)
        m = (1 << width) - 1
        self.rows = [flat[i * m:(i + 1) * m] for i in range(self.windows)]

    def mul(self, k):
        k = int(k) % R
        if k == 0:
            return None
        acc = None
        mask = (1 << self.width) - 1
        w = 0
        while k:
            digit = k & mask
            if digit:
                acc = self.ops.madd(acc, self.rows[w][digit - 1])
            k >>= self.width
            w += 1
        return self.ops.to_affine(acc)


def multi_scalar_mul(ops, pts_affine, coeffs):
    """Product of pts[i]^coeffs[i] with shared doublings (small-coefficient kernel).

    Coefficients are arbitrary integers; they act modulo the group order, and
    are folded to the centered representative so negatives cost a point
    negation instead of a near-order exponent.
    """
    if len(pts_affine) != len(coeffs):
        raise ValueError("points/coefficients length mismatch")
    half = R >> 1
    prepared = []
    top = 0
    for pt, c in zip(pts_affine, coeffs):
        c = int(c) % R
        if c > half:
            c -= R
        if c == 0 or pt is None:
            continue
        if c < 0:
            pt = ops.neg(pt)
            c = -c
        prepared.append((pt, c))
        if c > top:
            top = c
    if not prepared:
        return None
    acc = None
    for bit in range(top.bit_length() - 1, -1, -1):
        acc = ops.dbl(acc)
        mask = 1 << bit
        for pt, c in prepared:
            if c & mask:
                acc = ops.madd(acc, pt)
    return ops.to_affine(acc)


# -- Compressed serialization ------------------------------------------------

def _fq_sqrt(a):
    s = powmod(a, (P + 1) // 4, P)
    if s * s % P != a % P:
        return None
    return s


def _fq2_sqrt(a):
    a1 = f2_pow(a, (P - 3) // 4)
    x0 = f2_mul(a1, a)
    alpha = f2_mul(a1, x0)
    if f2_eq(alpha, (P - 1, mpz(0))):
        x = (-x0[1] % P, x0[0] % P)
    else:
        b = f2_pow(f2_add(alpha, (mpz(1), mpz(0))), (P - 1) // 2)
        x = f2_mul(b, x0)
    if not f2_eq(f2_sqr(x), a):
        return None
    return x


def _fq2_lex_gt(a, b):
    a = f2_reduce(a)
    b = f2_reduce(b)
    if a[1] != b[1]:
        return a[1] > b[1]
    return a[0] > b[0]


def g1_to_bytes(pt):
    if pt is None:
        return bytes([0xC0]) + b"\x00" * 47
    x, y = pt
    flags = 0x80 | (0x20 if y > P - y else 0)
    data = int(x).to_bytes(48, "big")
    return bytes([data[0] | flags]) + data[1:]


def g1_from_bytes(buf):
    if len(buf) != 48:
        raise ValueError("g1 point must be 48 bytes")
    flags = buf[0] & 0xE0
    if not flags & 0x80:
        raise ValueError("uncompressed g1 encoding not supported")
    if flags & 0x40:
        if any(buf[1:]) or buf[0] != 0xC0:
            raise ValueError("malformed g1 infinity encoding")
        return None
    x = mpz(int.from_bytes(bytes([buf[0] & 0x1F]) + buf[1:], "big"))
    if x >= P:
        raise ValueError("g1 x coordinate out of range")
    y = _fq_sqrt((x * x * x + B1) % P)
    if y is None:
        raise ValueError("g1 x coordinate not on curve")
    if bool(flags & 0x20) != (y > P - y):
        y = (P - y) % P
    return (x, y)


def g2_to_bytes(pt):
    if pt is None:
        return bytes([0xC0]) + b"\x00" * 95
    x, y = pt
    flags = 0x80 | (0x20 if _fq2_lex_gt(y, f2_neg(y)) else 0)
    data = int(x[1]).to_bytes(48, "big") + int(x[0]).to_bytes(48, "big")
    return bytes([data[0] | flags]) + data[1:]


def g2_from_bytes(buf):
    if len(buf) != 96:
        raise ValueError("g2 point must be 96 bytes")
    flags = buf[0] & 0xE0
    if not flags & 0x80:
        raise ValueError("uncompressed g2 encoding not supported")
    if flags & 0x40:
        if any(buf[1:]) or buf[0] != 0xC0:
            raise ValueError("malformed g2 infinity encoding")
        return None
    c1 = mpz(int.from_bytes(bytes([buf[0] & 0x1F]) + buf[1:48], "big"))
    c0 = mpz(int.from_bytes(buf[48:], "big"))
    if c0 >= P or c1 >= P:
        raise ValueError("g2 x coordinate out of range")
    x = (c0, c1)
    y = _fq2_sqrt(f2_add(f2_mul(f2_sqr(x), x), B2))
    if y is None:
        raise ValueError("g2 x coordinate not on curve")
    if bool(flags & 0x20) != _fq2_lex_gt(y, f2_neg(y)):
        y = f2_neg(y)
    return (x, y)
