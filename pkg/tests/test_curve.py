"""Group law, scalar multiplication and point serialization."""

import random

import pytest

from fescore.pairing import curve as C
from fescore.pairing.group import G1Point, G2Point


@pytest.mark.parametrize("ops,gen", [(C.G1_OPS, C.G1_GEN), (C.G2_OPS, C.G2_GEN)])
def test_generator_on_curve_and_order(ops, gen):
    assert ops.on_curve(gen)
    assert C.scalar_mul(ops, gen, int(C.R)) is None
    assert C.scalar_mul(ops, gen, 1) == gen


@pytest.mark.parametrize("ops,gen", [(C.G1_OPS, C.G1_GEN), (C.G2_OPS, C.G2_GEN)])
def test_scalar_mul_against_double_and_add(ops, gen):
    rnd = random.Random(11)
    for _ in range(5):
        k = rnd.randrange(1, 1 << 20)
        acc = None
        for bit in bin(k)[2:]:
            acc = ops.dbl(acc)
            if bit == "1":
                acc = ops.add(acc, ops.to_jac(gen))
        assert C.scalar_mul(ops, gen, k) == ops.to_affine(acc)


@pytest.mark.parametrize("ops,gen", [(C.G1_OPS, C.G1_GEN), (C.G2_OPS, C.G2_GEN)])
def test_group_law_consistency(ops, gen):
    rnd = random.Random(12)
    a, b = rnd.randrange(int(C.R)), rnd.randrange(int(C.R))
    pa = C.scalar_mul(ops, gen, a)
    pb = C.scalar_mul(ops, gen, b)
    pab = C.scalar_mul(ops, gen, (a + b) % int(C.R))
    assert ops.to_affine(ops.add(ops.to_jac(pa), ops.to_jac(pb))) == pab
    # P + (-P) = identity
    assert ops.add(ops.to_jac(pa), ops.to_jac(ops.neg(pa))) is None
    # mixed addition agrees with general addition
    assert ops.to_affine(ops.madd(ops.to_jac(pa), pb)) == pab


def test_batch_to_affine_matches_single():
    rnd = random.Random(13)
    pts = [C.g1_to_jac(C.scalar_mul(C.G1_OPS, C.G1_GEN, rnd.randrange(1, 1000))) for _ in range(8)]
    pts = [C.g1_jac_add(p, C.g1_to_jac(C.G1_GEN)) for p in pts]  # non-trivial z
    pts.insert(3, None)
    batch = C.g1_batch_to_affine(pts)
    singles = [C.g1_jac_to_affine(p) for p in pts]
    assert batch == singles


def test_multi_scalar_mul_matches_naive():
    rnd = random.Random(14)
    for trial in range(10):
        k = rnd.randrange(1, 33)
        pts = [C.scalar_mul(C.G1_OPS, C.G1_GEN, rnd.randrange(1, int(C.R))) for _ in range(k)]
        coeffs = [rnd.randrange(-50, 51) for _ in range(k)]
        acc = None
        for pt, c in zip(pts, coeffs):
            acc = C.g1_jac_add(acc, C.g1_to_jac(C.scalar_mul(C.G1_OPS, pt, c % int(C.R))))
        assert C.multi_scalar_mul(C.G1_OPS, pts, coeffs) == C.g1_jac_to_affine(acc)


def test_multi_scalar_mul_edge_cases():
    pt = C.G1_GEN
    assert C.multi_scalar_mul(C.G1_OPS, [pt, pt], [0, 0]) is None
    assert C.multi_scalar_mul(C.G1_OPS, [pt], [1]) == pt
    with pytest.raises(ValueError):
        C.multi_scalar_mul(C.G1_OPS, [pt], [1, 2])


def test_fixed_base_table_matches_generic(ctx):
    rnd = random.Random(15)
    for _ in range(5):
        k = rnd.randrange(int(C.R))
        assert ctx.g1_exp(k).pt == C.scalar_mul(C.G1_OPS, C.G1_GEN, k)
        assert ctx.g2_exp(k).pt == C.scalar_mul(C.G2_OPS, C.G2_GEN, k)
    assert ctx.g1_exp(0).pt is None


@pytest.mark.parametrize("cls", [G1Point, G2Point])
def test_point_serialization_round_trip(cls, ctx):
    rnd = random.Random(16)
    gen = ctx.g1 if cls is G1Point else ctx.g2
    for _ in range(8):
        p = gen ** rnd.randrange(1, int(C.R))
        buf = p.to_bytes()
        assert len(buf) == cls.ENCODED_LEN
        assert cls.from_bytes(buf) == p
    ident = cls.identity()
    assert cls.from_bytes(ident.to_bytes()) == ident
    # both y choices round-trip (negation flips the sign flag)
    p = gen ** 5
    q = p.inverse()
    assert cls.from_bytes(q.to_bytes()) == q
    assert q.to_bytes() != p.to_bytes()


@pytest.mark.parametrize("cls", [G1Point, G2Point])
def test_point_deserialization_rejects_garbage(cls):
    with pytest.raises(ValueError):
        cls.from_bytes(b"\x00" * cls.ENCODED_LEN)        # not compressed
    with pytest.raises(ValueError):
        cls.from_bytes(b"\xc0" + b"\x01" * (cls.ENCODED_LEN - 1))  # bad infinity
    with pytest.raises(ValueError):
        cls.from_bytes(b"\x9f" + b"\xff" * (cls.ENCODED_LEN - 1))  # x >= p
    with pytest.raises(ValueError):
        cls.from_bytes(b"\x80")                          # wrong length


def test_deserialization_rejects_x_off_curve():
    # hunt a small x whose y^2 candidate is a non-square in each field
    x = next(v for v in range(1, 200) if C._fq_sqrt((v ** 3 + 4) % int(C.P)) is None)
    buf = bytes([0x80]) + b"\x00" * 46 + bytes([x])
    with pytest.raises(ValueError):
        G1Point.from_bytes(buf)
    from fescore.pairing.fields import f2_add, f2_mul, f2_sqr
    from gmpy2 import mpz
    x2 = next(v for v in range(1, 200)
              if C._fq2_sqrt(f2_add(f2_mul(f2_sqr((mpz(v), mpz(0))), (mpz(v), mpz(0))), C.B2)) is None)
    buf = bytes([0x80]) + b"\x00" * 94 + bytes([x2])  # c1 = 0, c0 = x2
    with pytest.raises(ValueError):
        G2Point.from_bytes(buf)
