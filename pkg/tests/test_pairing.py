"""Pairing properties and agreement with the naive reference implementation."""

import random

from reference_pairing import reference_pairing

from fescore.pairing import GtPoint, multi_pair, pair, setup
from fescore.pairing.fields import f12_eq


def test_pair_of_generators_is_gt(ctx):
    assert pair(ctx.g1, ctx.g2) == ctx.gt
    assert not ctx.gt.is_identity()


def test_gt_has_group_order(ctx):
    assert (ctx.gt ** ctx.order).is_identity()


def test_pair_with_identity_is_identity(ctx):
    from fescore.pairing.group import G1Point, G2Point
    assert pair(G1Point.identity(), ctx.g2).is_identity()
    assert pair(ctx.g1, G2Point.identity()).is_identity()


def test_small_exponent_bilinearity(ctx):
    assert pair(ctx.g1_exp(2), ctx.g2_exp(3)) == ctx.gt ** 6
    assert pair(ctx.g1_exp(3), ctx.g2_exp(5)) == ctx.gt ** 15


def test_bilinearity_random_pairs(ctx):
    rnd = random.Random(21)
    for _ in range(100):
        a = rnd.randrange(1, ctx.order)
        b = rnd.randrange(1, ctx.order)
        assert pair(ctx.g1_exp(a), ctx.g2_exp(b)) == ctx.gt ** (a * b % ctx.order)


def test_multiplicativity(ctx):
    a, b = 7, 11
    lhs = pair(ctx.g1_exp(a), ctx.g2) * pair(ctx.g1_exp(b), ctx.g2)
    rhs = pair(ctx.g1_exp(a + b), ctx.g2)
    assert lhs == rhs


def test_matches_reference_pairing(ctx):
    rnd = random.Random(22)
    for _ in range(6):
        a = rnd.randrange(1, ctx.order)
        b = rnd.randrange(1, ctx.order)
        p = ctx.g1_exp(a)
        q = ctx.g2_exp(b)
        fast = pair(p, q)
        slow = GtPoint(reference_pairing(p.pt, q.pt))
        assert fast == slow


def test_multi_pairing_equals_product_of_pairings(ctx):
    rnd = random.Random(23)
    pairs = []
    prod = GtPoint.identity()
    for _ in range(5):
        p = ctx.g1_exp(rnd.randrange(1, 1000))
        q = ctx.g2_exp(rnd.randrange(1, 1000))
        pairs.append((p, q))
        prod = prod * pair(p, q)
    assert multi_pair(pairs) == prod


def test_gt_serialization_round_trip(ctx):
    rnd = random.Random(24)
    for _ in range(4):
        el = ctx.gt ** rnd.randrange(1, ctx.order)
        assert GtPoint.from_bytes(el.to_bytes()) == el
    assert GtPoint.from_bytes(GtPoint.identity().to_bytes()).is_identity()


def test_setup_deterministic():
    c1 = setup()
    c2 = setup()
    assert c1.g1.to_bytes() == c2.g1.to_bytes()
    assert c1.g2.to_bytes() == c2.g2.to_bytes()
    assert c1.gt.to_bytes() == c2.gt.to_bytes()
    assert c1.order == c2.order
