"""Quadratic FE scheme: correctness oracles, projections, error contracts."""

import random

import pytest

from fescore import sgp
from fescore.errors import DimensionMismatch, KeyFunctionMismatch, MessageBoundError
from fescore.pairing import new_rng


def _rand_matrix(rnd, dim, lo=-10, hi=10):
    return sgp.FMatrix.from_rows([[rnd.randint(lo, hi) for _ in range(dim)] for _ in range(dim)])


def test_master_key_shapes(ctx, rng):
    msk = sgp.generate_master_key(5, ctx, rng)
    assert len(msk.s) == len(msk.t) == msk.dim == 5
    wide = sgp.generate_master_key(130, ctx, rng)
    assert wide.dim == 130 and len(wide.s) == 130


def test_master_key_deterministic_under_seed(ctx, rng_factory):
    k1 = sgp.generate_master_key(6, ctx, rng_factory(99))
    k2 = sgp.generate_master_key(6, ctx, rng_factory(99))
    assert k1 == k2


def test_master_key_rejects_zero_dim(ctx, rng):
    with pytest.raises(DimensionMismatch):
        sgp.generate_master_key(0, ctx, rng)


def test_identity_matrix_inner_product(ctx, rng):
    msk = sgp.generate_master_key(2, ctx, rng)
    f = sgp.FMatrix.from_rows([[1, 0], [0, 1]])
    c = sgp.encrypt([2, 3], [4, 5], msk, ctx, rng)
    fek = sgp.derive_key(msk, f, ctx)
    assert sgp.decrypt(c, fek, f, 1000, ctx) == 2 * 4 + 3 * 5


def test_worked_small_instance(ctx, rng):
    # x=(2,3), y=(4,5), F=[[1,2],[0,1]]: 1*2*4 + 2*2*5 + 0 + 1*3*5 = 43
    msk = sgp.generate_master_key(2, ctx, rng)
    f = sgp.FMatrix.from_rows([[1, 2], [0, 1]])
    assert f.evaluate([2, 3], [4, 5]) == 43
    c = sgp.encrypt([2, 3], [4, 5], msk, ctx, rng)
    fek = sgp.derive_key(msk, f, ctx)
    assert sgp.decrypt(c, fek, f, 1000, ctx) == 43


def test_zero_vector_decrypts_to_zero(ctx, rng):
    msk = sgp.generate_master_key(3, ctx, rng)
    c = sgp.encrypt([0, 0, 0], [0, 0, 0], msk, ctx, rng)
    f = _rand_matrix(random.Random(1), 3)
    fek = sgp.derive_key(msk, f, ctx)
    assert sgp.decrypt(c, fek, f, 10, ctx) == 0


def test_zero_matrix_decrypts_everything_to_zero(ctx, rng):
    msk = sgp.generate_master_key(3, ctx, rng)
    c = sgp.encrypt([5, -7, 9], [1, 2, 3], msk, ctx, rng)
    f = sgp.FMatrix.from_rows([[0] * 3] * 3)
    fek = sgp.derive_key(msk, f, ctx)
    assert sgp.decrypt(c, fek, f, 10, ctx) == 0


def test_random_instances_match_bruteforce(ctx, rng_factory):
    rnd = random.Random(42)
    for trial in range(15):
        n = rnd.randint(1, 8)
        rng = rng_factory(1000 + trial)
        msk = sgp.generate_master_key(n, ctx, rng)
        x = [rnd.randint(-10, 10) for _ in range(n)]
        y = [rnd.randint(-10, 10) for _ in range(n)]
        f = _rand_matrix(rnd, n)
        want = sum(f.entries[i][j] * x[i] * y[j] for i in range(n) for j in range(n))
        c = sgp.encrypt(x, y, msk, ctx, rng)
        fek = sgp.derive_key(msk, f, ctx)
        assert sgp.decrypt(c, fek, f, 10**5, ctx) == want


def test_two_functions_same_ciphertext(ctx, rng):
    msk = sgp.generate_master_key(3, ctx, rng)
    x, y = [1, -2, 3], [4, 0, -5]
    c = sgp.encrypt(x, y, msk, ctx, rng)
    rnd = random.Random(7)
    f1, f2 = _rand_matrix(rnd, 3), _rand_matrix(rnd, 3)
    for f in (f1, f2):
        fek = sgp.derive_key(msk, f, ctx)
        assert sgp.decrypt(c, fek, f, 10**4, ctx) == f.evaluate(x, y)


def test_decrypt_linear_in_function(ctx, rng):
    msk = sgp.generate_master_key(3, ctx, rng)
    x, y = [2, 1, -1], [3, -2, 2]
    c = sgp.encrypt(x, y, msk, ctx, rng)
    rnd = random.Random(8)
    f1, f2 = _rand_matrix(rnd, 3, -5, 5), _rand_matrix(rnd, 3, -5, 5)
    fsum = sgp.FMatrix.from_rows(
        [[f1.entries[i][j] + f2.entries[i][j] for j in range(3)] for i in range(3)])
    v1 = sgp.decrypt(c, sgp.derive_key(msk, f1, ctx), f1, 10**4, ctx)
    v2 = sgp.decrypt(c, sgp.derive_key(msk, f2, ctx), f2, 10**4, ctx)
    vs = sgp.decrypt(c, sgp.derive_key(msk, fsum, ctx), fsum, 10**4, ctx)
    assert vs == v1 + v2


def test_fresh_randomizer_per_encryption(ctx, rng):
    from fescore import serial
    msk = sgp.generate_master_key(2, ctx, rng)
    c1 = sgp.encrypt([1, 2], [1, 2], msk, ctx, rng)
    c2 = sgp.encrypt([1, 2], [1, 2], msk, ctx, rng)
    assert serial.ciphertext_to_bytes(c1) != serial.ciphertext_to_bytes(c2)
    f = sgp.FMatrix.diagonal([1, 1])
    fek = sgp.derive_key(msk, f, ctx)
    assert sgp.decrypt(c1, fek, f, 100, ctx) == sgp.decrypt(c2, fek, f, 100, ctx) == 5


def test_encrypt_validates_dimensions_and_bound(ctx, rng):
    msk = sgp.generate_master_key(2, ctx, rng)
    with pytest.raises(DimensionMismatch):
        sgp.encrypt([1], [1, 2], msk, ctx, rng)
    with pytest.raises(MessageBoundError):
        sgp.encrypt([1, 2], [1, 2], msk, ctx, rng, message_bound=1)


def test_derive_key_validates_dimension(ctx, rng):
    msk = sgp.generate_master_key(2, ctx, rng)
    with pytest.raises(DimensionMismatch):
        sgp.derive_key(msk, sgp.FMatrix.diagonal([1, 2, 3]), ctx)


def test_digest_mismatch_is_hard_error(ctx, rng):
    msk = sgp.generate_master_key(2, ctx, rng)
    f1 = sgp.FMatrix.diagonal([1, 2])
    f2 = sgp.FMatrix.diagonal([1, 3])
    c = sgp.encrypt([1, 1], [1, 1], msk, ctx, rng)
    fek = sgp.derive_key(msk, f1, ctx)
    with pytest.raises(KeyFunctionMismatch):
        sgp.decrypt(c, fek, f2, 100, ctx)


def test_projection_identity_keeps_semantics(ctx, rng):
    n = 3
    msk = sgp.generate_master_key(n, ctx, rng)
    x = [2, -1, 3]
    c = sgp.encrypt(x, x, msk, ctx, rng)
    eye = [[1 if i == k else 0 for k in range(n)] for i in range(n)]
    pc = sgp.project_encryption(c, eye)
    pk = sgp.project_secret_key(msk, eye)
    assert pk == msk
    rnd = random.Random(9)
    f = _rand_matrix(rnd, n, -5, 5)
    fek = sgp.derive_key(pk, f, ctx)
    assert sgp.decrypt(pc, fek, f, 10**4, ctx) == f.evaluate(x, x)


def test_projection_random_instances(ctx, rng_factory):
    rnd = random.Random(55)
    for trial in range(8):
        n = rnd.randint(2, 6)
        d = rnd.randint(1, min(3, n))
        rng = rng_factory(2000 + trial)
        msk = sgp.generate_master_key(n, ctx, rng)
        x = [rnd.randint(-5, 5) for _ in range(n)]
        pr = [[rnd.randint(-4, 4) for _ in range(d)] for _ in range(n)]
        f = _rand_matrix(rnd, d, -5, 5)
        projected = [sum(pr[i][k] * x[i] for i in range(n)) for k in range(d)]
        want = f.evaluate(projected, projected)
        c = sgp.encrypt(x, x, msk, ctx, rng)
        pc = sgp.project_encryption(c, pr)
        assert pc.dim == d
        fek = sgp.derive_key(sgp.project_secret_key(msk, pr), f, ctx)
        assert sgp.decrypt(pc, fek, f, 10**7, ctx) == want


def test_projection_zero_matrix(ctx, rng):
    msk = sgp.generate_master_key(3, ctx, rng)
    c = sgp.encrypt([4, 5, 6], [4, 5, 6], msk, ctx, rng)
    zero = [[0, 0] for _ in range(3)]
    pc = sgp.project_encryption(c, zero)
    pk = sgp.project_secret_key(msk, zero)
    f = sgp.FMatrix.from_rows([[3, 1], [-2, 7]])
    fek = sgp.derive_key(pk, f, ctx)
    assert sgp.decrypt(pc, fek, f, 100, ctx) == 0


def test_projection_validates_dimensions(ctx, rng):
    msk = sgp.generate_master_key(3, ctx, rng)
    c = sgp.encrypt([1, 2, 3], [1, 2, 3], msk, ctx, rng)
    with pytest.raises(DimensionMismatch):
        sgp.project_encryption(c, [[1], [2]])          # wrong row count
    with pytest.raises(DimensionMismatch):
        sgp.project_encryption(c, [[1, 0, 0, 0]] * 3)  # d > n
    with pytest.raises(DimensionMismatch):
        sgp.project_secret_key(msk, [[1]] * 4)
