"""Bilinear-group backend: BLS12-381 groups, pairing and bounded dlog."""

from .dlog import BsgsTable, clear_table_cache, dlog_bounded, get_table
from .group import (G1Point, G2Point, GroupContext, GtPoint, ORDER, multi_exp_combine, multi_pair,
                    new_rng, pair, random_scalar, scalar_from_bytes, scalar_to_bytes, setup)

__all__ = [
    "BsgsTable",
    "G1Point",
    "G2Point",
    "GroupContext",
    "GtPoint",
    "ORDER",
    "clear_table_cache",
    "dlog_bounded",
    "get_table",
    "multi_exp_combine",
    "multi_pair",
    "new_rng",
    "pair",
    "random_scalar",
    "scalar_from_bytes",
    "scalar_to_bytes",
    "setup",
]
