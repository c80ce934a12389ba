"""Shared fixtures and independent reference oracles.

The reference helpers here recompute expected values from first principles
(tuple composition, exhaustive counting) so the package code is checked
against something it does not share."""

import itertools
import random

import pytest

from groupem import parse_group_spec

# representative catalog of small groups, order <= 512
SMALL_GROUP_SPECS = [
    "zmod:2",
    "zmod:3",
    "zmod:17",
    "zmod:64",
    "zmod:512",
    "xor:2",
    "xor:6",
    "xor:8",
    "xor:9",
    "sym:3",
    "sym:4",
    "dihedral:3",
    "dihedral:16",
    "prod:(zmod:4,sym:3)",
    "prod:(xor:2,dihedral:3)",
    "prod:(zmod:2,prod:(zmod:3,zmod:5))",
]

# subset with order <= 64, used for the heavier statistical checks
CHI_SQUARE_SPECS = [s for s in SMALL_GROUP_SPECS if parse_group_spec(s).order <= 64]


@pytest.fixture(params=SMALL_GROUP_SPECS)
def small_group(request):
    return parse_group_spec(request.param)


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)


def compose_images(a, b):
    """Reference composition of image tuples: apply b first, then a."""
    return tuple(a[b[i]] for i in range(len(a)))


def invert_images(a):
    out = [0] * len(a)
    for i, image in enumerate(a):
        out[image] = i
    return tuple(out)


def s3_reference_table():
    """Full 6x6 composition table of the symmetric group on 3 points,
    built directly from function composition on image tuples."""
    elems = sorted(itertools.permutations(range(3)))
    return elems, {(a, b): compose_images(a, b) for a in elems for b in elems}
