"""Lazily-sampled random permutations and random functions on a group.

Both oracle types "define as they go": a point gets a value the first time
it is queried and keeps it forever.  All randomness flows through an
explicit ``random.Random`` passed in at construction, so runs are
bit-reproducible given a seed.  Instances are single-threaded mutable
state; parallel experiments use independent instances with derived seeds.
"""

from __future__ import annotations

import hashlib
import random

from .errors import DomainError
from .groups import Element, GroupHandle


def spawn(rng: random.Random) -> random.Random:
    """A child generator seeded from the parent; advances the parent."""
    return random.Random(rng.getrandbits(64))


def derive_seed(master: int, index: int) -> int:
    """Stable per-trial seed, independent of trial scheduling order."""
    digest = hashlib.sha256(f"{master}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def sample_excluding(group: GroupHandle, rng: random.Random, used) -> Element:
    """Uniform element outside ``used``, by rejection sampling.

    The caller guarantees ``len(used) < group.order`` (pigeonhole: a fresh
    draw is only ever needed while some point is still undefined).
    """
    while True:
        e = group.sample(rng)
        if e not in used:
            return e


class LazyPermutation:
    """Incrementally defined uniform random bijection on a group domain.

    forward and backward are mutually inverse partial bijections at all
    times; once a pair (x, y) is defined it is never redefined.
    """

    def __init__(self, group: GroupHandle, rng: random.Random):
        self.group = group
        self.rng = rng
        self._forward: dict[Element, Element] = {}
        self._backward: dict[Element, Element] = {}

    def forward(self, v: Element) -> Element:
        self.group.validate(v)
        hit = self._forward.get(v)
        if hit is not None:
            return hit
        y = sample_excluding(self.group, self.rng, self._backward)
        self._define(v, y)
        return y

    def backward(self, v: Element) -> Element:
        self.group.validate(v)
        hit = self._backward.get(v)
        if hit is not None:
            return hit
        x = sample_excluding(self.group, self.rng, self._forward)
        self._define(x, v)
        return x

    def query(self, direction: str, v: Element) -> Element:
        if direction == "forward":
            return self.forward(v)
        if direction == "backward":
            return self.backward(v)
        raise DomainError(f"unknown direction {direction!r}")

    def _define(self, x: Element, y: Element) -> None:
        assert x not in self._forward and y not in self._backward
        self._forward[x] = y
        self._backward[y] = x

    def defined_points(self) -> int:
        return len(self._forward)

    def defined_pairs(self) -> list[tuple[Element, Element]]:
        return list(self._forward.items())

    def check_invariants(self) -> None:
        """Assert the defined graph is a partial bijection (test use)."""
        assert len(self._forward) == len(self._backward)
        for x, y in self._forward.items():
            assert self._backward[y] == x


class LazyFunction:
    """Incrementally defined uniform random function on a group domain."""

    def __init__(self, group: GroupHandle, rng: random.Random):
        self.group = group
        self.rng = rng
        self._table: dict[Element, Element] = {}

    def query(self, v: Element) -> Element:
        self.group.validate(v)
        hit = self._table.get(v)
        if hit is not None:
            return hit
        y = self.group.sample(self.rng)
        self._table[v] = y
        return y

    __call__ = query

    def _define(self, x: Element, y: Element) -> None:
        self._table[x] = y

    def defined_points(self) -> int:
        return len(self._table)

    def defined_pairs(self) -> list[tuple[Element, Element]]:
        return list(self._table.items())


def fully_sampled_permutation(group: GroupHandle, rng: random.Random) -> LazyPermutation:
    """Eagerly sampled permutation, uniform over all |G|! permutations.

    Only available under the enumeration cap; enumerate() raises
    CapacityError above it.
    """
    elements = group.enumerate()
    images = list(elements)
    rng.shuffle(images)
    perm = LazyPermutation(group, rng)
    for x, y in zip(elements, images):
        perm._define(x, y)
    return perm
