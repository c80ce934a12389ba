"""Feistel ciphers on G x G, and Even-Mansour built on top of them.

One round maps (x, y) to (y, x * f(y)).  The inverse round recovers the
input from (L, R) as (R * f(L)^-1, L), which works whether or not the round
function f is injective, so any number of rounds is invertible.

FeistelEmInstance is the composition studied here: the one-key group
Even-Mansour scheme on G^2 whose public permutation is the 4-round Feistel
network with round functions (g, f, f, g).  The key acts coordinatewise on
the right.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import ConfigError
from .groups import Element, GroupHandle
from .oracles import LazyFunction, spawn

#: a round function: any callable G -> G (LazyFunction instances qualify).
RoundFunction = Callable[[Element], Element]

ENCRYPT = "encrypt"
DECRYPT = "decrypt"


@dataclass(frozen=True, slots=True)
class FeistelPair:
    """A point of G x G; both halves must belong to the same group."""

    left: Element
    right: Element


def feistel_round(group: GroupHandle, f: RoundFunction, p: FeistelPair) -> FeistelPair:
    """(x, y) -> (y, x * f(y))."""
    group.validate(p.left)
    group.validate(p.right)
    return FeistelPair(p.right, group.op(p.left, f(p.right)))


def feistel_unround(group: GroupHandle, f: RoundFunction, p: FeistelPair) -> FeistelPair:
    """Inverse of feistel_round, valid for arbitrary (non-injective) f."""
    group.validate(p.left)
    group.validate(p.right)
    prev_right = p.left
    prev_left = group.op(p.right, group.inv(f(prev_right)))
    return FeistelPair(prev_left, prev_right)


def feistel_apply(
    group: GroupHandle,
    rounds: Sequence[RoundFunction],
    p: FeistelPair,
    direction: str = ENCRYPT,
) -> FeistelPair:
    """Run the full cipher: rounds in order, or inverted in reverse order."""
    if not rounds:
        raise ConfigError("round function chain must not be empty")
    if direction == ENCRYPT:
        for f in rounds:
            p = feistel_round(group, f, p)
    elif direction == DECRYPT:
        for f in reversed(rounds):
            p = feistel_unround(group, f, p)
    else:
        raise ConfigError(f"unknown direction {direction!r}")
    return p


def random_round_functions(group: GroupHandle, r: int, rng: random.Random) -> list[LazyFunction]:
    """r independent lazy random round functions."""
    if r < 1:
        raise ConfigError("need at least one round")
    return [LazyFunction(group, spawn(rng)) for _ in range(r)]


@dataclass
class FeistelEmInstance:
    """Even-Mansour on G^2 with the 4-round Feistel (g, f, f, g) as P.

    Rounds 1 and 4 consult the same lazy g, rounds 2 and 3 the same lazy f:
    the round functions are shared handles, not copies.
    """

    group: GroupHandle
    key_left: Element
    key_right: Element
    f: LazyFunction
    g: LazyFunction

    def rounds(self) -> tuple[RoundFunction, ...]:
        return (self.g.query, self.f.query, self.f.query, self.g.query)

    def _shift(self, p: FeistelPair, kl: Element, kr: Element) -> FeistelPair:
        grp = self.group
        return FeistelPair(grp.op(p.left, kl), grp.op(p.right, kr))

    def encrypt(self, p: FeistelPair) -> FeistelPair:
        out = feistel_apply(self.group, self.rounds(), self._shift(p, self.key_left, self.key_right))
        return self._shift(out, self.key_left, self.key_right)

    def decrypt(self, p: FeistelPair) -> FeistelPair:
        grp = self.group
        kl_inv, kr_inv = grp.inv(self.key_left), grp.inv(self.key_right)
        out = feistel_apply(self.group, self.rounds(), self._shift(p, kl_inv, kr_inv), DECRYPT)
        return self._shift(out, kl_inv, kr_inv)


def make_feistel_em(
    group: GroupHandle,
    rng: random.Random,
    key: tuple[Element, Element] | None = None,
) -> FeistelEmInstance:
    """Fresh instance with independent uniform subkeys and fresh f, g."""
    if key is None:
        key = (group.sample(rng), group.sample(rng))
    kl, kr = key
    group.validate(kl)
    group.validate(kr)
    return FeistelEmInstance(group, kl, kr, LazyFunction(group, spawn(rng)), LazyFunction(group, spawn(rng)))


def random_pair(group: GroupHandle, rng: random.Random) -> FeistelPair:
    return FeistelPair(group.sample(rng), group.sample(rng))
