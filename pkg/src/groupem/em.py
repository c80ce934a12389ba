"""The one-key Even-Mansour cipher over a finite group.

Encryption is E_k(m) = P(m * k) * k and decryption is
D_k(c) = P^-1(c * k^-1) * k^-1, where P is a public random permutation and
all products multiply on the right, exactly in that order.  The order
matters: the scheme lives on arbitrary, not necessarily abelian, groups.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .groups import Element, GroupHandle
from .oracles import LazyPermutation


def em_keygen(group: GroupHandle, rng: random.Random) -> Element:
    """Uniform key over the group."""
    return group.sample(rng)


@dataclass
class EmInstance:
    """A keyed cipher sharing one lazy permutation for both directions.

    Encrypt and decrypt go through the same LazyPermutation so the forward
    and backward views can never diverge.
    """

    group: GroupHandle
    key: Element
    perm: LazyPermutation

    def encrypt(self, m: Element) -> Element:
        g = self.group
        return g.op(self.perm.forward(g.op(m, self.key)), self.key)

    def decrypt(self, c: Element) -> Element:
        g = self.group
        key_inv = g.inv(self.key)
        return g.op(self.perm.backward(g.op(c, key_inv)), key_inv)


def make_em_instance(
    group: GroupHandle,
    rng: random.Random,
    key: Optional[Element] = None,
    perm: Optional[LazyPermutation] = None,
) -> EmInstance:
    """Fresh instance; pass ``key`` to plant a known key (attack tests)."""
    if key is None:
        key = em_keygen(group, rng)
    else:
        group.validate(key)
    if perm is None:
        perm = LazyPermutation(group, rng)
    return EmInstance(group, key, perm)
