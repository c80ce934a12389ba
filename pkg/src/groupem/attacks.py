"""Constructive breaks: Feistel distinguishers and the slide attack.

The three Feistel distinguishers are one-sided tests with perfect
completeness: against the cipher they are built for, the tested relation
holds on every trial, so a single failed relation is proof of a random
oracle.  Conversely each relation holds only with probability about 1/|G|
per trial against a uniform permutation.

The slide attack recovers the Even-Mansour key from d encryption-oracle
queries and d permutation-oracle queries.  A pair (x_i, y_j) with
y_j = x_i * k satisfies E(x_i) * y_j^-1 = P(y_j) * x_i^-1 and reveals the
key as x_i^-1 * y_j; with d near sqrt(|G|) the d^2 cross pairs make such a
slid pair a birthday-bound event.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .errors import ConfigError
from .feistel import FeistelPair, random_pair
from .groups import Element, GroupHandle, sample_distinct

PairOracle = Callable[[FeistelPair], FeistelPair]
PointOracle = Callable[[Element], Element]

CIPHER = "cipher"
RANDOM = "random"


@dataclass(frozen=True)
class Verdict:
    """Distinguisher output: the guess plus the per-trial relation rate."""

    guess: str
    trials: int
    success_rate: float


@dataclass(frozen=True)
class SlideConfig:
    d: int  # number of E-queries = number of P-queries
    verify_checks: int = 8

    def __post_init__(self):
        if self.d < 1:
            raise ConfigError("slide attack needs d >= 1")
        if self.verify_checks < 1:
            raise ConfigError("verify_checks must be >= 1")


def default_slide_config(group: GroupHandle) -> SlideConfig:
    """The birthday choice d = ceil(sqrt(|G|))."""
    return SlideConfig(d=math.isqrt(group.order - 1) + 1)


def distinguish_f1(oracle: PairOracle, group: GroupHandle, trials: int, rng: random.Random) -> Verdict:
    """One-round break: the output left half always equals the input right half."""
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    hits = 0
    for _ in range(trials):
        p = random_pair(group, rng)
        hits += oracle(p).left == p.right
    return Verdict(CIPHER if hits == trials else RANDOM, trials, hits / trials)


def distinguish_f2(
    oracle: PairOracle,
    group: GroupHandle,
    probes: Sequence[Element] | Element,
    rng: random.Random,
) -> Verdict:
    """Two-round break via (1, probe) and (probe_l, probe) queries.

    The first query leaks the round-one output L2; the second query's left
    output then satisfies L2' * L2^-1 = probe_l.  Guesses cipher only if
    the relation holds for every probe.  Probes must not be the identity.
    """
    if isinstance(probes, Element):
        probes = [probes]
    probes = list(probes)
    if not probes:
        raise ConfigError("need at least one probe")
    one = group.identity()
    if any(p == one for p in probes):
        raise ConfigError("probes must not be the identity element")
    hits = 0
    for probe in probes:
        leaked = oracle(FeistelPair(one, probe)).left
        probe_l = sample_excluding_identity(group, rng)
        shifted = oracle(FeistelPair(probe_l, probe)).left
        hits += group.op(shifted, group.inv(leaked)) == probe_l
    n = len(probes)
    return Verdict(CIPHER if hits == n else RANDOM, n, hits / n)


def sample_excluding_identity(group: GroupHandle, rng: random.Random) -> Element:
    one = group.identity()
    while True:
        e = group.sample(rng)
        if e != one:
            return e


def distinguish_f3_sprp(
    enc_oracle: PairOracle,
    dec_oracle: PairOracle,
    group: GroupHandle,
    trials: int,
    rng: random.Random,
) -> Verdict:
    """Three-round break needing both oracle directions.

    Per trial: encrypt (L0, R0) and (L0', R0) with L0 != L0', decrypt
    (L3', L0 * L0'^-1 * R3'), and test R0'' = L3' * L3^-1 * R0.  The test
    passes with probability 1 for the 3-round cipher and only by collision
    for a random permutation.
    """
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    hits = 0
    for _ in range(trials):
        l0 = group.sample(rng)
        l0_alt = sample_excluding_one(group, rng, l0)
        r0 = group.sample(rng)
        out = enc_oracle(FeistelPair(l0, r0))
        out_alt = enc_oracle(FeistelPair(l0_alt, r0))
        probe = FeistelPair(
            out_alt.left,
            group.op(group.op(l0, group.inv(l0_alt)), out_alt.right),
        )
        back = dec_oracle(probe)
        target = group.op(group.op(out_alt.left, group.inv(out.left)), r0)
        hits += back.right == target
    return Verdict(CIPHER if hits == trials else RANDOM, trials, hits / trials)


def sample_excluding_one(group: GroupHandle, rng: random.Random, avoid: Element) -> Element:
    while True:
        e = group.sample(rng)
        if e != avoid:
            return e


def slide_attack(
    enc_oracle: PointOracle,
    perm_oracle: PointOracle,
    group: GroupHandle,
    cfg: SlideConfig,
    rng: random.Random,
) -> Optional[Element]:
    """Recover the Even-Mansour key, or None if no candidate verifies.

    Issues exactly cfg.d queries to each oracle to collect the rows, then
    scans all d^2 cross pairs for the slid relation
    E(x_i) * y_j^-1 = P(y_j) * x_i^-1.  Every matching candidate
    k = x_i^-1 * y_j is checked with verify_key (its checks are the
    attack's separate verification step and cost extra queries); the first
    verified key wins.
    """
    xs = sample_distinct(group, cfg.d, rng)
    ys = sample_distinct(group, cfg.d, rng)
    enc_rows = [(x, group.inv(x), enc_oracle(x)) for x in xs]
    perm_rows = [(y, group.inv(y), perm_oracle(y)) for y in ys]

    candidates: list[Element] = []
    seen: set[Element] = set()
    for y, y_inv, p_y in perm_rows:
        for x, x_inv, e_x in enc_rows:
            if group.op(e_x, y_inv) == group.op(p_y, x_inv):
                key = group.op(x_inv, y)
                if key not in seen:
                    seen.add(key)
                    candidates.append(key)
    for key in candidates:
        if verify_key(enc_oracle, perm_oracle, group, key, cfg.verify_checks, rng):
            return key
    return None


def verify_key(
    enc_oracle: PointOracle,
    perm_oracle: PointOracle,
    group: GroupHandle,
    key: Element,
    n_checks: int,
    rng: random.Random,
) -> bool:
    """True iff E(x) = P(x * k) * k for n_checks fresh random x."""
    if n_checks < 1:
        raise ConfigError("n_checks must be >= 1")
    group.validate(key)
    for _ in range(n_checks):
        x = group.sample(rng)
        if enc_oracle(x) != group.op(perm_oracle(group.op(x, key)), key):
            return False
    return True
