"""Security games, bad-event detectors, and evaluable advantage bounds.

The module has four layers:

* transcripts of a 4-oracle run plus the pure detectors (consistency,
  key-collision events) whose probabilities drive the closed-form bounds;
* the bounds themselves, evaluated in exact rational arithmetic;
* executable games: forgery (EFP) and cracking (CP) for Even-Mansour,
  Monte-Carlo advantage estimation between oracle worlds, and the lazily
  sampled bookkeeping games used in the proofs;
* an exhaustive equivalence checker that enumerates every random draw of
  two bookkeeping games on a tiny group and compares the induced
  distributions exactly.

Adversaries are deterministic query strategies (plain callables that
receive an oracle bundle and return an output bit); randomized adversaries
are expressed by seeding the strategy externally.  Game harnesses enforce
the standing assumption that an adversary never re-asks a query whose
answer it could already derive.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Callable, Optional, Sequence

from .em import EmInstance, make_em_instance
from .errors import BudgetError, CapacityError, ConfigError, ProtocolError
from .feistel import FeistelPair, make_feistel_em
from .groups import Element, GroupHandle, ProductGroup, sample_distinct
from .oracles import LazyFunction, LazyPermutation, sample_excluding, spawn

# ---------------------------------------------------------------------------
# transcripts and bad-event detectors
# ---------------------------------------------------------------------------

FORWARD = "+"
BACKWARD = "-"


@dataclass(frozen=True)
class CipherRecord:
    """One cipher query-answer pair, oriented input -> output.

    ``direction`` records how it was learned: "+" for a forward query
    (x was asked), "-" for a backward query (y was asked).
    """

    direction: str
    x: FeistelPair
    y: FeistelPair


@dataclass
class Transcript:
    """The (cipher, f, g) query history of one 4-oracle adversary run."""

    group: GroupHandle
    cipher_pairs: list[CipherRecord]
    f_pairs: list[tuple[Element, Element]]
    g_pairs: list[tuple[Element, Element]]

    @property
    def q_c(self) -> int:
        return len(self.cipher_pairs)

    @property
    def q_f(self) -> int:
        return len(self.f_pairs)

    @property
    def q_g(self) -> int:
        return len(self.g_pairs)


def check_consistency(tr: Transcript) -> bool:
    """False iff two cipher pairs share an input with different outputs
    or share an output with different inputs."""
    by_x: dict[FeistelPair, FeistelPair] = {}
    by_y: dict[FeistelPair, FeistelPair] = {}
    for rec in tr.cipher_pairs:
        if by_x.get(rec.x, rec.y) != rec.y:
            return False
        if by_y.get(rec.y, rec.x) != rec.x:
            return False
        by_x[rec.x] = rec.y
        by_y[rec.y] = rec.x
    return True


def detect_badg(tr: Transcript, key: tuple[Element, Element]) -> bool:
    """Key collision between cipher-internal g inputs and direct g queries.

    True iff some cipher pair and some g query satisfy
    x_i^R * k^R = x''_j (first/forward round) or
    y_i^L * (k^L)^-1 = x''_j (fourth/backward round).
    """
    if not tr.g_pairs or not tr.cipher_pairs:
        return False
    grp = tr.group
    kl, kr = key
    kl_inv = grp.inv(kl)
    g_inputs = {x for x, _ in tr.g_pairs}
    for rec in tr.cipher_pairs:
        if grp.op(rec.x.right, kr) in g_inputs:
            return True
        if grp.op(rec.y.left, kl_inv) in g_inputs:
            return True
    return False


def detect_bad(tr: Transcript, key: tuple[Element, Element], g_func: LazyFunction) -> bool:
    """Collision among the middle-round f inputs induced by (key, g).

    For each cipher pair the forward f input is
    X_i = x_i^L * k^L * g(x_i^R * k^R) and the backward one is
    Y_i = y_i^R * (k^R)^-1 * (g(y_i^L * (k^L)^-1))^-1; evaluating g lazily
    defines any missing points.  True iff two of these collide with each
    other (in any combination) or with a direct f query input.
    """
    grp = tr.group
    kl, kr = key
    kl_inv, kr_inv = grp.inv(kl), grp.inv(kr)
    xs = [
        grp.op(grp.op(rec.x.left, kl), g_func(grp.op(rec.x.right, kr)))
        for rec in tr.cipher_pairs
    ]
    ys = [
        grp.op(grp.op(rec.y.right, kr_inv), grp.inv(g_func(grp.op(rec.y.left, kl_inv))))
        for rec in tr.cipher_pairs
    ]
    if len(set(xs)) < len(xs):
        return True
    if len(set(ys)) < len(ys):
        return True
    if set(xs) & set(ys):
        return True
    f_inputs = {x for x, _ in tr.f_pairs}
    if f_inputs & set(xs) or f_inputs & set(ys):
        return True
    return False


def random_consistent_transcript(
    group: GroupHandle, q_c: int, q_f: int, q_g: int, rng: random.Random
) -> Transcript:
    """A uniformly random possible-and-consistent transcript: distinct
    cipher inputs, distinct cipher outputs, distinct f and g inputs."""
    xs = _distinct_pairs(group, q_c, rng)
    ys = _distinct_pairs(group, q_c, rng)
    cipher = [CipherRecord(FORWARD, x, y) for x, y in zip(xs, ys)]
    f_pairs = [(x, group.sample(rng)) for x in sample_distinct(group, q_f, rng)] if q_f else []
    g_pairs = [(x, group.sample(rng)) for x in sample_distinct(group, q_g, rng)] if q_g else []
    return Transcript(group, cipher, f_pairs, g_pairs)


def _distinct_pairs(group: GroupHandle, count: int, rng: random.Random) -> list[FeistelPair]:
    if count > group.order * group.order:
        raise CapacityError("more distinct pairs requested than the square of the group")
    seen: set[FeistelPair] = set()
    out: list[FeistelPair] = []
    while len(out) < count:
        p = FeistelPair(group.sample(rng), group.sample(rng))
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


# ---------------------------------------------------------------------------
# closed-form bounds, in exact rational arithmetic
# ---------------------------------------------------------------------------


def fem_advantage_bound(q_c: int, q_f: int, q_g: int, order: int) -> Fraction:
    """Distinguishing-advantage bound for the Feistel-EM cipher on G^2
    against a 4-oracle adversary with q_c cipher, q_f f and q_g g queries:

        (2*q_c^2 + 4*q_f*q_c + 4*q_g*q_c + 2*q_c^2 - 2*q_c) / |G|
        + 2 * C(q_c, 2) * (2/|G| + 1/|G|^2)

    evaluated exactly as written.
    """
    _check_counts(q_c=q_c, q_f=q_f, q_g=q_g)
    _check_order(order)
    lead = 2 * q_c * q_c + 4 * q_f * q_c + 4 * q_g * q_c + 2 * q_c * q_c - 2 * q_c
    tail = 2 * comb(q_c, 2) * (Fraction(2, order) + Fraction(1, order * order))
    return Fraction(lead, order) + tail


def fem_advantage_bound_total(q: int, order: int) -> Fraction:
    """Same bound restated for q total queries of any mix:
    2*(3*q^2 - 2*q)/|G| + (q^2 - q)/|G|^2."""
    _check_counts(q=q)
    _check_order(order)
    return Fraction(2 * (3 * q * q - 2 * q), order) + Fraction(q * q - q, order * order)


def em_bad_key_bound(s: int, t: int, order: int) -> Fraction:
    """Probability bound min(1, 2*s*t/|G|) that a uniform key collides with
    a fixed transcript of s cipher and t permutation pairs."""
    _check_counts(s=s, t=t)
    _check_order(order)
    return min(Fraction(1), Fraction(2 * s * t, order))


def badg_event_bound(q_c: int, q_g: int, order: int) -> Fraction:
    """Union bound 2*q_g*q_c/|G| on detect_badg firing for a uniform key."""
    _check_counts(q_c=q_c, q_g=q_g)
    _check_order(order)
    return Fraction(2 * q_g * q_c, order)


def bad_event_bound(q_c: int, q_f: int, order: int) -> Fraction:
    """Union bound (q_c^2 + 2*q_f*q_c + 2*C(q_c,2))/|G| on detect_bad firing
    for a uniform key and uniform g."""
    _check_counts(q_c=q_c, q_f=q_f)
    _check_order(order)
    return Fraction(q_c * q_c + 2 * q_f * q_c + 2 * comb(q_c, 2), order)


def _check_counts(**counts: int) -> None:
    for name, value in counts.items():
        if value < 0:
            raise ConfigError(f"{name} must be nonnegative, got {value}")


def _check_order(order: int) -> None:
    if order < 2:
        raise ConfigError(f"group order must be >= 2, got {order}")


def key_is_bad(
    group: GroupHandle,
    key: Element,
    s_pairs: Sequence[tuple[Element, Element]],
    t_pairs: Sequence[tuple[Element, Element]],
) -> bool:
    """True iff some (m, c) cipher pair and (x, y) permutation pair satisfy
    m * k = x or c * k^-1 = y."""
    key_inv = group.inv(key)
    t1 = {x for x, _ in t_pairs}
    t2 = {y for _, y in t_pairs}
    for m, c in s_pairs:
        if group.op(m, key) in t1 or group.op(c, key_inv) in t2:
            return True
    return False


def count_bad_keys(group, s_pairs, t_pairs) -> int:
    """Exhaustive bad-key count over the whole group (capped enumeration)."""
    return sum(1 for k in group.enumerate() if key_is_bad(group, k, s_pairs, t_pairs))


# ---------------------------------------------------------------------------
# budgets, flags, surfaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QueryBudget:
    """Query allowances: s (E/D), t (P/P^-1) for the Even-Mansour setting;
    q_c (cipher, both directions combined), q_f, q_g for the G^2 setting."""

    s: int = 0
    t: int = 0
    q_c: int = 0
    q_f: int = 0
    q_g: int = 0

    def __post_init__(self):
        for name in ("s", "t", "q_c", "q_f", "q_g"):
            if getattr(self, name) < 0:
                raise ConfigError(f"budget {name} must be nonnegative")


class GameFlag:
    """Monotone bad-event flag: once set it never clears within a run."""

    __slots__ = ("bad",)

    def __init__(self) -> None:
        self.bad = False

    def mark(self) -> None:
        self.bad = True

    def __repr__(self) -> str:  # pragma: no cover
        return f"GameFlag(bad={self.bad})"


class _Refused:
    """The decryption refusal sentinel: a distinguished non-element."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "REFUSED"


REFUSED = _Refused()


class EmAttackSurface:
    """Budget-enforced oracle access to a live Even-Mansour instance.

    Used by the forgery and cracking games.  Records every pair the
    adversary establishes through E/D so freshness can be judged later.
    """

    def __init__(self, inst: EmInstance, budget: QueryBudget, refuse: Optional[Element] = None):
        self.inst = inst
        self.budget = budget
        self.refuse = refuse
        self.s_used = 0
        self.t_used = 0
        self.established: set[tuple[Element, Element]] = set()

    def _spend_ed(self):
        self.s_used += 1
        if self.s_used > self.budget.s:
            raise BudgetError(f"E/D budget {self.budget.s} exceeded")

    def _spend_p(self):
        self.t_used += 1
        if self.t_used > self.budget.t:
            raise BudgetError(f"P budget {self.budget.t} exceeded")

    def enc(self, m: Element) -> Element:
        self._spend_ed()
        c = self.inst.encrypt(m)
        self.established.add((m, c))
        return c

    def dec(self, c: Element):
        self._spend_ed()
        if self.refuse is not None and c == self.refuse:
            return REFUSED
        m = self.inst.decrypt(c)
        self.established.add((m, c))
        return m

    def perm(self, x: Element) -> Element:
        self._spend_p()
        return self.inst.perm.forward(x)

    def perm_inv(self, y: Element) -> Element:
        self._spend_p()
        return self.inst.perm.backward(y)


def run_efp(adversary, group: GroupHandle, budget: QueryBudget, rng: random.Random, *, key=None) -> bool:
    """Existential forgery game.

    The adversary gets oracle access and outputs a pair (m, c); it wins iff
    E_k(m) = c and the pair was not established by one of its own queries.
    ``key`` plants a known key (sanity harness only).
    """
    inst = make_em_instance(group, rng, key=key)
    surface = EmAttackSurface(inst, budget)
    m, c = adversary(surface, group)
    group.validate(m)
    group.validate(c)
    if (m, c) in surface.established:
        return False
    return inst.encrypt(m) == c


def run_cp(adversary, group: GroupHandle, budget: QueryBudget, rng: random.Random, *, key=None) -> bool:
    """Cracking game: decrypt a random challenge without querying it.

    The decryption oracle answers REFUSED for exactly the challenge
    ciphertext; the adversary wins iff it outputs the challenge plaintext.
    """
    inst = make_em_instance(group, rng, key=key)
    m0 = group.sample(rng)
    c0 = inst.encrypt(m0)
    surface = EmAttackSurface(inst, budget, refuse=c0)
    m = adversary(c0, surface, group)
    return m == m0


# ---------------------------------------------------------------------------
# advantage estimation between oracle worlds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdvantageEstimate:
    """Measured distinguishing advantage with its exact closed-form bound.

    ci_halfwidth is the sum of per-world exact (Clopper-Pearson) 99%
    binomial halfwidths, so measured <= true advantage + ci_halfwidth with
    98% confidence at least.
    """

    measured: float
    samples: int
    ci_halfwidth: float
    bound: Optional[Fraction]
    real_rate: float
    ideal_rate: float


def clopper_pearson_halfwidth(successes: int, n: int, confidence: float = 0.99) -> float:
    """Largest one-sided deviation of the exact binomial CI from p-hat."""
    from scipy.stats import beta

    alpha = 1.0 - confidence
    p = successes / n
    lo = 0.0 if successes == 0 else float(beta.ppf(alpha / 2, successes, n - successes + 1))
    hi = 1.0 if successes == n else float(beta.ppf(1 - alpha / 2, successes + 1, n - successes))
    return max(p - lo, hi - p)


def estimate_advantage(
    adversary,
    real_world,
    ideal_world,
    samples: int,
    rng: random.Random,
    bound: Optional[Fraction] = None,
) -> AdvantageEstimate:
    """|p_real - p_ideal| over ``samples`` fresh oracle bundles per world.

    Worlds are factories rng -> oracle bundle; the adversary is a callable
    bundle -> bit.  Both worlds must expose the same oracle signature.
    """
    if samples < 1:
        raise ConfigError("samples must be >= 1")
    real_hits = sum(int(bool(adversary(real_world(spawn(rng))))) for _ in range(samples))
    ideal_hits = sum(int(bool(adversary(ideal_world(spawn(rng))))) for _ in range(samples))
    ci = clopper_pearson_halfwidth(real_hits, samples) + clopper_pearson_halfwidth(ideal_hits, samples)
    return AdvantageEstimate(
        measured=abs(real_hits - ideal_hits) / samples,
        samples=samples,
        ci_halfwidth=ci,
        bound=bound,
        real_rate=real_hits / samples,
        ideal_rate=ideal_hits / samples,
    )


@dataclass(frozen=True)
class CipherOracles:
    """The 4-oracle bundle of the G^2 setting: cipher both ways, f, g."""

    encrypt: Callable[[FeistelPair], FeistelPair]
    decrypt: Callable[[FeistelPair], FeistelPair]
    f: Callable[[Element], Element]
    g: Callable[[Element], Element]


class RandomPairPermutation:
    """Uniform lazy permutation of G^2 exposed on FeistelPair values."""

    def __init__(self, group: GroupHandle, rng: random.Random):
        self.group = group
        self.pair_group = ProductGroup(group, group)
        self.perm = LazyPermutation(self.pair_group, rng)

    def _pack(self, p: FeistelPair) -> Element:
        return self.pair_group.combine(p.left, p.right)

    def _unpack(self, e: Element) -> FeistelPair:
        a, b = self.pair_group.split(e)
        return FeistelPair(a, b)

    def encrypt(self, p: FeistelPair) -> FeistelPair:
        return self._unpack(self.perm.forward(self._pack(p)))

    def decrypt(self, p: FeistelPair) -> FeistelPair:
        return self._unpack(self.perm.backward(self._pack(p)))


def feistel_em_world(group: GroupHandle):
    """Factory for the real world: a fresh keyed Feistel-EM cipher plus its
    own public f and g oracles."""

    def factory(rng: random.Random) -> CipherOracles:
        inst = make_feistel_em(group, rng)
        return CipherOracles(inst.encrypt, inst.decrypt, inst.f.query, inst.g.query)

    return factory


def ideal_cipher_world(group: GroupHandle):
    """Factory for the ideal world: a uniform permutation of G^2 plus
    independent random f and g oracles."""

    def factory(rng: random.Random) -> CipherOracles:
        perm = RandomPairPermutation(group, spawn(rng))
        f = LazyFunction(group, spawn(rng))
        g = LazyFunction(group, spawn(rng))
        return CipherOracles(perm.encrypt, perm.decrypt, f.query, g.query)

    return factory


@dataclass(frozen=True)
class EmOracles:
    """The 4-oracle bundle of the Even-Mansour SPRP setting."""

    enc: Callable[[Element], Element]
    dec: Callable[[Element], Element]
    perm: Callable[[Element], Element]
    perm_inv: Callable[[Element], Element]


def em_real_world(group: GroupHandle):
    def factory(rng: random.Random) -> EmOracles:
        inst = make_em_instance(group, rng)
        return EmOracles(inst.encrypt, inst.decrypt, inst.perm.forward, inst.perm.backward)

    return factory


def em_ideal_world(group: GroupHandle):
    """Independent uniform permutations for the cipher and for P."""

    def factory(rng: random.Random) -> EmOracles:
        pi = LazyPermutation(group, spawn(rng))
        perm = LazyPermutation(group, spawn(rng))
        return EmOracles(pi.forward, pi.backward, perm.forward, perm.backward)

    return factory


def make_sprp_break_adversary(group: GroupHandle, rng: random.Random):
    """Deterministic 4-oracle adversary built from the 3-round break.

    Probe points are fixed at construction, so the adversary itself is a
    deterministic map from oracle answers to an output bit; it spends 3
    cipher queries and no f/g queries.
    """
    l0 = group.sample(rng)
    l0_alt = sample_excluding(group, rng, {l0})
    r0 = group.sample(rng)

    def adversary(oracles: CipherOracles) -> int:
        out = oracles.encrypt(FeistelPair(l0, r0))
        out_alt = oracles.encrypt(FeistelPair(l0_alt, r0))
        probe = FeistelPair(
            out_alt.left,
            group.op(group.op(l0, group.inv(l0_alt)), out_alt.right),
        )
        back = oracles.decrypt(probe)
        target = group.op(group.op(out_alt.left, group.inv(out.left)), r0)
        return int(back.right == target)

    return adversary


# ---------------------------------------------------------------------------
# choice sources: seeded play and exhaustive enumeration
# ---------------------------------------------------------------------------


class SeededChoices:
    """Random play.  Draws go through the group sampler, and draws from a
    complement use the same rejection loop as LazyPermutation, so a game
    scripted this way consumes its rng exactly like the direct cipher."""

    def __init__(self, rng: random.Random):
        self.rng = rng

    def uniform(self, group: GroupHandle) -> Element:
        return group.sample(self.rng)

    def uniform_excluding(self, group: GroupHandle, used) -> Element:
        return sample_excluding(group, self.rng, used)

    def uniform_excluding_where(self, group: GroupHandle, used, reject) -> Element:
        # the literal "draw again until acceptable" loop
        while True:
            v = sample_excluding(group, self.rng, used)
            if not reject(v):
                return v


class PathChoices:
    """Replays one root-to-leaf path of the choice tree, recording branch
    arity and exact path weight; enumerate_outcomes drives it."""

    def __init__(self, prescribed: tuple[int, ...]):
        self.prescribed = prescribed
        self.pos = 0
        self.branch_counts: list[int] = []
        self.weight = Fraction(1)

    def _pick(self, options: list):
        if not options:
            raise CapacityError("empty choice set during enumeration")
        idx = self.prescribed[self.pos] if self.pos < len(self.prescribed) else 0
        self.branch_counts.append(len(options))
        self.pos += 1
        self.weight /= len(options)
        return options[idx]

    def uniform(self, group: GroupHandle) -> Element:
        return self._pick(list(group.enumerate()))

    def uniform_excluding(self, group: GroupHandle, used) -> Element:
        return self._pick([e for e in group.enumerate() if e not in used])

    def uniform_excluding_where(self, group: GroupHandle, used, reject) -> Element:
        return self._pick([e for e in group.enumerate() if e not in used and not reject(e)])


def enumerate_outcomes(play) -> dict:
    """Exact outcome distribution of ``play(choices)`` over all draws.

    ``play`` must be a pure function of its choice source.  Outcomes must
    be hashable; the returned weights are Fractions summing to 1.
    """
    dist: dict = {}
    stack: list[tuple[int, ...]] = [()]
    while stack:
        prefix = stack.pop()
        src = PathChoices(prefix)
        outcome = play(src)
        dist[outcome] = dist.get(outcome, Fraction(0)) + src.weight
        counts = src.branch_counts
        for i in range(len(prefix), len(counts)):
            base = prefix + (0,) * (i - len(prefix))
            for j in range(1, counts[i]):
                stack.append(base + (j,))
    return dist


# ---------------------------------------------------------------------------
# the bookkeeping games
# ---------------------------------------------------------------------------

# Even-Mansour-setting variants (oracles E, D, P, P^-1 on G):
EM_DIRECT = "em-direct"  # answer by running the lazy cipher itself
EM_MONITORED = "em-monitored"  # independent E table, collisions flagged and repaired
IDEAL_MONITORED = "ideal-monitored"  # independent E and P tables, collisions flagged
IDEAL_DEFERRED = "ideal-deferred-key"  # like ideal, key drawn after the run

# G^2-setting variants (oracles cipher+/-, f, g):
IDEAL_UNCONSTRAINED = "ideal-unconstrained"  # cipher answers fresh uniform pairs
FEM = "fem"  # the real Feistel-EM world
FEM_SPLIT_G = "fem-split-g"  # real cipher, but the public g oracle is independent

_EM_VARIANTS = {EM_DIRECT, EM_MONITORED, IDEAL_MONITORED, IDEAL_DEFERRED}
_PAIR_VARIANTS = {IDEAL_UNCONSTRAINED, FEM, FEM_SPLIT_G}

GAME_VARIANTS = tuple(sorted(_EM_VARIANTS | _PAIR_VARIANTS))


@dataclass
class GameRun:
    """Everything a finished game run exposes (tests use the extras)."""

    bit: int
    flag: GameFlag
    answers: tuple
    key: object
    s_pairs: Optional[list[tuple[Element, Element]]] = None
    t_pairs: Optional[list[tuple[Element, Element]]] = None
    transcript: Optional[Transcript] = None


def script_strategy(queries: Sequence[tuple[str, object]], bit: int = 0):
    """A fixed query script as a strategy; ``queries`` holds
    (oracle_method_name, argument) pairs."""

    def play(oracles) -> int:
        for kind, value in queries:
            getattr(oracles, kind)(value)
        return bit

    return play


def run_game(variant: str, strategy, group: GroupHandle, budget: QueryBudget, rng: random.Random):
    """Play one seeded run of a bookkeeping game.

    The strategy receives the game's oracle object (methods enc/dec/perm/
    perm_inv for Even-Mansour variants, forward/backward/f/g for the G^2
    variants) and returns its output bit.  Returns (bit, GameFlag).
    """
    src = SeededChoices(rng)
    if variant in _EM_VARIANTS:
        run = _play_em_game(variant, strategy, group, budget, src)
    elif variant in _PAIR_VARIANTS:
        run = _play_pair_game(variant, strategy, group, budget, src)
    else:
        raise ConfigError(f"unknown game variant {variant!r}")
    return run.bit, run.flag


class _EmGame:
    """Shared state machine for the four Even-Mansour-setting games.

    view_s / view_t are the adversary-visible transcripts and drive both
    the no-derivable-repeat rule and the deferred bad-key check; em-direct
    additionally keeps the merged permutation table it answers from.
    """

    def __init__(self, variant, group, budget, src, skip_redefine=False):
        self.variant = variant
        self.group = group
        self.budget = budget
        self.src = src
        self.skip_redefine = skip_redefine
        self.flag = GameFlag()
        self.answers: list[Element] = []
        self.view_s_fwd: dict[Element, Element] = {}
        self.view_s_bwd: dict[Element, Element] = {}
        self.view_t_fwd: dict[Element, Element] = {}
        self.view_t_bwd: dict[Element, Element] = {}
        self.phat_fwd: dict[Element, Element] = {}
        self.phat_bwd: dict[Element, Element] = {}
        self.s_used = 0
        self.t_used = 0
        if variant == IDEAL_DEFERRED:
            self.key = None
            self.key_inv = None
        else:
            self.key = src.uniform(group)
            self.key_inv = group.inv(self.key)

    # -- bookkeeping helpers

    def _spend_ed(self):
        self.s_used += 1
        if self.s_used > self.budget.s:
            raise BudgetError(f"E/D budget {self.budget.s} exceeded")

    def _spend_p(self):
        self.t_used += 1
        if self.t_used > self.budget.t:
            raise BudgetError(f"P budget {self.budget.t} exceeded")

    def _answer(self, value: Element) -> Element:
        self.answers.append(value)
        return value

    # -- the four oracles

    def enc(self, m: Element) -> Element:
        self.group.validate(m)
        if m in self.view_s_fwd:
            raise ProtocolError("E-query repeats a derivable plaintext")
        self._spend_ed()
        grp, src = self.group, self.src
        if self.variant == EM_DIRECT:
            mk = grp.op(m, self.key)
            hit = self.phat_fwd.get(mk)
            if hit is None:
                hit = src.uniform_excluding(grp, self.phat_bwd)
                self.phat_fwd[mk] = hit
                self.phat_bwd[hit] = mk
            c = grp.op(hit, self.key)
        else:
            c = src.uniform_excluding(grp, self.view_s_bwd)
            if self.variant == IDEAL_MONITORED:
                if grp.op(m, self.key) in self.view_t_fwd or grp.op(c, self.key_inv) in self.view_t_bwd:
                    self.flag.mark()
            elif self.variant == EM_MONITORED:
                mk = grp.op(m, self.key)
                if mk in self.view_t_fwd:
                    self.flag.mark()
                    if not self.skip_redefine:
                        c = grp.op(self.view_t_fwd[mk], self.key)
                elif grp.op(c, self.key_inv) in self.view_t_bwd:
                    self.flag.mark()
                    c = src.uniform_excluding_where(
                        grp, self.view_s_bwd, lambda v: grp.op(v, self.key_inv) in self.view_t_bwd
                    )
        self.view_s_fwd[m] = c
        self.view_s_bwd[c] = m
        return self._answer(c)

    def dec(self, c: Element) -> Element:
        self.group.validate(c)
        if c in self.view_s_bwd:
            raise ProtocolError("D-query repeats a derivable ciphertext")
        self._spend_ed()
        grp, src = self.group, self.src
        if self.variant == EM_DIRECT:
            ck = grp.op(c, self.key_inv)
            hit = self.phat_bwd.get(ck)
            if hit is None:
                hit = src.uniform_excluding(grp, self.phat_fwd)
                self.phat_fwd[hit] = ck
                self.phat_bwd[ck] = hit
            m = grp.op(hit, self.key_inv)
        else:
            m = src.uniform_excluding(grp, self.view_s_fwd)
            if self.variant == IDEAL_MONITORED:
                if grp.op(c, self.key_inv) in self.view_t_bwd or grp.op(m, self.key) in self.view_t_fwd:
                    self.flag.mark()
            elif self.variant == EM_MONITORED:
                ck = grp.op(c, self.key_inv)
                if ck in self.view_t_bwd:
                    self.flag.mark()
                    if not self.skip_redefine:
                        m = grp.op(self.view_t_bwd[ck], self.key_inv)
                elif grp.op(m, self.key) in self.view_t_fwd:
                    self.flag.mark()
                    m = src.uniform_excluding_where(
                        grp, self.view_s_fwd, lambda v: grp.op(v, self.key) in self.view_t_fwd
                    )
        self.view_s_fwd[m] = c
        self.view_s_bwd[c] = m
        return self._answer(m)

    def perm(self, x: Element) -> Element:
        self.group.validate(x)
        if x in self.view_t_fwd:
            raise ProtocolError("P-query repeats a derivable point")
        self._spend_p()
        grp, src = self.group, self.src
        if self.variant == EM_DIRECT:
            y = self.phat_fwd.get(x)
            if y is None:
                y = src.uniform_excluding(grp, self.phat_bwd)
                self.phat_fwd[x] = y
                self.phat_bwd[y] = x
        else:
            y = src.uniform_excluding(grp, self.view_t_bwd)
            if self.variant == IDEAL_MONITORED:
                if grp.op(x, self.key_inv) in self.view_s_fwd or grp.op(y, self.key) in self.view_s_bwd:
                    self.flag.mark()
            elif self.variant == EM_MONITORED:
                xk = grp.op(x, self.key_inv)
                if xk in self.view_s_fwd:
                    self.flag.mark()
                    if not self.skip_redefine:
                        y = grp.op(self.view_s_fwd[xk], self.key_inv)
                elif grp.op(y, self.key) in self.view_s_bwd:
                    self.flag.mark()
                    y = src.uniform_excluding_where(
                        grp, self.view_t_bwd, lambda v: grp.op(v, self.key) in self.view_s_bwd
                    )
        self.view_t_fwd[x] = y
        self.view_t_bwd[y] = x
        return self._answer(y)

    def perm_inv(self, y: Element) -> Element:
        self.group.validate(y)
        if y in self.view_t_bwd:
            raise ProtocolError("P^-1-query repeats a derivable point")
        self._spend_p()
        grp, src = self.group, self.src
        if self.variant == EM_DIRECT:
            x = self.phat_bwd.get(y)
            if x is None:
                x = src.uniform_excluding(grp, self.phat_fwd)
                self.phat_fwd[x] = y
                self.phat_bwd[y] = x
        else:
            x = src.uniform_excluding(grp, self.view_t_fwd)
            if self.variant == IDEAL_MONITORED:
                if grp.op(y, self.key) in self.view_s_bwd or grp.op(x, self.key_inv) in self.view_s_fwd:
                    self.flag.mark()
            elif self.variant == EM_MONITORED:
                yk = grp.op(y, self.key)
                if yk in self.view_s_bwd:
                    self.flag.mark()
                    if not self.skip_redefine:
                        x = grp.op(self.view_s_bwd[yk], self.key)
                elif grp.op(x, self.key_inv) in self.view_s_fwd:
                    self.flag.mark()
                    x = src.uniform_excluding_where(
                        grp, self.view_t_fwd, lambda v: grp.op(v, self.key_inv) in self.view_s_fwd
                    )
        self.view_t_fwd[x] = y
        self.view_t_bwd[y] = x
        return self._answer(x)


def _play_em_game(variant, strategy, group, budget, src, skip_redefine=False) -> GameRun:
    game = _EmGame(variant, group, budget, src, skip_redefine)
    bit = strategy(game)
    s_pairs = list(game.view_s_fwd.items())
    t_pairs = list(game.view_t_fwd.items())
    if variant == IDEAL_DEFERRED:
        # the key is only drawn now; the flag is decided against the final
        # transcripts
        game.key = src.uniform(group)
        if key_is_bad(group, game.key, s_pairs, t_pairs):
            game.flag.mark()
    return GameRun(
        bit=bit,
        flag=game.flag,
        answers=tuple(game.answers),
        key=game.key,
        s_pairs=s_pairs,
        t_pairs=t_pairs,
    )


class _PairGameOracles:
    def __init__(self, forward, backward, f, g):
        self.forward = forward
        self.backward = backward
        self.f = f
        self.g = g


def _play_pair_game(variant, strategy, group, budget, src) -> GameRun:
    f_table: dict[Element, Element] = {}
    g_table: dict[Element, Element] = {}
    h_table: dict[Element, Element] = {}
    if variant == IDEAL_UNCONSTRAINED:
        key = kl = kr = kl_inv = kr_inv = None
    else:
        kl, kr = src.uniform(group), src.uniform(group)
        kl_inv, kr_inv = group.inv(kl), group.inv(kr)
        key = (kl, kr)
    cipher: list[CipherRecord] = []
    f_pairs: list[tuple[Element, Element]] = []
    g_pairs: list[tuple[Element, Element]] = []
    x_seen: dict[FeistelPair, FeistelPair] = {}
    y_seen: dict[FeistelPair, FeistelPair] = {}
    f_asked: set[Element] = set()
    g_asked: set[Element] = set()
    answers: list = []
    used = {"c": 0, "f": 0, "g": 0}

    def spend(which, cap):
        used[which] += 1
        if used[which] > cap:
            raise BudgetError(f"q_{which} budget {cap} exceeded")

    def feval(table, x):
        hit = table.get(x)
        if hit is None:
            hit = src.uniform(group)
            table[x] = hit
        return hit

    def fem_forward(p: FeistelPair) -> FeistelPair:
        l, r = group.op(p.left, kl), group.op(p.right, kr)
        for table in (g_table, f_table, f_table, g_table):
            l, r = r, group.op(l, feval(table, r))
        return FeistelPair(group.op(l, kl), group.op(r, kr))

    def fem_backward(p: FeistelPair) -> FeistelPair:
        l, r = group.op(p.left, kl_inv), group.op(p.right, kr_inv)
        for table in (g_table, f_table, f_table, g_table):
            l, r = group.op(r, group.inv(feval(table, l))), l
        return FeistelPair(group.op(l, kl_inv), group.op(r, kr_inv))

    def forward(p: FeistelPair) -> FeistelPair:
        group.validate(p.left)
        group.validate(p.right)
        if p in x_seen:
            raise ProtocolError("forward cipher query repeats a derivable input")
        spend("c", budget.q_c)
        if variant == IDEAL_UNCONSTRAINED:
            y = FeistelPair(src.uniform(group), src.uniform(group))
        else:
            y = fem_forward(p)
        cipher.append(CipherRecord(FORWARD, p, y))
        x_seen[p] = y
        y_seen[y] = p
        answers.append(y)
        return y

    def backward(p: FeistelPair) -> FeistelPair:
        group.validate(p.left)
        group.validate(p.right)
        if p in y_seen:
            raise ProtocolError("backward cipher query repeats a derivable output")
        spend("c", budget.q_c)
        if variant == IDEAL_UNCONSTRAINED:
            x = FeistelPair(src.uniform(group), src.uniform(group))
        else:
            x = fem_backward(p)
        cipher.append(CipherRecord(BACKWARD, x, p))
        x_seen[x] = p
        y_seen[p] = x
        answers.append(x)
        return x

    def f_query(x: Element) -> Element:
        group.validate(x)
        if x in f_asked:
            raise ProtocolError("f-query repeated")
        spend("f", budget.q_f)
        f_asked.add(x)
        y = feval(f_table, x)
        f_pairs.append((x, y))
        answers.append(y)
        return y

    def g_query(x: Element) -> Element:
        group.validate(x)
        if x in g_asked:
            raise ProtocolError("g-query repeated")
        spend("g", budget.q_g)
        g_asked.add(x)
        y = feval(h_table if variant == FEM_SPLIT_G else g_table, x)
        g_pairs.append((x, y))
        answers.append(y)
        return y

    bit = strategy(_PairGameOracles(forward, backward, f_query, g_query))
    return GameRun(
        bit=bit,
        flag=GameFlag(),
        answers=tuple(answers),
        key=key,
        transcript=Transcript(group, cipher, f_pairs, g_pairs),
    )


# ---------------------------------------------------------------------------
# exhaustive equivalences
# ---------------------------------------------------------------------------

PAIRING_DIRECT_VS_MONITORED = "em-direct-vs-monitored"
PAIRING_FLAG_VS_DEFERRED = "ideal-flag-vs-deferred"

_EXHAUSTION_ORDER_CAP = 5
_EXHAUSTION_SCRIPT_CAP = 3


def exhaustive_game_equivalence(
    pairing: str,
    group: GroupHandle,
    script: Sequence[tuple[str, Element]],
    *,
    corrupt_skip_redefine: bool = False,
) -> bool:
    """Enumerate every random draw of both games under a fixed script and
    compare the induced distributions exactly.

    For the direct-vs-monitored pairing the adversary-visible answer
    distributions must be identical; for the flag pairing the bad-flag
    probabilities must match.  ``corrupt_skip_redefine`` is a test hook
    that disables the monitored game's redefine step, which must make the
    first pairing fail.
    """
    if group.order > _EXHAUSTION_ORDER_CAP:
        raise CapacityError(f"exhaustive equivalence capped at order {_EXHAUSTION_ORDER_CAP}")
    if len(script) > _EXHAUSTION_SCRIPT_CAP:
        raise CapacityError(f"exhaustive equivalence capped at {_EXHAUSTION_SCRIPT_CAP} queries")
    budget = QueryBudget(s=len(script), t=len(script))
    strategy = script_strategy(script)
    if pairing == PAIRING_DIRECT_VS_MONITORED:
        direct = _answers_distribution(EM_DIRECT, strategy, group, budget)
        monitored = _answers_distribution(
            EM_MONITORED, strategy, group, budget, skip_redefine=corrupt_skip_redefine
        )
        return direct == monitored
    if pairing == PAIRING_FLAG_VS_DEFERRED:
        inline = _flag_probability(IDEAL_MONITORED, strategy, group, budget)
        deferred = _flag_probability(IDEAL_DEFERRED, strategy, group, budget)
        return inline == deferred
    raise ConfigError(f"unknown pairing {pairing!r}")


def _answers_distribution(variant, strategy, group, budget, skip_redefine=False) -> dict:
    def play(src):
        return _play_em_game(variant, strategy, group, budget, src, skip_redefine).answers

    return enumerate_outcomes(play)


def _flag_probability(variant, strategy, group, budget) -> Fraction:
    def play(src):
        return _play_em_game(variant, strategy, group, budget, src).flag.bad

    dist = enumerate_outcomes(play)
    return dist.get(True, Fraction(0))
