"""Acceptance suite: one test per criterion, each printing a PASS line with
its runtime and asserting its time budget.  Run with ``pytest -s`` to see
the lines."""

import random
import time
from contextlib import contextmanager
from fractions import Fraction

import pytest

from groupem import (
    FeistelPair,
    LazyFunction,
    LazyPermutation,
    count_bad_keys,
    detect_bad,
    detect_badg,
    distinguish_f1,
    distinguish_f2,
    distinguish_f3_sprp,
    estimate_advantage,
    exhaustive_game_equivalence,
    fem_advantage_bound,
    fem_advantage_bound_total,
    make_em_instance,
    make_feistel_em,
    parse_group_spec,
    random_round_functions,
    slide_attack,
    verify_key,
)
from groupem import attacks
from groupem.attacks import SlideConfig
from groupem.feistel import DECRYPT, ENCRYPT, feistel_apply
from groupem.games import (
    PAIRING_DIRECT_VS_MONITORED,
    PAIRING_FLAG_VS_DEFERRED,
    RandomPairPermutation,
    bad_event_bound,
    badg_event_bound,
    clopper_pearson_halfwidth,
    feistel_em_world,
    ideal_cipher_world,
    make_sprp_break_adversary,
    random_consistent_transcript,
)

from test_attacks import f1_exact_probability, f2_exact_probability


@contextmanager
def criterion(number, label, budget_s):
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    print(f"PASS criterion {number}: {label} ({elapsed:.2f}s < {budget_s}s)")
    assert elapsed < budget_s, f"criterion {number} exceeded its {budget_s}s budget"


def test_criterion_1_em_correctness():
    with criterion(1, "Even-Mansour round-trip, zmod:257 x 20 keys, exhaustive", 1.0):
        g = parse_group_spec("zmod:257")
        rng = random.Random(101)
        perm = LazyPermutation(g, rng)
        for _ in range(20):
            inst = make_em_instance(g, rng, perm=perm)
            for m in g.enumerate():
                assert inst.decrypt(inst.encrypt(m)) == m


def test_criterion_2_feistel_invertibility():
    with criterion(2, "Feistel round-trip, r in 1..4, non-injective rounds, exhaustive", 1.0):
        g = parse_group_spec("zmod:3")
        points = [FeistelPair(a, b) for a in g.enumerate() for b in g.enumerate()]
        rng = random.Random(102)
        two = g.enumerate()[:2]
        for r in (1, 2, 3, 4):
            for _ in range(9):  # 9 chains x 9 points = 81 round-trips per r
                fns = [
                    (lambda y, c=rng.choice(two): c) if i % 2 else LazyFunction(g, random.Random(rng.getrandbits(32))).query
                    for i in range(r)
                ]
                for p in points:
                    assert feistel_apply(g, fns, feistel_apply(g, fns, p, ENCRYPT), DECRYPT) == p


def test_criterion_3_three_round_sprp_break():
    with criterion(3, "3-round break: rate 1.0 vs cipher, <=0.05 vs random, zmod:1024^2", 10.0):
        g = parse_group_spec("zmod:1024")
        rng = random.Random(103)
        fns = random_round_functions(g, 3, rng)
        enc = lambda p: feistel_apply(g, fns, p, ENCRYPT)  # noqa: E731
        dec = lambda p: feistel_apply(g, fns, p, DECRYPT)  # noqa: E731
        verdict = distinguish_f3_sprp(enc, dec, g, 500, rng)
        assert verdict.guess == "cipher"
        assert verdict.success_rate == 1.0
        perm = RandomPairPermutation(g, rng)
        verdict = distinguish_f3_sprp(perm.encrypt, perm.decrypt, g, 500, rng)
        assert verdict.guess == "random"
        assert verdict.success_rate <= 0.05


def test_criterion_4_one_and_two_round_breaks():
    with criterion(4, "1/2-round breaks: rate 1.0 vs ciphers, exact rate vs random at |G|=8", 10.0):
        g128 = parse_group_spec("zmod:128")
        rng = random.Random(104)
        fns1 = random_round_functions(g128, 1, rng)
        enc1 = lambda p: feistel_apply(g128, fns1, p, ENCRYPT)  # noqa: E731
        v1 = distinguish_f1(enc1, g128, 50, rng)
        assert (v1.guess, v1.success_rate) == ("cipher", 1.0)
        fns2 = random_round_functions(g128, 2, rng)
        enc2 = lambda p: feistel_apply(g128, fns2, p, ENCRYPT)  # noqa: E731
        probes = [g128.element(i) for i in range(1, 51)]
        v2 = distinguish_f2(enc2, g128, probes, rng)
        assert (v2.guess, v2.success_rate) == ("cipher", 1.0)

        perm = RandomPairPermutation(g128, rng)
        assert distinguish_f1(perm.encrypt, g128, 50, rng).guess == "random"
        assert distinguish_f2(perm.encrypt, g128, probes, rng).guess == "random"

        # per-trial cipher-guess rates against fresh random permutations on
        # (Z_8)^2, compared with the exhaustively counted exact values
        g8 = parse_group_spec("zmod:8")
        runs = 4000
        exact1 = float(f1_exact_probability(8))
        hits = sum(
            distinguish_f1(
                RandomPairPermutation(g8, random.Random(seed)).encrypt, g8, 1, random.Random(7000 + seed)
            ).success_rate
            for seed in range(runs)
        )
        sigma = (exact1 * (1 - exact1) / runs) ** 0.5
        assert abs(hits / runs - exact1) < 3 * sigma

        exact2 = float(f2_exact_probability(8))
        probe = g8.element(1)
        hits = sum(
            distinguish_f2(
                RandomPairPermutation(g8, random.Random(seed)).encrypt, g8, [probe], random.Random(9000 + seed)
            ).success_rate
            for seed in range(runs)
        )
        sigma = (exact2 * (1 - exact2) / runs) ** 0.5
        assert abs(hits / runs - exact2) < 3 * sigma


def test_criterion_5_slide_attack(monkeypatch):
    with criterion(5, "slide attack: recovery rate in [0.35, 0.75], d queries per oracle", 30.0):
        g = parse_group_spec("zmod:4096")
        d = 64
        cfg = SlideConfig(d=d)

        counts = {"enc": 0, "perm": 0}
        inside = {"verify": False}
        real_verify = attacks.verify_key

        def tracked_verify(*args, **kwargs):
            inside["verify"] = True
            try:
                return real_verify(*args, **kwargs)
            finally:
                inside["verify"] = False

        monkeypatch.setattr(attacks, "verify_key", tracked_verify)

        wins = 0
        trials = 200
        for seed in range(trials):
            rng = random.Random(seed)
            inst = make_em_instance(g, rng)

            def enc(x, inst=inst):
                if not inside["verify"]:
                    counts["enc"] += 1
                return inst.encrypt(x)

            def perm(y, inst=inst):
                if not inside["verify"]:
                    counts["perm"] += 1
                return inst.perm.forward(y)

            before = dict(counts)
            recovered = slide_attack(enc, perm, g, cfg, rng)
            assert counts["enc"] - before["enc"] == d
            assert counts["perm"] - before["perm"] == d
            if recovered is not None:
                # a returned key always passes verification afresh
                assert verify_key(inst.encrypt, inst.perm.forward, g, recovered, 8, random.Random(10**6 + seed))
                assert recovered == inst.key
                wins += 1
        rate = wins / trials
        expected = 1.0 - (1.0 - 1.0 / g.order) ** (d * d)
        assert 0.63 == round(expected, 2)  # the birthday estimate itself
        assert 0.35 <= rate <= 0.75


def test_criterion_6_feistel_em_roundtrip_and_bound():
    with criterion(6, "Feistel-EM round-trip + advantage below closed-form bound", 60.0):
        g5 = parse_group_spec("zmod:5")
        rng = random.Random(106)
        for _ in range(10):
            inst = make_feistel_em(g5, rng)
            for a in g5.enumerate():
                for b in g5.enumerate():
                    p = FeistelPair(a, b)
                    assert inst.decrypt(inst.encrypt(p)) == p

        g16 = parse_group_spec("zmod:16")
        adversary = make_sprp_break_adversary(g16, random.Random(1060))
        bound = fem_advantage_bound(3, 0, 0, 16)
        est = estimate_advantage(
            adversary, feistel_em_world(g16), ideal_cipher_world(g16), 10**5, random.Random(1061), bound=bound
        )
        assert est.measured <= float(bound) + est.ci_halfwidth


def test_criterion_7_bad_event_rates():
    with criterion(7, "bad-event Monte Carlo below the union bounds + 99% CI", 30.0):
        g = parse_group_spec("zmod:64")
        q_c = q_f = q_g = 4
        samples = 10**4
        badg_hits = bad_hits = 0
        for seed in range(samples):
            rng = random.Random(seed)
            tr = random_consistent_transcript(g, q_c, q_f, q_g, rng)
            key = (g.sample(rng), g.sample(rng))
            badg_hits += detect_badg(tr, key)
            bad_hits += detect_bad(tr, key, LazyFunction(g, random.Random(5 * 10**6 + seed)))
        badg_rate = badg_hits / samples
        bad_rate = bad_hits / samples
        assert badg_rate <= float(badg_event_bound(q_c, q_g, 64)) + clopper_pearson_halfwidth(badg_hits, samples)
        assert bad_rate <= float(bad_event_bound(q_c, q_f, 64)) + clopper_pearson_halfwidth(bad_hits, samples)


def test_criterion_8_bad_key_count():
    with criterion(8, "exhaustive bad-key count <= 2st for 50 random transcript sets", 5.0):
        g = parse_group_spec("zmod:64")
        s = t = 4
        for seed in range(50):
            rng = random.Random(seed)
            s_pairs = [(g.sample(rng), g.sample(rng)) for _ in range(s)]
            t_pairs = [(g.sample(rng), g.sample(rng)) for _ in range(t)]
            assert count_bad_keys(g, s_pairs, t_pairs) <= 2 * s * t == 32


def test_criterion_9_game_equivalences():
    with criterion(9, "exact game equivalences on zmod:2 and zmod:3 + mutation check", 60.0):
        for spec in ("zmod:2", "zmod:3"):
            g = parse_group_spec(spec)
            elems = g.enumerate()
            scripts = [
                [("perm", elems[0]), ("enc", elems[0])],
                [("enc", elems[0]), ("enc", elems[1])],
            ]
            for script in scripts:
                assert exhaustive_game_equivalence(PAIRING_DIRECT_VS_MONITORED, g, script)
                assert exhaustive_game_equivalence(PAIRING_FLAG_VS_DEFERRED, g, script)
            assert not exhaustive_game_equivalence(
                PAIRING_DIRECT_VS_MONITORED, g, scripts[0], corrupt_skip_redefine=True
            )


def test_criterion_10_bound_formulas():
    with criterion(10, "bound formulas match hand-substituted rationals; total form dominates", 1.0):
        assert fem_advantage_bound(1, 0, 0, 256) == Fraction(2, 256)
        assert fem_advantage_bound(0, 3, 9, 64) == 0
        assert fem_advantage_bound(2, 1, 1, 64) == Fraction(28, 64) + 2 * (Fraction(2, 64) + Fraction(1, 4096))
        assert fem_advantage_bound_total(1, 997) == Fraction(2, 997)
        assert fem_advantage_bound_total(2, 256) == Fraction(16, 256) + Fraction(2, 65536)
        rng = random.Random(110)
        for _ in range(1000):
            q_c, q_f, q_g = rng.randrange(30), rng.randrange(30), rng.randrange(30)
            order = rng.randrange(2, 10**6)
            assert fem_advantage_bound_total(q_c + q_f + q_g, order) >= fem_advantage_bound(
                q_c, q_f, q_g, order
            )
