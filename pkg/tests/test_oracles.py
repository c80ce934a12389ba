import itertools
import random

import pytest
import scipy.stats

from groupem import (
    LazyFunction,
    LazyPermutation,
    derive_seed,
    fully_sampled_permutation,
    parse_group_spec,
    spawn,
)


def realized_permutation(perm, group):
    """The image tuple of a permutation queried on every point."""
    return tuple(perm.forward(x) for x in group.enumerate())


def test_forward_repeat_is_deterministic(rng):
    g = parse_group_spec("zmod:17")
    perm = LazyPermutation(g, rng)
    x = g.element(5)
    assert perm.forward(x) == perm.forward(x)


def test_backward_of_forward_roundtrip():
    g = parse_group_spec("zmod:257")
    perm = LazyPermutation(g, random.Random(3))
    probe_rng = random.Random(4)
    for _ in range(100):
        x = g.sample(probe_rng)
        assert perm.backward(perm.forward(x)) == x
        perm.check_invariants()


def test_query_direction_dispatch(rng):
    g = parse_group_spec("zmod:9")
    perm = LazyPermutation(g, rng)
    x = g.element(2)
    assert perm.query("forward", x) == perm.forward(x)
    assert perm.query("backward", perm.forward(x)) == x


def test_lazy_permutation_uniform_over_all_24():
    # on a 4-point domain, the fully queried lazy permutation must be
    # uniform over the 24 permutations of the 4 elements
    g = parse_group_spec("zmod:4")
    elems = g.enumerate()
    all_perms = {tuple(p): 0 for p in itertools.permutations(elems)}
    runs = 24000
    for seed in range(runs):
        perm = LazyPermutation(g, random.Random(seed))
        all_perms[realized_permutation(perm, g)] += 1
    assert all(all_perms.values())
    _, p = scipy.stats.chisquare(list(all_perms.values()))
    assert p > 0.001


def test_interleaved_queries_keep_partial_bijection():
    g = parse_group_spec("zmod:32")
    perm = LazyPermutation(g, random.Random(8))
    driver = random.Random(9)
    for _ in range(200):
        if driver.random() < 0.5:
            perm.forward(g.sample(driver))
        else:
            perm.backward(g.sample(driver))
        perm.check_invariants()
    # forward then backward closes every defined pair
    for x, y in perm.defined_pairs():
        assert perm.backward(y) == x


def test_function_repeat_is_deterministic(rng):
    g = parse_group_spec("zmod:11")
    f = LazyFunction(g, rng)
    x = g.element(7)
    assert f.query(x) == f.query(x) == f(x)


def test_function_fresh_draw_binomial():
    g = parse_group_spec("zmod:2")
    x = g.element(0)
    n = 20000
    ones = sum(
        LazyFunction(g, random.Random(seed)).query(x) == g.element(1) for seed in range(n)
    )
    sigma = (n * 0.25) ** 0.5
    assert abs(ones - n / 2) < 4 * sigma


def test_function_collision_rate_half_on_two_points():
    # exact reference: of the 4 functions {0,1} -> {0,1}, exactly 2 collide
    functions = list(itertools.product(range(2), repeat=2))
    exact = sum(a == b for a, b in functions) / len(functions)
    assert exact == 0.5

    g = parse_group_spec("zmod:2")
    x0, x1 = g.enumerate()
    n = 20000
    collisions = 0
    for seed in range(n):
        f = LazyFunction(g, random.Random(seed))
        collisions += f(x0) == f(x1)
    sigma = (n * exact * (1 - exact)) ** 0.5
    assert abs(collisions - n * exact) < 4 * sigma


def test_fully_sampled_uniform_over_6():
    g = parse_group_spec("zmod:3")
    counts = {tuple(p): 0 for p in itertools.permutations(g.enumerate())}
    runs = 6000
    for seed in range(runs):
        perm = fully_sampled_permutation(g, random.Random(seed))
        counts[realized_permutation(perm, g)] += 1
    assert all(counts.values())
    _, p = scipy.stats.chisquare(list(counts.values()))
    assert p > 0.001


@pytest.mark.parametrize("spec,runs", [("zmod:3", 12000), ("zmod:4", 16000)])
def test_fully_sampled_matches_lazy_distribution(spec, runs):
    # two-sample chi-square between eager and lazy sampling
    g = parse_group_spec(spec)
    keys = list(itertools.permutations(g.enumerate()))
    eager = {k: 0 for k in keys}
    lazy = {k: 0 for k in keys}
    for seed in range(runs):
        eager[realized_permutation(fully_sampled_permutation(g, random.Random(seed)), g)] += 1
        lazy[realized_permutation(LazyPermutation(g, random.Random(10**6 + seed)), g)] += 1
    table = [[eager[k] for k in keys], [lazy[k] for k in keys]]
    _, p, _, _ = scipy.stats.chi2_contingency(table)
    assert p > 0.001


def test_fully_sampled_defines_everything(rng):
    g = parse_group_spec("dihedral:5")
    perm = fully_sampled_permutation(g, rng)
    assert perm.defined_points() == g.order
    for x in g.enumerate():
        assert perm.backward(perm.forward(x)) == x


def test_spawn_and_derive_seed_are_stable():
    r = random.Random(77)
    child = spawn(r)
    again = spawn(random.Random(77))
    assert child.random() == again.random()
    assert derive_seed(42, 3) == derive_seed(42, 3)
    assert derive_seed(42, 3) != derive_seed(42, 4)
