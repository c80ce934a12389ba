#!/usr/bin/env python3
"""Sweep the slide attack's query count d and compare the measured key-recovery
rate with the birthday prediction 1 - (1 - 1/|G|)^(d^2).

Example:
    python scripts/slide_birthday_sweep.py --group zmod:4096 --trials 100
"""

import argparse
import random

from groupem import make_em_instance, parse_group_spec, slide_attack
from groupem.attacks import SlideConfig
from groupem.oracles import derive_seed


def measure(group, d, trials, seed):
    cfg = SlideConfig(d=d)
    wins = 0
    for i in range(trials):
        rng = random.Random(derive_seed(seed, (d << 20) + i))
        inst = make_em_instance(group, rng)
        if slide_attack(inst.encrypt, inst.perm.forward, group, cfg, rng) == inst.key:
            wins += 1
    return wins / trials


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--group", default="zmod:4096")
    parser.add_argument("--trials", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--d-values", type=int, nargs="*", default=None)
    args = parser.parse_args()

    group = parse_group_spec(args.group)
    base = max(2, round(group.order**0.5))
    d_values = args.d_values or [base // 4, base // 2, base, 2 * base]

    print(f"group {group.spec()} (|G| = {group.order}), {args.trials} trials per point")
    print(f"{'d':>6} {'measured':>10} {'predicted':>10}")
    for d in d_values:
        predicted = 1.0 - (1.0 - 1.0 / group.order) ** (d * d)
        rate = measure(group, d, args.trials, args.seed)
        print(f"{d:>6} {rate:>10.3f} {predicted:>10.3f}")


if __name__ == "__main__":
    main()
