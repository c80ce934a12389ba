"""Batch experiment runner with machine-readable reports.

One flat flag namespace drives every experiment:

    groupem --group <spec> --experiment <kind> --trials <n> --seed <u64>
            [--qc N --qf N --qg N --s N --t N --d N --out PATH --format json|csv]

Per-trial randomness derives as hash(seed, trial index), so the report body
is byte-identical across runs and independent of scheduling order; only
duration_ms varies.  Exit codes: 0 success, 1 configuration error, 2
runtime error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import random
import sys
import time
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable, Optional

from .attacks import (
    SlideConfig,
    distinguish_f1,
    distinguish_f2,
    distinguish_f3_sprp,
    sample_excluding_identity,
    slide_attack,
)
from .errors import ConfigError, GroupSpecError
from .feistel import DECRYPT, ENCRYPT, feistel_apply, random_round_functions
from .games import (
    QueryBudget,
    RandomPairPermutation,
    bad_event_bound,
    badg_event_bound,
    clopper_pearson_halfwidth,
    detect_bad,
    detect_badg,
    em_bad_key_bound,
    em_ideal_world,
    em_real_world,
    exhaustive_game_equivalence,
    feistel_em_world,
    fem_advantage_bound,
    ideal_cipher_world,
    make_sprp_break_adversary,
    PAIRING_DIRECT_VS_MONITORED,
    PAIRING_FLAG_VS_DEFERRED,
    random_consistent_transcript,
    run_cp,
    run_efp,
)
from .em import make_em_instance
from .groups import GroupHandle, parse_group_spec
from .oracles import LazyFunction, derive_seed, spawn

EXPERIMENTS = (
    "slide",
    "feistel1",
    "feistel2",
    "feistel3",
    "psi-advantage",
    "em-advantage",
    "efp",
    "cp",
    "game-equivalence",
    "bad-event-rate",
)

FORMATS = ("json", "csv")


@dataclass
class ExperimentConfig:
    group_spec: str
    experiment: str
    trials: int = 100
    seed: int = 0
    qc: Optional[int] = None
    qf: Optional[int] = None
    qg: Optional[int] = None
    s: Optional[int] = None
    t: Optional[int] = None
    d: Optional[int] = None
    out: Optional[str] = None
    fmt: str = "json"

    def validate(self) -> GroupHandle:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if self.fmt not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.fmt!r}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        for name in ("qc", "qf", "qg", "s", "t", "d"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ConfigError(f"{name} must be nonnegative, got {value}")
        group = parse_group_spec(self.group_spec)
        if self.experiment == "game-equivalence" and group.order > 5:
            raise ConfigError("game-equivalence needs a group of order <= 5")
        return group


@dataclass
class Report:
    """Serializable experiment result; aggregate is recomputable from the
    per-trial rows.  ``bound`` holds exact rationals rendered as strings."""

    config: dict
    trials: list
    aggregate: dict
    bound: object
    duration_ms: float


def run_experiment(cfg: ExperimentConfig) -> Report:
    group = cfg.validate()
    start = time.perf_counter()
    rows, aggregate, bound = _DISPATCH[cfg.experiment](cfg, group)
    duration_ms = (time.perf_counter() - start) * 1000.0
    config_echo = {
        "group": cfg.group_spec,
        "experiment": cfg.experiment,
        "trials": cfg.trials,
        "seed": cfg.seed,
        "qc": cfg.qc,
        "qf": cfg.qf,
        "qg": cfg.qg,
        "s": cfg.s,
        "t": cfg.t,
        "d": cfg.d,
        "format": cfg.fmt,
    }
    return Report(config_echo, rows, aggregate, _render_bound(bound), duration_ms)


def _render_bound(bound):
    if bound is None:
        return None
    if isinstance(bound, Fraction):
        return str(bound)
    return {name: str(value) for name, value in bound.items()}


def _trial_rng(cfg: ExperimentConfig, index: int) -> random.Random:
    return random.Random(derive_seed(cfg.seed, index))


# --- experiment bodies ----------------------------------------------------


def _run_slide(cfg, group):
    d = cfg.d if cfg.d is not None else math.isqrt(group.order - 1) + 1
    slide_cfg = SlideConfig(d=d)
    rows = []
    successes = 0
    for i in range(cfg.trials):
        rng = _trial_rng(cfg, i)
        inst = make_em_instance(group, rng)
        recovered = slide_attack(inst.encrypt, inst.perm.forward, group, slide_cfg, spawn(rng))
        hit = recovered == inst.key
        successes += hit
        rows.append(
            {
                "trial": i,
                "verdict": "recovered" if hit else "missed",
                "detail": {
                    "planted": inst.key.hex(),
                    "recovered": recovered.hex() if recovered is not None else None,
                },
            }
        )
    expected = 1.0 - (1.0 - 1.0 / group.order) ** (d * d)
    aggregate = {
        "success_rate": successes / cfg.trials,
        "expected_rate": expected,
        "d": d,
    }
    return rows, aggregate, em_bad_key_bound(d, d, group.order)


def _feistel_cipher(group, r, rng):
    fns = random_round_functions(group, r, rng)
    enc = lambda p: feistel_apply(group, fns, p, ENCRYPT)  # noqa: E731
    dec = lambda p: feistel_apply(group, fns, p, DECRYPT)  # noqa: E731
    return enc, dec


def _run_feistel(rounds):
    def body(cfg, group):
        rows = []
        real_hits = random_hits = 0
        for i in range(cfg.trials):
            rng = _trial_rng(cfg, i)
            enc, dec = _feistel_cipher(group, rounds, spawn(rng))
            perm = RandomPairPermutation(group, spawn(rng))
            if rounds == 1:
                real = distinguish_f1(enc, group, 1, spawn(rng)).success_rate == 1.0
                ideal = distinguish_f1(perm.encrypt, group, 1, spawn(rng)).success_rate == 1.0
            elif rounds == 2:
                probe = sample_excluding_identity(group, rng)
                real = distinguish_f2(enc, group, [probe], spawn(rng)).success_rate == 1.0
                ideal = distinguish_f2(perm.encrypt, group, [probe], spawn(rng)).success_rate == 1.0
            else:
                real = distinguish_f3_sprp(enc, dec, group, 1, spawn(rng)).success_rate == 1.0
                ideal = distinguish_f3_sprp(perm.encrypt, perm.decrypt, group, 1, spawn(rng)).success_rate == 1.0
            real_hits += real
            random_hits += ideal
            rows.append(
                {
                    "trial": i,
                    "verdict": "hold" if real else "miss",
                    "detail": {"real": real, "random": ideal},
                }
            )
        aggregate = {
            "success_rate": real_hits / cfg.trials,
            "random_rate": random_hits / cfg.trials,
            "real_guess": "cipher" if real_hits == cfg.trials else "random",
            "random_guess": "cipher" if random_hits == cfg.trials else "random",
        }
        return rows, aggregate, None

    return body


def _advantage_rows(cfg, adversary, real_factory, ideal_factory):
    rows = []
    real_hits = ideal_hits = 0
    for i in range(cfg.trials):
        rng = _trial_rng(cfg, i)
        real_bit = int(bool(adversary(real_factory(spawn(rng)), spawn(rng))))
        ideal_bit = int(bool(adversary(ideal_factory(spawn(rng)), spawn(rng))))
        real_hits += real_bit
        ideal_hits += ideal_bit
        rows.append(
            {
                "trial": i,
                "verdict": "distinct" if real_bit != ideal_bit else "same",
                "detail": {"real": real_bit, "ideal": ideal_bit},
            }
        )
    n = cfg.trials
    ci = clopper_pearson_halfwidth(real_hits, n) + clopper_pearson_halfwidth(ideal_hits, n)
    aggregate = {
        "measured_advantage": abs(real_hits - ideal_hits) / n,
        "real_rate": real_hits / n,
        "ideal_rate": ideal_hits / n,
        "ci_halfwidth": ci,
    }
    return rows, aggregate


def _run_psi_advantage(cfg, group):
    qc = cfg.qc if cfg.qc is not None else 3
    qf = cfg.qf if cfg.qf is not None else 0
    qg = cfg.qg if cfg.qg is not None else 0
    probe_rng = random.Random(derive_seed(cfg.seed, 0xFEAF))
    base = make_sprp_break_adversary(group, probe_rng)
    adversary = lambda oracles, rng: base(oracles)  # noqa: E731  (deterministic)
    rows, aggregate = _advantage_rows(cfg, adversary, feistel_em_world(group), ideal_cipher_world(group))
    aggregate["qc"], aggregate["qf"], aggregate["qg"] = qc, qf, qg
    return rows, aggregate, fem_advantage_bound(qc, qf, qg, group.order)


def _run_em_advantage(cfg, group):
    d = cfg.d if cfg.d is not None else math.isqrt(group.order - 1) + 1
    s = cfg.s if cfg.s is not None else d
    t = cfg.t if cfg.t is not None else d
    slide_cfg = SlideConfig(d=d)

    def adversary(oracles, rng):
        return slide_attack(oracles.enc, oracles.perm, group, slide_cfg, rng) is not None

    rows, aggregate = _advantage_rows(cfg, adversary, em_real_world(group), em_ideal_world(group))
    aggregate["d"] = d
    return rows, aggregate, em_bad_key_bound(s, t, group.order)


def _run_efp(cfg, group):
    s = cfg.s if cfg.s is not None else 0
    t = cfg.t if cfg.t is not None else 0
    budget = QueryBudget(s=s, t=t)
    rows = []
    wins = 0
    for i in range(cfg.trials):
        rng = _trial_rng(cfg, i)
        guess_rng = spawn(rng)

        def adversary(surface, grp):
            return grp.sample(guess_rng), grp.sample(guess_rng)

        won = run_efp(adversary, group, budget, rng)
        wins += won
        rows.append({"trial": i, "verdict": "forged" if won else "failed", "detail": {}})
    aggregate = {"success_rate": wins / cfg.trials, "guess_rate": 1.0 / group.order}
    return rows, aggregate, em_bad_key_bound(s, t, group.order)


def _run_cp(cfg, group):
    d = cfg.d if cfg.d is not None else math.isqrt(group.order - 1) + 1
    s = cfg.s if cfg.s is not None else 2 * d + 64
    t = cfg.t if cfg.t is not None else 2 * d + 64
    budget = QueryBudget(s=s, t=t)
    slide_cfg = SlideConfig(d=d)
    rows = []
    wins = 0
    for i in range(cfg.trials):
        rng = _trial_rng(cfg, i)
        attack_rng = spawn(rng)

        def adversary(challenge, surface, grp):
            key = slide_attack(surface.enc, surface.perm, grp, slide_cfg, attack_rng)
            if key is None:
                return grp.identity()
            key_inv = grp.inv(key)
            return grp.op(surface.perm_inv(grp.op(challenge, key_inv)), key_inv)

        won = run_cp(adversary, group, budget, rng)
        wins += won
        rows.append({"trial": i, "verdict": "cracked" if won else "failed", "detail": {}})
    expected = 1.0 - (1.0 - 1.0 / group.order) ** (d * d)
    aggregate = {"success_rate": wins / cfg.trials, "expected_rate": expected, "d": d}
    return rows, aggregate, em_bad_key_bound(s, t, group.order)


def _run_game_equivalence(cfg, group):
    elems = group.enumerate()
    script = [("perm", elems[0]), ("enc", elems[0])]
    checks = [
        ("direct-vs-monitored", exhaustive_game_equivalence(PAIRING_DIRECT_VS_MONITORED, group, script), True),
        ("flag-vs-deferred", exhaustive_game_equivalence(PAIRING_FLAG_VS_DEFERRED, group, script), True),
        (
            "mutation-detected",
            not exhaustive_game_equivalence(
                PAIRING_DIRECT_VS_MONITORED, group, script, corrupt_skip_redefine=True
            ),
            True,
        ),
    ]
    rows = [
        {"trial": i, "verdict": "pass" if got == want else "fail", "detail": {"check": name, "value": got}}
        for i, (name, got, want) in enumerate(checks)
    ]
    aggregate = {"all_pass": all(got == want for _, got, want in checks)}
    return rows, aggregate, None


def _run_bad_event_rate(cfg, group):
    qc = cfg.qc if cfg.qc is not None else 4
    qf = cfg.qf if cfg.qf is not None else 4
    qg = cfg.qg if cfg.qg is not None else 4
    rows = []
    badg_hits = bad_hits = 0
    for i in range(cfg.trials):
        rng = _trial_rng(cfg, i)
        tr = random_consistent_transcript(group, qc, qf, qg, rng)
        key = (group.sample(rng), group.sample(rng))
        badg = detect_badg(tr, key)
        bad = detect_bad(tr, key, LazyFunction(group, spawn(rng)))
        badg_hits += badg
        bad_hits += bad
        rows.append(
            {
                "trial": i,
                "verdict": "bad" if (badg or bad) else "clean",
                "detail": {"badg": badg, "bad": bad},
            }
        )
    n = cfg.trials
    aggregate = {
        "badg_rate": badg_hits / n,
        "bad_rate": bad_hits / n,
        "badg_ci": clopper_pearson_halfwidth(badg_hits, n),
        "bad_ci": clopper_pearson_halfwidth(bad_hits, n),
        "qc": qc,
        "qf": qf,
        "qg": qg,
    }
    bound = {
        "badg": badg_event_bound(qc, qg, group.order),
        "bad": bad_event_bound(qc, qf, group.order),
    }
    return rows, aggregate, bound


_DISPATCH: dict[str, Callable] = {
    "slide": _run_slide,
    "feistel1": _run_feistel(1),
    "feistel2": _run_feistel(2),
    "feistel3": _run_feistel(3),
    "psi-advantage": _run_psi_advantage,
    "em-advantage": _run_em_advantage,
    "efp": _run_efp,
    "cp": _run_cp,
    "game-equivalence": _run_game_equivalence,
    "bad-event-rate": _run_bad_event_rate,
}


# --- report emission --------------------------------------------------------


def report_to_json(report: Report) -> str:
    return json.dumps(asdict(report), indent=2, sort_keys=True) + "\n"


def report_from_json(text: str) -> Report:
    obj = json.loads(text)
    return Report(
        config=obj["config"],
        trials=obj["trials"],
        aggregate=obj["aggregate"],
        bound=obj["bound"],
        duration_ms=obj["duration_ms"],
    )


def report_to_csv(report: Report) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["trial", "verdict", "detail"])
    for row in report.trials:
        writer.writerow([row["trial"], row["verdict"], json.dumps(row["detail"], sort_keys=True)])
    buf.write(f"# aggregate={json.dumps(report.aggregate, sort_keys=True)}\n")
    buf.write(f"# bound={json.dumps(report.bound, sort_keys=True)}\n")
    buf.write(f"# duration_ms={report.duration_ms}\n")
    return buf.getvalue()


def emit_report(report: Report, fmt: str, path: Optional[str]) -> str:
    """Render and (if a path is given) write the report; returns the text."""
    if fmt == "json":
        text = report_to_json(report)
    elif fmt == "csv":
        text = report_to_csv(report)
    else:
        raise ConfigError(f"unknown format {fmt!r}")
    if path is not None:
        try:
            with open(path, "w", encoding="utf-8") as handle:
                handle.write(text)
        except OSError as exc:
            raise RuntimeError(f"cannot write report to {path}: {exc}") from exc
    return text


# --- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="groupem",
        description="Run Even-Mansour/Feistel experiments over finite groups",
    )
    parser.add_argument("--group", required=True, help="group spec, e.g. zmod:4096 or prod:(zmod:5,sym:3)")
    parser.add_argument("--experiment", required=True, choices=EXPERIMENTS)
    parser.add_argument("--trials", type=int, default=100, help="trial / sample count")
    parser.add_argument("--seed", type=int, default=0, help="master seed (u64); fixes all randomness")
    parser.add_argument("--qc", type=int, default=None, help="cipher-query budget (G^2 setting)")
    parser.add_argument("--qf", type=int, default=None, help="f-query budget")
    parser.add_argument("--qg", type=int, default=None, help="g-query budget")
    parser.add_argument("--s", type=int, default=None, help="E/D-query budget")
    parser.add_argument("--t", type=int, default=None, help="P-query budget")
    parser.add_argument("--d", type=int, default=None, help="slide-attack query count per oracle")
    parser.add_argument("--out", default=None, help="report path (stdout if omitted)")
    parser.add_argument("--format", dest="fmt", choices=FORMATS, default="json")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    cfg = ExperimentConfig(
        group_spec=args.group,
        experiment=args.experiment,
        trials=args.trials,
        seed=args.seed,
        qc=args.qc,
        qf=args.qf,
        qg=args.qg,
        s=args.s,
        t=args.t,
        d=args.d,
        out=args.out,
        fmt=args.fmt,
    )
    try:
        report = run_experiment(cfg)
    except (ConfigError, GroupSpecError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failures (capacity, budget, I/O, ...)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        text = emit_report(report, cfg.fmt, cfg.out)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if cfg.out is None:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
