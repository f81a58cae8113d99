"""Batch command-line front end.

Exit statuses: 0 success/pass, 1 usage error, 2 claim or suite failure,
3 resource guard.  ``run`` additionally exits 4 for a proven non-halter and
5 when the step limit is hit without a verdict.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import BeaverError, MalformedText, SpaceTooLarge
from .introspect import (
    DescriptionBits,
    classify_transitions,
    decode_description,
    encode_description,
    normalize_first_visit,
    prune_unused,
)
from .machine import SimLimits, Verdict, format_machine, parse_machine, simulate
from .search import (
    DEFAULT_LEDGER,
    SearchSpace,
    activity_productivity_gap,
    append_ledger,
    check_lemma2,
    ledger_best_steps,
    one_direction_counterexamples,
    search,
)
from .transforms import (
    add_state,
    add_third_symbol,
    lockstep_check,
    to_two_state,
    triple_alphabet,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CLAIM = 2
EXIT_GUARD = 3
EXIT_CYCLER = 4
EXIT_STEP_LIMIT = 5


def _space(n: int, m: int, cutoff: int, detect: bool = True) -> SearchSpace:
    deciders = ("cycler",) if detect else ()
    return SearchSpace(n=n, m=m, limits=SimLimits(cutoff, detect), deciders=deciders)


def _workers(args) -> int:
    env = os.environ.get("BEAVER_WORKERS")
    if env:
        return max(1, int(env))
    return max(1, args.workers)


def cmd_run(args) -> int:
    machine = parse_machine(args.machine)
    limits = SimLimits(args.max_steps, detect_cycles=not args.no_cycle_detect)
    res = simulate(machine, limits)
    window = "".join(str(s) for s in res.final_tape.window())
    if args.json_lines:
        print(
            json.dumps(
                {
                    "verdict": res.verdict.value,
                    "steps": res.steps,
                    "nonblank": res.nonblank,
                    "final_head": res.final_head,
                    "tape": window,
                },
                sort_keys=True,
            )
        )
    else:
        print(f"{res.verdict.value.capitalize()} steps={res.steps} nonblank={res.nonblank}")
        print(f"tape[{res.final_tape.leftmost}..{res.final_tape.rightmost}] = {window}")
    if res.verdict is Verdict.HALTED:
        return EXIT_OK
    if res.verdict is Verdict.CYCLER:
        return EXIT_CYCLER
    return EXIT_STEP_LIMIT


def cmd_search(args) -> int:
    cutoff = args.cutoff if args.cutoff else (100_000 if (args.n, args.m) == (4, 2) else 10_000)
    space = _space(args.n, args.m, cutoff)
    report = search(space, workers=_workers(args))
    if args.json_lines:
        print(report.canonical_json())
    else:
        c = report.counts
        print(f"sigma={report.sigma} s_max={report.s_max}")
        print(
            f"halted={c['halted']} cycler={c['cycler']} undecided={c['undecided']} "
            f"cutoff={cutoff}"
        )
        for text, steps, nonblank in report.s_champions:
            print(f"s-champion {text} steps={steps} nonblank={nonblank}")
        for text, steps, nonblank in report.sigma_champions:
            print(f"sigma-champion {text} steps={steps} nonblank={nonblank}")
    if args.ledger:
        wrote = append_ledger(args.ledger, report)
        print(f"ledger: appended {wrote} records to {args.ledger}")
    return EXIT_OK


def cmd_transform(args) -> int:
    machine = parse_machine(args.machine)
    limits = SimLimits(args.max_steps)
    if args.kind == "add-state":
        out, report = add_state(machine, limits)
    elif args.kind == "third-symbol":
        evidence = ledger_best_steps(args.ledger, machine.n, machine.m)
        out, report = add_third_symbol(
            machine,
            evidence=evidence,
            assume_champion=args.assume_champion,
            limits=limits,
        )
    elif args.kind == "triple":
        out, report, _ = triple_alphabet(machine, limits)
    else:  # two-state
        out, report = to_two_state(machine, limits)
    print(format_machine(out))
    i_steps, i_nb = report.input_scores
    o_steps, o_nb = report.output_scores
    print(
        f"steps {i_steps} -> {o_steps}; nonblank {i_nb} -> {o_nb}; "
        f"states {report.states_before} -> {report.states_after}; "
        f"symbols {report.symbols_before} -> {report.symbols_after}"
        + (" [extended format]" if report.extended_format else "")
    )
    return EXIT_OK


def _verify_lemma1(space: SearchSpace, limits: SimLimits) -> list[str]:
    from .machine import count_halting
    from .search import decide, enumerate_tnf

    bad = []
    for mach in enumerate_tnf(space):
        d = decide(mach, space)
        if d.kind != "halted":
            continue
        out, rep = add_state(mach, limits)
        if not (
            rep.output_scores[0] > d.steps
            and rep.output_scores[1] == d.nonblank + 1
            and count_halting(out) == count_halting(mach)
        ):
            bad.append(format_machine(mach))
    return bad


def _verify_thm2(n: int, limits: SimLimits, workers: int) -> list[str]:
    cutoff = 100_000 if n >= 4 else 10_000
    space = _space(n, 2, cutoff)
    report = search(space, workers=workers)
    bad = []
    for text, steps, _ in report.s_champions:
        out, rep = add_third_symbol(
            parse_machine(text), evidence=report, limits=SimLimits(cutoff)
        )
        if rep.output_scores[0] - rep.input_scores[0] not in (1, 2):
            bad.append(text)
    return bad


def _verify_thm3(space: SearchSpace, limits: SimLimits) -> list[str]:
    from .search import decide, enumerate_tnf

    bad = []
    for mach in enumerate_tnf(space):
        d = decide(mach, space)
        if d.kind != "halted" or mach.n < 2:
            continue
        out, rep = to_two_state(mach, limits)
        bound = 4 * mach.m * (mach.n + 1) + mach.m
        if not (
            out.n == 2
            and out.m <= bound
            and rep.output_scores[0] > d.steps
            and rep.output_scores[1] > d.nonblank
        ):
            bad.append(format_machine(mach))
    return bad


def _verify_thm4(space: SearchSpace, limits: SimLimits) -> list[str]:
    from .search import decide, enumerate_tnf

    bad = []
    for mach in enumerate_tnf(space):
        d = decide(mach, space)
        if d.kind != "halted":
            continue
        out, rep, hom = triple_alphabet(mach, limits)
        check = lockstep_check(mach, out, hom, SimLimits(4 * limits.max_steps))
        ok = (
            check["ok"]
            and rep.output_scores[0] >= d.steps
            and (check["turns"] == 0 or rep.output_scores[0] >= d.steps + 2)
        )
        if not ok:
            bad.append(format_machine(mach))
    return bad


def _verify_introspect(space: SearchSpace, limits: SimLimits) -> list[str]:
    from .search import decide, enumerate_tnf

    bad = []
    for mach in enumerate_tnf(space):
        d = decide(mach, space)
        if d.kind != "halted":
            continue
        nm = normalize_first_visit(prune_unused(mach, limits), limits)
        cls = classify_transitions(nm)
        if len(cls.special) != nm.machine.n:
            bad.append(format_machine(mach))
            continue
        bits = encode_description(nm, cls)
        back = decode_description(bits, m=space.m, limits=limits)
        res = simulate(back, limits)
        if (res.steps, res.nonblank) != (d.steps, d.nonblank):
            bad.append(format_machine(mach))
    return bad


def cmd_verify(args) -> int:
    limits = SimLimits(args.max_steps)
    space = _space(args.n, args.m, args.max_steps)
    if args.suite == "lemma1":
        bad = _verify_lemma1(space, limits)
    elif args.suite == "lemma2":
        bad = [] if check_lemma2(space) else [f"s_max <= n for ({args.n},{args.m})"]
    elif args.suite == "lemma3":
        bad = [text for text, _ in one_direction_counterexamples(space)]
    elif args.suite == "thm2":
        bad = _verify_thm2(args.n, limits, _workers(args))
    elif args.suite == "thm3":
        bad = _verify_thm3(space, limits)
    elif args.suite == "thm4":
        bad = _verify_thm4(space, limits)
    else:  # introspect
        bad = _verify_introspect(space, limits)
    if bad:
        print(f"FAIL {args.suite} ({args.n},{args.m}): {len(bad)} counterexamples")
        for text in bad:
            print(f"counterexample: {text}")
        return EXIT_CLAIM
    print(f"PASS {args.suite} ({args.n},{args.m})")
    return EXIT_OK


def cmd_encode(args) -> int:
    machine = parse_machine(args.machine)
    limits = SimLimits(args.max_steps)
    nm = normalize_first_visit(prune_unused(machine, limits), limits)
    bits = encode_description(nm, classify_transitions(nm))
    print(format_machine(nm.machine))
    print(bits.to_text())
    return EXIT_OK


def cmd_decode(args) -> int:
    bits = DescriptionBits.from_text(args.bits)
    machine = decode_description(bits, m=args.symbols, limits=SimLimits(args.max_steps))
    print(format_machine(machine))
    return EXIT_OK


def cmd_table(args) -> int:
    print("n\\m " + " ".join(f"{m:>12}" for m in range(2, args.max_m + 1)))
    notes = []
    for n in range(1, args.max_n + 1):
        row = [f"{n:>3}"]
        for m in range(2, args.max_m + 1):
            cutoff = 100_000 if (n, m) == (4, 2) else 10_000
            try:
                report = search(_space(n, m, cutoff), workers=_workers(args))
            except SpaceTooLarge:
                row.append(f"{'—':>12}")
                continue
            row.append(f"{report.sigma:>5}/{report.s_max:<6}")
            und = report.counts["undecided"]
            if und:
                notes.append(f"({n},{m}): {und} undecided at cutoff {cutoff}")
        print(" ".join(row))
    for note in notes:
        print("note:", note)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beaverlab", description="Busy Beaver laboratory"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate a machine on a blank tape")
    p.add_argument("machine")
    p.add_argument("--max-steps", type=int, default=10_000)
    p.add_argument("--no-cycle-detect", action="store_true")
    p.add_argument("--json-lines", action="store_true")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("search", help="search an (n, m) space")
    p.add_argument("n", type=int)
    p.add_argument("m", type=int)
    p.add_argument("--cutoff", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--ledger", default=None)
    p.add_argument("--json-lines", action="store_true")
    p.set_defaults(fn=cmd_search)

    p = sub.add_parser("transform", help="apply a machine construction")
    p.add_argument("machine")
    p.add_argument(
        "--kind",
        required=True,
        choices=["add-state", "third-symbol", "two-state", "triple"],
    )
    p.add_argument("--ledger", default=DEFAULT_LEDGER)
    p.add_argument("--assume-champion", action="store_true")
    p.add_argument("--max-steps", type=int, default=100_000)
    p.set_defaults(fn=cmd_transform)

    p = sub.add_parser("verify", help="run a full-space property suite")
    p.add_argument(
        "--suite",
        required=True,
        choices=["lemma1", "lemma2", "lemma3", "thm2", "thm3", "thm4", "introspect"],
    )
    p.add_argument("n", type=int)
    p.add_argument("m", type=int)
    p.add_argument("--max-steps", type=int, default=10_000)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("encode", help="self-delimiting description of a machine")
    p.add_argument("machine")
    p.add_argument("--max-steps", type=int, default=10_000)
    p.set_defaults(fn=cmd_encode)

    p = sub.add_parser("decode", help="rebuild a machine from description bits")
    p.add_argument("bits")
    p.add_argument("--symbols", type=int, required=True)
    p.add_argument("--max-steps", type=int, default=10_000)
    p.set_defaults(fn=cmd_decode)

    p = sub.add_parser("table", help="score grid over small spaces")
    p.add_argument("--max-n", type=int, default=3)
    p.add_argument("--max-m", type=int, default=2)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(fn=cmd_table)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.fn(args)
    except SpaceTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except MalformedText as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BeaverError as exc:
        print(f"error: {exc.__class__.__name__}: {exc}", file=sys.stderr)
        return EXIT_CLAIM


if __name__ == "__main__":
    sys.exit(main())
