import pytest

from beaverlab.errors import MalformedBits, Underflow, UnreachableState
from beaverlab.introspect import (
    BoundParams,
    DescriptionBits,
    capacity_check,
    capacity_threshold,
    ceil_log2,
    classify_transitions,
    decode_description,
    description_length_bound,
    encode_description,
    fit_description_constant,
    normalize_first_visit,
    prune_unused,
)
from beaverlab.machine import (
    HALT,
    Direction,
    Machine,
    Rule,
    SimLimits,
    format_machine,
    parse_machine,
    simulate,
)
from beaverlab.search import SearchSpace, decide, enumerate_tnf

LIMITS = SimLimits(10_000)
CHAMPION_22 = "1RB1LB_1LA1RZ"

L, R = Direction.LEFT, Direction.RIGHT


def halting_machines(n, m, cutoff=10_000):
    sp = SearchSpace(n=n, m=m, limits=SimLimits(max_steps=cutoff))
    for mach in enumerate_tnf(sp):
        d = decide(mach, sp)
        if d.kind == "halted":
            yield mach, d


class TestPrune:
    def test_fully_visited_fixpoint(self):
        mach = parse_machine(CHAMPION_22)
        assert prune_unused(mach, LIMITS) == mach

    def test_dead_state_dropped(self):
        # champion plus an unreachable third state
        mach = parse_machine("1RB1LB_1LA1RZ_0LC1RC")
        before = simulate(mach, LIMITS)
        pruned = prune_unused(mach, LIMITS)
        assert pruned.n == 2
        after = simulate(pruned, LIMITS)
        assert (after.steps, after.nonblank) == (before.steps, before.nonblank)

    def test_dead_state_with_live_references(self):
        # states 2 and 3 unreachable; cell (1,1) references state 3 but is
        # never read, so its target is redirected to state 1 after pruning
        mach = parse_machine("1RZ1RC_1LC1RC_0LA1RA")
        pruned = prune_unused(mach, LIMITS)
        assert pruned.n == 1
        assert pruned.rule(1, 1).next_state == 1
        before, after = simulate(mach, LIMITS), simulate(pruned, LIMITS)
        assert (after.steps, after.nonblank) == (before.steps, before.nonblank)


class TestNormalize:
    def test_already_normal(self):
        nm = normalize_first_visit(parse_machine(CHAMPION_22), LIMITS)
        assert nm.machine == parse_machine(CHAMPION_22)
        assert nm.witness.first_visit_order == (1, 2)

    def test_label_swap_restored(self):
        # swap the roles of states so the run enters them out of order, then
        # check normalization relabels into first-visit order
        mach = parse_machine("1RC0LB_1RZ1LB_1LA0RB")
        res = simulate(mach, LIMITS)
        assert res.halted
        assert res.first_visit_order != tuple(range(1, mach.n + 1))
        nm = normalize_first_visit(mach, LIMITS)
        assert nm.witness.first_visit_order == (1, 2, 3)
        assert (nm.witness.steps, nm.witness.nonblank) == (res.steps, res.nonblank)

    def test_unreachable_state_rejected(self):
        with pytest.raises(UnreachableState):
            normalize_first_visit(parse_machine("1RB1LB_1LA1RZ_0LC1RC"), LIMITS)


class TestClassify:
    def test_one_state_halter(self):
        nm = normalize_first_visit(parse_machine("1RZ0RZ"), LIMITS)
        cls = classify_transitions(nm)
        assert cls.special == frozenset({(1, 0)})

    def test_champion_has_two_specials(self):
        nm = normalize_first_visit(parse_machine(CHAMPION_22), LIMITS)
        cls = classify_transitions(nm)
        assert len(cls.special) == 2
        assert cls.is_special(1, 0)  # first entry into state 2
        assert cls.is_special(2, 1)  # the halting transition

    def test_special_count_over_2_2_space(self):
        for mach, _ in halting_machines(2, 2):
            nm = normalize_first_visit(prune_unused(mach, LIMITS), LIMITS)
            cls = classify_transitions(nm)
            assert len(cls.special) == nm.machine.n


class TestEncodeDecode:
    def test_part_length_formulas_4_2(self):
        # Brady's 4-state activity champion: 107 steps, 13 non-blanks
        mach = parse_machine("1RB1LB_1LA0LC_1RZ1LD_1RD0RA")
        res = simulate(mach, LIMITS)
        assert (res.steps, res.nonblank) == (107, 13)
        nm = normalize_first_visit(prune_unused(mach, LIMITS), LIMITS)
        cls = classify_transitions(nm)
        bits = encode_description(nm, cls)
        n, m = nm.machine.n, nm.machine.m
        l1, l2, l3 = bits.part_lengths
        assert l1 <= 2 * ceil_log2(n)
        assert l2 == n * m * (ceil_log2(m) + 2)
        assert l3 == n * (m - 1) * ceil_log2(n)
        assert l1 + l2 + l3 <= 4 + 24 + 8

    def test_one_state_part3_entries(self):
        nm = normalize_first_visit(parse_machine("1RZ0RZ"), LIMITS)
        bits = encode_description(nm, classify_transitions(nm))
        # n(m-1) = 1 entry of ceil(log2 1) = 0 bits
        assert bits.part_lengths[2] == 0

    def test_round_trip_champion(self):
        nm = normalize_first_visit(parse_machine(CHAMPION_22), LIMITS)
        bits = encode_description(nm, classify_transitions(nm))
        back = decode_description(bits, m=2, limits=LIMITS)
        ours, original = simulate(back, LIMITS), nm.witness
        assert ours.halted
        assert (ours.steps, ours.nonblank) == (original.steps, original.nonblank)
        assert ours.final_tape.cells == original.final_tape.cells

    def test_serialization_round_trip(self):
        nm = normalize_first_visit(parse_machine(CHAMPION_22), LIMITS)
        bits = encode_description(nm, classify_transitions(nm))
        again = DescriptionBits.from_text(bits.to_text())
        assert again == bits

    def test_truncated_bits_rejected(self):
        nm = normalize_first_visit(parse_machine(CHAMPION_22), LIMITS)
        bits = encode_description(nm, classify_transitions(nm))
        clipped = DescriptionBits(
            bits=bits.bits[:-1],
            part_lengths=(
                bits.part_lengths[0],
                bits.part_lengths[1],
                bits.part_lengths[2] - 1,
            ),
        )
        with pytest.raises(MalformedBits):
            decode_description(clipped, m=2, limits=LIMITS)

    def test_round_trip_over_2_2_space(self):
        for mach, d in halting_machines(2, 2):
            nm = normalize_first_visit(prune_unused(mach, LIMITS), LIMITS)
            bits = encode_description(nm, classify_transitions(nm))
            back = decode_description(bits, m=2, limits=LIMITS)
            res = simulate(back, LIMITS)
            assert (res.steps, res.nonblank) == (d.steps, d.nonblank), (
                format_machine(mach)
            )


class TestBounds:
    def test_direct_arithmetic(self):
        assert description_length_bound(4, 2, 8) == 8 * 2 - 4 * 2 + 32

    def test_monotone_in_n(self):
        values = [description_length_bound(n, 2, 4) for n in range(2, 40)]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_fitted_constant_bounds_the_spaces(self):
        samples = []
        for n, m in [(2, 2), (3, 2)]:
            for mach, _ in halting_machines(n, m):
                pruned = prune_unused(mach, LIMITS)
                if pruned.n < 2:
                    continue
                nm = normalize_first_visit(pruned, LIMITS)
                bits = encode_description(nm, classify_transitions(nm))
                samples.append((nm.machine.n, nm.machine.m, len(bits.bits)))
        c = fit_description_constant(samples)
        assert c > 0
        for n, m, length in samples:
            assert length <= description_length_bound(n, m, c)


class TestCapacity:
    def test_holds_from_4_with_unit_constant(self):
        params = BoundParams(m=2, c=1, d=0)
        flags = {n: capacity_check(n, params) for n in range(2, 1025)}
        assert not flags[3]
        assert all(flags[n] for n in range(4, 1025))
        assert capacity_threshold(params, scan_limit=1024) == 4

    def test_huge_overhead_fails(self):
        params = BoundParams(m=2, c=1, d=10**6)
        assert not capacity_check(params.d + 2, params)

    def test_underflow(self):
        with pytest.raises(Underflow):
            capacity_check(5, BoundParams(m=2, c=1, d=5))

    def test_threshold_monotone_in_d(self):
        thresholds = []
        for d in range(0, 6):
            params = BoundParams(m=2, c=2, d=d)
            thresholds.append(capacity_threshold(params, scan_limit=2048))
        assert all(t is not None for t in thresholds)
        assert all(b >= a for a, b in zip(thresholds, thresholds[1:]))
