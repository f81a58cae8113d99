import random

import pytest

from beaverlab.errors import MalformedText, StateOutOfRange, SymbolOutOfRange
from beaverlab.machine import (
    HALT,
    Direction,
    Machine,
    Rule,
    SimLimits,
    Verdict,
    count_halting,
    format_machine,
    mirror,
    parse_machine,
    simulate,
)

L, R = Direction.LEFT, Direction.RIGHT
LIMITS = SimLimits(max_steps=10_000)


class TestParseFormat:
    def test_smallest_table(self):
        m = parse_machine("1RZ1RZ")
        assert m.n == 1 and m.m == 2
        assert m.rule(1, 0) == Rule(1, R, HALT)
        assert m.rule(1, 1) == Rule(1, R, HALT)

    def test_two_state_round_trip(self):
        text = "1RB1LB_1LA1RZ"
        m = parse_machine(text)
        assert m.n == 2 and m.m == 2
        assert format_machine(m) == text

    def test_three_symbol_round_trip(self):
        text = "1RB2LA1RA_2LA2RB0RZ"
        m = parse_machine(text)
        assert m.n == 2 and m.m == 3
        assert format_machine(m) == text

    def test_format_then_parse_is_identity(self):
        m = parse_machine("1RB2LA1RA_2LA2RB0RZ")
        assert parse_machine(format_machine(m)) == m

    def test_random_tables_round_trip(self):
        rng = random.Random(20240817)
        for _ in range(200):
            n, m = rng.randint(1, 4), rng.randint(2, 4)
            table = tuple(
                tuple(
                    Rule(
                        rng.randrange(m),
                        rng.choice([L, R]),
                        rng.choice([HALT] + list(range(1, n + 1))),
                    )
                    for _ in range(m)
                )
                for _ in range(n)
            )
            machine = Machine(n, m, table)
            assert parse_machine(format_machine(machine)) == machine

    def test_extended_format_round_trip(self):
        # 12 symbols forces the extended variant
        n, m = 2, 12
        table = tuple(
            tuple(Rule((q + r) % m, R if r % 2 else L, 1 + (r % n)) for r in range(m))
            for q in range(n)
        )
        machine = Machine(n, m, table)
        text = format_machine(machine)
        assert ";" in text
        assert parse_machine(text) == machine

    def test_bad_character(self):
        with pytest.raises(MalformedText):
            parse_machine("1XZ1RZ")

    def test_wrong_row_length(self):
        with pytest.raises(MalformedText):
            parse_machine("1RZ1R")

    def test_rows_must_agree(self):
        with pytest.raises(MalformedText):
            parse_machine("1RA1RA_1RA1RA1RA")

    def test_state_out_of_range(self):
        with pytest.raises(StateOutOfRange):
            parse_machine("1RB1RB")  # B names state 2 of a 1-state machine

    def test_symbol_out_of_range(self):
        with pytest.raises(SymbolOutOfRange):
            parse_machine("2RZ1RZ")  # write 2 in a 2-symbol machine


class TestSimulate:
    def test_one_state_halts_after_first_step(self):
        res = simulate(parse_machine("1RZ1RZ"), LIMITS)
        assert res.verdict is Verdict.HALTED
        assert res.steps == 1
        assert res.nonblank == 1
        assert res.halting_rule_used == (1, 0)

    def test_right_runner_is_a_cycler(self):
        res = simulate(parse_machine("1RA1RA"), SimLimits(max_steps=100))
        assert res.verdict is Verdict.CYCLER

    def test_right_runner_without_detection_hits_limit(self):
        res = simulate(
            parse_machine("1RA1RA"), SimLimits(max_steps=100, detect_cycles=False)
        )
        assert res.verdict is Verdict.STEP_LIMIT
        assert res.steps == 100

    def test_left_runner_is_a_cycler(self):
        res = simulate(parse_machine("1LA1LA"), SimLimits(max_steps=100))
        assert res.verdict is Verdict.CYCLER

    def test_two_state_champion_scores(self):
        # S(2,2) = 6 and Sigma(2,2) = 4
        res = simulate(parse_machine("1RB1LB_1LA1RZ"), LIMITS)
        assert res.verdict is Verdict.HALTED
        assert res.steps == 6
        assert res.nonblank == 4

    def test_in_place_flipper_detected(self):
        # writes 1 then 0 forever on the same lane of two cells
        res = simulate(parse_machine("1LB1LB_0RA0RA"), SimLimits(max_steps=1000))
        assert res.verdict is Verdict.CYCLER

    def test_halting_write_counts_for_productivity(self):
        res = simulate(parse_machine("0RZ0RZ"), LIMITS)
        assert res.verdict is Verdict.HALTED
        assert res.steps == 1
        assert res.nonblank == 0

    def test_determinism(self):
        m = parse_machine("1RB1LB_1LA1RZ")
        assert simulate(m, LIMITS) == simulate(m, LIMITS)

    def test_nonblank_at_most_steps(self):
        for text in ["1RZ1RZ", "1RB1LB_1LA1RZ", "1RB2LA1RA_2LA2RB0RZ"]:
            res = simulate(parse_machine(text), LIMITS)
            if res.halted:
                assert res.nonblank <= res.steps

    def test_first_visit_order(self):
        res = simulate(parse_machine("1RB1LB_1LA1RZ"), LIMITS)
        assert res.first_visit_order == (1, 2)


class TestMirror:
    def test_involution(self):
        m = parse_machine("1RB2LA1RA_2LA2RB0RZ")
        assert mirror(mirror(m)) == m

    def test_smallest(self):
        assert format_machine(mirror(parse_machine("1RZ1RZ"))) == "1LZ1LZ"

    def test_mirror_preserves_scores_and_negates_head(self):
        m = parse_machine("1RB1LB_1LA1RZ")
        a, b = simulate(m, LIMITS), simulate(mirror(m), LIMITS)
        assert (a.verdict, a.steps, a.nonblank) == (b.verdict, b.steps, b.nonblank)
        assert a.final_head == -b.final_head


class TestCountHalting:
    @pytest.mark.parametrize(
        "text,k",
        [("1RZ1RZ", 2), ("1RB1LB_1LA1RZ", 1), ("1RA1RA", 0)],
    )
    def test_counts(self, text, k):
        assert count_halting(parse_machine(text)) == k
