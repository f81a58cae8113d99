"""Machine representation, text format, simulation, and score measures.

Machines are the quintuple variant: every transition writes a symbol, moves
the head one cell, and enters a new state.  Symbol 0 is the blank; state 1 is
the initial state; the halt state is represented by the ``HALT`` sentinel.
Activity is the number of steps of the blank-tape run, productivity the number
of non-blank cells at halt.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

from .errors import MalformedText, StateOutOfRange, SymbolOutOfRange

HALT = 0  # sentinel for the halt state in a rule's ``next_state``

MAX_STATES = 25  # letters A..Y; Z is reserved for halt

_LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXY"


class Direction(enum.IntEnum):
    LEFT = -1
    RIGHT = 1

    def flipped(self) -> "Direction":
        return Direction.LEFT if self is Direction.RIGHT else Direction.RIGHT

    @property
    def letter(self) -> str:
        return "L" if self is Direction.LEFT else "R"

    @staticmethod
    def from_letter(ch: str) -> "Direction":
        if ch == "L":
            return Direction.LEFT
        if ch == "R":
            return Direction.RIGHT
        raise MalformedText(f"bad direction letter {ch!r}")


class Rule(NamedTuple):
    """One transition: write a symbol, move, enter ``next_state`` (or HALT)."""

    write: int
    move: Direction
    next_state: int  # 1..n, or HALT

    @property
    def is_halting(self) -> bool:
        return self.next_state == HALT


@dataclass(frozen=True)
class Machine:
    """Complete n-state, m-symbol transition table.

    ``table[q-1][r]`` is the rule applied in state ``q`` reading symbol ``r``.
    Immutable, hence safe to share across threads and processes.
    """

    n: int
    m: int
    table: tuple[tuple[Rule, ...], ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("machine needs at least one state")
        if self.m < 2:
            raise ValueError("machine needs at least two symbols")
        if len(self.table) != self.n:
            raise ValueError("table must have one row per state")
        for row in self.table:
            if len(row) != self.m:
                raise ValueError("every row must define all symbols")
            for rule in row:
                if not 0 <= rule.write < self.m:
                    raise SymbolOutOfRange(f"write {rule.write} out of range")
                if rule.next_state != HALT and not 1 <= rule.next_state <= self.n:
                    raise StateOutOfRange(f"state {rule.next_state} out of range")

    def rule(self, state: int, symbol: int) -> Rule:
        return self.table[state - 1][symbol]

    def with_rule(self, state: int, symbol: int, rule: Rule) -> "Machine":
        rows = [list(row) for row in self.table]
        rows[state - 1][symbol] = rule
        return Machine(self.n, self.m, tuple(tuple(row) for row in rows))

    def rules(self) -> Iterator[tuple[int, int, Rule]]:
        for q, row in enumerate(self.table, start=1):
            for r, rule in enumerate(row):
                yield q, r, rule

    def __str__(self) -> str:
        return format_machine(self)


@dataclass
class Tape:
    """Sparse two-way-infinite tape; unvisited cells read as blank."""

    cells: dict[int, int] = field(default_factory=dict)
    head: int = 0
    leftmost: int = 0
    rightmost: int = 0

    def read(self, pos: int) -> int:
        return self.cells.get(pos, 0)

    def nonblank(self) -> int:
        return sum(1 for v in self.cells.values() if v != 0)

    def window(self) -> list[int]:
        return [self.read(i) for i in range(self.leftmost, self.rightmost + 1)]


class Verdict(enum.Enum):
    HALTED = "halted"
    STEP_LIMIT = "step_limit"
    CYCLER = "cycler"


@dataclass(frozen=True)
class SimLimits:
    max_steps: int
    detect_cycles: bool = True

    def __post_init__(self) -> None:
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass(frozen=True)
class RunResult:
    verdict: Verdict
    steps: int
    nonblank: int
    final_head: int
    final_tape: Tape
    first_visit_order: tuple[int, ...]
    halting_rule_used: tuple[int, int] | None = None

    @property
    def halted(self) -> bool:
        return self.verdict is Verdict.HALTED


# -- text format ---------------------------------------------------------------
#
# Compact (m <= 10): each rule is exactly 3 characters <digit><L|R><letter>,
# a state's rules concatenated in symbol order, states joined by '_'.
# Extended (m > 10): rules are <decimal><L|R><letter> joined by ';'.
# 'Z' always denotes the halt state.


def _parse_rule(write_text: str, move_ch: str, state_ch: str, n: int, m: int) -> Rule:
    try:
        write = int(write_text)
    except ValueError:
        raise MalformedText(f"bad write symbol {write_text!r}") from None
    if write >= m:
        raise SymbolOutOfRange(f"write symbol {write} >= m={m}")
    move = Direction.from_letter(move_ch)
    if state_ch == "Z":
        nxt = HALT
    else:
        idx = _LETTERS.find(state_ch)
        if idx < 0:
            raise MalformedText(f"bad state letter {state_ch!r}")
        if idx >= n:
            raise StateOutOfRange(f"state letter {state_ch!r} beyond n={n}")
        nxt = idx + 1
    return Rule(write, move, nxt)


def parse_machine(text: str) -> Machine:
    """Parse the machine text format (compact or extended variant)."""
    if not text:
        raise MalformedText("empty machine string")
    rows = text.split("_")
    n = len(rows)
    if n > MAX_STATES:
        raise StateOutOfRange(f"{n} states exceeds format limit {MAX_STATES}")
    extended = ";" in text
    if extended:
        split_rows = [row.split(";") for row in rows]
        m = len(split_rows[0])
    else:
        if any(len(row) % 3 != 0 or not row for row in rows):
            raise MalformedText("row length must be a multiple of 3")
        m = len(rows[0]) // 3
        split_rows = [[row[i : i + 3] for i in range(0, len(row), 3)] for row in rows]
    if m < 2:
        raise MalformedText("machines need at least two symbols")
    table = []
    for row in split_rows:
        if len(row) != m:
            raise MalformedText("all states must define the same symbol count")
        rules = []
        for cell in row:
            if len(cell) < 3:
                raise MalformedText(f"rule {cell!r} too short")
            rules.append(_parse_rule(cell[:-2], cell[-2], cell[-1], n, m))
        table.append(tuple(rules))
    return Machine(n, m, tuple(table))


def format_machine(machine: Machine) -> str:
    """Inverse of parse_machine; extended variant selected when m > 10."""
    if machine.n > MAX_STATES:
        raise StateOutOfRange(f"{machine.n} states exceeds format limit")

    def fmt(rule: Rule) -> str:
        st = "Z" if rule.is_halting else _LETTERS[rule.next_state - 1]
        return f"{rule.write}{rule.move.letter}{st}"

    joiner = ";" if machine.m > 10 else ""
    return "_".join(joiner.join(fmt(r) for r in row) for row in machine.table)


def mirror(machine: Machine) -> Machine:
    """Swap every Left and Right move; an involution."""
    table = tuple(
        tuple(Rule(r.write, r.move.flipped(), r.next_state) for r in row)
        for row in machine.table
    )
    return Machine(machine.n, machine.m, table)


def count_halting(machine: Machine) -> int:
    """Number of table cells whose next state is halt (the k in k-halting)."""
    return sum(1 for _, _, rule in machine.rules() if rule.is_halting)


# -- simulation ----------------------------------------------------------------

# Cycle-detection tuning: exact-configuration keys are recorded only while the
# visited window and step count stay small; detection stays sound either way.
_EXACT_WINDOW = 128
_EXACT_STEPS = 50_000
_EXACT_BUDGET = 150_000


def simulate(machine: Machine, limits: SimLimits) -> RunResult:
    """Run the machine from state 1 on a blank tape.

    The halting transition writes its symbol and counts as one step.  With
    ``detect_cycles`` on, two sound non-halt proofs are attempted: exact
    configuration recurrence, and escape over a blank frontier (re-entering
    fresh territory in a previously seen state with no intervening backtrack,
    which replays forever shifted).
    """
    n, m = machine.n, machine.m
    # flat arrays, indexed by (state-1) * m + symbol
    writes = [0] * (n * m)
    moves = [0] * (n * m)
    nexts = [0] * (n * m)
    for q, r, rule in machine.rules():
        i = (q - 1) * m + r
        writes[i] = rule.write
        moves[i] = int(rule.move)
        nexts[i] = rule.next_state

    size = 256
    tape = [0] * size
    origin = size // 2
    head = origin
    left = right = head  # visited extent (list indices)
    state = 1
    steps = 0
    max_steps = limits.max_steps
    detect = limits.detect_cycles

    seen_states = [False] * (n + 1)
    seen_states[1] = True
    visit_order = [1]

    # frontier records: (position, state) stacks with strictly increasing
    # positions outward; a record dies once the head backtracks past it
    rstack: list[tuple[int, int]] = [(head, 1)]
    lstack: list[tuple[int, int]] = [(head, 1)]
    rstates = {1}
    lstates = {1}

    configs: set = set()
    recording = detect

    verdict = Verdict.STEP_LIMIT
    halting_rule: tuple[int, int] | None = None

    while steps < max_steps:
        if recording:
            if right - left <= _EXACT_WINDOW and steps <= _EXACT_STEPS:
                key = (state, head - left, bytes(tape[left : right + 1]))
                if key in configs:
                    verdict = Verdict.CYCLER
                    break
                if len(configs) < _EXACT_BUDGET:
                    configs.add(key)
                else:
                    recording = False
            else:
                recording = False

        sym = tape[head]
        i = (state - 1) * m + sym
        tape[head] = writes[i]
        head += moves[i]
        steps += 1
        nxt = nexts[i]
        if nxt == HALT:
            verdict = Verdict.HALTED
            halting_rule = (state, sym)
            if head < left:
                left = head
            elif head > right:
                right = head
            if head <= 0 or head >= size - 1:
                tape, origin, head, left, right, size = _grow(
                    tape, origin, head, left, right
                )
            break
        state = nxt
        if not seen_states[state]:
            seen_states[state] = True
            visit_order.append(state)

        if detect:
            while rstack and rstack[-1][0] > head:
                rstates.discard(rstack.pop()[1])
            while lstack and lstack[-1][0] < head:
                lstates.discard(lstack.pop()[1])
        if head > right:
            right = head
            if detect:
                if state in rstates:
                    verdict = Verdict.CYCLER
                    break
                rstack.append((head, state))
                rstates.add(state)
        elif head < left:
            left = head
            if detect:
                if state in lstates:
                    verdict = Verdict.CYCLER
                    break
                lstack.append((head, state))
                lstates.add(state)

        if head <= 0 or head >= size - 1:
            pad = size
            tape, origin, head, left, right, size = _grow(
                tape, origin, head, left, right
            )
            rstack = [(p + pad, q) for p, q in rstack]
            lstack = [(p + pad, q) for p, q in lstack]

    cells = {
        i - origin: tape[i] for i in range(left, right + 1) if tape[i] != 0
    }
    final = Tape(
        cells=cells, head=head - origin, leftmost=left - origin, rightmost=right - origin
    )
    return RunResult(
        verdict=verdict,
        steps=steps,
        nonblank=len(cells),
        final_head=head - origin,
        final_tape=final,
        first_visit_order=tuple(visit_order),
        halting_rule_used=halting_rule,
    )


def _grow(tape, origin, head, left, right):
    pad = len(tape)
    tape = [0] * pad + tape + [0] * pad
    return tape, origin + pad, head + pad, left + pad, right + pad, len(tape)
