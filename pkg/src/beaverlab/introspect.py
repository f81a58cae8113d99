"""Self-delimiting machine descriptions and the bit-length arithmetic.

A halting machine is normalized so every state occurs in its blank-tape run
and new states appear in increasing order.  The transition followed when a
state is first entered is special (there are exactly n of them, the halting
transition included); special targets can be dropped from the description and
recovered by replaying the computation, resolving each special transition to
the lowest not-yet-visited state and the last one to the halt state.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    DoesNotHalt,
    InconsistentClassification,
    MalformedBits,
    ReplayDivergence,
    Underflow,
    UnreachableState,
)
from .machine import (
    HALT,
    Direction,
    Machine,
    Rule,
    RunResult,
    SimLimits,
    simulate,
)


def ceil_log2(n: int) -> int:
    return (n - 1).bit_length()


def floor_log2(n: int) -> int:
    return n.bit_length() - 1


@dataclass(frozen=True)
class NormalizedMachine:
    machine: Machine
    witness: RunResult


@dataclass(frozen=True)
class TransitionClass:
    n: int
    m: int
    special: frozenset  # of (state, symbol) cells

    def is_special(self, state: int, symbol: int) -> bool:
        return (state, symbol) in self.special


@dataclass(frozen=True)
class DescriptionBits:
    bits: str  # '0'/'1' characters
    part_lengths: tuple[int, int, int]

    def __post_init__(self) -> None:
        if len(self.bits) != sum(self.part_lengths):
            raise MalformedBits("bit count does not match part lengths")

    def to_text(self) -> str:
        l1, l2, l3 = self.part_lengths
        padded = self.bits + "0" * (-len(self.bits) % 8)
        payload = bytes(
            int(padded[i : i + 8], 2) for i in range(0, len(padded), 8)
        ).hex()
        return f"{l1},{l2},{l3}:{payload}"

    @staticmethod
    def from_text(text: str) -> "DescriptionBits":
        try:
            header, payload = text.split(":", 1)
            l1, l2, l3 = (int(x) for x in header.split(","))
            raw = bytes.fromhex(payload)
        except ValueError:
            raise MalformedBits(f"bad description text {text!r}") from None
        bits = "".join(f"{b:08b}" for b in raw)
        total = l1 + l2 + l3
        if len(bits) < total or len(bits) - total >= 8:
            raise MalformedBits("payload length does not match header")
        return DescriptionBits(bits=bits[:total], part_lengths=(l1, l2, l3))


@dataclass(frozen=True)
class BoundParams:
    m: int
    k: int = 1
    c: float = 8.0
    d: int = 0  # overhead state count standing in for the fixed machinery

    def __post_init__(self) -> None:
        if self.c <= 0 or self.d < 0:
            raise ValueError("c must be positive and d non-negative")


# -- normalization ----------------------------------------------------------------


def _trace(machine: Machine, limits: SimLimits):
    """Step sequence [(state, symbol, rule), ...] of the blank-tape run."""
    tape: dict[int, int] = {}
    head, state, out = 0, 1, []
    for _ in range(limits.max_steps):
        sym = tape.get(head, 0)
        rule = machine.rule(state, sym)
        out.append((state, sym, rule))
        tape[head] = rule.write
        head += int(rule.move)
        if rule.is_halting:
            return out
        state = rule.next_state
    raise DoesNotHalt("machine did not halt within limits")


def prune_unused(machine: Machine, limits: SimLimits) -> Machine:
    """Drop states that never occur in the blank-tape run.

    Transitions that pointed at a dropped state are redirected to state 1;
    they are never reached, so the run is unchanged.
    """
    res = simulate(machine, limits)
    if not res.halted:
        raise DoesNotHalt("prune_unused needs a halting machine")
    visited = sorted(res.first_visit_order)
    if len(visited) == machine.n:
        return machine
    renum = {old: new for new, old in enumerate(sorted(visited), start=1)}
    rows = []
    for old in sorted(visited):
        row = []
        for rule in machine.table[old - 1]:
            if rule.is_halting:
                row.append(rule)
            else:
                row.append(Rule(rule.write, rule.move, renum.get(rule.next_state, 1)))
        rows.append(tuple(row))
    return Machine(len(visited), machine.m, tuple(rows))


def normalize_first_visit(machine: Machine, limits: SimLimits) -> NormalizedMachine:
    """Relabel states so they first appear in increasing order in the run."""
    res = simulate(machine, limits)
    if not res.halted:
        raise DoesNotHalt("normalization needs a halting machine")
    if len(res.first_visit_order) != machine.n:
        raise UnreachableState("run prune_unused first: some states never occur")
    perm = {old: new for new, old in enumerate(res.first_visit_order, start=1)}
    rows: list[tuple[Rule, ...]] = [()] * machine.n
    for old in range(1, machine.n + 1):
        row = tuple(
            rule if rule.is_halting else Rule(rule.write, rule.move, perm[rule.next_state])
            for rule in machine.table[old - 1]
        )
        rows[perm[old] - 1] = row
    normalized = Machine(machine.n, machine.m, tuple(rows))
    witness = simulate(normalized, limits)
    assert witness.halted and witness.first_visit_order == tuple(
        range(1, machine.n + 1)
    )
    assert (witness.steps, witness.nonblank) == (res.steps, res.nonblank)
    return NormalizedMachine(machine=normalized, witness=witness)


def classify_transitions(nm: NormalizedMachine) -> TransitionClass:
    """Mark the transition cells that first enter each state (halt included)."""
    machine = nm.machine
    limits = SimLimits(max_steps=max(1, nm.witness.steps))
    special = set()
    visited = {1}
    for state, sym, rule in _trace(machine, limits):
        target = rule.next_state
        if rule.is_halting:
            special.add((state, sym))
        elif target not in visited:
            visited.add(target)
            special.add((state, sym))
    if len(special) != machine.n:
        raise InconsistentClassification(
            f"{len(special)} special cells on an n={machine.n} machine"
        )
    return TransitionClass(n=machine.n, m=machine.m, special=frozenset(special))


# -- encoding -----------------------------------------------------------------------


def _encode_count(n: int) -> str:
    """Self-delimiting n-1: unary length prefix, then fixed-width binary."""
    value = n - 1
    width = max(1, value.bit_length())
    return "1" * (width - 1) + "0" + format(value, f"0{width}b")


def _decode_count(bits: str) -> tuple[int, int]:
    zero = bits.find("0")
    if zero < 0:
        raise MalformedBits("unary length prefix never terminates")
    width = zero + 1
    end = zero + 1 + width
    if end > len(bits):
        raise MalformedBits("truncated count field")
    return int(bits[zero + 1 : end], 2) + 1, end


def encode_description(nm: NormalizedMachine, cls: TransitionClass) -> DescriptionBits:
    """Three parts: state count, per-state rows, ordinary destinations.

    Rows carry (write, direction, special flag) per symbol; destinations of
    ordinary transitions are listed in first-use order with the never-used
    ones appended in (state, symbol) order.  Unused halting rules are
    rewritten to target state 1 first.
    """
    machine, witness = nm.machine, nm.witness
    n, m = machine.n, machine.m
    if classify_transitions(nm).special != cls.special:
        raise InconsistentClassification("classification does not match the run")

    used_halt = witness.halting_rule_used

    def target_of(q: int, r: int) -> int:
        rule = machine.rule(q, r)
        if rule.is_halting:
            if (q, r) != used_halt:
                return 1  # unused halting rule, rewritten
        return rule.next_state

    part1 = _encode_count(n)

    sym_width = ceil_log2(m)
    part2 = []
    for q in range(1, n + 1):
        for r in range(m):
            rule = machine.rule(q, r)
            part2.append(format(rule.write, f"0{sym_width}b"))
            part2.append("1" if rule.move is Direction.RIGHT else "0")
            part2.append("1" if cls.is_special(q, r) else "0")
    part2_bits = "".join(part2)

    order: list[tuple[int, int]] = []
    seen_cells = set()
    for state, sym, _rule in _trace(machine, SimLimits(max(1, witness.steps))):
        cell = (state, sym)
        if cell not in seen_cells:
            seen_cells.add(cell)
            if not cls.is_special(state, sym):
                order.append(cell)
    for q in range(1, n + 1):
        for r in range(m):
            if (q, r) not in seen_cells and not cls.is_special(q, r):
                order.append((q, r))

    st_width = ceil_log2(n)
    part3_bits = "".join(
        format(target_of(q, r) - 1, f"0{st_width}b") if st_width else ""
        for q, r in order
    )
    if len(order) != n * (m - 1):
        raise InconsistentClassification("ordinary cell count is off")

    bits = part1 + part2_bits + part3_bits
    return DescriptionBits(
        bits=bits,
        part_lengths=(len(part1), len(part2_bits), len(part3_bits)),
    )


def decode_description(bits: DescriptionBits, m: int, limits: SimLimits) -> Machine:
    """Rebuild the machine, recovering special targets by replay.

    Each special transition resolves, at its first firing, to the lowest
    not-yet-visited state; the last one resolves to the halt state.
    """
    stream = bits.bits
    n, consumed = _decode_count(stream)
    if consumed != bits.part_lengths[0]:
        raise MalformedBits("part-1 length mismatch")

    sym_width = ceil_log2(m)
    field = sym_width + 2
    need2 = n * m * field
    if bits.part_lengths[1] != need2 or consumed + need2 > len(stream):
        raise MalformedBits("truncated transition rows")
    rows: list[list] = []
    flags: list[list[bool]] = []
    pos = consumed
    for q in range(n):
        row, flag_row = [], []
        for r in range(m):
            chunk = stream[pos : pos + field]
            pos += field
            write = int(chunk[:sym_width], 2) if sym_width else 0
            if write >= m:
                raise MalformedBits(f"write symbol {write} out of range")
            move = Direction.RIGHT if chunk[sym_width] == "1" else Direction.LEFT
            flag_row.append(chunk[sym_width + 1] == "1")
            row.append((write, move))
        rows.append(row)
        flags.append(flag_row)
    if sum(f for fr in flags for f in fr) != n:
        raise MalformedBits("special flag count must equal the state count")

    st_width = ceil_log2(n)
    count3 = n * (m - 1)
    if bits.part_lengths[2] != count3 * st_width or pos + count3 * st_width != len(
        stream
    ):
        raise MalformedBits("part-3 length mismatch")
    destinations = []
    for _ in range(count3):
        chunk = stream[pos : pos + st_width]
        pos += st_width
        destinations.append((int(chunk, 2) + 1) if st_width else 1)

    # replay: resolve special targets in increasing order; ordinary cells
    # consume destinations in first-use order
    resolved: dict[tuple[int, int], int] = {}
    cursor = 0
    visited = {1}
    tape: dict[int, int] = {}
    head, state = 0, 1
    steps = 0
    halted = False
    while steps < limits.max_steps:
        sym = tape.get(head, 0)
        write, move = rows[state - 1][sym]
        cell = (state, sym)
        if cell not in resolved:
            if flags[state - 1][sym]:
                lowest = next(
                    (s for s in range(2, n + 1) if s not in visited), None
                )
                resolved[cell] = HALT if lowest is None else lowest
            else:
                if cursor >= len(destinations):
                    raise MalformedBits("ordinary destinations exhausted")
                resolved[cell] = destinations[cursor]
                cursor += 1
        tape[head] = write
        head += int(move)
        steps += 1
        target = resolved[cell]
        if target == HALT:
            halted = True
            break
        visited.add(target)
        state = target
    if not halted:
        raise ReplayDivergence("replay exceeded limits; description is corrupt")

    # never-fired ordinary cells take the remaining destinations in row order
    for q in range(1, n + 1):
        for r in range(m):
            cell = (q, r)
            if cell not in resolved and not flags[q - 1][r]:
                if cursor >= len(destinations):
                    raise MalformedBits("ordinary destinations exhausted")
                resolved[cell] = destinations[cursor]
                cursor += 1
    if cursor != len(destinations):
        raise MalformedBits("unconsumed ordinary destinations")
    unresolved_special = [
        (q, r)
        for q in range(1, n + 1)
        for r in range(m)
        if flags[q - 1][r] and (q, r) not in resolved
    ]
    if unresolved_special:
        raise MalformedBits(f"special cells never fired: {unresolved_special}")

    table = tuple(
        tuple(
            Rule(rows[q - 1][r][0], rows[q - 1][r][1], resolved[(q, r)])
            for r in range(m)
        )
        for q in range(1, n + 1)
    )
    return Machine(n, m, table)


# -- bit-length arithmetic ------------------------------------------------------------


def description_length_bound(n: int, m: int, c: float):
    """nm*ceil(log2 n) - n*ceil(log2 n) + c*n."""
    if n < 2 or m < 2 or c <= 0:
        raise ValueError("need n >= 2, m >= 2, c > 0")
    log = ceil_log2(n)
    bound = n * m * log - n * log + c * n
    return int(bound) if float(bound).is_integer() else bound


def fit_description_constant(samples: list[tuple[int, int, int]]) -> float:
    """Least c making the bound hold for every (n, m, encoded length) sample."""
    best = 0.0
    for n, m, length in samples:
        log = ceil_log2(n)
        best = max(best, (length - (n * m - n) * log) / n)
    return best


def capacity_check(n: int, params: BoundParams) -> bool:
    """Do n - d states hold enough extractable bits to describe the machine?

    True iff (n-d) * m * floor(log2(n-d)) >= description_length_bound(n, m, c).
    """
    if n <= params.d:
        raise Underflow(f"n={n} must exceed overhead d={params.d}")
    reduced = n - params.d
    lhs = reduced * params.m * floor_log2(reduced)
    return lhs >= description_length_bound(n, params.m, params.c)


def capacity_threshold(
    params: BoundParams, scan_limit: int = 4096
) -> int | None:
    """Least n such that capacity_check holds from n through scan_limit.

    Stands in for the threshold above which the simulating machine of the
    headline theorem has room to encode its subject; the fixed-machinery
    state count d is an input, not a derived truth.
    """
    flags = {}
    for n in range(params.d + 2, scan_limit + 1):
        flags[n] = capacity_check(n, params)
    threshold = None
    for n in range(scan_limit, params.d + 1, -1):
        if not flags.get(n, False):
            break
        threshold = n
    return threshold
