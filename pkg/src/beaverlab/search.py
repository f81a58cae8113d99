"""Exhaustive search of (n, m) machine spaces in tree normal form.

The enumeration fixes the first executed transition to (write 1, move Right,
state min(2, n)), introduces new states and new non-blank symbols in
increasing order, and extends transition tables lazily along the simulation
tree, so renaming-equivalent and mirror-equivalent machines are produced once.
Machines that halt on their very first step are covered by one dedicated
representative per space.

The tree walk carries a resumable simulation: at a branch point the tape and
bookkeeping are forked per candidate rule instead of re-running the prefix.
Every leaf decision (exact scores, non-halt proof, or undecided) falls out of
the walk itself and is schedule-independent, so parallel searches reduce to
the same report as serial ones.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Iterator, NamedTuple

from .errors import SpaceTooLarge
from .machine import (
    HALT,
    Direction,
    Machine,
    Rule,
    SimLimits,
    Verdict,
    format_machine,
    parse_machine,
    simulate,
)

_FILLER = Rule(0, Direction.RIGHT, 1)  # canonical rule for never-reached cells

# Complete-table count used as a coarse size guard; keeps everything at desk
# scale ((4,2) passes, (5,2)/(3,3) and up refuse).
DEFAULT_GUARD = 10**11

# exact-configuration recording caps (sound to stop recording at any point;
# all are pure functions of the executed prefix, keeping walks deterministic)
_EXACT_WINDOW = 128
_EXACT_BUDGET = 60_000
_EXACT_STEPS = 60_000


@dataclass(frozen=True)
class SearchSpace:
    n: int
    m: int
    limits: SimLimits
    deciders: tuple[str, ...] = ("cycler",)

    def __post_init__(self) -> None:
        if self.n < 1 or self.m < 2:
            raise ValueError("need n >= 1 and m >= 2")

    @property
    def cycler_enabled(self) -> bool:
        return "cycler" in self.deciders

    def raw_size(self) -> int:
        per_cell = 2 * self.m * (self.n + 1)
        return per_cell ** (self.n * self.m)


class Decision(NamedTuple):
    kind: str  # "halted" | "cycler" | "undecided"
    steps: int = 0
    nonblank: int = 0


@dataclass
class SearchReport:
    n: int
    m: int
    sigma: int
    s_max: int
    sigma_champions: list[tuple[str, int, int]]  # (machine, steps, nonblank)
    s_champions: list[tuple[str, int, int]]
    counts: dict[str, int]
    max_steps: int
    deciders: tuple[str, ...]

    def canonical_json(self) -> str:
        """Stable serialization; byte-identical across worker schedules."""
        payload = {
            "n": self.n,
            "m": self.m,
            "sigma": self.sigma,
            "s_max": self.s_max,
            "sigma_champions": sorted(self.sigma_champions),
            "s_champions": sorted(self.s_champions),
            "counts": self.counts,
            "max_steps": self.max_steps,
            "deciders": list(self.deciders),
        }
        return json.dumps(payload, sort_keys=True)


# -- resumable tree simulation ---------------------------------------------------


class _Sim:
    """Mutable run state, forkable at branch points.

    Cycle detection is segment-local: the exact-configuration set resets at
    every first read of a table cell, which makes detection a pure function of
    the executed prefix (and therefore identical whether a subtree is reached
    incrementally or replayed from scratch by a worker).
    """

    __slots__ = (
        "tape", "head", "left", "right", "state", "steps",
        "rstack", "lstack", "rstates", "lstates",
        "configs", "recording", "seen_cells",
    )

    def __init__(self) -> None:
        size = 64
        self.tape = [0] * size
        self.head = size // 2
        self.left = self.right = self.head
        self.state = 1
        self.steps = 0
        self.rstack = [(self.head, 1)]
        self.lstack = [(self.head, 1)]
        self.rstates = {1}
        self.lstates = {1}
        self.configs: set = set()
        self.recording = True
        self.seen_cells: set = set()

    def fork(self) -> "_Sim":
        s = _Sim.__new__(_Sim)
        s.tape = self.tape[:]
        s.head = self.head
        s.left = self.left
        s.right = self.right
        s.state = self.state
        s.steps = self.steps
        s.rstack = self.rstack[:]
        s.lstack = self.lstack[:]
        s.rstates = set(self.rstates)
        s.lstates = set(self.lstates)
        s.configs = set()  # next read is a first read, which resets anyway
        s.recording = self.recording
        s.seen_cells = set(self.seen_cells)
        return s

    def nonblank(self) -> int:
        return sum(1 for v in self.tape[self.left : self.right + 1] if v)


def _advance(sim: _Sim, table: dict, n: int, m: int, max_steps: int, detect: bool):
    """Run until an undefined cell is read or the run is decided.

    Returns ("branch", state, symbol), ("cycler",) or ("limit",).  At every
    first read of a table cell a closure check runs: if no undefined cell is
    graph-reachable from the current state the run can never halt (in-tree
    tables hold no halting rules), which proves non-halting on the spot.
    First-read events are a pure function of the executed prefix, so walks
    that fork mid-tree and walks replayed from scratch decide identically.
    """
    tape = sim.tape
    head = sim.head
    left, right = sim.left, sim.right
    state = sim.state
    steps = sim.steps
    rstack, lstack = sim.rstack, sim.lstack
    rstates, lstates = sim.rstates, sim.lstates
    configs = sim.configs
    recording = sim.recording
    seen_cells = sim.seen_cells
    size = len(tape)
    outcome = ("limit",)

    while steps < max_steps:
        sym = tape[head]
        cell = (state, sym)
        rule = table.get(cell)
        if rule is None:
            outcome = ("branch", state, sym)
            break
        if cell not in seen_cells:
            seen_cells.add(cell)
            configs = set()
            if detect and not _open_cell_reachable(table, state, n, m):
                outcome = ("cycler",)
                break
        if detect and recording:
            if right - left <= _EXACT_WINDOW and steps <= _EXACT_STEPS:
                key = (state, head - left, bytes(tape[left : right + 1]))
                if key in configs:
                    outcome = ("cycler",)
                    break
                if len(configs) < _EXACT_BUDGET:
                    configs.add(key)
                else:
                    recording = False
            else:
                recording = False
        tape[head] = rule.write
        head += int(rule.move)
        steps += 1
        state = rule.next_state
        while rstack and rstack[-1][0] > head:
            rstates.discard(rstack.pop()[1])
        while lstack and lstack[-1][0] < head:
            lstates.discard(lstack.pop()[1])
        if head > right:
            right = head
            if detect and state in rstates:
                outcome = ("cycler",)
                break
            rstack.append((head, state))
            rstates.add(state)
        elif head < left:
            left = head
            if detect and state in lstates:
                outcome = ("cycler",)
                break
            lstack.append((head, state))
            lstates.add(state)
        if head <= 0 or head >= size - 1:
            pad = size
            tape = [0] * pad + tape + [0] * pad
            head += pad
            left += pad
            right += pad
            rstack = [(p + pad, q) for p, q in rstack]
            lstack = [(p + pad, q) for p, q in lstack]
            size = len(tape)
            # recorded configuration keys use head-left offsets, unaffected

    sim.tape = tape
    sim.head = head
    sim.left, sim.right = left, right
    sim.state = state
    sim.steps = steps
    sim.rstack, sim.lstack = rstack, lstack
    sim.rstates, sim.lstates = rstates, lstates
    sim.configs = configs
    sim.recording = recording
    return outcome


def _complete(table: dict, n: int, m: int) -> Machine:
    rows = tuple(
        tuple(table.get((q, r), _FILLER) for r in range(m)) for q in range(1, n + 1)
    )
    return Machine(n, m, rows)


def _candidates(table: dict, n: int, m: int) -> list[Rule]:
    max_write = max(rule.write for rule in table.values())
    used = {q for q, _ in table} | {
        rule.next_state for rule in table.values() if rule.next_state != HALT
    }
    top_state = min(n, max(used) + 1)
    top_write = min(m - 1, max_write + 1)
    out = []
    for write in range(top_write + 1):
        for move in (Direction.LEFT, Direction.RIGHT):
            for nxt in range(1, top_state + 1):
                out.append(Rule(write, move, nxt))
    return out


_HALT_RULE = Rule(1, Direction.RIGHT, HALT)


def _open_cell_reachable(table: dict, start: int, n: int, m: int) -> bool:
    """Can the run, from `start`, ever read a cell the table leaves undefined?

    Graph over-approximation; a False answer proves the machine never halts
    (in-tree tables contain no halting rules).
    """
    todo, seen = [start], {start}
    while todo:
        q = todo.pop()
        for r in range(m):
            rule = table.get((q, r))
            if rule is None:
                return True
            nxt = rule.next_state
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return False


def _decided_leaves(
    table: dict, sim: _Sim, space: SearchSpace
) -> Iterator[tuple[Machine, Decision]]:
    n, m = space.n, space.m
    res = _advance(sim, table, n, m, space.limits.max_steps, space.cycler_enabled)
    if res[0] == "cycler":
        yield _complete(table, n, m), Decision("cycler")
        return
    if res[0] == "limit":
        machine = _complete(table, n, m)
        if space.cycler_enabled and not _halt_reachable(machine):
            yield machine, Decision("cycler")
        else:
            yield machine, Decision("undecided")
        return
    _, q, r = res
    halting = _complete({**table, (q, r): _HALT_RULE}, n, m)
    steps = sim.steps + 1
    nonblank = sim.nonblank() + (1 if sim.tape[sim.head] == 0 else 0)
    yield halting, Decision("halted", steps, nonblank)
    for rule in _candidates(table, n, m):
        table[(q, r)] = rule
        yield from _decided_leaves(table, sim.fork(), space)
        del table[(q, r)]


def _halting_rep(space: SearchSpace) -> tuple[Machine, Decision]:
    machine = _complete({(1, 0): _HALT_RULE}, space.n, space.m)
    return machine, Decision("halted", 1, 1)


def _root_table(space: SearchSpace) -> dict:
    return {(1, 0): Rule(1, Direction.RIGHT, min(2, space.n))}


def enumerate_tnf(space: SearchSpace) -> Iterator[Machine]:
    """Yield one representative per renaming/mirror class, lazily extended.

    The first machine is the one-step halter; the rest share the canonical
    first transition (write 1, move Right, state min(2, n)).
    """
    yield _halting_rep(space)[0]
    for machine, _ in _decided_leaves(_root_table(space), _Sim(), space):
        yield machine


# -- deciding single machines ---------------------------------------------------


def _halt_reachable(machine: Machine) -> bool:
    todo = [1]
    seen = {1}
    while todo:
        q = todo.pop()
        for rule in machine.table[q - 1]:
            if rule.is_halting:
                return True
            if rule.next_state not in seen:
                seen.add(rule.next_state)
                todo.append(rule.next_state)
    return False


def decide(machine: Machine, space: SearchSpace) -> Decision:
    """Classify a machine: exact scores, a non-halting proof, or undecided.

    A machine whose transition graph cannot reach any halting rule is proven
    non-halting without simulation and reported under the cycler count.
    """
    if space.cycler_enabled and not _halt_reachable(machine):
        return Decision("cycler")
    limits = SimLimits(space.limits.max_steps, detect_cycles=space.cycler_enabled)
    res = simulate(machine, limits)
    if res.verdict is Verdict.HALTED:
        return Decision("halted", res.steps, res.nonblank)
    if res.verdict is Verdict.CYCLER:
        return Decision("cycler")
    return Decision("undecided")


# -- search ----------------------------------------------------------------------


@dataclass
class _Agg:
    sigma: int = -1
    s_max: int = -1
    sigma_entries: set = field(default_factory=set)
    s_entries: set = field(default_factory=set)
    halted: int = 0
    cycler: int = 0
    undecided: int = 0

    def add(self, machine: Machine, decision: Decision) -> None:
        if decision.kind == "halted":
            self.halted += 1
            if decision.nonblank >= self.sigma or decision.steps >= self.s_max:
                entry = (format_machine(machine), decision.steps, decision.nonblank)
                if decision.nonblank > self.sigma:
                    self.sigma = decision.nonblank
                    self.sigma_entries = {entry}
                elif decision.nonblank == self.sigma:
                    self.sigma_entries.add(entry)
                if decision.steps > self.s_max:
                    self.s_max = decision.steps
                    self.s_entries = {entry}
                elif decision.steps == self.s_max:
                    self.s_entries.add(entry)
        elif decision.kind == "cycler":
            self.cycler += 1
        else:
            self.undecided += 1

    def merge(self, other: "_Agg") -> None:
        if other.sigma > self.sigma:
            self.sigma = other.sigma
            self.sigma_entries = set(other.sigma_entries)
        elif other.sigma == self.sigma and other.sigma >= 0:
            self.sigma_entries |= other.sigma_entries
        if other.s_max > self.s_max:
            self.s_max = other.s_max
            self.s_entries = set(other.s_entries)
        elif other.s_max == self.s_max and other.s_max >= 0:
            self.s_entries |= other.s_entries
        self.halted += other.halted
        self.cycler += other.cycler
        self.undecided += other.undecided


_WORKER_SPACE: SearchSpace | None = None


def _init_worker(space: SearchSpace) -> None:
    global _WORKER_SPACE
    _WORKER_SPACE = space


def _subtree_agg(items: tuple) -> _Agg:
    space = _WORKER_SPACE
    agg = _Agg()
    for machine, decision in _decided_leaves(dict(items), _Sim(), space):
        agg.add(machine, decision)
    return agg


def _frontier(space: SearchSpace, depth: int):
    """Split the tree: leaves above `depth` defined cells, plus task tables."""
    tasks: list[dict] = []
    agg = _Agg()
    n, m = space.n, space.m

    def walk(table: dict, sim: _Sim) -> None:
        res = _advance(sim, table, n, m, space.limits.max_steps, space.cycler_enabled)
        if res[0] == "cycler":
            agg.add(_complete(table, n, m), Decision("cycler"))
            return
        if res[0] == "limit":
            machine = _complete(table, n, m)
            if space.cycler_enabled and not _halt_reachable(machine):
                agg.add(machine, Decision("cycler"))
            else:
                agg.add(machine, Decision("undecided"))
            return
        _, q, r = res
        halting = _complete({**table, (q, r): _HALT_RULE}, n, m)
        steps = sim.steps + 1
        nonblank = sim.nonblank() + (1 if sim.tape[sim.head] == 0 else 0)
        agg.add(halting, Decision("halted", steps, nonblank))
        for rule in _candidates(table, n, m):
            child = {**table, (q, r): rule}
            if len(child) >= depth:
                tasks.append(child)
            else:
                walk(child, sim.fork())

    agg.add(*_halting_rep(space))
    walk(_root_table(space), _Sim())
    return tasks, agg


def search(
    space: SearchSpace,
    workers: int = 1,
    guard: int = DEFAULT_GUARD,
    partition_depth: int = 3,
) -> SearchReport:
    """Enumerate the space and report exact maxima over proven halters.

    Deterministic: reports are identical regardless of ``workers``.
    """
    if space.raw_size() > guard:
        raise SpaceTooLarge(
            f"({space.n},{space.m}) raw table count {space.raw_size():.2e} "
            f"exceeds guard {guard:.2e}"
        )
    if workers <= 1:
        agg = _Agg()
        agg.add(*_halting_rep(space))
        for machine, decision in _decided_leaves(_root_table(space), _Sim(), space):
            agg.add(machine, decision)
    else:
        tasks, agg = _frontier(space, partition_depth)
        if tasks:
            with Pool(workers, initializer=_init_worker, initargs=(space,)) as pool:
                chunk = max(1, len(tasks) // (workers * 8))
                for part in pool.imap_unordered(
                    _subtree_agg,
                    [tuple(sorted(t.items())) for t in tasks],
                    chunksize=chunk,
                ):
                    agg.merge(part)

    report = SearchReport(
        n=space.n,
        m=space.m,
        sigma=agg.sigma,
        s_max=agg.s_max,
        sigma_champions=sorted(agg.sigma_entries),
        s_champions=sorted(agg.s_entries),
        counts={
            "halted": agg.halted,
            "cycler": agg.cycler,
            "undecided": agg.undecided,
        },
        max_steps=space.limits.max_steps,
        deciders=space.deciders,
    )
    _verify_champions(report, space)
    return report


def _verify_champions(report: SearchReport, space: SearchSpace) -> None:
    """Champion scores must be reproducible from their strings alone."""
    for text, steps, nonblank in report.sigma_champions + report.s_champions:
        res = simulate(parse_machine(text), space.limits)
        if not (res.halted and res.steps == steps and res.nonblank == nonblank):
            raise AssertionError(f"champion {text} failed re-simulation")


# -- lemma property suites --------------------------------------------------------


def check_lemma2(space: SearchSpace, report: SearchReport | None = None) -> bool:
    """S(n, m) > n, checked against the searched maximum."""
    if report is None:
        report = search(space)
    return report.s_max > space.n


def one_direction_counterexamples(space: SearchSpace) -> list[tuple[str, int]]:
    """Halting one-direction machines running longer than n steps.

    Machines whose blank-cell transitions all share one direction only ever
    read blanks, so the non-blank rows never fire and are left as filler.
    """
    n, m = space.n, space.m
    bad = []
    targets = [HALT] + list(range(1, n + 1))
    limits = SimLimits(max_steps=n + 2)

    def blank_column_machines(move: Direction) -> Iterator[Machine]:
        def build(q: int, column: list[Rule]) -> Iterator[Machine]:
            if q > n:
                rows = tuple(
                    tuple([column[s - 1]] + [_FILLER] * (m - 1)) for s in range(1, n + 1)
                )
                yield Machine(n, m, rows)
                return
            for write in range(m):
                for nxt in targets:
                    yield from build(q + 1, column + [Rule(write, move, nxt)])

        yield from build(1, [])

    for move in (Direction.LEFT, Direction.RIGHT):
        for machine in blank_column_machines(move):
            res = simulate(machine, limits)
            if res.halted and res.steps > n:
                bad.append((format_machine(machine), res.steps))
    return bad


def check_lemma3(space: SearchSpace) -> bool:
    """Every halting one-direction machine halts within n steps."""
    return not one_direction_counterexamples(space)


def activity_productivity_gap(
    space: SearchSpace, report: SearchReport | None = None
) -> dict:
    """Among machines attaining s_max, the maximum productivity."""
    if report is None:
        report = search(space)
    best = max(nonblank for _, _, nonblank in report.s_champions)
    return {
        "n": space.n,
        "m": space.m,
        "s_max": report.s_max,
        "max_nonblank_at_s_max": best,
        "s_champion_count": len(report.s_champions),
    }


# -- champion ledger ---------------------------------------------------------------

DEFAULT_LEDGER = "beaver-ledger.jsonl"


def append_ledger(path: str, report: SearchReport) -> int:
    """Append champion records; one JSON object per line."""
    records = []
    seen = set()
    for text, steps, nonblank in report.s_champions + report.sigma_champions:
        if text in seen:
            continue
        seen.add(text)
        records.append(
            {
                "n": report.n,
                "m": report.m,
                "machine": text,
                "steps": steps,
                "nonblank": nonblank,
                "verdict": "halted",
                "cutoff": report.max_steps,
            }
        )
    with open(path, "a", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    return len(records)


def read_ledger(path: str) -> list[dict]:
    if not os.path.exists(path):
        return []
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


def ledger_best_steps(path: str, n: int, m: int) -> int | None:
    """Best halting step count recorded for the (n, m) space, if any."""
    best = None
    for rec in read_ledger(path):
        if rec["n"] == n and rec["m"] == m and rec["verdict"] == "halted":
            best = rec["steps"] if best is None else max(best, rec["steps"])
    return best
