"""Busy Beaver laboratory.

Simulate multi-symbol Turing machines, exhaustively search small spaces for
activity/productivity records, transform machines while provably growing their
scores, and encode machines in a compact self-delimiting description.
"""

from .machine import (
    HALT,
    Direction,
    Machine,
    Rule,
    RunResult,
    SimLimits,
    Tape,
    Verdict,
    count_halting,
    format_machine,
    mirror,
    parse_machine,
    simulate,
)

__all__ = [
    "HALT",
    "Direction",
    "Machine",
    "Rule",
    "RunResult",
    "SimLimits",
    "Tape",
    "Verdict",
    "count_halting",
    "format_machine",
    "mirror",
    "parse_machine",
    "simulate",
]
