"""Deterministic single-tape Turing machines and their direct simulator."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Tuple


BLANK = "_"
ACCEPT = "accept"
REJECT = "reject"


class TMError(Exception):
    """Base class for Turing machine errors."""


class TMFormatError(TMError):
    """A machine description is malformed or incomplete."""


class NonDeterministicTM(TMError):
    """Two transitions share the same (state, read symbol) pair."""


@dataclass
class Transition:
    """A transition: in state, reading read, write write, move dir, go to state."""

    state: str
    read: str
    write: str
    direction: str  # "L" or "R"
    target: str

    def __str__(self) -> str:
        return f"trans {self.state} {self.read} {self.write} {self.direction} {self.target} ;"


@dataclass
class TMachine:
    """A deterministic Turing machine with a total transition table."""

    input_alphabet: Tuple[str, ...]
    tape_alphabet: Tuple[str, ...]  # includes BLANK
    states: Tuple[str, ...]  # includes ACCEPT and REJECT
    start: str
    transitions: List[Transition] = field(default_factory=list)

    def __post_init__(self) -> None:
        table: Dict[Tuple[str, str], Transition] = {}
        for tr in self.transitions:
            key = (tr.state, tr.read)
            if key in table:
                raise NonDeterministicTM(
                    f"duplicate transition for state {tr.state} reading {tr.read}"
                )
            table[key] = tr
        self._table = table
        self._check()

    def _check(self) -> None:
        if BLANK not in self.tape_alphabet:
            raise TMFormatError("tape alphabet must contain the blank symbol _")
        for a in self.input_alphabet:
            if a == BLANK:
                raise TMFormatError("the blank symbol cannot be an input symbol")
            if a not in self.tape_alphabet:
                raise TMFormatError(f"input symbol {a} missing from tape alphabet")
        for name in (ACCEPT, REJECT):
            if name not in self.states:
                raise TMFormatError(f"state set must contain {name}")
        if self.start not in self.states:
            raise TMFormatError(f"start state {self.start} not in state set")
        for tr in self.transitions:
            if tr.state in (ACCEPT, REJECT):
                raise TMFormatError(f"transition out of halting state {tr.state}")
            for st in (tr.state, tr.target):
                if st not in self.states:
                    raise TMFormatError(f"undeclared state {st} in transition")
            for sym in (tr.read, tr.write):
                if sym not in self.tape_alphabet:
                    raise TMFormatError(f"undeclared tape symbol {sym} in transition")
            if tr.direction not in ("L", "R"):
                raise TMFormatError(f"bad direction {tr.direction} in transition")
        for state in self.states:
            if state in (ACCEPT, REJECT):
                continue
            for sym in self.tape_alphabet:
                if (state, sym) not in self._table:
                    raise TMFormatError(
                        f"missing transition for state {state} reading {sym}"
                    )

    def step(self, state: str, read: str) -> Transition:
        return self._table[(state, read)]

    def __str__(self) -> str:
        lines = [
            "input " + " ".join(self.input_alphabet) + " ;",
            "tape " + " ".join(self.tape_alphabet) + " ;",
            "states " + " ".join(self.states) + " ;",
            f"start {self.start} ;",
        ]
        lines += [str(tr) for tr in self.transitions]
        return "\n".join(lines) + "\n"


@dataclass
class TMRun:
    """Outcome of a direct simulation."""

    verdict: str  # "accept", "reject", or "timeout"
    steps: int
    state: str
    tape: Dict[int, str]
    position: int

    @property
    def accepted(self) -> bool:
        return self.verdict == ACCEPT


def simulate_tm(tm: TMachine, x: str, max_steps: int = 100000) -> TMRun:
    """Run tm on input x: head starts on a blank at cell 0, input in cells 1..n."""
    for ch in x:
        if ch not in tm.input_alphabet:
            raise TMFormatError(f"input symbol {ch} not in input alphabet")
    tape: Dict[int, str] = {i + 1: ch for i, ch in enumerate(x)}
    state = tm.start
    pos = 0
    steps = 0
    while state not in (ACCEPT, REJECT):
        if steps >= max_steps:
            return TMRun("timeout", steps, state, tape, pos)
        tr = tm.step(state, tape.get(pos, BLANK))
        if tr.write == BLANK:
            tape.pop(pos, None)
        else:
            tape[pos] = tr.write
        pos += 1 if tr.direction == "R" else -1
        state = tr.target
        steps += 1
    return TMRun(state, steps, state, tape, pos)
