"""Hierarchical resource counting.

Counts are computed once per subroutine body and scaled by repetition
counts, so the cost is linear in the size of the distinct bodies no matter
how large the flattened circuit is. Python integers keep every counter exact.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping

from .circuit import (
    KIND_NAMES, Q, Call, Circuit, Discard, Init, Measure, Term, Unitary, dependency_order,
)


@dataclass(frozen=True)
class CountVector:
    """Gate counters keyed by ``(kind label, control count)``.

    ``total_gates`` counts unitaries and measurements; initializations,
    terminations and discards are tallied separately.
    """

    gates: Mapping[tuple[str, int], int] = field(default_factory=dict)
    init: int = 0
    term: int = 0
    measure: int = 0
    discard: int = 0
    peak_width: int = 0
    total_allocations: int = 0

    def __post_init__(self):
        object.__setattr__(self, "gates", {k: v for k, v in self.gates.items() if v})

    __hash__ = None  # type: ignore[assignment]

    @property
    def total_gates(self) -> int:
        return sum(self.gates.values()) + self.measure

    def __add__(self, other: CountVector) -> CountVector:
        """Sequential composition: counters add, peak width is the larger one."""
        return CountVector(
            dict(Counter(self.gates) + Counter(other.gates)),
            self.init + other.init, self.term + other.term,
            self.measure + other.measure, self.discard + other.discard,
            max(self.peak_width, other.peak_width),
            self.total_allocations + other.total_allocations,
        )

    def scaled(self, r: int) -> CountVector:
        """``r`` back-to-back repetitions; peak width does not grow."""
        return CountVector(
            {k: v * r for k, v in self.gates.items()},
            self.init * r, self.term * r, self.measure * r, self.discard * r,
            self.peak_width, self.total_allocations * r,
        )

    def get(self, label: str, controls: int = 0) -> int:
        return self.gates.get((label, controls), 0)

    def by_kind(self, label: str) -> int:
        return sum(v for (k, _), v in self.gates.items() if k == label)


@dataclass
class _Summary:
    gates: Counter
    init: int = 0
    term: int = 0
    measure: int = 0
    discard: int = 0
    allocations: int = 0
    excess: int = 0  # peak live qubits above the body's own quantum inputs


def _summarize(body: Circuit, table: Mapping[str, _Summary]) -> _Summary:
    s = _Summary(Counter())
    live = base = sum(1 for _, k in body.inputs if k is Q)
    peak = live
    for g in body.gates:
        if isinstance(g, Unitary):
            s.gates[(g.kind.label, len(g.controls))] += 1
        elif isinstance(g, Init):
            s.init += 1
            s.allocations += 1
            live += 1
        elif isinstance(g, Term):
            s.term += 1
            live -= 1
        elif isinstance(g, Measure):
            s.measure += 1
            live -= 1
        elif isinstance(g, Discard):
            s.discard += 1
        elif isinstance(g, Call):
            sub = table[g.name]
            r = g.repetitions
            for k, v in sub.gates.items():
                s.gates[k] += v * r
            s.init += sub.init * r
            s.term += sub.term * r
            s.measure += sub.measure * r
            s.discard += sub.discard * r
            s.allocations += sub.allocations * r
            peak = max(peak, live + sub.excess)
        peak = max(peak, live)
    s.excess = peak - base
    return s


def count(c: Circuit) -> CountVector:
    """Resource counts of the fully flattened circuit, without flattening."""
    table: dict[str, _Summary] = {}
    for name in dependency_order(c.subs):
        table[name] = _summarize(c.subs[name].body, table)
    top = _summarize(c, table)
    q_in = sum(1 for _, k in c.inputs if k is Q)
    return CountVector(dict(top.gates), top.init, top.term, top.measure, top.discard,
                       q_in + top.excess, q_in + top.allocations)


def peak_width(c: Circuit) -> int:
    return count(c).peak_width


def _label_key(label: str) -> tuple:
    m = re.fullmatch(r"(\w+)\((\d+)\)", label)
    name, arg = (m.group(1), int(m.group(2))) if m else (label, 0)
    return (KIND_NAMES.index(name) if name in KIND_NAMES else len(KIND_NAMES), name, arg)


def _rows(v: CountVector) -> list[tuple[str, int, int]]:
    keys = sorted(v.gates, key=lambda k: (_label_key(k[0]), k[1]))
    return [(k[0], k[1], v.gates[k]) for k in keys]


def report(v: CountVector, fmt: str = "table") -> str:
    """Render ``v`` as an aligned table or as ``key: value`` lines."""
    if fmt == "table":
        rows = [("kind", "controls", "count")] + [(k, str(c), str(n)) for k, c, n in _rows(v)]
        w0 = max(len(r[0]) for r in rows)
        w1 = max(len(r[1]) for r in rows)
        lines = [f"{a:<{w0}}  {b:>{w1}}  {n}" for a, b, n in rows]
        lines += [
            f"Init: {v.init}",
            f"Term: {v.term}",
            f"Measure: {v.measure}",
            f"Total gates: {v.total_gates}",
            f"Qubits (peak): {v.peak_width}",
            f"Qubits (total): {v.total_allocations}",
        ]
    elif fmt in ("machine", "machine-readable", "counts"):
        lines = [f"gate.{k}.{c}: {n}" for k, c, n in _rows(v)]
        lines += [
            f"init: {v.init}",
            f"term: {v.term}",
            f"measure: {v.measure}",
            f"total_gates: {v.total_gates}",
            f"qubits_peak: {v.peak_width}",
            f"qubits_total: {v.total_allocations}",
        ]
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    return "\n".join(lines) + "\n"


_MACHINE_LINE = re.compile(r"(gate\.[^\s:]+\.\d+|init|term|measure|total_gates|qubits_peak|qubits_total): (\d+)\Z")


def parse_report(text: str) -> dict[str, int]:
    """Parse the machine-readable report; raises ValueError on any bad line."""
    out: dict[str, int] = {}
    for i, line in enumerate(text.splitlines(), 1):
        m = _MACHINE_LINE.match(line)
        if not m:
            raise ValueError(f"line {i}: not a 'key: value' count line: {line!r}")
        if m.group(1) in out:
            raise ValueError(f"line {i}: duplicate key {m.group(1)!r}")
        out[m.group(1)] = int(m.group(2))
    return out


def from_report(fields: Mapping[str, int]) -> CountVector:
    gates = {}
    for k, v in fields.items():
        if k.startswith("gate."):
            label, ctl = k[5:].rsplit(".", 1)
            gates[(label, int(ctl))] = v
    return CountVector(gates, fields.get("init", 0), fields.get("term", 0), fields.get("measure", 0), 0,
                       fields.get("qubits_peak", 0), fields.get("qubits_total", 0))
