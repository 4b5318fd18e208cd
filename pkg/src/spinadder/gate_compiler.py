"""Lowering of the quantum full adder into selective pi-pulses.

Operator products read right-to-left; gate lists here are kept in execution
order. A CNOT becomes one pulse per state of the target's non-control
neighbor; a CCNOT whose controls flank the target is one pulse; a CCNOT
with the target two sites from its far control is expanded through a
swap-conjugated neighbor CCNOT.

Register layout for an ``L``-bit register on ``n = 2L + 1`` spins: ``b^0``
sits on spin 1 and ``b^m`` (``m >= 1``) on spin ``2m + 2``. After the adder,
spin ``2m + 1`` holds ``b^m``, spin ``2m + 2`` the sum bit ``s^m`` and spin
``2L + 1`` the final carry.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .engine import Pulse, Superposition
from .spin_model import ChainSpec, neighbors, species_of, transition_frequency

#: Rabi frequency at which all detunings of the default chain are close to
#: 2*pi*k rotations.
DEFAULT_RABI = 0.10005


@dataclass(frozen=True)
class CNOT:
    control: int
    target: int


@dataclass(frozen=True)
class CCNOT:
    c1: int
    c2: int
    target: int


@dataclass(frozen=True)
class NOT:
    target: int


@dataclass(frozen=True)
class SWAP:
    i: int
    k: int


@dataclass(frozen=True)
class FTriplet:
    top: int
    mid: int
    bottom: int
    a_bit: int


@dataclass(frozen=True)
class FullAdder:
    a: int


GateSpec = Union[CNOT, CCNOT, NOT, SWAP, FTriplet, FullAdder]


@dataclass
class PulseSchedule:
    """Pulses in execution order plus ``(tag, start, stop)`` gate segments."""

    pulses: list = field(default_factory=list)
    segments: list = field(default_factory=list)

    @property
    def total_count(self) -> int:
        return len(self.pulses)

    def __len__(self):
        return len(self.pulses)

    def __iter__(self):
        return iter(self.pulses)

    def extend(self, tag: str, pulses: Sequence[Pulse]) -> None:
        start = len(self.pulses)
        self.pulses.extend(pulses)
        self.segments.append((tag, start, len(self.pulses)))

    def with_rabi(self, rabi: float) -> "PulseSchedule":
        return PulseSchedule([p.with_rabi(rabi) for p in self.pulses], list(self.segments))


def _bit(s: int, k: int) -> int:
    return (s >> (k - 1)) & 1


def _adjacent(spec: ChainSpec, i: int, k: int) -> None:
    spec.check_position(i)
    spec.check_position(k)
    if abs(i - k) != 1:
        raise ValueError(f"spins {i} and {k} are not adjacent")


def _ccnot_geometry(spec: ChainSpec, c1: int, c2: int, t: int) -> str:
    for k in (c1, c2, t):
        spec.check_position(k)
    if {c1, c2} == {t - 1, t + 1}:
        return "flanking"
    if sorted((c1, c2, t)) == list(range(min(c1, c2, t), min(c1, c2, t) + 3)) and t in (
            min(c1, c2, t), max(c1, c2, t)):
        return "end"
    raise ValueError(f"unsupported CCNOT geometry: controls {c1},{c2}, target {t}")


def _triplet(spec: ChainSpec, g: FTriplet) -> None:
    if not (g.top == g.mid + 1 == g.bottom + 2):
        raise ValueError(f"F triplet needs consecutive spins top>mid>bottom, got {g}")
    spec.check_position(g.top)
    spec.check_position(g.bottom)
    if g.a_bit not in (0, 1):
        raise ValueError("a_bit must be 0 or 1")


def ideal_apply(gate: GateSpec, s: int, spec: ChainSpec) -> int:
    """Exact Boolean action of ``gate`` on basis state ``s``."""
    if isinstance(gate, CNOT):
        _adjacent(spec, gate.control, gate.target)
        return s ^ (_bit(s, gate.control) << (gate.target - 1))
    if isinstance(gate, CCNOT):
        _ccnot_geometry(spec, gate.c1, gate.c2, gate.target)
        return s ^ ((_bit(s, gate.c1) & _bit(s, gate.c2)) << (gate.target - 1))
    if isinstance(gate, NOT):
        spec.check_position(gate.target)
        return s ^ (1 << (gate.target - 1))
    if isinstance(gate, SWAP):
        _adjacent(spec, gate.i, gate.k)
        bi, bk = _bit(s, gate.i), _bit(s, gate.k)
        if bi != bk:
            s ^= (1 << (gate.i - 1)) | (1 << (gate.k - 1))
        return s
    if isinstance(gate, FTriplet):
        _triplet(spec, gate)
        b, c, top = _bit(s, gate.bottom), _bit(s, gate.mid), _bit(s, gate.top)
        if gate.a_bit:
            top ^= c
            c ^= 1
        top ^= b & c
        c ^= b
        s &= ~((1 << (gate.top - 1)) | (1 << (gate.mid - 1)))
        return s | (top << (gate.top - 1)) | (c << (gate.mid - 1))
    if isinstance(gate, FullAdder):
        for g in adder_gates(gate.a, spec):
            s = ideal_apply(g, s, spec)
        return s
    raise TypeError(f"not a gate: {gate!r}")


def _pulse(spec, target, left, right, rabi, tag):
    return Pulse(target, (left, right), rabi, 0.0, None, tag)


def compile_cnot(control: int, target: int, spec: ChainSpec,
                 rabi: float = DEFAULT_RABI, tag: str = "") -> list[Pulse]:
    _adjacent(spec, control, target)
    tag = tag or f"CNOT({control}->{target})"
    left, right = neighbors(spec, target)
    if control == left:
        frees = (None,) if right is None else (0, 1)
        return [_pulse(spec, target, 1, f, rabi, tag) for f in frees]
    frees = (None,) if left is None else (0, 1)
    return [_pulse(spec, target, f, 1, rabi, tag) for f in frees]


def compile_ccnot(c1: int, c2: int, target: int, spec: ChainSpec,
                  rabi: float = DEFAULT_RABI, tag: str = "") -> list[Pulse]:
    if _ccnot_geometry(spec, c1, c2, target) != "flanking":
        raise ValueError(f"controls {c1},{c2} do not flank target {target}; "
                         "use compile_ccnot_end")
    return [_pulse(spec, target, 1, 1, rabi, tag or f"CCNOT({c1},{c2}->{target})")]


def ccnot_end_gates(c_far: int, c_near: int, target: int) -> list[GateSpec]:
    """Neighbor-only expansion of a CCNOT whose target is two sites from ``c_far``."""
    swap = [CNOT(c_near, target), CNOT(target, c_near), CNOT(c_near, target)]
    return swap + [CCNOT(c_far, target, c_near)] + swap


def compile_ccnot_end(c_far: int, c_near: int, target: int, spec: ChainSpec,
                      rabi: float = DEFAULT_RABI, tag: str = "") -> list[Pulse]:
    if not (abs(c_far - c_near) == 1 and abs(c_near - target) == 1
            and abs(c_far - target) == 2):
        raise ValueError(f"need consecutive spins with target two from the far control, "
                         f"got far={c_far}, near={c_near}, target={target}")
    tag = tag or f"CCNOT({c_far},{c_near}->{target})"
    return compile_gates(ccnot_end_gates(c_far, c_near, target), spec, rabi, tag)


def compile_not(target: int, spec: ChainSpec, rabi: float = DEFAULT_RABI,
                tag: str = "") -> list[Pulse]:
    left, right = neighbors(spec, target)
    tag = tag or f"NOT({target})"
    lefts = (None,) if left is None else (0, 1)
    rights = (None,) if right is None else (0, 1)
    return [_pulse(spec, target, lb, rb, rabi, tag) for lb in lefts for rb in rights]


def compile_swap(i: int, k: int, spec: ChainSpec, rabi: float = DEFAULT_RABI,
                 tag: str = "") -> list[Pulse]:
    _adjacent(spec, i, k)
    return compile_gates(swap_gates(i, k), spec, rabi, tag or f"SWAP({i},{k})")


def swap_gates(i: int, k: int) -> list[GateSpec]:
    return [CNOT(k, i), CNOT(i, k), CNOT(k, i)]


def triplet_gates(top: int, mid: int, bottom: int, a_bit: int) -> list[GateSpec]:
    """Execution-order gate list of one full-adder cell."""
    gates: list[GateSpec] = []
    if a_bit:
        gates += [CNOT(mid, top), NOT(mid)]
    gates += ccnot_end_gates(bottom, mid, top)
    gates.append(CNOT(bottom, mid))
    return gates


def compile_full_adder_triplet(top: int, mid: int, bottom: int, a_bit: int,
                               spec: ChainSpec, rabi: float = DEFAULT_RABI,
                               tag: str = "") -> list[Pulse]:
    _triplet(spec, FTriplet(top, mid, bottom, a_bit))
    tag = tag or f"F({top},{mid},{bottom};a={a_bit})"
    return compile_gates(triplet_gates(top, mid, bottom, a_bit), spec, rabi, tag)


def compile_gates(gates: Iterable[GateSpec], spec: ChainSpec,
                  rabi: float = DEFAULT_RABI, tag: str = "") -> list[Pulse]:
    """Lower primitive gates (execution order) to pulses, tags nested under ``tag``."""
    out: list[Pulse] = []
    for g in gates:
        if isinstance(g, CNOT):
            sub = compile_cnot(g.control, g.target, spec, rabi)
        elif isinstance(g, CCNOT):
            if _ccnot_geometry(spec, g.c1, g.c2, g.target) == "flanking":
                sub = compile_ccnot(g.c1, g.c2, g.target, spec, rabi)
            else:
                t, (c_near, c_far) = g.target, sorted((g.c1, g.c2), key=lambda c: abs(c - g.target))
                sub = compile_ccnot_end(c_far, c_near, t, spec, rabi)
        elif isinstance(g, NOT):
            sub = compile_not(g.target, spec, rabi)
        elif isinstance(g, SWAP):
            sub = compile_swap(g.i, g.k, spec, rabi)
        elif isinstance(g, FTriplet):
            sub = compile_full_adder_triplet(g.top, g.mid, g.bottom, g.a_bit, spec, rabi)
        else:
            raise TypeError(f"cannot lower {g!r}")
        if tag:
            sub = [Pulse(p.target, p.condition, p.rabi, p.phase, p.duration,
                         f"{tag}/{p.gate_tag}") for p in sub]
        out.extend(sub)
    return out


def a_bits(a: int, spec: ChainSpec) -> list[int]:
    if a < 0 or a >> spec.L:
        raise ValueError(f"a={a} does not fit in {spec.L} bits")
    return [(a >> m) & 1 for m in range(spec.L)]


def adder_gates(a: int, spec: ChainSpec) -> list[GateSpec]:
    """Cells and swaps of the chain adder in execution order (rightmost first)."""
    gates: list[GateSpec] = []
    for m, bit in enumerate(a_bits(a, spec)):
        if m:
            gates.append(SWAP(2 * m + 2, 2 * m + 1))
        gates.append(FTriplet(2 * m + 3, 2 * m + 2, 2 * m + 1, bit))
    return gates


def compile_adder(a: int, spec: ChainSpec, rabi: float = DEFAULT_RABI) -> PulseSchedule:
    sched = PulseSchedule()
    for g in adder_gates(a, spec):
        if isinstance(g, SWAP):
            tag = f"S({g.i},{g.k})"
            pulses = compile_swap(g.i, g.k, spec, rabi, tag)
        else:
            tag = f"F({g.top},{g.mid},{g.bottom};a={g.a_bit})"
            pulses = compile_full_adder_triplet(g.top, g.mid, g.bottom, g.a_bit, spec, rabi, tag)
        sched.extend(tag, pulses)
    return sched


def resonant_apply(pulses: Iterable[Pulse], s: int, spec: ChainSpec) -> int:
    """Fold pulses over ``s`` flipping the target only on exact resonance."""
    for p in pulses:
        left, right = neighbors(spec, p.target)
        lb = None if left is None else _bit(s, left)
        rb = None if right is None else _bit(s, right)
        if (lb, rb) == tuple(p.condition):
            s ^= 1 << (p.target - 1)
    return s


def register_state(b: int, spec: ChainSpec) -> int:
    """Basis state holding ``b`` in the input layout."""
    if b < 0 or b >> spec.L:
        raise ValueError(f"b={b} does not fit in {spec.L} bits")
    s = b & 1
    for m in range(1, spec.L):
        s |= ((b >> m) & 1) << (2 * m + 1)
    return s


def expected_output_state(a: int, b: int, spec: ChainSpec) -> int:
    """Adder output for inputs ``a``, ``b`` built from integer arithmetic alone."""
    total = a + b
    s = 0
    for m in range(spec.L):
        s |= ((b >> m) & 1) << (2 * m)
        s |= ((total >> m) & 1) << (2 * m + 1)
    return s | (((total >> spec.L) & 1) << (2 * spec.L))


def load_register(b_terms, spec: ChainSpec) -> Superposition:
    """Superposition over register values; amplitudes are normalized."""
    terms = list(b_terms)
    values = [v for v, _ in terms]
    if len(set(values)) != len(values):
        raise ValueError("duplicate register values")
    total = sum(abs(complex(amp)) ** 2 for _, amp in terms)
    if total == 0:
        raise ValueError("all amplitudes are zero")
    scale = total ** -0.5
    return Superposition.from_amplitudes(
        spec.n, {register_state(v, spec): complex(amp) * scale for v, amp in terms})


def read_register(s: int, spec: ChainSpec) -> int:
    """Integer held by the sum bits and final carry of an output state."""
    if s < 0 or s >> spec.n:
        raise ValueError(f"state does not fit {spec.n} spins")
    value = _bit(s, 2 * spec.L + 1) << spec.L
    for m in range(spec.L):
        value |= _bit(s, 2 * (m + 1)) << m
    return value


def schedule_records(schedule: Union[PulseSchedule, Sequence[Pulse]], spec: ChainSpec,
                     corrections: Optional[Sequence] = None) -> list[dict]:
    records = []
    for seq, p in enumerate(schedule):
        rec = {
            "seq": seq,
            "gate_tag": p.gate_tag,
            "target": p.target,
            "species": species_of(spec, p.target).value,
            "cond_left": p.condition[0],
            "cond_right": p.condition[1],
            "rabi": p.rabi,
            "phase_rad": p.phase,
            "duration": p.duration,
            "lab_frequency_hz": transition_frequency(spec, p.target, *p.condition),
        }
        if corrections is not None:
            rec["corrections"] = corrections[seq]
        records.append(rec)
    return records


def write_schedule(path, schedule, spec: ChainSpec, corrections=None) -> None:
    """Write one JSON record per line."""
    with open(path, "w") as fh:
        for rec in schedule_records(schedule, spec, corrections):
            fh.write(json.dumps(rec) + "\n")


def read_schedule(path) -> PulseSchedule:
    sched = PulseSchedule()
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            p = Pulse(rec["target"], (rec["cond_left"], rec["cond_right"]), rec["rabi"],
                      rec["phase_rad"], rec["duration"], rec["gate_tag"])
            seg = p.gate_tag.split("/", 1)[0]
            if sched.segments and sched.segments[-1][0] == seg:
                tag, start, _ = sched.segments[-1]
                sched.pulses.append(p)
                sched.segments[-1] = (tag, start, len(sched.pulses))
            else:
                sched.extend(seg, [p])
    return sched
