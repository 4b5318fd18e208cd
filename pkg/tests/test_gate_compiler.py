import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinadder.gate_compiler import (CCNOT, CNOT, NOT, SWAP, FTriplet, FullAdder, a_bits,
                                     adder_gates, ccnot_end_gates, compile_adder, compile_ccnot,
                                     compile_ccnot_end, compile_cnot, compile_full_adder_triplet,
                                     compile_gates, compile_not, compile_swap,
                                     expected_output_state, ideal_apply, load_register,
                                     read_register, read_schedule, register_state,
                                     resonant_apply, schedule_records, write_schedule)
from spinadder.spin_model import ChainSpec


def bits(**kw):
    """Basis state from ``s<k>=bit`` keywords."""
    return sum(v << (int(k[1:]) - 1) for k, v in kw.items())


def compiled(gate, spec):
    return compile_gates([gate], spec)


def primitive_gates(spec):
    n = spec.n
    gates = [NOT(k) for k in range(1, n + 1)]
    for k in range(1, n):
        gates += [CNOT(k, k + 1), CNOT(k + 1, k), SWAP(k, k + 1), SWAP(k + 1, k)]
    for t in range(2, n):
        gates += [CCNOT(t - 1, t + 1, t), CCNOT(t + 1, t - 1, t)]
    for t in range(1, n - 1):
        gates += [CCNOT(t + 2, t + 1, t), CCNOT(t + 1, t + 2, t)]
    for t in range(3, n + 1):
        gates += [CCNOT(t - 2, t - 1, t)]
    for b in range(1, n - 1):
        gates += [FTriplet(b + 2, b + 1, b, 0), FTriplet(b + 2, b + 1, b, 1)]
    return gates


# ideal semantics


def test_ideal_examples():
    spec = ChainSpec.for_spins(3)
    assert ideal_apply(CCNOT(1, 2, 3), bits(s3=0, s2=1, s1=1), spec) == bits(s3=1, s2=1, s1=1)
    assert ideal_apply(SWAP(2, 1), bits(s2=0, s1=1), spec) == bits(s2=1, s1=0)
    assert ideal_apply(FTriplet(3, 2, 1, 1), bits(s3=0, s2=1, s1=1), spec) == 0b111


def test_ideal_not_ignores_neighbors():
    spec = ChainSpec.for_spins(3)
    for s in range(8):
        assert ideal_apply(NOT(2), s, spec) == s ^ 0b010


def test_ideal_swap_symmetric_state():
    spec = ChainSpec.for_spins(3)
    assert ideal_apply(SWAP(1, 2), 0b011, spec) == 0b011


def test_invalid_geometries():
    spec = ChainSpec.for_spins(5)
    for g in (CNOT(1, 3), CCNOT(1, 4, 2), SWAP(2, 4), FTriplet(3, 1, 2, 0), FTriplet(3, 2, 1, 2),
              NOT(6)):
        with pytest.raises(ValueError):
            ideal_apply(g, 0, spec)


def test_ideal_rejects_non_gate():
    with pytest.raises(TypeError):
        ideal_apply("CNOT", 0, ChainSpec(L=1))


# pulse-level compilation


def test_cnot_examples():
    spec = ChainSpec.for_spins(5)
    assert [p.condition for p in compile_cnot(2, 3, spec)] == [(0, 1), (1, 1)]
    assert [p.condition for p in compile_cnot(4, 3, spec)] == [(1, 0), (1, 1)]
    assert [(p.target, p.condition) for p in compile_cnot(2, 1, spec)] == [(1, (1, None))]
    with pytest.raises(ValueError):
        compile_cnot(1, 3, spec)


def test_ccnot_examples():
    spec = ChainSpec.for_spins(5)
    assert [(p.target, p.condition) for p in compile_ccnot(1, 3, 2, spec)] == [(2, (1, 1))]
    assert [(p.target, p.condition) for p in compile_ccnot(2, 4, 3, spec)] == [(3, (1, 1))]
    with pytest.raises(ValueError):
        compile_ccnot(1, 2, 3, spec)


def test_ccnot_end_both_orientations():
    spec = ChainSpec.for_spins(5)
    for far, near, t in ((1, 2, 3), (5, 4, 3), (3, 2, 1), (3, 4, 5)):
        pulses = compile_ccnot_end(far, near, t, spec)
        for s in range(32):
            assert resonant_apply(pulses, s, spec) == ideal_apply(CCNOT(far, near, t), s, spec)
    assert len(compile_ccnot_end(2, 3, 4, ChainSpec.for_spins(7))) == 13
    with pytest.raises(ValueError):
        compile_ccnot_end(1, 3, 2, spec)


def test_ccnot_end_expansion_exhaustive():
    spec = ChainSpec.for_spins(3)
    for s in range(8):
        want = ideal_apply(CCNOT(1, 2, 3), s, spec)
        for g in ccnot_end_gates(1, 2, 3):
            s = ideal_apply(g, s, spec)
        assert s == want


def test_swap_expansion_exhaustive():
    spec = ChainSpec.for_spins(3)
    for s in range(4):
        t = s
        for g in [CNOT(1, 2), CNOT(2, 1), CNOT(1, 2)]:
            t = ideal_apply(g, t, spec)
        assert t == ideal_apply(SWAP(2, 1), s, spec)


def test_not_pulse_counts():
    spec = ChainSpec.for_spins(5)
    assert len(compile_not(2, spec)) == 4
    assert len(compile_not(1, spec)) == 2
    assert len(compile_not(5, spec)) == 2


@pytest.mark.parametrize("n", [3, 5, 7, 9])
def test_resonant_semantics_equal_ideal_gates(n):
    spec = ChainSpec.for_spins(n)
    for g in primitive_gates(spec):
        pulses = compiled(g, spec)
        for s in range(1 << n):
            assert resonant_apply(pulses, s, spec) == ideal_apply(g, s, spec), (g, s)


def test_budgets():
    spec = ChainSpec(L=5)
    assert len(compile_swap(4, 3, spec)) == 6
    assert len(compile_full_adder_triplet(5, 4, 3, 0, spec)) == 15
    assert len(compile_full_adder_triplet(5, 4, 3, 1, spec)) == 21
    assert len(compile_full_adder_triplet(11, 10, 9, 0, spec)) == 11
    assert len(compile_full_adder_triplet(11, 10, 9, 1, spec)) == 16
    assert len(compile_full_adder_triplet(3, 2, 1, 0, spec)) == 15


def test_headline_schedule_count():
    sched = compile_adder(1 << 99, ChainSpec(L=100))
    assert sched.total_count == len(sched.pulses) == 2095
    assert all(p.is_pi_pulse for p in sched)


def test_smallest_adder():
    spec = ChainSpec(L=1)
    sched = compile_adder(1, spec)
    assert [t for t, _, _ in sched.segments] == ["F(3,2,1;a=1)"]
    assert len(sched) == 16


@pytest.mark.parametrize("L", [1, 2, 3, 7, 50, 100])
def test_total_below_27L(L):
    spec = ChainSpec(L=L)
    rng = random.Random(L)
    for a in (0, (1 << L) - 1, rng.getrandbits(L)):
        n = len(compile_adder(a, spec))
        ones = bin(a).count("1")
        top = (a >> (L - 1)) & 1
        interior = 15 * (L - 1) + 6 * (ones - top) + 6 * (L - 1)
        assert n == interior + (16 if top else 11)
        assert n < 27 * L


def test_segments_alternate_and_cover():
    sched = compile_adder(0b1011, ChainSpec(L=4))
    tags = [t for t, _, _ in sched.segments]
    assert tags == ["F(3,2,1;a=1)", "S(4,3)", "F(5,4,3;a=1)", "S(6,5)", "F(7,6,5;a=0)",
                    "S(8,7)", "F(9,8,7;a=1)"]
    assert sched.segments[0][1] == 0 and sched.segments[-1][2] == len(sched)
    for (_, _, stop), (_, start, _) in zip(sched.segments, sched.segments[1:]):
        assert stop == start
    for tag, start, stop in sched.segments:
        assert all(p.gate_tag.startswith(tag + "/") for p in sched.pulses[start:stop])


def test_a_bits_range():
    with pytest.raises(ValueError):
        a_bits(8, ChainSpec(L=3))


# register layout and the whole adder


def test_register_layout_examples():
    spec = ChainSpec(L=2)
    assert register_state(1, spec) == bits(s1=1)
    assert register_state(2, spec) == bits(s4=1)
    assert read_register(bits(s5=1, s1=1), spec) == 4
    assert read_register(0, spec) == 0
    with pytest.raises(ValueError):
        register_state(4, spec)


def test_headline_expected_state():
    spec = ChainSpec(L=100)
    out = expected_output_state(1 << 99, 1, spec)
    assert out == (1 << 199) | 0b11
    assert read_register(out, spec) == (1 << 99) + 1


def test_load_register():
    spec = ChainSpec(L=2)
    psi = load_register([(1, 3.0), (2, 4j)], spec)
    got = psi.to_dict()
    assert set(got) == {bits(s1=1), bits(s4=1)}
    assert got[bits(s1=1)] == pytest.approx(0.6) and got[bits(s4=1)] == pytest.approx(0.8j)
    with pytest.raises(ValueError):
        load_register([(1, 1), (1, 1)], spec)
    with pytest.raises(ValueError):
        load_register([(4, 1)], spec)
    with pytest.raises(ValueError):
        load_register([(1, 0)], spec)


@pytest.mark.parametrize("L", range(1, 7))
def test_adder_exhaustive_gate_level(L):
    spec = ChainSpec(L=L)
    for a, b in itertools.product(range(1 << L), repeat=2):
        out = ideal_apply(FullAdder(a), register_state(b, spec), spec)
        assert out == expected_output_state(a, b, spec)
        assert read_register(out, spec) == a + b
        # the addend b survives one spin below each sum bit
        assert all((out >> (2 * m)) & 1 == (b >> m) & 1 for m in range(L))


@pytest.mark.parametrize("L", range(1, 5))
def test_adder_exhaustive_pulse_level(L):
    spec = ChainSpec(L=L)
    for a in range(1 << L):
        sched = compile_adder(a, spec)
        for b in range(1 << L):
            assert resonant_apply(sched, register_state(b, spec), spec) == \
                expected_output_state(a, b, spec)


@given(st.data())
def test_adder_random_large(data):
    L = data.draw(st.integers(5, 20))
    a = data.draw(st.integers(0, (1 << L) - 1))
    b = data.draw(st.integers(0, (1 << L) - 1))
    spec = ChainSpec(L=L)
    sched = compile_adder(a, spec)
    assert resonant_apply(sched, register_state(b, spec), spec) == expected_output_state(a, b, spec)
    assert adder_gates(a, spec)[-1] == FTriplet(2 * L + 1, 2 * L, 2 * L - 1, (a >> (L - 1)) & 1)


# schedule files


def test_schedule_round_trip(tmp_path):
    spec = ChainSpec(L=3)
    sched = compile_adder(0b101, spec, rabi=0.1000123456789)
    path = tmp_path / "s.jsonl"
    write_schedule(path, sched, spec)
    back = read_schedule(path)
    assert back.pulses == sched.pulses
    assert back.segments == sched.segments
    first = schedule_records(sched, spec)[0]
    assert set(first) == {"seq", "gate_tag", "target", "species", "cond_left", "cond_right",
                          "rabi", "phase_rad", "duration", "lab_frequency_hz"}
    write_schedule(tmp_path / "t.jsonl", back, spec)
    assert (tmp_path / "t.jsonl").read_bytes() == path.read_bytes()
