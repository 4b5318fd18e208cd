"""End-to-end adder runs: headline numbers, Rabi sweeps, 2*pi*k tuning."""
from __future__ import annotations

import csv
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import dense as _dense
from .engine import (DEFAULT_CENSUS_THRESHOLD, DEFAULT_PRUNE_EPS, Superposition,
                     apply_pulse, error_census, flip_probability, norm_sq, pulse_table)
from .gate_compiler import (FullAdder, compile_adder, expected_output_state, ideal_apply,
                            load_register, register_state)
from .phase_correction import apply_correction, correction_phases
from .spin_model import ChainSpec, coupling, neighbors

FRAMES = ("interaction", "rotating")
# p0 along a sweep moves by < 1e-5 between this and 1e-12, at a fraction of the cost
SWEEP_PRUNE_EPS = 1e-9


class TripwireError(RuntimeError):
    """The ideal-gate oracle disagrees with integer arithmetic."""


def classical_full_adder(a: int, b: int, c: int) -> tuple[int, int]:
    return a ^ b ^ c, (a & b) ^ (a & c) ^ (b & c)


@dataclass
class RunReport:
    p0: float
    n_error: int
    leaked: float
    pulse_count: int
    spectrum: list
    overlap_fidelity: float
    residual: float = 0.0
    norm_sq: float = 1.0
    outcomes: dict = field(default_factory=dict)
    n_entries: int = 0
    rabi: float = 0.0
    eps: float = 0.0
    census_threshold: float = DEFAULT_CENSUS_THRESHOLD
    state: Optional[Superposition] = field(default=None, repr=False)

    def bookkeeping_error(self) -> float:
        """|p0 + error mass + residual + leaked - 1|."""
        return abs(self.p0 + sum(p for _, p in self.spectrum) + self.residual
                   + self.leaked - 1.0)

    def summary(self) -> dict:
        return {
            "rabi": self.rabi,
            "p0": self.p0,
            "n_error": self.n_error,
            "leaked": self.leaked,
            "residual": self.residual,
            "pulse_count": self.pulse_count,
            "overlap_fidelity": self.overlap_fidelity,
            "n_entries": self.n_entries,
        }


@dataclass(frozen=True)
class SweepRow:
    rabi: float
    p0: float
    n_error: int


def _normalized_terms(b_terms) -> list[tuple[int, complex]]:
    terms = [(int(v), complex(amp)) for v, amp in b_terms]
    total = math.sqrt(sum(abs(a) ** 2 for _, a in terms))
    if total == 0:
        raise ValueError("all amplitudes are zero")
    return [(v, a / total) for v, a in terms]


def expected_outputs(spec: ChainSpec, a: int, b_values: Sequence[int]) -> dict[int, int]:
    """Map each input value to its output basis state, cross-checked two ways."""
    gate = FullAdder(a)
    out = {}
    for b in b_values:
        via_gates = ideal_apply(gate, register_state(b, spec), spec)
        via_ints = expected_output_state(a, b, spec)
        if via_gates != via_ints:
            raise TripwireError(f"adder oracle mismatch for a={a}, b={b}: "
                                f"{via_gates:#x} != {via_ints:#x}")
        out[b] = via_gates
    return out


def _report(psi_amp, psi_prob_items, terms, outputs, leaked, pulse_count, census_threshold,
            spectrum, n_entries, norm, rabi, eps) -> RunReport:
    outcomes = {b: abs(psi_amp(outputs[b])) ** 2 for b, _ in terms}
    p0 = sum(outcomes.values())
    overlap = abs(sum(amp.conjugate() * psi_amp(outputs[b]) for b, amp in terms)) ** 2
    expected = set(outputs.values())
    residual = float(sum(p for s, p in psi_prob_items()
                         if s not in expected and p <= census_threshold))
    return RunReport(p0, len(spectrum), leaked, pulse_count, spectrum, overlap, residual,
                     norm, outcomes, n_entries, rabi, eps, census_threshold)


def run_addition(spec: ChainSpec, a: int, b_terms, rabi: float,
                 eps: float = DEFAULT_PRUNE_EPS,
                 census_threshold: float = DEFAULT_CENSUS_THRESHOLD,
                 phase_correct: bool = False, ideal: bool = False,
                 frame: str = "interaction", callback=None,
                 keep_state: bool = False) -> RunReport:
    """Load ``b_terms``, add ``a`` with the compiled pulse schedule, take a census.

    ``b_terms`` is a sequence of ``(value, amplitude)``. ``callback(i, psi, stats)``
    runs after every pulse. With ``keep_state`` the final superposition is
    attached to the report.
    """
    if not rabi > 0:
        raise ValueError("Rabi frequency must be positive")
    if frame not in FRAMES:
        raise ValueError(f"frame must be one of {FRAMES}")
    terms = _normalized_terms(b_terms)
    outputs = expected_outputs(spec, a, [b for b, _ in terms])
    psi = load_register(terms, spec)
    sched = compile_adder(a, spec, rabi)
    plans: dict = {}
    t = 0.0
    for i, pulse in enumerate(sched.pulses):
        table = pulse_table(spec, pulse, ideal, t if frame == "interaction" else None)
        t += pulse.duration
        psi, stats = apply_pulse(psi, pulse, spec, eps, ideal, table)
        if phase_correct:
            key = (pulse.target, pulse.condition)
            plan = plans.get(key)
            if plan is None:
                plan = plans[key] = correction_phases(pulse, spec, frame)
            psi = apply_correction(psi, pulse, plan, spec)
        if callback is not None:
            callback(i, psi, stats)
    _, spectrum = error_census(psi, outputs.values(), census_threshold)
    probs = psi.probabilities()
    states = None

    def prob_items():
        nonlocal states
        if states is None:
            states = psi.states()
        return zip(states, probs)

    report = _report(psi.amplitude, prob_items, terms, outputs, psi.pruned_mass, len(sched),
                     census_threshold, spectrum, len(psi), norm_sq(psi), rabi, eps)
    if keep_state:
        report.state = psi
    return report


def run_addition_state(spec: ChainSpec, a: int, b_terms, rabi: float,
                       eps: float = DEFAULT_PRUNE_EPS, ideal: bool = False,
                       frame: str = "interaction", phase_correct: bool = False) -> Superposition:
    """Final superposition of the same pipeline as :func:`run_addition`."""
    return run_addition(spec, a, b_terms, rabi, eps, DEFAULT_CENSUS_THRESHOLD, phase_correct,
                        ideal, frame, keep_state=True).state


def dense_reference_run(spec: ChainSpec, a: int, b_terms, rabi: float, ideal: bool = False,
                        frame: str = "interaction",
                        census_threshold: float = DEFAULT_CENSUS_THRESHOLD,
                        return_vector: bool = False):
    """The :func:`run_addition` pipeline on the dense, never-pruning engine."""
    if spec.n > 20:
        raise ValueError(f"dense reference runs are limited to 20 spins, got {spec.n}")
    terms = _normalized_terms(b_terms)
    outputs = expected_outputs(spec, a, [b for b, _ in terms])
    vec = np.zeros(1 << spec.n, dtype=np.complex128)
    for b, amp in terms:
        vec[register_state(b, spec)] = amp
    sched = compile_adder(a, spec, rabi)
    vec = _dense.dense_run(vec, sched.pulses, spec, ideal, frame)
    probs = np.abs(vec) ** 2
    expected = set(outputs.values())
    sel = [int(s) for s in np.flatnonzero(probs > census_threshold) if int(s) not in expected]
    # dense vectors carry no creation order; list the census by basis state
    spectrum = [(s, float(probs[s])) for s in sel]
    report = _report(lambda s: complex(vec[s]), lambda: enumerate(probs), terms, outputs, 0.0,
                     len(sched), census_threshold, spectrum, int(np.count_nonzero(vec)),
                     float(probs.sum()), rabi, 0.0)
    return (report, vec) if return_vector else report


def _sweep_point(args):
    spec, a, b_terms, rabi, eps, census_threshold, frame = args
    r = run_addition(spec, a, b_terms, rabi, eps, census_threshold, frame=frame)
    return SweepRow(rabi, r.p0, r.n_error)


def rabi_grid(omega_min: float, omega_max: float, steps: int) -> np.ndarray:
    if steps < 2:
        raise ValueError("a sweep needs at least 2 points")
    if not 0 < omega_min < omega_max:
        raise ValueError("sweep range must be positive and increasing")
    return np.linspace(omega_min, omega_max, steps)


def rabi_sweep(spec: ChainSpec, a: int, b_terms, omega_min: float, omega_max: float,
               steps: int, eps: float = DEFAULT_PRUNE_EPS,
               census_threshold: float = DEFAULT_CENSUS_THRESHOLD,
               frame: str = "interaction", workers: int = 1,
               progress=None) -> list[SweepRow]:
    """p0 and error count on an inclusive uniform grid of Rabi frequencies."""
    grid = rabi_grid(omega_min, omega_max, steps)
    jobs = [(spec, a, list(b_terms), float(om), eps, census_threshold, frame) for om in grid]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    else:
        rows = []
        for job in jobs:
            rows.append(_sweep_point(job))
            if progress is not None:
                progress(rows[-1])
    return rows


def detuning_set(spec: ChainSpec) -> list[float]:
    """All distinct |detuning| values a pulse can meet anywhere on the chain."""
    found = set()
    for k in range(1, min(spec.n, 6) + 1):
        left, right = neighbors(spec, k)
        js = [coupling(spec, k, m) for m in (left, right) if m is not None]
        for mask in range(1, 1 << len(js)):
            for signs in range(1 << len(js)):
                d = sum(2 * j * (1 if (signs >> i) & 1 else -1)
                        for i, j in enumerate(js) if (mask >> i) & 1)
                found.add(abs(d))
    return sorted(found)


def worst_flip_probability(rabi, deltas) -> float:
    return max(flip_probability(d, rabi) for d in deltas)


def find_2pik_rabi(spec: ChainSpec, lo: float = 0.095, hi: float = 0.105, deltas=None,
                   resolution: float = 1e-6) -> float:
    """Rabi frequency minimizing the worst non-resonant flip probability.

    Scans ``[lo, hi]`` at ``resolution``, then refines around the best grid
    point by repeated 10x finer scans down to ``resolution * 1e-4``.
    """
    if deltas is None:
        deltas = detuning_set(spec)
    deltas = np.asarray(sorted(set(abs(d) for d in deltas if d != 0)), dtype=float)
    if hi < lo:
        raise ValueError("empty search interval")
    if lo <= 0 or (len(deltas) and hi >= deltas.min()):
        raise ValueError("search interval must lie inside (0, min |detuning|)")
    if hi == lo:
        return float(lo)

    def worst(om):
        om = np.asarray(om, dtype=float)[:, None]
        lam = np.sqrt(deltas[None, :] ** 2 + om ** 2)
        p = (om / lam) ** 2 * np.sin(0.5 * np.pi * lam / om) ** 2
        return p.max(axis=1)

    n = int(math.ceil((hi - lo) / resolution)) + 1
    grid = np.linspace(lo, hi, n)
    step = grid[1] - grid[0]
    best = float(grid[np.argmin(worst(grid))])
    for _ in range(4):
        a, b = max(lo, best - step), min(hi, best + step)
        grid = np.linspace(a, b, 21)
        step = grid[1] - grid[0]
        best = float(grid[np.argmin(worst(grid))])
    return best


def spectrum_clustering(spectrum, top: int = 20, sig: int = 2) -> float:
    """Fraction of error states whose probability, rounded to ``sig``
    significant figures, falls on one of the ``top`` most common values."""
    if not spectrum:
        return 0.0
    counts = Counter(float(f"{p:.{sig - 1}e}") for _, p in spectrum)
    return sum(c for _, c in counts.most_common(top)) / len(spectrum)


def compare_to_dense(psi: Superposition, vec: np.ndarray) -> float:
    """Largest entrywise amplitude difference between a sparse and a dense state."""
    diff = np.array(vec, dtype=np.complex128, copy=True)
    for s, amp, _ in psi.items():
        diff[s] -= amp
    return float(np.abs(diff).max())


def write_spectrum(path, spectrum) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["creation_index", "probability"])
        for c, p in spectrum:
            w.writerow([c, repr(float(p))])


def read_spectrum(path) -> list[tuple[int, float]]:
    with open(path, newline="") as fh:
        return [(int(r["creation_index"]), float(r["probability"])) for r in csv.DictReader(fh)]


def write_state(path, psi: Superposition) -> None:
    """Dump every entry as ``bitstring,real,imag``; spin n is the leftmost character."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bitstring", "real", "imag"])
        for s, amp, _ in psi.items():
            w.writerow([format(s, f"0{psi.n}b"), repr(amp.real), repr(amp.imag)])


def write_sweep(path, rows: Sequence[SweepRow]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rabi", "p0", "n_error"])
        for r in rows:
            w.writerow([repr(r.rabi), repr(r.p0), r.n_error])
