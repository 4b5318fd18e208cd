"""Sparse superposition and the two-level pi-pulse transformation.

Each pulse touches only its target spin. An entry whose neighbor bits match
the pulse condition flips exactly; any other entry splits into a stay branch
and a (usually tiny) flip branch according to the detuned two-level
rotating-frame unitary. Entries falling below ``eps`` after a pulse are
dropped and their probability is booked in ``pruned_mass``; nothing is ever
renormalized, so ``1 - norm_sq <= pruned_mass`` holds throughout.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

import numpy as np

from . import _backend
from .spin_model import ChainSpec, detuning_bits, neighbors

DEFAULT_PRUNE_EPS = 1e-16
DEFAULT_CENSUS_THRESHOLD = 1e-12

_WORD = 64
_WORD_MASK = (1 << _WORD) - 1


@dataclass(frozen=True)
class Pulse:
    """Selective pulse on ``target`` tuned to neighbor bits ``condition``.

    ``condition`` is ``(left_bit, right_bit)`` with ``None`` for a side past
    the chain end. ``duration`` defaults to the pi-pulse length ``pi / rabi``.
    """

    target: int
    condition: tuple
    rabi: float
    phase: float = 0.0
    duration: Optional[float] = None
    gate_tag: str = ""

    def __post_init__(self):
        if not self.rabi > 0:
            raise ValueError(f"Rabi frequency must be positive, got {self.rabi}")
        if self.duration is None:
            object.__setattr__(self, "duration", math.pi / self.rabi)
        elif not self.duration >= 0:
            raise ValueError(f"pulse duration must be non-negative, got {self.duration}")
        object.__setattr__(self, "condition", tuple(self.condition))

    @property
    def is_pi_pulse(self) -> bool:
        return math.isclose(self.rabi * self.duration, math.pi, rel_tol=1e-12, abs_tol=0.0)

    def with_rabi(self, rabi: float) -> "Pulse":
        """Same pulse as a pi-pulse at a different Rabi frequency."""
        return Pulse(self.target, self.condition, rabi, self.phase, None, self.gate_tag)


@dataclass(frozen=True)
class PulseStats:
    resonant_count: int
    stay_count: int
    flip_branch_count: int
    pruned_this_pulse: float


def two_level_factors(delta: float, rabi: float, tau: float, phase: float,
                      target_bit: int, t0: Optional[float] = None) -> tuple[complex, complex]:
    """(stay, flip) amplitude factors of the detuned two-level rotation.

    With ``t0=None`` the factors are those of the pulse's own rotating frame.
    Given the pulse start time ``t0`` they are expressed in the interaction
    picture of the drift Hamiltonian, where amplitudes from different pulses
    add with their true relative phases: the stay factor picks up
    ``exp(-/+ i delta tau / 2)`` and the carrier phase seen by the flip is
    shifted to ``phase - delta (t0 + tau / 2)``.

    An exactly resonant pi-pulse returns ``(0, -i exp(-/+ i phase))`` with no
    rounding residue in the stay factor.
    """
    sign = -1 if target_bit == 0 else 1
    if delta == 0 and math.isclose(rabi * tau, math.pi, rel_tol=1e-12, abs_tol=0.0):
        return 0j, -1j * cmath.exp(1j * sign * phase)
    lam = math.hypot(delta, rabi)
    half = 0.5 * lam * tau
    s, c = math.sin(half), math.cos(half)
    stay = complex(c, delta / lam * s)
    if t0 is not None:
        stay *= cmath.exp(-0.5j * delta * tau)
        phase = phase - delta * (t0 + 0.5 * tau)
    if target_bit == 1:
        stay = stay.conjugate()
    flip = -1j * (rabi / lam) * s * cmath.exp(1j * sign * phase)
    return stay, flip


def flip_probability(delta: float, rabi: float, tau: Optional[float] = None) -> float:
    """Probability of the unwanted flip for one basis state at detuning ``delta``."""
    if tau is None:
        tau = math.pi / rabi
    lam = math.hypot(delta, rabi)
    return (rabi / lam) ** 2 * math.sin(0.5 * lam * tau) ** 2


def _word_pos(n_words: int, k: int) -> tuple[int, int]:
    q = k - 1
    return n_words - 1 - q // _WORD, 1 << (q % _WORD)


def pulse_table(spec: ChainSpec, pulse: Pulse, ideal: bool = False,
                t0: Optional[float] = None):
    """Stay/flip factors indexed by ``4*target_bit + 2*left_bit + right_bit``.

    Missing neighbors are read as bit 0, so the table is valid on every code
    the kernel can produce. With ``ideal`` set, non-resonant states are left
    untouched.
    """
    _check_pulse(spec, pulse)
    left, right = neighbors(spec, pulse.target)
    stay = np.zeros(8, dtype=np.complex128)
    flip = np.zeros(8, dtype=np.complex128)
    for code in range(8):
        t, lb, rb = code >> 2, (code >> 1) & 1, code & 1
        actual = (lb if left is not None else None, rb if right is not None else None)
        delta = detuning_bits(spec, pulse.target, pulse.condition, actual)
        if ideal and delta != 0:
            stay[code], flip[code] = 1.0, 0.0
            continue
        stay[code], flip[code] = two_level_factors(delta, pulse.rabi, pulse.duration,
                                                   pulse.phase, t, t0)
    return stay, flip


def _check_pulse(spec: ChainSpec, pulse: Pulse) -> None:
    spec.check_position(pulse.target)
    left, right = neighbors(spec, pulse.target)
    cl, cr = pulse.condition
    if (left is None) != (cl is None) or (right is None) != (cr is None):
        raise ValueError(f"pulse condition {pulse.condition} does not fit spin "
                         f"{pulse.target} of a {spec.n}-spin chain")


class Superposition:
    """Sparse map basis state -> amplitude with creation bookkeeping.

    Basis states are Python ints with bit ``k-1`` holding spin ``k``. Storage
    is a sorted array of packed 64-bit words (most significant word first),
    so iteration order is the canonical bitstring order.
    """

    __slots__ = ("n", "keys", "amps", "cidx", "pruned_mass", "next_index")

    def __init__(self, n: int, keys: np.ndarray, amps: np.ndarray, cidx: np.ndarray,
                 pruned_mass: float = 0.0, next_index: Optional[int] = None):
        self.n = n
        self.keys = keys
        self.amps = amps
        self.cidx = cidx
        self.pruned_mass = pruned_mass
        if next_index is None:
            next_index = int(cidx.max()) + 1 if len(cidx) else 0
        self.next_index = next_index

    @staticmethod
    def n_words(n: int) -> int:
        return (n + _WORD - 1) // _WORD

    @classmethod
    def from_amplitudes(cls, n: int, terms: Mapping[int, complex] | Iterable[tuple[int, complex]]):
        """Build from ``{state: amplitude}``; creation indices follow sorted order."""
        items = dict(terms.items() if isinstance(terms, Mapping) else terms)
        for s in items:
            if not 0 <= s < (1 << n):
                raise ValueError(f"basis state {s:#x} does not fit {n} spins")
        states = sorted(s for s, a in items.items() if a != 0)
        W = cls.n_words(n)
        keys = np.empty((len(states), W), dtype=np.uint64)
        for i, s in enumerate(states):
            keys[i] = _pack(s, W)
        amps = np.array([complex(items[s]) for s in states], dtype=np.complex128)
        cidx = np.arange(len(states), dtype=np.int64)
        return cls(n, keys, amps, cidx, 0.0, len(states))

    @classmethod
    def basis(cls, n: int, state: int) -> "Superposition":
        return cls.from_amplitudes(n, {state: 1.0})

    def __len__(self) -> int:
        return len(self.amps)

    def states(self) -> list[int]:
        return [_unpack(row) for row in self.keys]

    def items(self):
        """Yield ``(state, amplitude, creation_index)`` in canonical order."""
        for row, a, c in zip(self.keys, self.amps, self.cidx):
            yield _unpack(row), complex(a), int(c)

    def to_dict(self) -> dict[int, complex]:
        return {s: a for s, a, _ in self.items()}

    def _find(self, state: int) -> int:
        if not 0 <= state < (1 << self.n) or not len(self.amps):
            return -1
        target = _pack(state, self.keys.shape[1])
        lo, hi = 0, len(self.amps)
        while lo < hi:
            mid = (lo + hi) // 2
            if tuple(self.keys[mid]) < tuple(target):
                lo = mid + 1
            else:
                hi = mid
        if lo < len(self.amps) and np.array_equal(self.keys[lo], target):
            return lo
        return -1

    def amplitude(self, state: int) -> complex:
        i = self._find(state)
        return complex(self.amps[i]) if i >= 0 else 0j

    def creation_index(self, state: int) -> Optional[int]:
        i = self._find(state)
        return int(self.cidx[i]) if i >= 0 else None

    def probabilities(self) -> np.ndarray:
        return self.amps.real ** 2 + self.amps.imag ** 2

    def replace(self, keys=None, amps=None, cidx=None, pruned_mass=None, next_index=None):
        return Superposition(
            self.n,
            self.keys if keys is None else keys,
            self.amps if amps is None else amps,
            self.cidx if cidx is None else cidx,
            self.pruned_mass if pruned_mass is None else pruned_mass,
            self.next_index if next_index is None else next_index,
        )

    def __repr__(self):
        return (f"Superposition(n={self.n}, entries={len(self)}, "
                f"norm_sq={norm_sq(self):.12g}, pruned_mass={self.pruned_mass:.3g})")


def _pack(state: int, n_words: int) -> np.ndarray:
    return np.array([(state >> (_WORD * (n_words - 1 - c))) & _WORD_MASK
                     for c in range(n_words)], dtype=np.uint64)


def _unpack(row) -> int:
    s = 0
    for w in row:
        s = (s << _WORD) | int(w)
    return s


def apply_pulse(psi: Superposition, pulse: Pulse, spec: ChainSpec,
                eps: float = DEFAULT_PRUNE_EPS, ideal: bool = False,
                table=None) -> tuple[Superposition, PulseStats]:
    """Apply one pulse to every entry of ``psi``; returns the new state and stats."""
    if psi.n != spec.n:
        raise ValueError(f"superposition has {psi.n} spins, chain has {spec.n}")
    if eps < 0:
        raise ValueError("prune threshold must be non-negative")
    stay, flip = pulse_table(spec, pulse, ideal) if table is None else table
    W = psi.keys.shape[1]
    left, right = neighbors(spec, pulse.target)
    tw, tmask = _word_pos(W, pulse.target)
    lw, lmask = _word_pos(W, left) if left is not None else (0, 0)
    rw, rmask = _word_pos(W, right) if right is not None else (0, 0)
    keys, amps, cidx, pruned, nxt, res, nonres, flips = _backend.apply_table(
        psi.keys, psi.amps, psi.cidx, tw, tmask, lw, lmask, rw, rmask,
        stay, flip, float(eps), psi.next_index)
    out = Superposition(psi.n, keys, amps, cidx, psi.pruned_mass + pruned, nxt)
    return out, PulseStats(res, nonres, flips, pruned)


def prune(psi: Superposition, eps: float) -> Superposition:
    if eps < 0:
        raise ValueError("prune threshold must be non-negative")
    p = psi.probabilities()
    drop = p < eps
    if not drop.any():
        return psi
    removed = float(np.cumsum(p[drop])[-1])
    keep = ~drop
    return psi.replace(psi.keys[keep], psi.amps[keep], psi.cidx[keep],
                       psi.pruned_mass + removed)


def norm_sq(psi: Superposition) -> float:
    return float(np.sum(psi.probabilities()))


def fidelity(psi: Superposition, target: int) -> float:
    return abs(psi.amplitude(target)) ** 2


def error_census(psi: Superposition, expected: Iterable[int],
                 threshold: float = DEFAULT_CENSUS_THRESHOLD):
    """Count entries outside ``expected`` above ``threshold``.

    Returns ``(N, spectrum)`` with spectrum a list of
    ``(creation_index, probability)`` in order of generation.
    """
    if threshold < 0:
        raise ValueError("census threshold must be non-negative")
    W = psi.keys.shape[1]
    expected_rows = {tuple(int(w) for w in _pack(s, W)) for s in expected}
    p = psi.probabilities()
    mask = p > threshold
    sel = np.array([i for i in np.flatnonzero(mask)
                    if tuple(int(w) for w in psi.keys[i]) not in expected_rows], dtype=np.intp)
    order = np.argsort(psi.cidx[sel], kind="stable")
    sel = sel[order]
    spectrum = [(int(c), float(q)) for c, q in zip(psi.cidx[sel], p[sel])]
    return len(spectrum), spectrum


def run_schedule(psi: Superposition, pulses: Iterable[Pulse], spec: ChainSpec,
                 eps: float = DEFAULT_PRUNE_EPS, ideal: bool = False,
                 frame: str = "interaction", callback=None):
    """Apply pulses in order; ``callback(i, pulse, psi, stats)`` after each one.

    In the ``"interaction"`` frame each pulse's factors carry the phase
    accrued since the schedule started. ``"rotating"`` treats every pulse
    as if it began at time zero.
    """
    if frame not in ("interaction", "rotating"):
        raise ValueError(f"unknown frame {frame!r}")
    t = 0.0
    for i, pulse in enumerate(pulses):
        table = pulse_table(spec, pulse, ideal, t if frame == "interaction" else None)
        t += pulse.duration
        psi, stats = apply_pulse(psi, pulse, spec, eps, ideal, table)
        if callback is not None:
            callback(i, pulse, psi, stats)
    return psi
