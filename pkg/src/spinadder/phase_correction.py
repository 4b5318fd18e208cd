"""Phase restoration after each nuclear pi-pulse.

A resonant pi-pulse leaves its states with phase -pi/2. Every non-resonant
state keeps a phase set by its detuning, which depends only on which
neighbor bits mismatch the pulse condition and on the target's own bit.
Each such class is addressed by two electron pi-pulses on the target ion
(phase 0, then ``phi``), whose net effect on the class is the factor
``exp(i (pi + phi))``; ``phi`` is chosen to land the class on -pi/2.

Electron transitions are idealized: they only multiply amplitudes by a
phase and never move population.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .engine import Pulse, Superposition, _word_pos, two_level_factors
from .spin_model import ChainSpec, Species, detuning_bits, neighbors, species_of

RESONANT_PHASE = -math.pi / 2
_TWO_PI = 2 * math.pi


def stay_phase(delta: float, rabi: float, tau: Optional[float] = None,
               target_bit: int = 0, frame: str = "rotating") -> float:
    """Phase acquired by a basis state that the pulse does not flip.

    For ``delta == 0`` under a pi-pulse the state always flips and the
    phase of that flip is returned instead.
    """
    if tau is None:
        tau = math.pi / rabi
    t0 = 0.0 if frame == "interaction" else None
    stay, flip = two_level_factors(delta, rabi, tau, 0.0, target_bit, t0)
    return cmath.phase(stay if stay != 0 else flip)


def wrap(angle: float) -> float:
    """Map an angle to [0, 2 pi)."""
    a = math.fmod(angle, _TWO_PI)
    if a < 0:
        a += _TWO_PI
    return 0.0 if math.isclose(a, _TWO_PI, rel_tol=0, abs_tol=1e-12) else a


def correction_phi(psi_c: float) -> float:
    """Second electron-pulse phase bringing a class at phase ``psi_c`` to -pi/2."""
    return wrap(RESONANT_PHASE - math.pi - psi_c)


@dataclass(frozen=True)
class CorrectionClass:
    class_id: str
    target_bit: int
    neighbor_bits: tuple
    mismatch: tuple
    delta: float
    stay_phase: float
    phi: float

    @property
    def total_phase(self) -> float:
        return wrap(math.pi + self.phi)

    @property
    def factor(self) -> complex:
        return cmath.exp(1j * (math.pi + self.phi))


@dataclass
class CorrectionPlan:
    pulse: Pulse
    classes: list = field(default_factory=list)

    @property
    def electron_pulse_count(self) -> int:
        return 2 * len(self.classes)

    def by_code(self) -> dict:
        """Class lookup keyed like the kernel: ``4*target + 2*left + right``."""
        out = {}
        for c in self.classes:
            lb, rb = c.neighbor_bits
            out[4 * c.target_bit + 2 * (lb or 0) + (rb or 0)] = c
        return out


def correction_phases(pulse: Pulse, spec: ChainSpec, frame: str = "interaction") -> CorrectionPlan:
    """One class per non-resonant (neighbor mismatch, target bit) pattern."""
    left, right = neighbors(spec, pulse.target)
    lefts = (None,) if left is None else (0, 1)
    rights = (None,) if right is None else (0, 1)
    plan = CorrectionPlan(pulse)
    for t in (0, 1):
        for lb in lefts:
            for rb in rights:
                if (lb, rb) == tuple(pulse.condition):
                    continue
                delta = detuning_bits(spec, pulse.target, pulse.condition, (lb, rb))
                mismatch = tuple(int(a != c) for a, c in zip((lb, rb), pulse.condition)
                                 if a is not None)
                psi = stay_phase(delta, pulse.rabi, pulse.duration, t, frame)
                cid = f"t{t}:" + "".join("x" if m else "=" for m in mismatch)
                plan.classes.append(CorrectionClass(cid, t, (lb, rb), mismatch, delta, psi,
                                                    correction_phi(psi)))
    return plan


def correction_table(plan: CorrectionPlan) -> np.ndarray:
    table = np.ones(8, dtype=np.complex128)
    for code, c in plan.by_code().items():
        table[code] = c.factor
    return table


def apply_correction(psi: Superposition, pulse: Pulse, plan: CorrectionPlan,
                     spec: ChainSpec) -> Superposition:
    """Multiply every entry of a non-resonant class by that class's factor.

    Classes are read from the post-pulse bits, which is what the electron
    pulses see: entries whose neighbors match the pulse condition are
    resonant outputs and stay untouched.
    """
    if plan.pulse.target != pulse.target or tuple(plan.pulse.condition) != tuple(pulse.condition):
        raise ValueError("correction plan was built for a different pulse")
    W = psi.keys.shape[1]
    left, right = neighbors(spec, pulse.target)
    tw, tmask = _word_pos(W, pulse.target)
    keys = psi.keys
    code = ((keys[:, tw] & np.uint64(tmask)) != 0).astype(np.int64) << 2
    if left is not None:
        lw, lmask = _word_pos(W, left)
        code |= ((keys[:, lw] & np.uint64(lmask)) != 0).astype(np.int64) << 1
    if right is not None:
        rw, rmask = _word_pos(W, right)
        code |= ((keys[:, rw] & np.uint64(rmask)) != 0).astype(np.int64)
    by_code = plan.by_code()
    table = correction_table(plan)
    for c in np.unique(code):
        cond_ok = _matches(int(c), pulse.condition)
        if not cond_ok and int(c) not in by_code:
            raise LookupError(f"no correction class for neighbor code {int(c)}")
    return psi.replace(amps=psi.amps * table[code])


def _matches(code: int, condition) -> bool:
    lb, rb = (code >> 1) & 1, code & 1
    cl, cr = condition
    return (cl is None or cl == lb) and (cr is None or cr == rb)


@dataclass(frozen=True)
class ElectronParams:
    """Electron-spin constants used only to annotate schedules.

    The defaults are arbitrary placeholders in Hz.
    """

    omega_e: float = 10e9
    omega_e_step: float = 0.0
    j_ee: dict = field(default_factory=lambda: {"AB": 50e6, "BC": 40e6, "AC": 30e6})
    hyperfine: dict = field(default_factory=lambda: {"A": 500e6, "B": 400e6, "C": 300e6})
    j_en: dict = field(default_factory=lambda: {"AB": 5e6, "BC": 4e6, "AC": 3e6})


def _pair(a: Species, b: Species) -> str:
    return "".join(sorted((a.value, b.value)))


def electron_frequency(spec: ChainSpec, ion: int, own_bit: int, left_bit, right_bit,
                       params: ElectronParams = ElectronParams()) -> float:
    """ESR frequency of the electron on ``ion`` given three nuclear bits.

    Each present neighbor adds its electron-electron constant and
    ``+/- J_en`` (sign by that neighbor's nuclear bit); the own nucleus adds
    ``+/- A/2``. For a B ion with its own and C-side nuclei excited and the
    A-side nucleus in the ground state, both ``J_en`` terms enter with a minus
    sign, as the published frequency table lists it, even though the
    per-neighbor rule would give ``+J_en(AB)``.
    """
    left, right = neighbors(spec, ion)
    if (left is None) != (left_bit is None) or (right is None) != (right_bit is None):
        raise ValueError(f"ion {ion}: neighbor bits inconsistent with chain geometry")
    sp = species_of(spec, ion)
    freq = params.omega_e + (ion - 1) * params.omega_e_step
    freq += (1 - 2 * own_bit) * params.hyperfine[sp.value] / 2
    for m, bit in ((left, left_bit), (right, right_bit)):
        if m is None:
            continue
        pair = _pair(sp, species_of(spec, m))
        freq += params.j_ee[pair] + (1 - 2 * bit) * params.j_en[pair]
    if (sp is Species.B and left is not None and right is not None
            and (own_bit, right_bit, left_bit) == (1, 1, 0)):
        freq -= 2 * params.j_en["AB"]
    return freq


def correction_records(plan: CorrectionPlan, spec: ChainSpec,
                       params: ElectronParams = ElectronParams()) -> list[dict]:
    """Per-class annotation rows for schedule export."""
    rows = []
    for c in plan.classes:
        rows.append({
            "class_id": c.class_id,
            "electron_frequency_hz": electron_frequency(spec, plan.pulse.target, c.target_bit,
                                                        *c.neighbor_bits, params),
            "phi_rad": c.phi,
        })
    return rows
