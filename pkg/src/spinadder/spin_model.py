"""Static description of an ...ABCABC Ising spin chain.

Positions are 1-indexed from the right end of the chain: spin 1 is a C
spin, spin ``n`` is the left end. Couplings are dimensionless with
``J_AC = 1`` by default. ``omega1_hz``, ``delta_omega_hz`` and ``j_unit_hz``
(Hz per dimensionless coupling unit) only annotate lab-frame schedules and
never enter the simulation, which works purely with detunings.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional


class Species(enum.Enum):
    A = "A"
    B = "B"
    C = "C"


@dataclass(frozen=True)
class ChainSpec:
    """Chain of ``n = 2L + 1`` spins carrying an ``L``-bit adder register."""

    L: int
    j_ac: float = 1.0
    j_bc: float = 2.0
    j_ab: float = 3.0
    omega1_hz: float = 400e6
    delta_omega_hz: float = 20e3
    j_unit_hz: float = 100.0

    def __post_init__(self):
        if not isinstance(self.L, int) or self.L < 1:
            raise ValueError(f"L must be a positive integer, got {self.L!r}")
        for name in ("j_ac", "j_bc", "j_ab"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def n(self) -> int:
        return 2 * self.L + 1

    @classmethod
    def for_spins(cls, n: int, **kw) -> "ChainSpec":
        if n < 3 or n % 2 == 0:
            raise ValueError(f"spin count must be odd and >= 3, got {n}")
        return cls(L=(n - 1) // 2, **kw)

    def check_position(self, k: int) -> None:
        if not 1 <= k <= self.n:
            raise ValueError(f"position {k} outside chain 1..{self.n}")


def species_of(spec: ChainSpec, k: int) -> Species:
    spec.check_position(k)
    return (Species.A, Species.C, Species.B)[k % 3]


def coupling(spec: ChainSpec, k: int, m: int) -> float:
    """Ising constant between adjacent spins ``k`` and ``m``."""
    spec.check_position(k)
    spec.check_position(m)
    if abs(k - m) != 1:
        raise ValueError(f"spins {k} and {m} are not adjacent")
    pair = {species_of(spec, k), species_of(spec, m)}
    if pair == {Species.A, Species.B}:
        return spec.j_ab
    if pair == {Species.B, Species.C}:
        return spec.j_bc
    return spec.j_ac


def neighbors(spec: ChainSpec, k: int) -> tuple[Optional[int], Optional[int]]:
    """(left, right) neighbor positions; ``None`` past a chain end."""
    spec.check_position(k)
    left = k + 1 if k < spec.n else None
    right = k - 1 if k > 1 else None
    return left, right


def larmor(spec: ChainSpec, k: int) -> float:
    """Bare Larmor frequency of spin ``k`` in Hz (annotation only)."""
    spec.check_position(k)
    return spec.omega1_hz + (k - 1) * spec.delta_omega_hz


def _check_condition(spec: ChainSpec, k: int, left_bit, right_bit) -> None:
    left, right = neighbors(spec, k)
    if (left is None) != (left_bit is None) or (right is None) != (right_bit is None):
        raise ValueError(
            f"spin {k}: neighbor bits ({left_bit}, {right_bit}) inconsistent with "
            f"neighbors ({left}, {right})"
        )
    for b in (left_bit, right_bit):
        if b not in (None, 0, 1):
            raise ValueError(f"neighbor bit must be 0, 1 or None, got {b!r}")


def ising_shift(spec: ChainSpec, k: int, left_bit, right_bit) -> float:
    """Neighbor-conditioned frequency offset of spin ``k`` from its Larmor line."""
    _check_condition(spec, k, left_bit, right_bit)
    left, right = neighbors(spec, k)
    shift = 0.0
    if left is not None:
        shift += (1 - 2 * left_bit) * coupling(spec, k, left)
    if right is not None:
        shift += (1 - 2 * right_bit) * coupling(spec, k, right)
    return shift


def transition_frequency(spec: ChainSpec, k: int, left_bit, right_bit) -> float:
    """Lab-frame transition frequency (Hz) of spin ``k`` given its neighbors' states."""
    return larmor(spec, k) + spec.j_unit_hz * ising_shift(spec, k, left_bit, right_bit)


def detuning_bits(spec: ChainSpec, k: int, condition: tuple, actual: tuple) -> float:
    """Detuning of a state with neighbor bits ``actual`` from a pulse tuned to ``condition``."""
    _check_condition(spec, k, *condition)
    _check_condition(spec, k, *actual)
    left, right = neighbors(spec, k)
    delta = 0.0
    if left is not None:
        delta += 2 * (condition[0] - actual[0]) * coupling(spec, k, left)
    if right is not None:
        delta += 2 * (condition[1] - actual[1]) * coupling(spec, k, right)
    return delta


def state_neighbor_bits(spec: ChainSpec, state: int, k: int) -> tuple:
    left, right = neighbors(spec, k)
    lb = None if left is None else (state >> (left - 1)) & 1
    rb = None if right is None else (state >> (right - 1)) & 1
    return lb, rb


def detuning(spec: ChainSpec, state: int, pulse) -> float:
    """Detuning of basis ``state`` (int, bit ``k-1`` = spin ``k``) under ``pulse``."""
    return detuning_bits(spec, pulse.target, pulse.condition,
                         state_neighbor_bits(spec, state, pulse.target))
