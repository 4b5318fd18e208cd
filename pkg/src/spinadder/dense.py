"""Dense state-vector reference engine.

Works on the full ``2**n`` amplitude vector, never prunes, and evaluates
the two-level rotation per basis state straight from the closed form. It is
the oracle the sparse engine is checked against, so it shares no code with
the sparse factor tables or kernels.
"""
from __future__ import annotations

import numpy as np

from .spin_model import ChainSpec, coupling, neighbors

MAX_DENSE_SPINS = 24


def _check_size(n: int) -> None:
    if n > MAX_DENSE_SPINS:
        raise ValueError(f"dense engine limited to {MAX_DENSE_SPINS} spins, got {n}")


def basis_vector(n: int, state: int) -> np.ndarray:
    _check_size(n)
    v = np.zeros(1 << n, dtype=np.complex128)
    v[state] = 1.0
    return v


def dense_apply_pulse(vec: np.ndarray, pulse, spec: ChainSpec, t0=None,
                      ideal: bool = False) -> np.ndarray:
    """Apply ``pulse`` to every amplitude of ``vec`` (index = basis state)."""
    n = spec.n
    _check_size(n)
    if vec.shape != (1 << n,):
        raise ValueError(f"vector length {vec.shape} does not match {n} spins")
    idx = np.arange(1 << n, dtype=np.int64)
    k = pulse.target
    left, right = neighbors(spec, k)
    delta = np.zeros(1 << n)
    cond_l, cond_r = pulse.condition
    if left is not None:
        delta += 2.0 * (cond_l - ((idx >> (left - 1)) & 1)) * coupling(spec, k, left)
    if right is not None:
        delta += 2.0 * (cond_r - ((idx >> (right - 1)) & 1)) * coupling(spec, k, right)
    bit = (idx >> (k - 1)) & 1
    omega, tau, phi = pulse.rabi, pulse.duration, pulse.phase

    lam = np.sqrt(delta ** 2 + omega ** 2)
    half = 0.5 * lam * tau
    stay = np.cos(half) + 1j * (delta / lam) * np.sin(half)
    if t0 is not None:
        stay = stay * np.exp(-0.5j * delta * tau)
        phi = phi - delta * (t0 + 0.5 * tau)
    stay = np.where(bit == 0, stay, np.conj(stay))
    # flip factor for the transition out of each index
    flip = -1j * (omega / lam) * np.sin(half) * np.exp(np.where(bit == 0, -1j, 1j) * phi)
    if ideal:
        res = delta == 0
        stay = np.where(res, 0.0, 1.0)
        flip = np.where(res, -1j * np.exp(np.where(bit == 0, -1j, 1j) * phi), 0.0)
    partner = idx ^ (1 << (k - 1))
    return stay * vec + flip[partner] * vec[partner]


def dense_run(vec: np.ndarray, pulses, spec: ChainSpec, ideal: bool = False,
              frame: str = "interaction", callback=None) -> np.ndarray:
    t = 0.0
    for i, p in enumerate(pulses):
        vec = dense_apply_pulse(vec, p, spec, t if frame == "interaction" else None, ideal)
        t += p.duration
        if callback is not None:
            callback(i, p, vec)
    return vec
