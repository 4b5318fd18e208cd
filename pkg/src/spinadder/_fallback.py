"""Pure numpy implementation of the per-pulse kernel.

Same contract as the compiled ``_kernel.apply_table``; selected when the
extension is not built or ``SPINADDER_BACKEND=python`` is set.
"""
import numpy as np


def _codes(keys, tw, tmask, lw, lmask, rw, rmask):
    code = ((keys[:, tw] & np.uint64(tmask)) != 0).astype(np.int64) << 2
    if lmask:
        code |= ((keys[:, lw] & np.uint64(lmask)) != 0).astype(np.int64) << 1
    if rmask:
        code |= ((keys[:, rw] & np.uint64(rmask)) != 0).astype(np.int64)
    return code


def _cmul(a, b):
    # numpy's complex multiply may fuse into FMA; spell it out so rounding
    # matches the compiled kernel bit for bit
    out = np.empty(a.shape, dtype=np.complex128)
    out.real = a.real * b.real - a.imag * b.imag
    out.imag = a.real * b.imag + a.imag * b.real
    return out


def apply_table(keys, amps, cidx, tw, tmask, lw, lmask, rw, rmask,
                stay, flip, eps, next_index):
    m, W = keys.shape
    code = _codes(keys, tw, tmask, lw, lmask, rw, rmask)
    stay_amp = _cmul(amps, stay[code])
    flip_amp = _cmul(amps, flip[code])
    keep_s = stay_amp != 0
    keep_f = flip_amp != 0

    fkeys = keys[keep_f].copy()
    fkeys[:, tw] ^= np.uint64(tmask)
    all_keys = np.concatenate([keys[keep_s], fkeys])
    all_amps = np.concatenate([stay_amp[keep_s], flip_amp[keep_f]])
    all_cidx = np.concatenate([cidx[keep_s], np.full(len(fkeys), -1, dtype=np.int64)])
    tag = np.concatenate([np.zeros(keep_s.sum(), np.int8), np.ones(len(fkeys), np.int8)])

    order = np.lexsort((tag,) + tuple(all_keys[:, c] for c in range(W - 1, -1, -1)))
    all_keys = all_keys[order]
    all_amps = all_amps[order]
    all_cidx = all_cidx[order]
    if len(order):
        start = np.ones(len(order), dtype=bool)
        start[1:] = np.any(all_keys[1:] != all_keys[:-1], axis=1)
        starts = np.flatnonzero(start)
        out_amps = np.add.reduceat(all_amps, starts)
    else:
        starts = np.zeros(0, dtype=np.int64)
        out_amps = all_amps
    out_keys = all_keys[starts]
    out_cidx = all_cidx[starts]

    prob = out_amps.real ** 2 + out_amps.imag ** 2
    drop = (out_amps == 0) | (prob < eps)
    pruned = float(np.cumsum(prob[drop])[-1]) if drop.any() else 0.0
    out_keys = out_keys[~drop]
    out_amps = out_amps[~drop]
    out_cidx = out_cidx[~drop]
    new = out_cidx < 0
    n_new = int(new.sum())
    out_cidx[new] = np.arange(next_index, next_index + n_new, dtype=np.int64)

    resonant = int(np.count_nonzero(keep_f & ~keep_s))
    nonres = int(np.count_nonzero(keep_s))
    flips = int(np.count_nonzero(keep_f & keep_s))
    return (np.ascontiguousarray(out_keys), out_amps, out_cidx, pruned,
            next_index + n_new, resonant, nonres, flips)
