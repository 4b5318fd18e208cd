# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-pulse kernel.

Keys are rows of uint64 words, column 0 most significant, rows sorted
ascending and unique. Flipping one bit permutes rows only inside each group
sharing the bits above it, so flipped rows come out in sorted order from a
linear scan and merge with the stay rows without sorting.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()


cdef inline int _cmp(const uint64_t[:, ::1] keys, Py_ssize_t a, Py_ssize_t b,
                     int W, int tw, uint64_t tmask) noexcept nogil:
    # row a against row b with the target bit of b flipped
    cdef int c
    cdef uint64_t x, y
    for c in range(W):
        x = keys[a, c]
        y = keys[b, c]
        if c == tw:
            y = y ^ tmask
        if x < y:
            return -1
        if x > y:
            return 1
    return 0


cdef inline bint _same_prefix(const uint64_t[:, ::1] keys, Py_ssize_t a, Py_ssize_t b,
                              int tw, uint64_t above) noexcept nogil:
    cdef int c
    for c in range(tw):
        if keys[a, c] != keys[b, c]:
            return False
    return (keys[a, tw] & above) == (keys[b, tw] & above)


def apply_table(const uint64_t[:, ::1] keys, amps, const int64_t[::1] cidx,
                int tw, uint64_t tmask, int lw, uint64_t lmask, int rw, uint64_t rmask,
                stay, flip, double eps, int64_t next_index):
    cdef Py_ssize_t m = keys.shape[0]
    cdef int W = keys.shape[1]
    cdef const double[::1] a = np.ascontiguousarray(amps).view(np.float64)
    cdef const double[::1] st = np.ascontiguousarray(stay, dtype=np.complex128).view(np.float64)
    cdef const double[::1] fl = np.ascontiguousarray(flip, dtype=np.complex128).view(np.float64)
    cdef Py_ssize_t i, j, g0, g1, s, k, kf, nf = 0, ns = 0, out = 0
    cdef int c, w, cd
    cdef uint64_t above = ~((tmask << 1) - 1)
    cdef signed char[::1] code = np.empty(m, dtype=np.int8)
    cdef Py_ssize_t[::1] forder = np.empty(m, dtype=np.intp)
    cdef Py_ssize_t[::1] sorder = np.empty(m, dtype=np.intp)
    cdef int64_t resonant = 0, nonres = 0, flips = 0
    cdef bint has_stay, has_flip
    cdef double re, im, p, pruned = 0.0
    cdef int64_t ci

    with nogil:
        for i in range(m):
            cd = ((keys[i, tw] & tmask) != 0) * 4 \
                + ((keys[i, lw] & lmask) != 0) * 2 + ((keys[i, rw] & rmask) != 0)
            code[i] = cd
            has_stay = st[2 * cd] != 0 or st[2 * cd + 1] != 0
            has_flip = fl[2 * cd] != 0 or fl[2 * cd + 1] != 0
            if has_stay:
                sorder[ns] = i
                ns += 1
                nonres += 1
                if has_flip:
                    flips += 1
            elif has_flip:
                resonant += 1

        # flipped rows in sorted order: per prefix group, bit-1 rows then bit-0 rows
        g0 = 0
        while g0 < m:
            g1 = g0 + 1
            while g1 < m and _same_prefix(keys, g0, g1, tw, above):
                g1 += 1
            s = g0
            while s < g1 and (keys[s, tw] & tmask) == 0:
                s += 1
            for k in range(s, g1):
                cd = code[k]
                if fl[2 * cd] != 0 or fl[2 * cd + 1] != 0:
                    forder[nf] = k
                    nf += 1
            for k in range(g0, s):
                cd = code[k]
                if fl[2 * cd] != 0 or fl[2 * cd + 1] != 0:
                    forder[nf] = k
                    nf += 1
            g0 = g1

    out_keys_arr = np.empty((ns + nf, W), dtype=np.uint64)
    out_amps_arr = np.empty(ns + nf, dtype=np.complex128)
    out_cidx_arr = np.empty(ns + nf, dtype=np.int64)
    cdef uint64_t[:, ::1] ok = out_keys_arr
    cdef double[::1] oa = out_amps_arr.view(np.float64)
    cdef int64_t[::1] oc = out_cidx_arr

    i = 0
    j = 0
    with nogil:
        while i < ns or j < nf:
            if i < ns and j < nf:
                c = _cmp(keys, sorder[i], forder[j], W, tw, tmask)
            elif i < ns:
                c = -1
            else:
                c = 1
            if c <= 0:
                k = sorder[i]
                cd = code[k]
                re = a[2 * k] * st[2 * cd] - a[2 * k + 1] * st[2 * cd + 1]
                im = a[2 * k] * st[2 * cd + 1] + a[2 * k + 1] * st[2 * cd]
                ci = cidx[k]
                if c == 0:
                    kf = forder[j]
                    cd = code[kf]
                    re = re + (a[2 * kf] * fl[2 * cd] - a[2 * kf + 1] * fl[2 * cd + 1])
                    im = im + (a[2 * kf] * fl[2 * cd + 1] + a[2 * kf + 1] * fl[2 * cd])
                    j += 1
                i += 1
            else:
                k = forder[j]
                cd = code[k]
                re = a[2 * k] * fl[2 * cd] - a[2 * k + 1] * fl[2 * cd + 1]
                im = a[2 * k] * fl[2 * cd + 1] + a[2 * k + 1] * fl[2 * cd]
                ci = -1
                j += 1
            p = re * re + im * im
            if (re == 0 and im == 0) or p < eps:
                pruned += p
                continue
            for w in range(W):
                ok[out, w] = keys[k, w]
            if c > 0:
                ok[out, tw] ^= tmask
            oa[2 * out] = re
            oa[2 * out + 1] = im
            if ci < 0:
                ci = next_index
                next_index += 1
            oc[out] = ci
            out += 1

    return (out_keys_arr[:out], out_amps_arr[:out], out_cidx_arr[:out], pruned,
            next_index, resonant, nonres, flips)
