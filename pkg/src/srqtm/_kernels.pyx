# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled step kernels over packed superpositions.

A packed superposition is four parallel arrays: ``states`` (int32), ``heads``
(int64), ``tapes`` (uint8, one fixed-width row per term) and ``amps``
(complex128). Rules are addressed through ``offsets`` indexed by
``state * n_symbols + symbol``.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def expand(const int[::1] states, const long long[::1] heads,
           const unsigned char[:, ::1] tapes, const double complex[::1] amps,
           const long long[::1] offsets, const unsigned char[::1] r_write,
           const int[::1] r_to, const signed char[::1] r_move,
           const double complex[::1] r_amp, int n_symbols, int final):
    """Apply every applicable rule to every term.

    Returns ``(states, heads, tapes, amps, status, index)``; ``status`` is 0 on
    success, 1 when term ``index`` has no rule, 2 when it would move left of
    cell 0 and 3 when it already sits in the final state.
    """
    cdef Py_ssize_t n = states.shape[0]
    cdef Py_ssize_t width = tapes.shape[1]
    cdef Py_ssize_t i, j, c, out, total = 0
    cdef long long lo, hi, row, head
    cdef int p
    for i in range(n):
        p = states[i]
        if p == final:
            return None, None, None, None, 3, i
        row = p * n_symbols + tapes[i, heads[i]]
        lo = offsets[row]
        hi = offsets[row + 1]
        if hi == lo:
            return None, None, None, None, 1, i
        total += hi - lo

    out_states = np.empty(total, dtype=np.int32)
    out_heads = np.empty(total, dtype=np.int64)
    out_tapes = np.empty((total, width), dtype=np.uint8)
    out_amps = np.empty(total, dtype=np.complex128)
    cdef int[::1] os_ = out_states
    cdef long long[::1] oh = out_heads
    cdef unsigned char[:, ::1] ot = out_tapes
    cdef double complex[::1] oa = out_amps

    out = 0
    for i in range(n):
        head = heads[i]
        row = states[i] * n_symbols + tapes[i, head]
        for j in range(offsets[row], offsets[row + 1]):
            if head + r_move[j] < 0:
                return None, None, None, None, 2, i
            for c in range(width):
                ot[out, c] = tapes[i, c]
            ot[out, head] = r_write[j]
            os_[out] = r_to[j]
            oh[out] = head + r_move[j]
            oa[out] = amps[i] * r_amp[j]
            out += 1
    return out_states, out_heads, out_tapes, out_amps, 0, -1


def combine_sorted(const long long[::1] order, const int[::1] states,
                   const long long[::1] heads, const unsigned char[:, ::1] tapes,
                   const double complex[::1] amps, double prune):
    """Sum amplitudes of equal configurations visited in ``order`` (equal keys adjacent)."""
    cdef Py_ssize_t n = order.shape[0]
    cdef Py_ssize_t width = tapes.shape[1]
    out_states = np.empty(n, dtype=np.int32)
    out_heads = np.empty(n, dtype=np.int64)
    out_tapes = np.empty((n, width), dtype=np.uint8)
    out_amps = np.empty(n, dtype=np.complex128)
    cdef int[::1] os_ = out_states
    cdef long long[::1] oh = out_heads
    cdef unsigned char[:, ::1] ot = out_tapes
    cdef double complex[::1] oa = out_amps
    cdef Py_ssize_t k, c, cur, prev, out = 0
    cdef bint same
    cdef double complex acc = 0
    if n == 0:
        return out_states, out_heads, out_tapes, out_amps

    prev = order[0]
    acc = amps[prev]
    for k in range(1, n + 1):
        same = False
        if k < n:
            cur = order[k]
            same = states[cur] == states[prev] and heads[cur] == heads[prev]
            if same:
                for c in range(width):
                    if tapes[cur, c] != tapes[prev, c]:
                        same = False
                        break
        if same:
            acc = acc + amps[cur]
            continue
        if acc.real * acc.real + acc.imag * acc.imag >= prune * prune:
            os_[out] = states[prev]
            oh[out] = heads[prev]
            for c in range(width):
                ot[out, c] = tapes[prev, c]
            oa[out] = acc
            out += 1
        if k < n:
            prev = cur
            acc = amps[cur]
    return out_states[:out], out_heads[:out], out_tapes[:out], out_amps[:out]
