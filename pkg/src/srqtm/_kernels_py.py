"""Vectorised numpy versions of the compiled step kernels (same signatures)."""
import numpy as np

BACKEND = "python"


def expand(states, heads, tapes, amps, offsets, r_write, r_to, r_move, r_amp,
           n_symbols, final):
    n = len(states)
    if n and (states == final).any():
        return None, None, None, None, 3, int(np.flatnonzero(states == final)[0])
    rows = states.astype(np.int64) * n_symbols + tapes[np.arange(n), heads]
    lo = offsets[rows]
    counts = offsets[rows + 1] - lo
    if n and (counts == 0).any():
        return None, None, None, None, 1, int(np.flatnonzero(counts == 0)[0])
    src = np.repeat(np.arange(n), counts)
    # rule index for each output term: lo of its source plus its rank within the row
    starts = np.cumsum(counts) - counts
    rule = np.repeat(lo, counts) + (np.arange(len(src)) - np.repeat(starts, counts))
    new_heads = heads[src] + r_move[rule]
    if (new_heads < 0).any():
        return None, None, None, None, 2, int(src[np.flatnonzero(new_heads < 0)[0]])
    new_tapes = tapes[src]
    new_tapes[np.arange(len(src)), heads[src]] = r_write[rule]
    return (r_to[rule].astype(np.int32), new_heads.astype(np.int64), new_tapes,
            amps[src] * r_amp[rule], 0, -1)


def combine_sorted(order, states, heads, tapes, amps, prune):
    if len(order) == 0:
        return states[:0], heads[:0], tapes[:0], amps[:0]
    s, h, t, a = states[order], heads[order], tapes[order], amps[order]
    new = np.ones(len(order), dtype=bool)
    new[1:] = (s[1:] != s[:-1]) | (h[1:] != h[:-1]) | (t[1:] != t[:-1]).any(axis=1)
    starts = np.flatnonzero(new)
    sums = np.add.reduceat(a, starts)
    keep = np.abs(sums) >= prune
    idx = starts[keep]
    return s[idx], h[idx], t[idx], sums[keep]
