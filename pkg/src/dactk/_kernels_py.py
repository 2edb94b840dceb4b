"""Pure-Python fallback for the hot codec kernels.

Same contract as the compiled `dactk._kernels` extension, selected by
`dactk.kernels` when the extension is unavailable.  Registers are plain
Python ints internally, so arbitrary precision keeps every product exact;
the price is speed, which only matters for deep tree searches.
"""

from __future__ import annotations

import numpy as np

from .codec import FIXED_ONE, FRACTION_BITS
from .errors import BudgetExceeded

BACKEND_NAME = "python"


def _split(low, w, q_fix):
    zero_high = low + ((w * q_fix) >> FRACTION_BITS) - 1
    one_low = low + ((w * (FIXED_ONE - q_fix)) >> FRACTION_BITS)
    return zero_high, one_low


def encode_bits(symbols: np.ndarray, q_fix: int, bits: int) -> np.ndarray:
    mask = (1 << bits) - 1
    half = 1 << (bits - 1)
    quarter = 1 << (bits - 2)
    low, high, pending = 0, mask, 0
    out = []

    def emit(bit, pend):
        out.append(bit)
        out.extend([bit ^ 1] * pend)

    for s in symbols.tolist():
        zero_high, one_low = _split(low, high - low + 1, q_fix)
        if s == 0:
            high = zero_high
        else:
            low = one_low
        while True:
            if high < half:
                emit(0, pending)
                pending = 0
            elif low >= half:
                emit(1, pending)
                pending = 0
                low -= half
                high -= half
            elif low >= quarter and high < 3 * quarter:
                pending += 1
                low -= quarter
                high -= quarter
            else:
                break
            low = (low << 1) & mask
            high = ((high << 1) | 1) & mask
    pending += 1
    if low < quarter:
        emit(0, pending)
    else:
        emit(1, pending)
    return np.array(out, dtype=np.uint8)


def _classify_one(low, high, code, q_fix):
    zero_high, one_low = _split(low, high - low + 1, q_fix)
    if code < one_low:
        return 0
    if code > zero_high:
        return 1
    return 2


def _advance_one(low, high, code, cur, cw, n_cw, sym, q_fix, half, quarter, mask):
    zero_high, one_low = _split(low, high - low + 1, q_fix)
    if sym == 0:
        high = zero_high
    else:
        low = one_low
    while True:
        if high < half:
            pass
        elif low >= half:
            low -= half
            high -= half
            code -= half
        elif low >= quarter and high < 3 * quarter:
            low -= quarter
            high -= quarter
            code -= quarter
        else:
            break
        low = (low << 1) & mask
        high = ((high << 1) | 1) & mask
        code = (code << 1) | (cw[cur] if cur < n_cw else 0)
        cur += 1
    if not 0 <= low <= code <= high <= mask:
        raise AssertionError("decoder register ordering violated")
    return low, high, code, cur


def classify_batch(low, high, code, q_fix: int) -> np.ndarray:
    out = np.empty(len(low), dtype=np.uint8)
    lo, hi, co = low.tolist(), high.tolist(), code.tolist()
    for j in range(len(lo)):
        out[j] = _classify_one(lo[j], hi[j], co[j], q_fix)
    return out


def advance_batch(low, high, code, cursor, symbols, cw_bits, q_fix: int, bits: int) -> None:
    """Advance every state in place with its chosen symbol."""
    mask = (1 << bits) - 1
    half = 1 << (bits - 1)
    quarter = 1 << (bits - 2)
    cw = cw_bits.tolist()
    n_cw = len(cw)
    lo, hi, co, cu = low.tolist(), high.tolist(), code.tolist(), cursor.tolist()
    sy = symbols.tolist()
    for j in range(len(lo)):
        lo[j], hi[j], co[j], cu[j] = _advance_one(
            lo[j], hi[j], co[j], cu[j], cw, n_cw, sy[j], q_fix, half, quarter, mask
        )
    low[:] = lo
    high[:] = hi
    code[:] = co
    cursor[:] = cu


def expand_level(low, high, code, cursor, proper, cw_bits, q_fix: int, bits: int,
                 x_symbol: int, budget: int):
    """Grow one tree level: classify each branch, fork the ambiguous ones.

    Returns (low, high, code, cursor, proper, parent_index, symbol) for
    the child level.  `x_symbol` is the true source symbol at this depth
    (or -1 when unknown); a child is proper iff its parent was and its
    symbol matches.
    """
    mask = (1 << bits) - 1
    half = 1 << (bits - 1)
    quarter = 1 << (bits - 2)
    cw = cw_bits.tolist()
    n_cw = len(cw)
    lo, hi, co, cu = low.tolist(), high.tolist(), code.tolist(), cursor.tolist()
    pr = proper.tolist()
    k = len(lo)

    cls = [_classify_one(lo[j], hi[j], co[j], q_fix) for j in range(k)]
    total = k + sum(1 for c in cls if c == 2)
    if total > budget:
        raise BudgetExceeded(paths=total)

    n_low = np.empty(total, dtype=np.uint64)
    n_high = np.empty(total, dtype=np.uint64)
    n_code = np.empty(total, dtype=np.uint64)
    n_cursor = np.empty(total, dtype=np.int64)
    n_proper = np.empty(total, dtype=np.uint8)
    parent = np.empty(total, dtype=np.int64)
    symbol = np.empty(total, dtype=np.uint8)

    pos = 0
    for j in range(k):
        syms = (0, 1) if cls[j] == 2 else (cls[j],)
        for s in syms:
            l2, h2, c2, u2 = _advance_one(
                lo[j], hi[j], co[j], cu[j], cw, n_cw, s, q_fix, half, quarter, mask
            )
            n_low[pos] = l2
            n_high[pos] = h2
            n_code[pos] = c2
            n_cursor[pos] = u2
            n_proper[pos] = 1 if (pr[j] and s == x_symbol) else 0
            parent[pos] = j
            symbol[pos] = s
            pos += 1
    return n_low, n_high, n_code, n_cursor, n_proper, parent, symbol
