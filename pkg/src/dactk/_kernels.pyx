# cython: language_level=3
"""Compiled twin of dactk._kernels_py.

Bit-exact with the fallback: registers are 64-bit, interval products go
through 128-bit intermediates so no precision is lost for bits <= 62.
"""

import numpy as np

from .errors import BudgetExceeded

cdef extern from *:
    ctypedef unsigned long long u128 "unsigned __int128"

ctypedef unsigned long long u64
ctypedef long long i64
ctypedef unsigned char u8

BACKEND_NAME = "cython"

cdef u64 FIXED_ONE = (<u64>1) << 32


cdef inline int _classify_one(u64 low, u64 high, u64 code, u64 q_fix):
    cdef u64 w = high - low + 1
    cdef u64 zero_high = low + <u64>((<u128>w * q_fix) >> 32) - 1
    cdef u64 one_low = low + <u64>((<u128>w * (FIXED_ONE - q_fix)) >> 32)
    if code < one_low:
        return 0
    if code > zero_high:
        return 1
    return 2


cdef inline int _advance_one(u64* low, u64* high, u64* code, i64* cur,
                             const u8* cw, i64 n_cw, int sym, u64 q_fix,
                             u64 half, u64 quarter, u64 mask) except -1:
    cdef u64 lo = low[0]
    cdef u64 hi = high[0]
    cdef u64 co = code[0]
    cdef i64 cu = cur[0]
    cdef u64 w = hi - lo + 1
    cdef u64 bit
    if sym == 0:
        hi = lo + <u64>((<u128>w * q_fix) >> 32) - 1
    else:
        lo = lo + <u64>((<u128>w * (FIXED_ONE - q_fix)) >> 32)
    while True:
        if hi < half:
            pass
        elif lo >= half:
            lo -= half
            hi -= half
            co -= half
        elif lo >= quarter and hi < 3 * quarter:
            lo -= quarter
            hi -= quarter
            co -= quarter
        else:
            break
        lo = (lo << 1) & mask
        hi = ((hi << 1) | 1) & mask
        bit = cw[cu] if cu < n_cw else 0
        co = (co << 1) | bit
        cu += 1
    if not (lo <= co and co <= hi and hi <= mask):
        raise AssertionError("decoder register ordering violated")
    low[0] = lo
    high[0] = hi
    code[0] = co
    cur[0] = cu
    return 0


def encode_bits(symbols, q_fix, bits):
    cdef const u8[::1] x = np.ascontiguousarray(symbols, dtype=np.uint8)
    cdef u64 qf = q_fix
    cdef int nb = bits
    cdef u64 mask = ((<u64>1) << nb) - 1
    cdef u64 half = (<u64>1) << (nb - 1)
    cdef u64 quarter = (<u64>1) << (nb - 2)
    cdef u64 lo = 0, hi = mask, w, zero_high, one_low
    cdef i64 pending = 0, pos = 0, cap, i, j, n = x.shape[0]
    cdef int bit

    cap = 2 * n + nb + 16
    out = np.empty(cap, dtype=np.uint8)
    cdef u8[::1] o = out

    for i in range(n):
        w = hi - lo + 1
        zero_high = lo + <u64>((<u128>w * qf) >> 32) - 1
        one_low = lo + <u64>((<u128>w * (FIXED_ONE - qf)) >> 32)
        if x[i] == 0:
            hi = zero_high
        else:
            lo = one_low
        while True:
            if hi < half:
                bit = 0
            elif lo >= half:
                bit = 1
                lo -= half
                hi -= half
            elif lo >= quarter and hi < 3 * quarter:
                pending += 1
                lo -= quarter
                hi -= quarter
                lo = (lo << 1) & mask
                hi = ((hi << 1) | 1) & mask
                continue
            else:
                break
            if pos + pending + 1 > cap:
                cap = 2 * cap + pending + 2
                out = np.resize(out, cap)
                o = out
            o[pos] = bit
            pos += 1
            for j in range(pending):
                o[pos] = bit ^ 1
                pos += 1
            pending = 0
            lo = (lo << 1) & mask
            hi = ((hi << 1) | 1) & mask
    pending += 1
    bit = 0 if lo < quarter else 1
    if pos + pending + 1 > cap:
        cap = pos + pending + 2
        out = np.resize(out, cap)
        o = out
    o[pos] = bit
    pos += 1
    for j in range(pending):
        o[pos] = bit ^ 1
        pos += 1
    return out[:pos].copy()


def classify_batch(low, high, code, q_fix):
    cdef const u64[::1] lo = np.ascontiguousarray(low, dtype=np.uint64)
    cdef const u64[::1] hi = np.ascontiguousarray(high, dtype=np.uint64)
    cdef const u64[::1] co = np.ascontiguousarray(code, dtype=np.uint64)
    cdef u64 qf = q_fix
    cdef i64 k = lo.shape[0], j
    out = np.empty(k, dtype=np.uint8)
    cdef u8[::1] o = out
    for j in range(k):
        o[j] = _classify_one(lo[j], hi[j], co[j], qf)
    return out


def advance_batch(low, high, code, cursor, symbols, cw_bits, q_fix, bits):
    """Advance every state in place with its chosen symbol."""
    cdef u64[::1] lo = low
    cdef u64[::1] hi = high
    cdef u64[::1] co = code
    cdef i64[::1] cu = cursor
    cdef const u8[::1] sy = np.ascontiguousarray(symbols, dtype=np.uint8)
    cdef const u8[::1] cw = np.ascontiguousarray(cw_bits, dtype=np.uint8)
    cdef u64 qf = q_fix
    cdef int nb = bits
    cdef u64 mask = ((<u64>1) << nb) - 1
    cdef u64 half = (<u64>1) << (nb - 1)
    cdef u64 quarter = (<u64>1) << (nb - 2)
    cdef i64 k = lo.shape[0], n_cw = cw.shape[0], j
    for j in range(k):
        _advance_one(&lo[j], &hi[j], &co[j], &cu[j], &cw[0] if n_cw > 0 else NULL,
                     n_cw, sy[j], qf, half, quarter, mask)


def expand_level(low, high, code, cursor, proper, cw_bits, q_fix, bits,
                 x_symbol, budget):
    """Grow one tree level: classify each branch, fork the ambiguous ones."""
    cdef const u64[::1] lo = np.ascontiguousarray(low, dtype=np.uint64)
    cdef const u64[::1] hi = np.ascontiguousarray(high, dtype=np.uint64)
    cdef const u64[::1] co = np.ascontiguousarray(code, dtype=np.uint64)
    cdef const i64[::1] cu = np.ascontiguousarray(cursor, dtype=np.int64)
    cdef const u8[::1] pr = np.ascontiguousarray(proper, dtype=np.uint8)
    cdef const u8[::1] cw = np.ascontiguousarray(cw_bits, dtype=np.uint8)
    cdef u64 qf = q_fix
    cdef int nb = bits
    cdef int xs = x_symbol
    cdef i64 cap = budget
    cdef u64 mask = ((<u64>1) << nb) - 1
    cdef u64 half = (<u64>1) << (nb - 1)
    cdef u64 quarter = (<u64>1) << (nb - 2)
    cdef i64 k = lo.shape[0], n_cw = cw.shape[0], j, pos, total
    cdef int c, s, two

    cls_arr = np.empty(k, dtype=np.uint8)
    cdef u8[::1] cls = cls_arr
    total = k
    for j in range(k):
        c = _classify_one(lo[j], hi[j], co[j], qf)
        cls[j] = c
        if c == 2:
            total += 1
    if total > cap:
        raise BudgetExceeded(paths=total)

    n_low = np.empty(total, dtype=np.uint64)
    n_high = np.empty(total, dtype=np.uint64)
    n_code = np.empty(total, dtype=np.uint64)
    n_cursor = np.empty(total, dtype=np.int64)
    n_proper = np.empty(total, dtype=np.uint8)
    parent = np.empty(total, dtype=np.int64)
    symbol = np.empty(total, dtype=np.uint8)
    cdef u64[::1] ol = n_low
    cdef u64[::1] oh = n_high
    cdef u64[::1] oc = n_code
    cdef i64[::1] ou = n_cursor
    cdef u8[::1] op = n_proper
    cdef i64[::1] opar = parent
    cdef u8[::1] osym = symbol

    pos = 0
    for j in range(k):
        two = 1 if cls[j] == 2 else 0
        for s in range(2):
            if not two and s != cls[j]:
                continue
            ol[pos] = lo[j]
            oh[pos] = hi[j]
            oc[pos] = co[j]
            ou[pos] = cu[j]
            _advance_one(&ol[pos], &oh[pos], &oc[pos], &ou[pos],
                         &cw[0] if n_cw > 0 else NULL, n_cw, s, qf,
                         half, quarter, mask)
            op[pos] = 1 if (pr[j] and s == xs) else 0
            opar[pos] = j
            osym[pos] = s
            pos += 1
    return n_low, n_high, n_code, n_cursor, n_proper, parent, symbol
