"""Bit-exact integer arithmetic codec with overlapped symbol intervals.

An equiprobable binary source is encoded by mapping '0' onto [0, q) and
'1' onto [1-q, 1) with q in (0.5, 1].  Because the two intervals overlap,
the codeword is shorter than one bit per symbol (the rate approaches
-log2(q)), and the decoder can meet code points that both intervals
explain.  Such a point classifies as AMBIGUOUS and forces the decoding
tree to branch; see `dactk.search` for the tree machinery.

Design goals
------------
- Deterministic: q is stored as a 32-bit fixed-point fraction and all
  interval arithmetic is integer-only, so encoder and decoder agree
  bit-exactly across platforms.
- One partition function: `interval_split` is the single source of truth
  for the sub-interval endpoints; the encoder narrows with it and the
  decoder classifies against it.
- q_fix = 2**31 (q = 0.5) degenerates to a classical arithmetic coder
  with disjoint intervals and lossless round trips, which is the main
  self-test hook.

Register conventions: B-bit registers with HALF = 2**(B-1) and
QUARTER = 2**(B-2); renormalization emits when low and high agree on the
top bit and counts pending bits while the interval straddles the middle
two quarters; after the last symbol the encoder flushes one disambiguating
bit plus the pending ones.  The decoder reads zeros past the end of the
bitstream.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, replace

import numpy as np

from .errors import AmbiguousCodeword, FormatError

# q is quantized to a 32-bit fixed-point fraction: q_fix = round(q * 2**32).
FRACTION_BITS = 32
FIXED_ONE = 1 << FRACTION_BITS

# Ternary decoder outcome: 0 and 1 are the symbols, AMBIGUOUS means the
# code point lies in the overlap of both sub-intervals.
AMBIGUOUS = 2

MAGIC = b"DAC1"
_HEADER = struct.Struct(">4sBIQQ")


def q_to_fixed(q: float) -> int:
    """Quantize an overlap fraction to its canonical fixed-point form."""
    if not 0.5 <= q <= 1.0:
        raise ValueError(f"q must lie in [0.5, 1.0], got {q}")
    return int(math.floor(q * FIXED_ONE + 0.5))


@dataclass(frozen=True)
class CodecParams:
    """Codec configuration shared verbatim by encoder and decoder.

    q_fix is the canonical representation; the real-valued overlap
    fraction q and the rate alpha = -log2(q) are derived from it, not
    from whatever decimal the user typed.
    """

    q_fix: int
    bits: int = 31
    n_symbols: int = 0

    def __post_init__(self):
        if not FIXED_ONE // 2 <= self.q_fix <= FIXED_ONE:
            raise ValueError(
                f"q_fix must lie in [2**31, 2**32] (q in [0.5, 1]), got {self.q_fix}"
            )
        # bits + 32 <= 94 keeps the widest product exact in a 128-bit
        # intermediate; 62 also leaves headroom for B-bit register shifts
        # in 64-bit limbs.
        if not 8 <= self.bits <= 62:
            raise ValueError(f"register width must lie in [8, 62], got {self.bits}")
        if self.n_symbols < 0:
            raise ValueError("n_symbols must be nonnegative")

    @classmethod
    def from_q(cls, q: float, bits: int = 31, n_symbols: int = 0) -> "CodecParams":
        return cls(q_fix=q_to_fixed(q), bits=bits, n_symbols=n_symbols)

    @classmethod
    def from_alpha(cls, alpha: float, bits: int = 31, n_symbols: int = 0) -> "CodecParams":
        """Build params from the rate parameter alpha, via q = 2**-alpha."""
        if not 0.0 <= alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
        return cls.from_q(2.0 ** (-alpha), bits=bits, n_symbols=n_symbols)

    @property
    def q(self) -> float:
        return self.q_fix / FIXED_ONE

    @property
    def alpha(self) -> float:
        return -math.log2(self.q)

    @property
    def mask(self) -> int:
        return (1 << self.bits) - 1

    @property
    def half(self) -> int:
        return 1 << (self.bits - 1)

    @property
    def quarter(self) -> int:
        return 1 << (self.bits - 2)


def validate_symbols(symbols) -> np.ndarray:
    """Coerce a symbol sequence to a uint8 array of {0, 1} values."""
    arr = np.asarray(symbols)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("symbol sequence must be a nonempty 1-D array")
    if arr.dtype != np.uint8:
        arr = arr.astype(np.uint8)
    if arr.max() > 1:
        raise ValueError("symbols must be 0 or 1")
    return arr


@dataclass(frozen=True)
class Codeword:
    """Encoded bitstring plus the parameters it was produced with.

    `bits` holds one bit per entry (uint8 values 0/1) in emission order,
    i.e. MSB-first when packed into bytes.
    """

    bits: np.ndarray
    params: CodecParams

    @property
    def n_bits(self) -> int:
        return len(self.bits)

    def to_bytes(self) -> bytes:
        """Serialize to the portable container format.

        Layout: magic "DAC1", u8 register width, u32 big-endian q_fix
        (value 2**32 wraps to 0; 0 is otherwise invalid), u64 symbol
        count, u64 bit count, then the bits packed MSB-first and
        zero-padded to a byte boundary.
        """
        header = _HEADER.pack(
            MAGIC,
            self.params.bits,
            self.params.q_fix & 0xFFFFFFFF,
            self.params.n_symbols,
            self.n_bits,
        )
        return header + np.packbits(self.bits).tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "Codeword":
        if len(data) < _HEADER.size:
            raise FormatError("codeword shorter than its header")
        magic, bits, q_fix, n_symbols, n_bits = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise FormatError(f"bad magic {magic!r}")
        if q_fix == 0:
            q_fix = FIXED_ONE
        payload = data[_HEADER.size:]
        if len(payload) < (n_bits + 7) // 8:
            raise FormatError("truncated codeword payload")
        try:
            params = CodecParams(q_fix=q_fix, bits=bits, n_symbols=n_symbols)
        except ValueError as exc:
            raise FormatError(str(exc)) from exc
        bit_arr = np.unpackbits(
            np.frombuffer(payload, dtype=np.uint8), count=n_bits
        )
        return cls(bits=bit_arr, params=params)


def write_codeword(codeword: Codeword, fp) -> None:
    fp.write(codeword.to_bytes())


def read_codeword(fp) -> Codeword:
    return Codeword.from_bytes(fp.read())


@dataclass(frozen=True)
class DecoderBranchState:
    """One decoding path's registers plus its bookkeeping.

    Invariant: 0 <= low <= code <= high <= 2**B - 1.
    """

    low: int
    high: int
    code: int
    bit_cursor: int
    prefix: tuple = ()
    metric: float = 0.0

    @property
    def depth(self) -> int:
        return len(self.prefix)


def interval_split(low: int, high: int, params: CodecParams) -> tuple[int, int]:
    """Partition [low, high] into the '0' and '1' sub-intervals.

    Returns (zero_high, one_low): the '0' interval is [low, zero_high]
    and the '1' interval is [one_low, high].  With w = high - low + 1:

        zero_high = low + floor(w * q_fix / 2**32) - 1
        one_low   = low + floor(w * (2**32 - q_fix) / 2**32)

    For q > 0.5 the two intervals overlap on [one_low, zero_high].  Both
    the encoder and every decoder step go through this function, so the
    partition is identical on both sides by construction.
    """
    w = high - low + 1
    zero_high = low + ((w * params.q_fix) >> FRACTION_BITS) - 1
    one_low = low + ((w * (FIXED_ONE - params.q_fix)) >> FRACTION_BITS)
    return zero_high, one_low


def initial_state(codeword: Codeword) -> DecoderBranchState:
    """Root decoder state: full range, code register primed with B bits."""
    b = codeword.params.bits
    code = 0
    bits = codeword.bits
    n = len(bits)
    for i in range(b):
        code = (code << 1) | (int(bits[i]) if i < n else 0)
    return DecoderBranchState(
        low=0, high=codeword.params.mask, code=code, bit_cursor=b
    )


def classify(state: DecoderBranchState, params: CodecParams) -> int:
    """Ternary decision for the next symbol: 0, 1, or AMBIGUOUS.

    Integer-exact form of the threshold rule on the normalized code
    point u = (code - low) / (high - low + 1): below 1-q decodes 0, at
    or above q decodes 1, anything in between is ambiguous.
    """
    zero_high, one_low = interval_split(state.low, state.high, params)
    if state.code < one_low:
        return 0
    if state.code > zero_high:
        return 1
    return AMBIGUOUS


def advance(
    state: DecoderBranchState,
    symbol: int,
    codeword: Codeword,
    params: CodecParams,
) -> DecoderBranchState:
    """Narrow to `symbol`'s sub-interval and renormalize; returns the successor.

    Mirrors the encoder's renormalization schedule exactly, shifting
    codeword bits into the code register (zeros past end of stream).
    """
    if symbol not in (0, 1):
        raise ValueError(f"symbol must be 0 or 1, got {symbol}")
    zero_high, one_low = interval_split(state.low, state.high, params)
    if symbol == 0:
        low, high = state.low, zero_high
    else:
        low, high = one_low, state.high
    code = state.code
    cur = state.bit_cursor
    bits = codeword.bits
    n = len(bits)
    half, quarter, mask = params.half, params.quarter, params.mask
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
        code = (code << 1) | (int(bits[cur]) if cur < n else 0)
        cur += 1
    assert 0 <= low <= code <= high <= mask, "decoder register ordering violated"
    return DecoderBranchState(
        low=low,
        high=high,
        code=code,
        bit_cursor=cur,
        prefix=state.prefix + (symbol,),
        metric=state.metric,
    )


def encode(symbols, params: CodecParams) -> Codeword:
    """Encode a binary sequence into its overlapped-interval codeword."""
    x = validate_symbols(symbols)
    from . import kernels

    bits = kernels.encode_bits(x, params.q_fix, params.bits)
    return Codeword(bits=bits, params=replace(params, n_symbols=len(x)))


def decode_unambiguous(codeword: Codeword) -> np.ndarray:
    """Decode without side information.

    Succeeds whenever no code point falls in the overlap region, which
    is guaranteed for q = 0.5 and raises AmbiguousCodeword otherwise.
    """
    params = codeword.params
    state = initial_state(codeword)
    out = np.empty(params.n_symbols, dtype=np.uint8)
    for i in range(params.n_symbols):
        sym = classify(state, params)
        if sym == AMBIGUOUS:
            raise AmbiguousCodeword(
                f"ambiguous symbol at position {i}; side information required"
            )
        out[i] = sym
        state = advance(state, sym, codeword, params)
    return out
