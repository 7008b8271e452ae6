"""Adaptive prefix coding of a stream of known length.

Position p (1-based) is coded with a code built from counts of the prefix
s[1..p-t] for some delay d <= t < 2d. Phase boundaries fall at d, 2d, 3d, ...
At boundary B the job begun at B - d is activated and a job for the counts of
s[1..B] is started; it is sliced across the next d symbols and its code is in
force from position B + d + 1 on. Positions 1..2d use a uniform initial code.

Encoder and decoder run the same schedule on the same symbols, so their
tables agree after every position without any side information.
"""

import hashlib
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

from .bitio import MAX_WIDTH, BitReader, BitWriter
from .canonical_code import CodeTables
from .errors import ConfigurationError, CorruptStreamError, GuaranteeWarning
from .freq_model import (GILBERT_MOORE, AlphabetMap, FreqModel, LengthPolicy,
                         delay_parameter)
from .rebuilder import (BUILD, DEFAULT_BUDGET, SCAN, RebuildJob, RefreshQueue,
                        required_budget)

ENCODE = "encode"
DECODE = "decode"


@dataclass
class StreamStats:
    m: int
    n: int
    d: int
    w_max: int
    budget: int
    bits_emitted: int = 0
    max_steps_per_symbol: int = 0
    total_steps: int = 0
    phase_count: int = 0
    max_length: int = 0
    kraft_slack: Fraction = Fraction(1)
    lengths: bytearray = field(default=None, repr=False)


def guarantee_void(m, n):
    """True when n * floor(log m)^(5/2) >= m, so the o(m) overhead term dominates."""
    k = max(m, 1).bit_length() - 1
    return n * n * k ** 5 >= m * m


class CodecStream:
    """State shared by the encoder and the decoder."""

    direction = None

    def __init__(self, m, alphabet, policy=None, budget=DEFAULT_BUDGET, trace=False,
                 on_activate=None, warn=True):
        if policy is None:
            policy = LengthPolicy.shannon()
        if not isinstance(alphabet, AlphabetMap):
            alphabet = AlphabetMap(alphabet)
        n = alphabet.n
        if m < 1:
            raise ConfigurationError("stream length m must be at least 1")
        if policy.kind == GILBERT_MOORE:
            raise ConfigurationError("the Gilbert-Moore rule is for the sorter, not the codec")
        policy.validate(n)
        if warn and guarantee_void(m, n):
            warnings.warn(
                f"n = {n} is large for m = {m}: n*log^2.5(m) >= m, "
                "so the (H+1)m + o(m) bound carries no weight here",
                GuaranteeWarning, stacklevel=3)
        self.m = m
        self.alphabet = alphabet
        self.policy = policy
        self.n = n
        self.d = delay_parameter(m, n, policy)
        self.w_max = policy.longest(m, n)
        if self.w_max > MAX_WIDTH:
            raise ConfigurationError(f"window of {self.w_max} bits exceeds {MAX_WIDTH}")
        self.budget = required_budget(self.d, n, self.w_max, budget)
        initial = policy.length(1, 2 * n, n)
        self.ct = CodeTables([initial] * n, self.w_max)
        self.fm = FreqModel(n, m, self.d)
        self.queue = RefreshQueue(n)
        self.job = RebuildJob(self.ct, self.fm, self.queue, policy, self.d)
        self.pos = 1
        self.on_activate = on_activate
        self.stats = StreamStats(m, n, self.d, self.w_max, self.budget)
        if trace:
            self.stats.lengths = bytearray()

    def _advance(self, a, r):
        """Bookkeeping after the symbol at ``self.pos`` has been coded with r bits."""
        stats = self.stats
        if stats.lengths is not None:
            stats.lengths.append(r)
        if r > stats.max_length:
            stats.max_length = r
        self.fm.record(a)
        job = self.job
        if SCAN <= job.stage <= BUILD:
            spent = job.step(self.budget)
            stats.total_steps += spent
            if spent > stats.max_steps_per_symbol:
                stats.max_steps_per_symbol = spent
        pos = self.pos
        if pos % self.d == 0:
            if pos > self.d and pos < self.m:
                job.activate()
                stats.phase_count += 1
                slack = Fraction((1 << self.w_max) - job.kraft_numerator, 1 << self.w_max)
                if slack < stats.kraft_slack:
                    stats.kraft_slack = slack
                if self.on_activate is not None:
                    self.on_activate(self)
            if pos + self.d < self.m:
                job.begin(pos)
        self.pos = pos + 1

    def digest(self):
        """Hash of everything that determines future behaviour."""
        state = (self.pos, self.ct.state(), self.fm.state(), self.job.state())
        return hashlib.sha256(repr(state).encode()).hexdigest()

    def _check_open(self):
        if self.pos > self.m:
            raise ConfigurationError(f"stream declared {self.m} symbols; all were coded")


class Encoder(CodecStream):
    direction = ENCODE

    def __init__(self, m, alphabet, policy=None, **kwargs):
        super().__init__(m, alphabet, policy, **kwargs)
        self.writer = BitWriter()

    def encode_id(self, a):
        self._check_open()
        if not 0 <= a < self.n:
            raise ConfigurationError(f"symbol id {a} outside 0..{self.n - 1}")
        cw = self.ct.encode_symbol(a, self.pos)
        self.writer.write_bits(cw.value, cw.length)
        self._advance(a, cw.length)
        return cw

    def encode_next(self, symbol):
        return self.encode_id(self.alphabet.id(symbol))

    def finish(self):
        if self.pos <= self.m:
            raise ConfigurationError(
                f"stream declared {self.m} symbols; only {self.pos - 1} were coded")
        self.stats.bits_emitted = self.writer.bits_written
        return self.writer.finish()


class Decoder(CodecStream):
    direction = DECODE

    def __init__(self, m, alphabet, data, policy=None, **kwargs):
        super().__init__(m, alphabet, policy, **kwargs)
        self.reader = BitReader(data)

    def decode_id(self):
        self._check_open()
        window = self.reader.peek(self.w_max)
        a, r = self.ct.decode_step(window, self.pos)
        self.reader.consume(r)
        self._advance(a, r)
        return a

    def decode_next(self):
        return self.alphabet.symbol(self.decode_id())

    def finish(self, strict=True):
        """Check that the payload ended where the last symbol did."""
        self.stats.bits_emitted = self.reader.cursor
        if strict and self.reader.total_bits - self.reader.cursor >= 8:
            raise CorruptStreamError(
                f"{self.reader.total_bits - self.reader.cursor} unread bits after the last symbol")
        return self.reader.bytes_consumed


def open_stream(m, alphabet, mode=None, direction=ENCODE, data=b"", **kwargs):
    if direction == ENCODE:
        return Encoder(m, alphabet, mode, **kwargs)
    if direction == DECODE:
        return Decoder(m, alphabet, data, mode, **kwargs)
    raise ConfigurationError(f"unknown direction {direction!r}")


def stream_stats(stream):
    stats = stream.stats
    if stream.direction == ENCODE:
        stats.bits_emitted = stream.writer.bits_written
    else:
        stats.bits_emitted = stream.reader.cursor
    return stats


def encode(symbols, alphabet, policy=None, **kwargs):
    """Encode a whole sequence. Returns (payload, stats).

    An empty sequence encodes to an empty payload.
    """
    symbols = list(symbols)
    if not symbols:
        return b"", None
    enc = Encoder(len(symbols), alphabet, policy, **kwargs)
    ids = enc.alphabet.id
    for s in symbols:
        enc.encode_id(ids(s))
    payload = enc.finish()
    return payload, enc.stats


def decode(payload, m, alphabet, policy=None, strict=True, **kwargs):
    """Decode m symbols from ``payload``. Returns a list of symbols."""
    if m == 0:
        if strict and payload:
            raise CorruptStreamError("payload present for an empty stream")
        return []
    dec = Decoder(m, alphabet, payload, policy, **kwargs)
    sym = dec.alphabet.symbol
    out = [sym(dec.decode_id()) for _ in range(m)]
    dec.finish(strict)
    return out
