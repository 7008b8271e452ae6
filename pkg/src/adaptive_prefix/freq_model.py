"""Symbol counts, delayed-count queries and codeword length rules.

All length rules are evaluated in integer arithmetic so that an encoder and a
decoder on different machines compute the same lengths.
"""

import math
from dataclasses import dataclass

from .errors import AlphabetError, ConfigurationError

SHANNON = "shannon"
LENGTH_LIMITED = "length-limited"
GILBERT_MOORE = "gilbert-moore"


def ceil_log2_ratio(num, den):
    """Exact ceil(log2(num / den)) for integers num >= den > 0."""
    q = -(-num // den)
    return (q - 1).bit_length()


def ceil_log2(x):
    return (x - 1).bit_length()


def shannon_length(weight, total):
    """ceil(log2(total / weight))."""
    return ceil_log2_ratio(total, weight)


def length_limited_length(weight, total, n, f):
    """ceil(log2(2^f / ((2^f - 1) x + 1/n))) with x = weight / total.

    Multiplied through by n * total so everything stays integral.
    """
    scale = 1 << f
    return ceil_log2_ratio(scale * n * total, (scale - 1) * weight * n + total)


def gilbert_moore_length(weight, total):
    """ceil(log2(total / weight)) + 1."""
    return ceil_log2_ratio(total, weight) + 1


def log_power_floor(m, exponent):
    """floor(log2(m) ** exponent), guarding against float noise at integers."""
    if m < 2:
        return 0
    value = math.log2(m) ** exponent
    k = math.floor(value)
    if abs(value - round(value)) < 1e-9:
        k = round(value)
    return k


@dataclass(frozen=True)
class LengthPolicy:
    """Which length rule a stream uses.

    ``max_len`` is the cap F for length-limited streams and 0 otherwise.
    """

    kind: str = SHANNON
    max_len: int = 0

    @classmethod
    def shannon(cls):
        return cls(SHANNON)

    @classmethod
    def length_limited(cls, max_len):
        return cls(LENGTH_LIMITED, max_len)

    @classmethod
    def gilbert_moore(cls):
        return cls(GILBERT_MOORE)

    def validate(self, n):
        if self.kind not in (SHANNON, LENGTH_LIMITED, GILBERT_MOORE):
            raise ConfigurationError(f"unknown length policy {self.kind!r}")
        if self.kind == LENGTH_LIMITED:
            if self.max_len <= ceil_log2(n):
                raise ConfigurationError(
                    f"maximum codeword length {self.max_len} must exceed "
                    f"ceil(log2 n) = {ceil_log2(n)}")
            if self.max_len > 64:
                raise ConfigurationError("maximum codeword length is at most 64")
        elif self.max_len:
            raise ConfigurationError("max_len is only meaningful for length-limited coding")

    def smoothing_exponent(self, n):
        """The exponent f used in the smoothed length rule.

        One less than F - ceil(log2 n): with F - ceil(log2 n) itself the rule
        reaches length F for rare symbols, and the cap must be strict.
        """
        return self.max_len - ceil_log2(n) - 1

    def length(self, weight, total, n):
        """Codeword length for a symbol of weight ``weight`` out of ``total``."""
        if self.kind == SHANNON:
            return shannon_length(weight, total)
        if self.kind == LENGTH_LIMITED:
            return length_limited_length(weight, total, n, self.smoothing_exponent(n))
        return gilbert_moore_length(weight, total)

    def length_fn(self, n):
        """``length`` specialised to alphabet size n, as a two-argument function."""
        if self.kind == SHANNON:
            return lambda weight, total: (-(-total // weight) - 1).bit_length()
        if self.kind == LENGTH_LIMITED:
            scale = 1 << self.smoothing_exponent(n)
            a, b = scale * n, (scale - 1) * n
            return lambda weight, total: (-(-(a * total) // (b * weight + total)) - 1).bit_length()
        return lambda weight, total: (-(-total // weight) - 1).bit_length() + 1

    def longest(self, m, n):
        """An upper bound on any length the rule produces over a stream of m symbols."""
        if self.kind == SHANNON:
            return ceil_log2(m + 2 * n)
        if self.kind == LENGTH_LIMITED:
            return min(self.max_len - 1, ceil_log2(m + 2 * n) + 1)
        return ceil_log2(m + n) + 1


def delay_parameter(m, n, policy):
    """Phase length d.

    floor(floor(log2 m)^(3/2)) // 2 for the prefix coders and n // 2 for the
    sorter, never below 1.
    """
    if policy.kind == GILBERT_MOORE:
        return max(1, n // 2)
    if m < 2:
        return 1
    k = m.bit_length() - 1
    return max(1, math.isqrt(k ** 3) // 2)


class AlphabetMap:
    """Bijection between external symbols and dense ids 0..n-1.

    Ids follow the order the symbols are given in, which is also the order the
    sorter uses.
    """

    __slots__ = ("symbols", "forward")

    def __init__(self, symbols):
        self.symbols = list(symbols)
        self.forward = {s: i for i, s in enumerate(self.symbols)}
        if len(self.forward) != len(self.symbols):
            raise ConfigurationError("alphabet contains duplicate symbols")
        if len(self.symbols) < 2:
            raise ConfigurationError("the alphabet needs at least two symbols")

    @classmethod
    def bytes(cls):
        return cls(range(256))

    @property
    def n(self):
        return len(self.symbols)

    def id(self, symbol):
        try:
            return self.forward[symbol]
        except KeyError:
            raise AlphabetError(f"symbol {symbol!r} is not in the alphabet") from None

    def symbol(self, ident):
        return self.symbols[ident]

    def __eq__(self, other):
        return isinstance(other, AlphabetMap) and self.symbols == other.symbols

    def __repr__(self):
        return f"AlphabetMap(n={self.n})"


class FreqModel:
    """Running occurrence counts over a stream of declared length m.

    ``m=None`` leaves the length open, which the sorter uses.

    Besides the live counts, the model answers two kinds of delayed query:

    * ``delayed_count(a, t)`` gives occ(a, s[1..i-t]) for t <= 2d from a ring
      buffer of the last 2d symbols. It costs O(t) and is meant for checks.
    * ``marked_count(a)`` gives the count as of the last ``mark()`` in O(1),
      which is what the rebuilder uses while the stream moves on underneath it.
    """

    __slots__ = ("n", "m", "d", "counts", "i", "_ring", "_cap",
                 "_epoch", "_stamp", "_since", "mark_position")

    def __init__(self, n, m, d):
        self.n = n
        self.m = m
        self.d = d
        self.counts = [0] * n
        self.i = 0
        self._cap = 2 * d
        self._ring = [0] * self._cap
        self._epoch = 0
        self._stamp = [0] * n
        self._since = [0] * n
        self.mark_position = 0

    def record(self, a):
        if self.m is not None and self.i >= self.m:
            raise ConfigurationError(f"stream declared {self.m} symbols; got more")
        self.counts[a] += 1
        self._ring[self.i % self._cap] = a
        self.i += 1
        if self._stamp[a] == self._epoch:
            self._since[a] += 1
        else:
            self._stamp[a] = self._epoch
            self._since[a] = 1

    def occ(self, a):
        return self.counts[a]

    def recent(self, position):
        """The symbol recorded at 1-based ``position``, within the last 2d."""
        if not self.i - self._cap < position <= self.i:
            raise IndexError(f"position {position} is outside the recent window")
        return self._ring[(position - 1) % self._cap]

    def delayed_count(self, a, t):
        """occ(a, s[1..i-t]) for 0 <= t <= min(i, 2d)."""
        if not 0 <= t <= min(self.i, self._cap):
            raise ValueError(f"delay {t} outside [0, {min(self.i, self._cap)}]")
        c = self.counts[a]
        for p in range(self.i - t + 1, self.i + 1):
            if self._ring[(p - 1) % self._cap] == a:
                c -= 1
        return c

    def mark(self):
        """Remember the current counts for ``marked_count``."""
        self._epoch += 1
        self.mark_position = self.i

    def marked_count(self, a):
        if self._stamp[a] == self._epoch:
            return self.counts[a] - self._since[a]
        return self.counts[a]

    def marked_view(self):
        """(counts, stamp, since, epoch): marked_count(a) without a call per symbol."""
        return self.counts, self._stamp, self._since, self._epoch

    def state(self):
        return (self.i, tuple(self.counts), self.mark_position,
                tuple(self.marked_count(a) for a in range(self.n)))


def target_length(fm, a, at_i, policy):
    """Length rule for symbol ``a`` using counts of the prefix s[1..at_i]."""
    occ = fm.delayed_count(a, fm.i - at_i)
    weight = max(occ, 1)
    if policy.kind == GILBERT_MOORE:
        return policy.length(weight, at_i + fm.n, fm.n)
    return policy.length(weight, at_i + 2 * fm.n, fm.n)
