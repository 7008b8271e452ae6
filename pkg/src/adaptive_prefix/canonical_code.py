"""The live canonical code.

A canonical code is fixed by its length histogram W: the c-th codeword
(0-based) of length r is L[r] + c, where L[r] = 2^r * sum_{l<r} W(l) / 2^l.
Encoding needs, per symbol, the pair (r, c) and the array L. Decoding needs a
predecessor structure over the first codewords padded to a fixed window width,
plus the inverse table M[r][c] -> symbol.

L and the predecessor structure are small (one entry per length) and are
rebuilt whole into a spare buffer. C and M are too large for that, so every
cell keeps an old and a new value together with the first stream position that
sees the new one. That lets two generations of the code share one table while
the next one is being assembled.
"""

import hashlib
import math
from bisect import bisect_right
from collections import namedtuple

from .errors import CodeInfeasibleError, CorruptStreamError

NO_CHANGE = math.inf
EMPTY = -1

Codeword = namedtuple("Codeword", "value length")


class VersionedArray:
    """An array whose cells each hold ``old``, ``new`` and a boundary position.

    ``lookup(i, pos)`` returns ``old[i]`` for positions before ``boundary[i]``
    and ``new[i]`` from it on. ``boundary[i] = NO_CHANGE`` means the cell has
    no pending change, in which case old and new agree.
    """

    __slots__ = ("old", "new", "boundary")

    def __init__(self, values):
        self.old = list(values)
        self.new = list(values)
        self.boundary = [NO_CHANGE] * len(self.old)

    def __len__(self):
        return len(self.old)

    def lookup(self, i, pos):
        return self.old[i] if pos < self.boundary[i] else self.new[i]

    def write(self, i, value, effective_at):
        """Set the pending value of cell i. Returns True if the cell just became pending."""
        b = self.boundary[i]
        if b == effective_at:
            self.new[i] = value
            return False
        if b != NO_CHANGE:
            raise AssertionError(
                f"cell {i} still carries boundary {b} while writing for {effective_at}")
        self.new[i] = value
        self.boundary[i] = effective_at
        return True

    def commit(self, i):
        self.old[i] = self.new[i]
        self.boundary[i] = NO_CHANGE


def assign_first_codewords(W, w_max=None):
    """First codeword of every length for the histogram ``W``.

    ``W`` maps length -> count (a dict, or a list indexed by length). Returns a
    list ``L`` indexed 0..w_max; entry 0 is unused.
    """
    if isinstance(W, dict):
        top = max(W) if W else 1
        hist = [0] * (top + 1)
        for length, count in W.items():
            hist[length] = count
    else:
        hist = list(W)
        top = len(hist) - 1
    if w_max is None:
        w_max = top
    hist += [0] * (w_max + 1 - len(hist))
    L = [0] * (w_max + 1)
    for r in range(2, w_max + 1):
        L[r] = (L[r - 1] + hist[r - 1]) << 1
    if L[w_max] + hist[w_max] > 1 << w_max:
        raise CodeInfeasibleError(f"histogram {hist[1:]} violates the Kraft inequality")
    return L


class PredecessorTable:
    """Sorted first codewords, left-aligned to the window width, with their lengths.

    There is at most one key per codeword length, so a plain binary search
    over a list of at most 64 entries answers every query in a handful of
    comparisons.
    """

    __slots__ = ("keys", "lengths")

    def __init__(self, keys=(), lengths=()):
        self.keys = list(keys)
        self.lengths = list(lengths)

    def pred(self, q):
        """(key, length) for the largest key <= q."""
        k = bisect_right(self.keys, q) - 1
        if k < 0:
            raise CorruptStreamError(f"window {q:#x} lies below every first codeword")
        return self.keys[k], self.lengths[k]

    def __eq__(self, other):
        return self.keys == other.keys and self.lengths == other.lengths

    def __repr__(self):
        return f"PredecessorTable({list(zip(self.keys, self.lengths))})"


def build_predecessor(L, W, w_max):
    keys, lengths = [], []
    for r in range(1, w_max + 1):
        if W[r]:
            keys.append(L[r] << (w_max - r))
            lengths.append(r)
    return PredecessorTable(keys, lengths)


class CodeTables:
    """Encode and decode tables for one stream, with room for a pending code.

    ``S``, ``W`` and ``C.new`` always describe the *pending* code, the one the
    rebuilder is editing. Encoding and decoding at position ``pos`` see the
    *active* code through ``C.lookup``, ``M.lookup`` and the active halves of
    the double-buffered ``L`` and ``D``.
    """

    def __init__(self, lengths, w_max):
        n = len(lengths)
        if n < 2:
            raise ValueError("a code needs at least two symbols")
        self.n = n
        self.w_max = w_max
        self.W = [0] * (w_max + 1)
        self.S = [[] for _ in range(w_max + 1)]
        ranks = []
        for a, r in enumerate(lengths):
            if not 1 <= r <= w_max:
                raise ValueError(f"length {r} of symbol {a} outside 1..{w_max}")
            ranks.append((r, self.W[r]))
            self.S[r].append(a)
            self.W[r] += 1
        self.C = VersionedArray(ranks)
        cells = [EMPTY] * ((w_max + 1) * n)
        for a, (r, c) in enumerate(ranks):
            cells[r * n + c] = a
        self.M = VersionedArray(cells)
        L = assign_first_codewords(self.W, w_max)
        self.L = [L, list(L)]
        D = build_predecessor(L, self.W, w_max)
        self.D = [D, PredecessorTable(D.keys, D.lengths)]
        self.active = 0
        self.modified = []

    # -- encode / decode ---------------------------------------------------

    def encode_symbol(self, a, pos):
        r, c = self.C.lookup(a, pos)
        return Codeword(self.L[self.active][r] + c, r)

    def decode_step(self, window, pos):
        """Symbol and codeword length at the front of a ``w_max``-bit window."""
        key, r = self.D[self.active].pred(window)
        c = (window - key) >> (self.w_max - r)
        if c >= self.n:
            raise CorruptStreamError(f"no codeword of length {r} with rank {c}")
        a = self.M.lookup(r * self.n + c, pos)
        if a == EMPTY:
            raise CorruptStreamError(f"no codeword of length {r} with rank {c}")
        return a, r

    # -- pending-code edits --------------------------------------------------

    def pending_length(self, a):
        return self.C.new[a][0]

    def _set_c(self, a, value, effective_at):
        if self.C.write(a, value, effective_at):
            self.modified.append((0, a))

    def _set_m(self, r, c, value, effective_at):
        i = r * self.n + c
        if self.M.write(i, value, effective_at):
            self.modified.append((1, i))

    def change_length(self, a, l2, effective_at):
        """Move ``a`` to length ``l2`` in the pending code, in O(1).

        ``a`` is swapped with the last symbol of its current length class,
        which keeps ranks within every class contiguous, and appended to the
        class of the new length.
        """
        l1, ca = self.C.new[a]
        if l1 == l2:
            raise ValueError(f"symbol {a} already has length {l2}")
        if not 1 <= l2 <= self.w_max:
            raise ValueError(f"length {l2} outside 1..{self.w_max}")
        row = self.S[l1]
        tail_rank = len(row) - 1
        tail = row[tail_rank]
        if tail != a:
            row[ca] = tail
            self._set_c(tail, (l1, ca), effective_at)
            self._set_m(l1, ca, tail, effective_at)
        row.pop()
        self._set_m(l1, tail_rank, EMPTY, effective_at)
        self.W[l1] -= 1
        c2 = self.W[l2]
        self.S[l2].append(a)
        self.W[l2] += 1
        self._set_c(a, (l2, c2), effective_at)
        self._set_m(l2, c2, a, effective_at)

    def take_modified(self):
        """Hand over the list of cells touched since the last call."""
        cells, self.modified = self.modified, []
        return cells

    def commit_cell(self, record):
        table, i = record
        (self.C if table == 0 else self.M).commit(i)

    def commit_old_values(self):
        cells = self.take_modified()
        for record in cells:
            self.commit_cell(record)
        return len(cells)

    # -- double-buffered L and D --------------------------------------------

    @property
    def spare(self):
        return 1 - self.active

    def activate(self):
        self.active = 1 - self.active

    def rebuild_first_codewords(self):
        """Non-incremental rebuild of the spare L and D from the pending W."""
        L = assign_first_codewords(self.W, self.w_max)
        self.L[self.spare] = L
        self.D[self.spare] = build_predecessor(L, self.W, self.w_max)

    # -- inspection -----------------------------------------------------------

    def lengths_at(self, pos):
        return [self.C.lookup(a, pos)[0] for a in range(self.n)]

    def codewords_at(self, pos):
        """Active codeword of every symbol at ``pos``; only valid once L is current."""
        return [self.encode_symbol(a, pos) for a in range(self.n)]

    def kraft_numerator(self, lengths=None):
        """2^w_max * sum 2^-l over the pending code (or the given lengths)."""
        if lengths is None:
            return sum(self.W[r] << (self.w_max - r) for r in range(1, self.w_max + 1))
        return sum(1 << (self.w_max - r) for r in lengths)

    def check_active(self, pos):
        """Assert every structural invariant of the code active at ``pos``."""
        n, w = self.n, self.w_max
        lengths = self.lengths_at(pos)
        if self.kraft_numerator(lengths) > 1 << w:
            raise AssertionError("active code violates the Kraft inequality")
        hist = [0] * (w + 1)
        for r in lengths:
            hist[r] += 1
        L = self.L[self.active]
        if L != assign_first_codewords(hist, w):
            raise AssertionError("active L does not match the active lengths")
        if self.D[self.active] != build_predecessor(L, hist, w):
            raise AssertionError("active predecessor table is stale")
        seen = {}
        for a in range(n):
            r, c = self.C.lookup(a, pos)
            if not 0 <= c < hist[r]:
                raise AssertionError(f"symbol {a} has rank {c} outside class {r}")
            if (r, c) in seen:
                raise AssertionError(f"symbols {seen[r, c]} and {a} share codeword {(r, c)}")
            seen[r, c] = a
            if self.M.lookup(r * n + c, pos) != a:
                raise AssertionError(f"M[{r}][{c}] does not point back to {a}")
        for r in range(1, w + 1):
            for c in range(hist[r], n):
                if self.M.lookup(r * n + c, pos) != EMPTY:
                    raise AssertionError(f"M[{r}][{c}] is set beyond class size {hist[r]}")
        words = sorted(self.codewords_at(pos), key=lambda cw: (cw.length, cw.value))
        for r in range(1, w + 1):
            values = [cw.value for cw in words if cw.length == r]
            if values != list(range(L[r], L[r] + hist[r])):
                raise AssertionError(f"length-{r} codewords are not canonical")
        check_prefix_free(words)

    def check_pending(self):
        """Assert that S, W and C.new agree and satisfy Kraft."""
        if self.kraft_numerator() > 1 << self.w_max:
            raise AssertionError("pending code violates the Kraft inequality")
        for r in range(1, self.w_max + 1):
            if len(self.S[r]) != self.W[r]:
                raise AssertionError(f"|S[{r}]| != W[{r}]")
            for c, a in enumerate(self.S[r]):
                if self.C.new[a] != (r, c):
                    raise AssertionError(f"S[{r}][{c}] = {a} but C[{a}] = {self.C.new[a]}")
                if self.M.new[r * self.n + c] != a:
                    raise AssertionError(f"pending M[{r}][{c}] != {a}")

    def state(self):
        return (self.active, tuple(self.C.old), tuple(self.C.new), tuple(self.C.boundary),
                tuple(self.M.old), tuple(self.M.new), tuple(self.M.boundary),
                tuple(self.W), tuple(map(tuple, self.S)),
                tuple(map(tuple, self.L)), tuple((tuple(d.keys), tuple(d.lengths)) for d in self.D),
                tuple(self.modified))

    def digest(self):
        return hashlib.sha256(repr(self.state()).encode()).hexdigest()


def check_prefix_free(codewords):
    """Raise if some codeword is a prefix of another.

    Sorted lexicographically, a codeword that prefixes another one also
    prefixes its immediate successor, so neighbours are all that need checking.
    """
    bits = sorted(format(cw.value, f"0{cw.length}b") for cw in codewords)
    for x, y in zip(bits, bits[1:]):
        if y.startswith(x):
            raise AssertionError(f"codeword {x} is a prefix of {y}")
