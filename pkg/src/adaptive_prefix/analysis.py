"""Entropy accounting, static baselines and bound checks for finished runs.

The per-symbol bounds are re-evaluated here with numpy from the raw symbol
sequence, independently of the counters the codec keeps, so a bookkeeping
bug in the codec cannot also hide itself from the check.
"""

import math
from collections import deque
from dataclasses import dataclass, field, fields

import numpy as np

from .codec import Encoder
from .freq_model import (LENGTH_LIMITED, LengthPolicy, ceil_log2, ceil_log2_ratio,
                         log_power_floor)

DEFAULT_SLACK = 4
INT64_SAFE = 1 << 62


@dataclass
class CorpusStats:
    m: int
    n: int
    counts: list
    H: float

    @classmethod
    def from_ids(cls, ids, n):
        counts = np.bincount(np.asarray(ids, dtype=np.int64), minlength=n).tolist()
        m = len(ids)
        return cls(m, n, counts, empirical_entropy(counts, m))


def empirical_entropy(counts, m=None):
    """Bits per symbol of the zeroth-order empirical distribution."""
    if m is None:
        m = sum(counts)
    if m <= 0:
        return 0.0
    return math.fsum(c / m * math.log2(m / c) for c in counts if c)


def static_shannon_bits(counts, m=None):
    if m is None:
        m = sum(counts)
    return sum(c * ceil_log2_ratio(m, c) for c in counts if c)


def huffman_lengths(counts):
    """Huffman codeword lengths by the two-queue method.

    Ties go to the leaf, then to the lower symbol id, so the result is
    reproducible. Zero counts get length 0. A single used symbol gets 1 bit.
    """
    used = sorted((c, a) for a, c in enumerate(counts) if c)
    lengths = [0] * len(counts)
    if not used:
        return lengths
    if len(used) == 1:
        lengths[used[0][1]] = 1
        return lengths
    leaves = deque((c, a, None) for c, a in used)
    merged = deque()
    children = {}
    next_id = len(counts)

    def pop():
        if merged and (not leaves or merged[0][0] < leaves[0][0]):
            return merged.popleft()
        return leaves.popleft()

    while len(leaves) + len(merged) > 1:
        x, y = pop(), pop()
        children[next_id] = (x[1], y[1])
        merged.append((x[0] + y[0], next_id, True))
        next_id += 1
    root = merged[0][1]
    stack = [(root, 0)]
    while stack:
        node, depth = stack.pop()
        if node in children:
            for child in children[node]:
                stack.append((child, depth + 1))
        else:
            lengths[node] = depth
    return lengths


def static_huffman_bits(counts, m=None):
    return sum(c * l for c, l in zip(counts, huffman_lengths(counts)))


def occurrence_ranks(ids):
    """occ_i(s[i]) for every position: how many times s[i] occurs in s[1..i]."""
    ids = np.asarray(ids, dtype=np.int64)
    m = len(ids)
    order = np.argsort(ids, kind="stable")
    sorted_ids = ids[order]
    starts = np.ones(m, dtype=bool)
    starts[1:] = sorted_ids[1:] != sorted_ids[:-1]
    group_start = np.maximum.accumulate(np.where(starts, np.arange(m), 0))
    occ = np.empty(m, dtype=np.int64)
    occ[order] = np.arange(m) - group_start + 1
    return occ


def _ceil_log2_ratio(num, den):
    """Elementwise exact ceil(log2(num/den)) for int64 arrays with num >= den > 0."""
    q = -(-num // den)
    _, e = np.frexp((q - 1).astype(np.float64))
    return e.astype(np.int64)


def _bound_arrays(num, den):
    if num.max(initial=0) < 1 << 53:
        return _ceil_log2_ratio(num, den)
    return np.array([(-(-int(a) // int(b)) - 1).bit_length() for a, b in zip(num, den)],
                    dtype=np.int64)


def per_symbol_bounds(ids, n, policy, m=None):
    """Largest codeword length the codec may emit at each position.

    Shannon: ceil(log((i+2n) / max(occ_i - K, 1))) with K = floor(log^{3/2} m).
    Length-limited: the smoothed rule at x = max(occ_i - K, 1) / (i+2n).
    """
    ids = np.asarray(ids, dtype=np.int64)
    if m is None:
        m = len(ids)
    K = log_power_floor(m, 1.5)
    i = np.arange(1, len(ids) + 1, dtype=np.int64)
    weight = np.maximum(occurrence_ranks(ids) - K, 1)
    total = i + 2 * n
    if policy.kind == LENGTH_LIMITED:
        f = policy.smoothing_exponent(n)
        scale = 1 << f
        if scale * n * (len(ids) + 2 * n) >= INT64_SAFE:
            return np.array([policy.length(int(w), int(t), n) for w, t in zip(weight, total)],
                            dtype=np.int64)
        return _bound_arrays(scale * n * total, (scale - 1) * weight * n + total)
    return _bound_arrays(total, weight)


def per_push_bounds(ids, n):
    """Comparisons allowed for each push: ceil(log((i+n)/max(occ_i - n, 1))) + 1."""
    ids = np.asarray(ids, dtype=np.int64)
    i = np.arange(1, len(ids) + 1, dtype=np.int64)
    weight = np.maximum(occurrence_ranks(ids) - n, 1)
    return _bound_arrays(i + n, weight) + 1


def lemma4_rhs(H, m, n, slack=DEFAULT_SLACK, policy=None):
    """(H + 1) m + slack * n * ceil(log m)^(5/2), plus the smoothing term when length-limited."""
    extra = 0.0
    if policy is not None and policy.kind == LENGTH_LIMITED:
        f = policy.max_len - ceil_log2(n)
        extra = 1 / (2 ** f * math.log(2))
    return (H + 1 + extra) * m + slack * n * ceil_log2(m) ** 2.5


@dataclass
class BoundReport:
    m: int
    n: int
    H: float
    emitted_bits: int
    bound_sum: int
    per_symbol_violations: int
    lemma4_rhs: float
    static_huffman_bits: int
    gap_vs_static_huffman: int
    max_length: int = 0
    first_violations: list = field(default_factory=list)

    @property
    def ok(self):
        return self.per_symbol_violations == 0 and self.emitted_bits <= self.lemma4_rhs

    def lines(self):
        for f in fields(self):
            if f.name != "first_violations":
                yield f"{f.name}={getattr(self, f.name)}"
        yield f"bits_per_symbol={self.emitted_bits / max(self.m, 1):.6f}"
        yield f"ok={int(self.ok)}"


def verify_run(ids, n, policy, lengths, slack=DEFAULT_SLACK):
    """Check a coded run against its per-symbol and total bounds.

    ``lengths`` is the per-symbol length trace of the run. Length-limited runs
    also count every length >= F as a violation.
    """
    ids = np.asarray(ids, dtype=np.int64)
    lengths = np.frombuffer(bytes(lengths), dtype=np.uint8).astype(np.int64)
    m = len(ids)
    if len(lengths) != m:
        raise ValueError(f"trace has {len(lengths)} lengths for {m} symbols")
    bounds = per_symbol_bounds(ids, n, policy)
    bad = lengths > bounds
    if policy.kind == LENGTH_LIMITED:
        bad |= lengths >= policy.max_len
    stats = CorpusStats.from_ids(ids, n)
    emitted = int(lengths.sum())
    huff = static_huffman_bits(stats.counts)
    where = np.flatnonzero(bad)[:10]
    return BoundReport(
        m=m, n=n, H=stats.H, emitted_bits=emitted, bound_sum=int(bounds.sum()),
        per_symbol_violations=int(bad.sum()),
        lemma4_rhs=lemma4_rhs(stats.H, m, n, slack, policy),
        static_huffman_bits=huff, gap_vs_static_huffman=emitted - huff,
        max_length=int(lengths.max(initial=0)),
        first_violations=[(int(p) + 1, int(lengths[p]), int(bounds[p])) for p in where])


@dataclass
class SortReport:
    m: int
    n: int
    H: float
    comparisons: int
    bound_sum: int
    per_push_violations: int
    comparison_rhs: float

    @property
    def ok(self):
        return (self.per_push_violations == 0 and self.comparisons <= self.bound_sum
                and self.comparisons <= self.comparison_rhs)

    def lines(self):
        for f in fields(self):
            yield f"{f.name}={getattr(self, f.name)}"
        yield f"comparisons_per_symbol={self.comparisons / max(self.m, 1):.6f}"
        yield f"ok={int(self.ok)}"


def verify_sort(ids, n, per_push, slack=DEFAULT_SLACK):
    ids = np.asarray(ids, dtype=np.int64)
    m = len(ids)
    comps = np.asarray(per_push, dtype=np.int64)
    bounds = per_push_bounds(ids, n)
    stats = CorpusStats.from_ids(ids, n)
    rhs = (stats.H + 2) * m + slack * n * n * math.log2(max(m, 2))
    return SortReport(m, n, stats.H, int(comps.sum()), int(bounds.sum()),
                      int((comps > bounds).sum()), rhs)


def round_robin(n, m):
    return [i % n for i in range(m)]


def theorem2_experiment(ell, policy=None):
    """Adaptive against static Huffman on the round-robin string over 2^ell + 1 symbols.

    Every symbol occurs equally often, so the static Huffman code spends ell
    bits on all but two symbols, while the adaptive code never drops below
    ell + 1 bits. Returns a :class:`BoundReport`.
    """
    if policy is None:
        policy = LengthPolicy.shannon()
    n = (1 << ell) + 1
    m = n * n
    ids = round_robin(n, m)
    enc = Encoder(m, range(n), policy, trace=True, warn=False)
    for a in ids:
        enc.encode_id(a)
    enc.finish()
    return verify_run(ids, n, policy, enc.stats.lengths)


def format_report(title, report):
    return "\n".join([f"[{title}]", *report.lines()]) + "\n"
