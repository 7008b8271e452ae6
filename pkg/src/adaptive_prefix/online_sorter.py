"""Online stable sorting of a multiset by routing through alphabetic trees.

Each arriving symbol walks down a binary search tree whose leaves are the
alphabet in order; the comparisons it makes are all against the symbol just
read. The tree is the trie of a Gilbert-Moore code for the counts seen n/2
symbols ago, so frequent symbols sit near the root. A fresh tree is built in
the background every n/2 pushes, sliced at a constant budget per push.
"""

import math

from .canonical_code import Codeword
from .freq_model import AlphabetMap, FreqModel, LengthPolicy, delay_parameter, gilbert_moore_length


def gm_codewords(weights, total):
    """Gilbert-Moore codewords for ``weights`` out of ``total``.

    The codeword of symbol a is the first ceil(log(total/w_a)) + 1 bits of the
    midpoint (sum_{b<a} w_b + w_a / 2) / total, computed exactly.
    """
    out = []
    cum = 0
    den = 2 * total
    for w in weights:
        if w <= 0:
            raise ValueError("weights must be positive")
        length = gilbert_moore_length(w, total)
        mid = 2 * cum + w
        out.append(Codeword((mid << length) // den, length))
        cum += w
    if cum > total:
        raise ValueError(f"weights sum to {cum} > {total}")
    return out


def common_prefix(x, y):
    """Number of leading bits two codewords share."""
    top = max(x.length, y.length)
    diff = (x.value << (top - x.length)) ^ (y.value << (top - y.length))
    return min(top - diff.bit_length(), x.length, y.length)


class AlphabeticTree:
    """Compressed trie of an alphabetic prefix code.

    Internal node k (0 <= k < n-1) separates leaf k from leaf k+1, so its label
    is k and a query x goes left iff x <= k. Children are internal node ids or
    ``~leaf`` for leaves. Chains of single-child trie nodes make no comparison
    and are dropped, so every leaf sits at depth at most its codeword length.
    """

    __slots__ = ("n", "root", "left", "right")

    def __init__(self, n, root, left, right):
        self.n = n
        self.root = root
        self.left = left
        self.right = right

    def route(self, x):
        """(leaf, comparisons) for symbol id x."""
        node = self.root
        comps = 0
        left, right = self.left, self.right
        while node >= 0:
            comps += 1
            node = left[node] if x <= node else right[node]
        return ~node, comps

    def depth(self, a):
        return self.route(a)[1]

    def leaves(self):
        """Leaf ids in left-to-right order."""
        out = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node < 0:
                out.append(~node)
            else:
                stack.append(self.right[node])
                stack.append(self.left[node])
        return out


class TreeBuilder:
    """Resumable O(n) construction of an :class:`AlphabeticTree`.

    The first n units produce the codewords and the gaps between neighbours,
    the rest run the stack-based Cartesian-tree pass over those gaps, one push
    or pop per unit.
    """

    def __init__(self, n):
        self.n = n
        self.reset(None, 0)

    def reset(self, weight_of, total):
        """Start over. ``weight_of`` is a callable or a FreqModel, whose marked
        counts floored at 1 are then the weights."""
        n = self.n
        self.weight_of = weight_of
        self.total = total
        self.cum = 0
        self.prev_value = 0
        self.prev_len = 0
        self.lcp = [0] * max(n - 1, 0)
        self.left = [~k for k in range(n - 1)]
        self.right = [~(k + 1) for k in range(n - 1)]
        self.stack = []
        self.last = None
        self.k = 0
        self.phase = 0 if weight_of is not None else 2
        self.units = 0

    @property
    def done(self):
        return self.phase == 2

    def work_bound(self):
        return 3 * self.n

    def step(self, budget):
        spent = 0
        n = self.n
        if self.phase == 0:
            k, cum = self.k, self.cum
            pv, pl = self.prev_value, self.prev_len
            total, den, weight_of, lcp = self.total, 2 * self.total, self.weight_of, self.lcp
            view = weight_of.marked_view() if isinstance(weight_of, FreqModel) else None
            if view is not None:
                counts, stamp, since, epoch = view
            while spent < budget and k < n:
                spent += 1
                if view is None:
                    w = weight_of(k)
                else:
                    w = counts[k] - since[k] if stamp[k] == epoch else counts[k]
                    if w < 1:
                        w = 1
                length = (-(-total // w) - 1).bit_length() + 1
                value = ((2 * cum + w) << length) // den
                cum += w
                if k:
                    top = length if length > pl else pl
                    diff = (pv << (top - pl)) ^ (value << (top - length))
                    lcp[k - 1] = min(top - diff.bit_length(), pl, length)
                pv, pl = value, length
                k += 1
            self.cum, self.prev_value, self.prev_len = cum, pv, pl
            if k == n:
                self.phase, k = 1, 0
            self.k = k
        if self.phase == 1:
            k, stack, lcp, last = self.k, self.stack, self.lcp, self.last
            left, right = self.left, self.right
            while spent < budget:
                spent += 1
                if stack and lcp[stack[-1]] > lcp[k]:
                    last = stack.pop()
                    continue
                if last is not None:
                    left[k] = last
                if stack:
                    right[stack[-1]] = k
                stack.append(k)
                last = None
                k += 1
                if k == n - 1:
                    self.phase = 2
                    break
            self.k, self.last = k, last
        self.units += spent
        return spent

    def tree(self):
        assert self.done
        return AlphabeticTree(self.n, self.stack[0], self.left, self.right)


def build_tree(codewords):
    """Alphabetic tree for prefix-free codewords listed in symbol order."""
    cws = list(codewords)
    b = TreeBuilder(len(cws))
    b.phase = 1
    b.lcp = [common_prefix(x, y) for x, y in zip(cws, cws[1:])]
    while not b.done:
        b.step(1 << 30)
    return b.tree()


class OnlineSorter:
    """Stable online sort of symbols from a fixed ordered alphabet."""

    def __init__(self, alphabet, budget=None):
        if not isinstance(alphabet, AlphabetMap):
            alphabet = AlphabetMap(alphabet)
        self.alphabet = alphabet
        n = self.n = alphabet.n
        self.d = delay_parameter(0, n, LengthPolicy.gilbert_moore())
        self.fm = FreqModel(n, None, self.d)
        self._builder = TreeBuilder(n)
        need = math.ceil(self._builder.work_bound() / self.d)
        self.budget = need if budget is None else max(budget, need)
        self.tree = build_tree(gm_codewords([1] * n, n))
        self.buckets = [[] for _ in range(n)]
        self.comparisons = 0
        self.per_push = None
        self.max_steps = 0
        self._pending = False
        self._building = False

    def trace(self):
        """Record comparisons per push from now on."""
        self.per_push = []
        return self

    def push(self, x, index=None):
        """Route x to its bucket; returns the comparisons spent on it."""
        return self.push_id(self.alphabet.id(x), index)

    def push_id(self, a, index=None):
        fm = self.fm
        if index is None:
            index = fm.i
        tree = self.tree
        left, right, node, comps = tree.left, tree.right, tree.root, 0
        while node >= 0:
            comps += 1
            node = left[node] if a <= node else right[node]
        if ~node != a:
            raise AssertionError(f"symbol {a} routed to leaf {~node}")
        self.buckets[a].append(index)
        self.comparisons += comps
        if self.per_push is not None:
            self.per_push.append(comps)
        fm.record(a)
        b = self._builder
        if self._building:
            spent = b.step(self.budget)
            if spent > self.max_steps:
                self.max_steps = spent
        i = fm.i
        if i % self.d == 0:
            if self._pending:
                if not b.done:
                    raise AssertionError(f"tree begun at {i - self.d} missed its deadline")
                self.tree = b.tree()
                self._pending = False
            fm.mark()
            b.reset(fm, i + self.n)
            self._building = True
            self._pending = True
        return comps

    def extend(self, xs):
        for x in xs:
            self.push(x)
        return self

    def finish(self):
        """Input indices in stably sorted order."""
        return [index for bucket in self.buckets for index in bucket]


def stable_sort(xs, alphabet=None):
    """Sort ``xs`` online; returns (permutation, comparisons)."""
    xs = list(xs)
    if alphabet is None:
        alphabet = sorted(set(xs))
        if len(alphabet) < 2:
            return list(range(len(xs))), 0
    s = OnlineSorter(alphabet).extend(xs)
    return s.finish(), s.comparisons
