"""Budget-sliced construction of the next code.

A job begun at phase boundary i prepares the code that becomes active at
position i + d + 1. It runs in four stages:

SCAN    examine the symbols of the last phase and the next few symbols of the
        refresh queue, collecting those whose pending length left its band
COMMIT  fold the cells changed by the previous job into their old halves
APPLY   move every collected symbol to its new length
BUILD   recompute the first-codeword array and the predecessor keys into the
        spare buffers

Every stage is resumable at unit granularity, so the codec can hand the job a
fixed number of work units after each symbol and still finish in d symbols.
"""

import math
from collections import deque

from .errors import BudgetOverrunError, CodeInfeasibleError
from .canonical_code import PredecessorTable

IDLE, SCAN, COMMIT, APPLY, BUILD, DONE = range(6)
STAGE_NAMES = ("idle", "scan", "commit", "apply", "build", "done")

DEFAULT_BUDGET = 16
CELLS_PER_CHANGE = 5


class RefreshQueue:
    """Round-robin order in which every symbol gets re-examined."""

    __slots__ = ("_q",)

    def __init__(self, n):
        self._q = deque(range(n))

    def __len__(self):
        return len(self._q)

    def rotate(self):
        """Pop the front id and put it back at the end."""
        a = self._q.popleft()
        self._q.append(a)
        return a

    def state(self):
        return tuple(self._q)


def refresh_drift(n, d):
    """How many positions a symbol can go without a queue visit, beyond one phase."""
    p = min(d, n)
    return d * (-(-n // p) - 1)


def worst_phase_work(d, n, w_max):
    """Upper bound on the units any single job needs."""
    candidates = d + min(d, n)
    return candidates + CELLS_PER_CHANGE * candidates + candidates + 2 * w_max


def required_budget(d, n, w_max, budget=DEFAULT_BUDGET):
    """Smallest per-symbol budget, at least ``budget``, that finishes any job in d symbols."""
    return max(budget, math.ceil(worst_phase_work(d, n, w_max) / d))


class RebuildJob:
    """The in-flight rebuild of one stream.

    Bound to the stream's tables, counts and refresh queue at construction;
    ``begin`` starts a new job at a phase boundary and ``step`` spends up to a
    given number of units on it.
    """

    def __init__(self, ct, fm, queue, policy, d):
        self.ct = ct
        self.fm = fm
        self.queue = queue
        self.policy = policy
        self.d = d
        self.n = ct.n
        self.drift = refresh_drift(self.n, d)
        self._length = policy.length_fn(self.n)
        self.stage = IDLE
        self.boundary = 0
        self.effective_at = 0
        self.changes = []
        self._first = 1
        self._n_recent = 0
        self._n_scan = 0
        self._cursor = 0
        self._commits = []
        self._L = None
        self._keys = None
        self._lens = None
        self._seen = [0] * self.n
        self._serial = 0
        self.units = 0
        self.kraft_numerator = None

    @property
    def done(self):
        return self.stage == DONE

    def begin(self, i):
        """Start the job for boundary i; counts must reflect s[1..i]."""
        if self.stage not in (IDLE, DONE):
            raise BudgetOverrunError(
                f"job for boundary {self.boundary} still in {STAGE_NAMES[self.stage]} at {i}")
        fm = self.fm
        fm.mark()
        self.boundary = i
        self.effective_at = i + self.d + 1
        self.changes = []
        self._first = max(1, i - self.d + 1)
        self._n_recent = i - self._first + 1
        self._n_scan = self._n_recent + min(self.d, self.n)
        self._cursor = 0
        self._serial += 1
        self.units = 0
        self.stage = SCAN

    def _needs_change(self, a):
        i, n, length = self.boundary, self.n, self._length
        weight = max(self.fm.marked_count(a), 1)
        hi = length(weight, i + 2 * n)
        current = self.ct.C.new[a][0]
        if current <= hi and length(weight, i + n + self.drift) <= current:
            return None
        return hi

    def step(self, budget):
        """Spend up to ``budget`` units; returns the number actually spent."""
        spent = 0
        ct = self.ct
        while spent < budget:
            stage = self.stage
            if stage == SCAN:
                k = self._cursor
                if k < self._n_scan:
                    if k < self._n_recent:
                        a = self.fm.recent(self._first + k)
                    else:
                        a = self.queue.rotate()
                    self._cursor = k + 1
                    spent += 1
                    if self._seen[a] != self._serial:
                        self._seen[a] = self._serial
                        target = self._needs_change(a)
                        if target is not None:
                            self.changes.append((a, target))
                else:
                    self._commits = ct.take_modified()
                    self._cursor = 0
                    self.stage = COMMIT
            elif stage == COMMIT:
                if self._cursor < len(self._commits):
                    ct.commit_cell(self._commits[self._cursor])
                    self._cursor += 1
                    spent += 1
                else:
                    self._commits = []
                    self._cursor = 0
                    self.stage = APPLY
            elif stage == APPLY:
                if self._cursor < len(self.changes):
                    a, target = self.changes[self._cursor]
                    ct.change_length(a, target, self.effective_at)
                    self._cursor += 1
                    spent += 1
                else:
                    self._L = [0] * (ct.w_max + 1)
                    self._keys = []
                    self._lens = []
                    self._cursor = 1
                    self.stage = BUILD
            elif stage == BUILD:
                spent += 1
                self._build_unit()
            else:
                break
        self.units += spent
        return spent

    def _build_unit(self):
        # Cursor 1..w fills L, w+1..2w emits predecessor keys.
        ct = self.ct
        w, W = ct.w_max, ct.W
        r = self._cursor
        if r <= w:
            if r >= 2:
                self._L[r] = (self._L[r - 1] + W[r - 1]) << 1
        else:
            r -= w
            if W[r]:
                self._keys.append(self._L[r] << (w - r))
                self._lens.append(r)
        self._cursor += 1
        if self._cursor > 2 * w:
            if self._L[w] + W[w] > 1 << w:
                raise CodeInfeasibleError(
                    f"code built at boundary {self.boundary} violates the Kraft inequality")
            self.kraft_numerator = self._L[w] + W[w]
            ct.L[ct.spare] = self._L
            ct.D[ct.spare] = PredecessorTable(self._keys, self._lens)
            self._L = self._keys = self._lens = None
            self.stage = DONE

    def activate(self):
        """Make the finished code current; its cells switch over at ``effective_at``."""
        if self.stage != DONE:
            raise BudgetOverrunError(
                f"job for boundary {self.boundary} missed its deadline in "
                f"{STAGE_NAMES[self.stage]}")
        self.ct.activate()
        self.stage = IDLE

    def finish_now(self):
        """Run to completion regardless of budget; for tests and tools."""
        while self.stage not in (IDLE, DONE):
            self.step(1 << 30)

    def state(self):
        return (self.stage, self.boundary, self.effective_at, tuple(self.changes),
                self._cursor, self._n_scan, self.queue.state())
