import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from adaptive_prefix.canonical_code import (EMPTY, NO_CHANGE, CodeTables, Codeword,
                                            VersionedArray, assign_first_codewords,
                                            build_predecessor, check_prefix_free)
from adaptive_prefix.errors import CodeInfeasibleError, CorruptStreamError

EXAMPLE_LENGTHS = [3] * 2 + [4] * 6 + [5] * 8
EXAMPLE_BITS = ["000", "001", "0100", "0101", "0110", "0111", "1000", "1001",
                "10100", "10101", "10110", "10111", "11000", "11001", "11010", "11011"]


def canonical_oracle(ranked):
    """Codewords for symbols listed in (length, rank) order, by increment and shift."""
    out, code, prev = {}, 0, None
    for a, length in ranked:
        if prev is not None:
            code = (code + 1) << (length - prev)
        else:
            code = 0
        out[a] = Codeword(code, length)
        prev = length
    return out


def oracle_codewords(ct, pos):
    ranks = sorted((ct.C.lookup(a, pos), a) for a in range(ct.n))
    return canonical_oracle([(a, r) for (r, _), a in ranks])


def test_first_codewords_of_worked_example():
    L = assign_first_codewords({3: 2, 4: 6, 5: 8})
    assert (L[3], L[4], L[5]) == (0b000, 0b0100, 0b10100)


def test_first_codewords_small_cases():
    assert assign_first_codewords({1: 2})[1] == 0
    L = assign_first_codewords({2: 3})
    assert [L[2] + c for c in range(3)] == [0b00, 0b01, 0b10]


def test_kraft_violation_rejected():
    with pytest.raises(CodeInfeasibleError):
        assign_first_codewords({1: 1, 2: 3})


def test_example_code_matches_listing():
    ct = CodeTables(EXAMPLE_LENGTHS, 5)
    got = [format(cw.value, f"0{cw.length}b") for cw in ct.codewords_at(1)]
    assert got == EXAMPLE_BITS


@pytest.mark.parametrize("rank,expected", [((5, 7), "11011"), ((3, 0), "000"), ((4, 2), "0110")])
def test_encode_symbol_examples(rank, expected):
    ct = CodeTables(EXAMPLE_LENGTHS, 5)
    a = ct.S[rank[0]][rank[1]]
    cw = ct.encode_symbol(a, 1)
    assert format(cw.value, f"0{cw.length}b") == expected


@pytest.mark.parametrize("window,rank", [(0b01101, (4, 2)), (0b00000, (3, 0)), (0b11011, (5, 7))])
def test_decode_step_examples(window, rank):
    ct = CodeTables(EXAMPLE_LENGTHS, 5)
    a, r = ct.decode_step(window, 1)
    assert (r, ct.C.lookup(a, 1)[1]) == rank


def test_predecessor_examples():
    L = assign_first_codewords({3: 2, 4: 6, 5: 8})
    W = [0, 0, 0, 2, 6, 8]
    D = build_predecessor(L, W, 5)
    assert D.keys == [0, 8, 20] and D.lengths == [3, 4, 5]
    assert D.pred(19) == (8, 4)
    assert D.pred(20) == (20, 5)
    single = build_predecessor([0, 0], [0, 2], 1)
    assert single.pred(0) == single.pred(1) == (0, 1)


def test_predecessor_below_minimum_is_corrupt():
    D = build_predecessor([0, 0, 0], [0, 0, 2], 2)
    D.keys[0] = 1  # artificial key set without zero
    with pytest.raises(CorruptStreamError):
        D.pred(0)


def random_lengths(rng, n, w):
    """Random lengths in 1..w that satisfy Kraft; needs n <= 2^w."""
    lengths = [rng.randint(1, w) for _ in range(n)]
    while kraft(lengths) > 1:
        a = min(range(n), key=lambda b: (lengths[b], rng.random()))
        lengths[a] += 1
    return lengths


def test_predecessor_matches_linear_scan_exhaustively():
    rng = random.Random(11)
    for w in range(1, 13):
        for _ in range(5):
            n = rng.randint(2, min(2 ** w, 40))
            ct = CodeTables(random_lengths(rng, n, w), w)
            D = ct.D[ct.active]
            keys = list(zip(D.keys, D.lengths))
            for q in range(2 ** w):
                expect = max(k for k in keys if k[0] <= q)
                assert D.pred(q) == expect


def test_change_length_example():
    # S[3] = [a, b], S[4] = [c, d, e]; move b to length 4.
    ct = CodeTables([3, 3, 4, 4, 4], 5)
    a, b, c, d, e = range(5)
    ct.change_length(b, 4, effective_at=10)
    assert ct.S[3] == [a] and ct.S[4] == [c, d, e, b]
    assert ct.C.new[b] == (4, 3) and ct.C.boundary[b] == 10
    assert ct.W[3] == 1 and ct.W[4] == 4
    assert ct.C.lookup(b, 9) == (3, 1)
    ct.check_pending()


def test_change_length_of_tail_touches_only_own_cells():
    ct = CodeTables([3, 3, 4, 4, 4], 5)
    ct.change_length(1, 4, 10)
    touched = {rec for rec in ct.modified}
    assert (0, 0) not in touched
    assert touched == {(0, 1), (1, 3 * 5 + 1), (1, 4 * 5 + 3)}


def test_change_length_middle_swaps_with_tail():
    ct = CodeTables([3, 3, 3, 4], 5)
    ct.change_length(0, 4, 10)
    assert ct.S[3] == [2, 1]
    assert ct.C.new[2] == (3, 0)
    assert ct.M.new[3 * 4 + 0] == 2 and ct.M.new[3 * 4 + 2] == EMPTY
    assert len(ct.modified) == 5
    ct.check_pending()


def test_two_changes_before_boundary_keep_boundary():
    ct = CodeTables([3, 3, 4, 4, 4], 5)
    ct.change_length(0, 4, 10)
    ct.change_length(0, 5, 10)
    assert ct.C.boundary[0] == 10 and ct.C.new[0] == (5, 0)
    assert len(ct.modified) == len(set(ct.modified))
    ct.check_pending()


def test_commit_old_values():
    ct = CodeTables([3, 3, 4, 4, 4], 5)
    assert ct.commit_old_values() == 0
    ct.change_length(1, 4, 10)
    expected = [ct.C.new[a] for a in range(5)]
    assert ct.commit_old_values() == 3
    assert ct.modified == []
    assert all(b == NO_CHANGE for b in ct.C.boundary + ct.M.boundary)
    assert [ct.C.lookup(a, 1) for a in range(5)] == expected


def test_versioned_array_rejects_overlapping_generations():
    v = VersionedArray([1, 2])
    assert v.write(0, 5, 10)
    assert not v.write(0, 6, 10)
    with pytest.raises(AssertionError):
        v.write(0, 7, 20)
    assert v.lookup(0, 9) == 1 and v.lookup(0, 10) == 6


def test_prefix_free_check_detects_prefix():
    with pytest.raises(AssertionError):
        check_prefix_free([Codeword(0b0, 1), Codeword(0b01, 2)])
    check_prefix_free([Codeword(0b0, 1), Codeword(0b10, 2)])


def kraft(lengths):
    return sum(Fraction(1, 2 ** r) for r in lengths)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2 ** 32), st.integers(2, 24), st.integers(1, 6))
def test_random_generations_keep_every_invariant(seed, n, rounds):
    rng = random.Random(seed)
    w = max(6, (2 * n - 1).bit_length() + 2)
    ct = CodeTables(random_lengths(rng, n, w), w)
    pos = 1
    for _ in range(rounds):
        before = {p: ct.codewords_at(p) for p in (pos,)}
        boundary = pos + rng.randint(1, 5)
        target = list(ct.lengths_at(boundary))
        for _ in range(rng.randint(0, 2 * n)):
            a, r = rng.randrange(n), rng.randint(1, w)
            trial = list(target)
            trial[a] = r
            if r != ct.pending_length(a) and kraft(trial) <= 1:
                ct.change_length(a, r, boundary)
                target = trial
        ct.check_pending()
        ct.rebuild_first_codewords()
        # Old view still intact until the swap.
        assert ct.codewords_at(pos) == before[pos]
        ct.check_active(boundary - 1)
        ct.activate()
        ct.check_active(boundary)
        assert ct.lengths_at(boundary) == target
        words = ct.codewords_at(boundary)
        oracle = oracle_codewords(ct, boundary)
        assert words == [oracle[a] for a in range(n)]
        for a, cw in enumerate(words):
            window = cw.value << (w - cw.length) | rng.getrandbits(w - cw.length) if w > cw.length else cw.value
            assert ct.decode_step(window, boundary) == (a, cw.length)
        ct.commit_old_values()
        pos = boundary
