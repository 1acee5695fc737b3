import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gowers_automatic.seqcore import (
    KernelElement,
    block_values,
    check_kernel_symmetry,
    direct_value,
    evaluate,
    get_sequence,
    kernel_plus,
    lsb_step,
    pattern_occurrences,
    validate_pattern,
)

from conftest import popcount_sign, window_sign

PATTERNS = ["1", "11", "111", "101", "1001", "1101"]


@pytest.mark.parametrize("seq,n,want", [("tm", 0, 1), ("tm", 3, 1), ("rs", 3, -1), ("rs", 7, 1)])
def test_evaluate_examples(seq, n, want):
    assert evaluate(seq, n) == want


def test_rs_at_zero_follows_explicit_formula():
    assert evaluate("rs", 0) == 1


@pytest.mark.parametrize("pattern,n,want", [("11", 7, 2), ("1", 7, 3), ("101", 21, 2), ("101", 0, 0)])
def test_pattern_occurrences(pattern, n, want):
    assert pattern_occurrences(pattern, n) == want


@pytest.mark.parametrize("bad", ["", "0", "10", "01", "110", "12"])
def test_bad_patterns_rejected(bad):
    with pytest.raises(ValueError):
        validate_pattern(bad)


def test_unknown_sequence_id():
    with pytest.raises(ValueError):
        get_sequence("fibonacci")


def test_lsb_step_examples():
    rs = get_sequence("rs")
    r0, r1 = rs.states
    assert (str(r0), str(r1)) == ("R0", "R1")
    assert lsb_step(r1, 1) == (-1, r1)
    assert lsb_step(r0, 1) == (1, r1)
    assert lsb_step(r0, 0) == (1, r0)
    (t,) = get_sequence("tm").states
    assert lsb_step(t, 1) == (-1, t)
    assert lsb_step(t, 0) == (1, t)


@pytest.mark.parametrize("pattern", PATTERNS)
def test_peeling_matches_direct_evaluation(pattern):
    seq = get_sequence("pattern:" + pattern)
    oracle = popcount_sign if pattern == "1" else (lambda n: window_sign(pattern, n))
    N = 1 << 16
    vals = block_values(seq, N)
    want = np.array([oracle(n) for n in range(N)], dtype=np.int8)
    np.testing.assert_array_equal(vals, want)
    for n in range(0, N, 997):
        assert seq.value(n) == want[n] == direct_value(seq, n)


@pytest.mark.parametrize("pattern", PATTERNS)
def test_lsb_step_sound_and_kernel_closed(pattern):
    elems = kernel_plus("pattern:" + pattern)
    n = np.arange(1 << 12)
    for q in elems:
        qv = np.array([q(int(x)) for x in range(2 << 13)])
        for b in (0, 1):
            sign, nxt = lsb_step(q, b)
            assert nxt in elems
            nv = np.array([nxt(int(x)) for x in n])
            np.testing.assert_array_equal(qv[2 * n + b], sign * nv)


@pytest.mark.parametrize("pattern,size", [("1", 1), ("11", 2), ("111", 3), ("101", 3), ("1001", 4)])
def test_kernel_sizes(pattern, size):
    assert len(kernel_plus("pattern:" + pattern)) == size


def test_kernel_elements_agree_with_subsequences():
    # each element of N_2^+ is +-a(2^l n + m) for some (l, m) found by search
    for pattern in ["11", "111", "101"]:
        a = get_sequence("pattern:" + pattern)
        big = block_values(a, 1 << 17)
        n = np.arange(1 << 12)
        for q in kernel_plus("pattern:" + pattern):
            qv = np.array([q(int(x)) for x in n])
            found = any(
                abs(int(np.dot(qv, big[(n << l) + m]))) == len(n)
                for l in range(5) for m in range(1 << l)
            )
            assert found, (pattern, q)


@pytest.mark.parametrize("seq", ["tm", "rs", "pattern:11", "pattern:111", "pattern:101"])
def test_kernel_symmetry(seq):
    assert check_kernel_symmetry(seq)


def test_kernel_element_validation():
    with pytest.raises(ValueError):
        KernelElement("11", (1,))
    with pytest.raises(ValueError):
        KernelElement("11", (-1, 1))


@settings(max_examples=200, deadline=None)
@given(m=st.integers(0, 1 << 20), L=st.integers(0, 12), n=st.integers(0, 1 << 12))
def test_tm_multiplicative_over_blocks(m, L, n):
    n %= 1 << L
    assert evaluate("tm", (m << L) + n) == evaluate("tm", m) * evaluate("tm", n)


@settings(max_examples=200, deadline=None)
@given(m=st.integers(0, 1 << 20), L=st.integers(0, 12), n=st.integers(0, 1 << 12))
def test_rs_multiplicative_over_padded_blocks(m, L, n):
    n %= 1 << L
    assert evaluate("rs", n + (m << (L + 1))) == evaluate("rs", n) * evaluate("rs", m)


def test_multiplicativity_exhaustive():
    t = block_values("tm", 1 << 14)
    r = block_values("rs", 1 << 15)
    for L in range(1, 7):
        for m in range(1 << (13 - L)):
            np.testing.assert_array_equal(t[m << L:(m + 1) << L], t[m] * t[:1 << L])
        for m in range(1 << (13 - L)):
            base = m << (L + 1)
            np.testing.assert_array_equal(r[base:base + (1 << L)], r[m] * r[:1 << L])


@settings(max_examples=100, deadline=None)
@given(n=st.integers(0, 1 << 40))
def test_rs_recursions(n):
    r = lambda x: evaluate("rs", x)
    assert r(2 * n) == r(n)
    assert r(4 * n + 1) == r(n)
    assert r(4 * n + 3) == -r(2 * n + 1)


@settings(max_examples=100, deadline=None)
@given(n=st.integers(0, 1 << 40))
def test_tm_recursions(n):
    assert evaluate("tm", 2 * n) == evaluate("tm", n) == -evaluate("tm", 2 * n + 1)
