from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gowers_automatic.gowers import (
    CubeSpec,
    WorkBudgetExceeded,
    cube_average,
    cube_count,
    decomposition_bound,
    dyadic_decompose,
    gowers_inner_sum,
    gowers_norm,
    recursion_residual,
    sequence_norm,
)
from gowers_automatic.seqcore import block_values, evaluate, get_sequence
from gowers_automatic.spectral import RESIDUAL_CONSTANT

from conftest import brute_cube_count, brute_cube_sum

# ||1_J||_{U^s[N]} <= C (|J|/N)^(1/2^s) for the rs remainder set; measured
# maximum over N < 200, s <= 3 is exactly 1 (attained at N = 1).
INDICATOR_CONSTANT = 1.0

pm1 = st.lists(st.sampled_from([-1, 1]), min_size=1, max_size=24)


@pytest.mark.parametrize("N", range(1, 8))
@pytest.mark.parametrize("s", [1, 2, 3])
def test_cube_count_matches_enumeration(N, s):
    assert cube_count(N, s) == brute_cube_count(N, s)


def test_cube_count_examples():
    assert cube_count(2, 2) == 6
    assert all(cube_count(1, s) == 1 for s in range(1, 6))
    assert all(cube_count(N, 1) == N * N for N in range(1, 50))


@settings(max_examples=60, deadline=None)
@given(f=pm1, s=st.integers(1, 3))
def test_nested_matches_independent_enumeration(f, s):
    if s == 3 and len(f) > 10:
        f = f[:10]
    got = gowers_inner_sum([np.array(f)] * (1 << s))
    assert got == brute_cube_sum([f] * (1 << s), len(f))


def test_methods_agree_on_mixed_functions(rng):
    for s in (1, 2, 3):
        for N in (1, 5, 17, 40):
            fs = [rng.choice([-1, 1], N) for _ in range(1 << s)]
            assert gowers_inner_sum(fs, "nested") == gowers_inner_sum(fs, "brute")


def test_threaded_sum_is_identical(rng):
    f = rng.choice([-1, 1], 60)
    one = gowers_inner_sum([f] * 8, workers=1)
    assert gowers_inner_sum([f] * 8, workers=3) == one


@settings(max_examples=100, deadline=None)
@given(f=st.lists(st.sampled_from([-1, 1]), min_size=1, max_size=64))
def test_u1_closed_form(f):
    rep = gowers_norm(np.array(f), 1)
    assert rep.power.fraction == Fraction(sum(f) ** 2, len(f) ** 2)


@settings(max_examples=100, deadline=None)
@given(f=pm1, s=st.integers(1, 3))
def test_power_nonnegative(f, s):
    assert gowers_norm(np.array(f), s).power.numerator >= 0


def test_float_signals_in_unit_interval(rng):
    f = rng.uniform(-1, 1, 12)
    ints = gowers_inner_sum([f] * 4)
    assert ints == pytest.approx(brute_cube_sum([list(f)] * 4, 12), rel=1e-12)
    with pytest.raises(ValueError):
        gowers_norm(np.array([2.0, 0.0]), 2)


@pytest.mark.parametrize("s", [1, 2, 3, 4])
def test_constant_signal_has_norm_one(s):
    assert gowers_norm(np.ones(9, dtype=int), s).power.fraction == 1


def test_norm_examples():
    assert sequence_norm("tm", 1, 4).power.numerator == 0
    rep = sequence_norm("tm", 2, 2)
    assert rep.power.fraction == 1 and rep.power.denominator == 6


def test_order_and_budget_limits():
    with pytest.raises(ValueError, match="s out of supported range"):
        gowers_norm(np.ones(4), 6)
    with pytest.raises(WorkBudgetExceeded):
        sequence_norm("tm", 3, 4096, work_budget=10 ** 6)


def test_cube_average_examples():
    assert cube_average("tm", CubeSpec(2, 0)).fraction == 1
    assert cube_average("tm", CubeSpec(2, 1)).fraction == 1
    rs = get_sequence("rs")
    avg = cube_average(rs, CubeSpec(2, 3, labels=("R0",) * 4))
    vals = [evaluate("rs", n) for n in range(8)]
    assert avg.fraction == Fraction(brute_cube_sum([vals] * 4, 8), cube_count(8, 2))
    assert avg.fraction == Fraction(11, 43)  # frozen from the enumeration above


def test_cube_average_with_offsets_and_labels():
    rs = get_sequence("rs")
    offsets = (0, 1, 1, 2)
    labels = (0, 1, 0, 1)
    avg = cube_average(rs, CubeSpec(2, 3, offsets, labels))
    fs = [[rs.value(n + r, rs.states[a]) for n in range(8)] for a, r in zip(labels, offsets)]
    assert avg.fraction == Fraction(brute_cube_sum(fs, 8), cube_count(8, 2))
    with pytest.raises(ValueError):
        cube_average("tm", CubeSpec(2, 2, (0, -1, 0, 0)))


@pytest.mark.parametrize("s", [2, 3])
@pytest.mark.parametrize("L", range(1, 7))
def test_dyadic_method_equals_nested(s, L):
    a = sequence_norm("tm", s, 1 << L, method="dyadic").power
    b = sequence_norm("tm", s, 1 << L).power
    assert a.fraction == b.fraction


@pytest.mark.parametrize("seq,s,L", [("tm", 2, 2), ("tm", 2, 8), ("rs", 2, 6), ("tm", 3, 5)])
def test_recursion_residual_examples(seq, s, L):
    res = recursion_residual(seq, CubeSpec(s, L))
    assert res * 2 ** L <= RESIDUAL_CONSTANT


def test_restriction_identity():
    t = block_values("tm", 64)
    for s in (1, 2, 3):
        N = 23 if s < 3 else 13
        for L in range(0, 4):
            for m in range(N >> L):
                if (m + 1) << L > N:
                    continue
                f = np.zeros(N, dtype=np.int64)
                f[m << L:(m + 1) << L] = t[m << L:(m + 1) << L]
                got = gowers_norm(f, s).power.fraction
                inner = sequence_norm("tm", s, 1 << L).power.fraction
                want = Fraction(cube_count(1 << L, s), cube_count(N, s)) * inner
                assert got == want


def test_dyadic_decompose_examples():
    assert [tuple(i[:2]) for i in dyadic_decompose(8, "tm").intervals] == [(0, 8)]
    assert [tuple(i[:2]) for i in dyadic_decompose(5, "tm").intervals] == [(0, 4), (4, 5)]
    dec = dyadic_decompose(12, "rs")
    assert [tuple(i[:2]) for i in dec.intervals] == [(0, 4), (4, 6), (6, 7), (8, 10), (10, 11)]
    assert dec.remainder == [7, 11]


@pytest.mark.parametrize("N", list(range(1, 300)) + [4096, 4095, 10 ** 5 + 7])
def test_decompositions_tile_and_factorise(N):
    t = block_values("tm", N)
    r = block_values("rs", N)
    dec = dyadic_decompose(N, "tm")
    Ls = [i.L for i in dec.intervals]
    assert Ls == sorted(set(Ls), reverse=True)
    covered = [n for i in dec.intervals for n in range(i.start, i.stop)]
    assert covered == list(range(N))
    for i in dec.intervals:
        assert i.start == i.m << i.L and i.stop == (i.m + 1) << i.L
        np.testing.assert_array_equal(t[i.start:i.stop], evaluate("tm", i.m) * t[:1 << i.L])

    dec = dyadic_decompose(N, "rs")
    covered = sorted([n for i in dec.intervals for n in range(i.start, i.stop)] + dec.remainder)
    assert covered == list(range(N))
    assert len(dec.remainder) <= N.bit_length()
    per_level = {}
    for i in dec.intervals:
        assert i.start == i.m << (i.L + 1) and i.stop == i.start + (1 << i.L)
        np.testing.assert_array_equal(r[i.start:i.stop], evaluate("rs", i.m) * r[:1 << i.L])
        per_level[i.L] = per_level.get(i.L, 0) + 1
    assert max(per_level.values(), default=0) <= N.bit_length()


@pytest.mark.parametrize("s", [1, 2, 3])
def test_indicator_bound(s):
    for N in range(1, 120 if s < 3 else 60):
        J = dyadic_decompose(N, "rs").remainder
        f = np.zeros(N, dtype=np.int64)
        f[J] = 1
        norm = gowers_norm(f, s).norm
        assert norm <= INDICATOR_CONSTANT * (len(J) / N) ** (1 / 2 ** s) + 1e-12


def test_decomposition_bound_dominates_norm():
    for N in (5, 12, 37, 100):
        for s in (1, 2):
            assert sequence_norm("tm", s, N).norm <= decomposition_bound("tm", s, N) + 1e-12
    with pytest.raises(ValueError):
        decomposition_bound("rs", 2, 12)


def test_report_serialisation():
    d = sequence_norm("tm", 2, 16).to_dict()
    assert list(d) == ["seq", "s", "N", "power_num", "power_den", "norm", "method"]
    assert d["seq"] == "tm" and d["power_den"] == cube_count(16, 2)
    assert d["norm"] == pytest.approx((d["power_num"] / d["power_den"]) ** 0.25)
