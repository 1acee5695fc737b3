"""Gowers uniformity norms on initial intervals and the generalised cube averages.

Everything is computed from the *Gowers inner sum*

    T(f_w : w in {0,1}^s) = sum over cubes {n + w.h} inside [0, M) of prod_w f_w(n + w.h)

with h ranging over all of Z^s (negative, zero and positive coordinates). The
norm's 2^s-th power is T(f, ..., f) / cube_count(M, s).

Two independent routes are provided. ``brute`` enumerates every (n, h).
``nested`` peels off the last side length: fixing h_s pairs the functions up
as g_w(x) = f_w(x) f_{w + 2^(s-1)}(x + h_s) on the overlap window, which
reduces s by one; at s = 2 the remaining sum over h_1 is a dot product of two
cross-correlations.
"""
from __future__ import annotations

import math
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product

import numpy as np

from .seqcore import SequenceLike, block_values, get_sequence

__all__ = [
    "DEFAULT_WORK_BUDGET",
    "MAX_ORDER",
    "WorkBudgetExceeded",
    "ExactAverage",
    "NormReport",
    "CubeSpec",
    "DyadicInterval",
    "Decomposition",
    "cube_count",
    "gowers_inner_sum",
    "gowers_norm",
    "sequence_norm",
    "cube_average",
    "vertex_average",
    "recursion_residual",
    "dyadic_decompose",
    "decomposition_bound",
]

DEFAULT_WORK_BUDGET = 1 << 34
MAX_ORDER = 5


class WorkBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class ExactAverage:
    numerator: int
    denominator: int

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    @property
    def real_value(self) -> float:
        return self.numerator / self.denominator


@dataclass(frozen=True)
class NormReport:
    seq: str
    s: int
    N: int
    power: ExactAverage
    norm: float
    method: str

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "s": self.s,
            "N": self.N,
            "power_num": self.power.numerator,
            "power_den": self.power.denominator,
            "norm": self.norm,
            "method": self.method,
        }


@dataclass(frozen=True)
class CubeSpec:
    """Parameters of A(L, a, r): order s, level L, offsets r_w and labels a_w.

    ``offsets`` and ``labels`` are indexed by w read as an integer, bit i-1
    holding w_i. ``labels=None`` means every label is the base sequence.
    """

    s: int
    L: int
    offsets: tuple[int, ...] | None = None
    labels: tuple | None = None

    def resolved_offsets(self) -> tuple[int, ...]:
        if self.offsets is None:
            return (0,) * (1 << self.s)
        return tuple(self.offsets)


def cube_count(N: int, s: int) -> int:
    """Number of (n, h) in Z x Z^s whose cube lies in [0, N).

    A cube with side vector h spans |h|_1 + 1 consecutive integers, so it fits
    at N - |h|_1 base points. Counting h with exactly j nonzero coordinates
    and summing over |h|_1 collapses to binomials.
    """
    if N < 1 or s < 1:
        raise ValueError("need N >= 1 and s >= 1")
    return N + sum((1 << j) * math.comb(s, j) * math.comb(N, j + 1) for j in range(1, s + 1))


def _order(num_funcs: int) -> int:
    s = num_funcs.bit_length() - 1
    if s < 1 or 1 << s != num_funcs:
        raise ValueError("need 2^s functions with s >= 1")
    return s


def _nested_sum(fs):
    s = _order(len(fs))
    M = len(fs[0])
    if M == 0:
        return 0
    if s == 1:
        return _to_number(fs[0].sum()) * _to_number(fs[1].sum())
    if s == 2:
        a = np.correlate(fs[2], fs[0], "full")
        b = np.correlate(fs[3], fs[1], "full")
        return _to_number(np.dot(a, b))
    half = len(fs) // 2
    total = 0
    for h in range(-(M - 1), M):
        lo, hi = max(0, -h), min(M, M - h)
        total += _nested_sum([fs[w][lo:hi] * fs[w + half][lo + h:hi + h] for w in range(half)])
    return total


def _to_number(x):
    return int(x) if np.issubdtype(np.asarray(x).dtype, np.integer) else float(x)


@lru_cache(maxsize=16)
def _cube_offsets(M: int, s: int):
    # all side vectors with |h|_1 <= M - 1, with their 2^s vertex offsets
    span = np.arange(-(M - 1), M)
    grid = np.stack(np.meshgrid(*([span] * s), indexing="ij"), axis=-1).reshape(-1, s)
    grid = grid[np.abs(grid).sum(axis=1) <= M - 1]
    omegas = np.array([[(w >> i) & 1 for i in range(s)] for w in range(1 << s)])
    offs = grid @ omegas.T
    return offs, offs.min(axis=1), offs.max(axis=1)


def _brute_sum(fs):
    s = _order(len(fs))
    M = len(fs[0])
    offs, lo, hi = _cube_offsets(M, s)
    total = 0
    for n in range(M):
        ok = (lo >= -n) & (hi <= M - 1 - n)
        pts = n + offs[ok]
        prod = fs[0][pts[:, 0]].copy()
        for w in range(1, len(fs)):
            prod *= fs[w][pts[:, w]]
        total += _to_number(prod.sum())
    return total


def _work(M: int, s: int, method: str) -> int:
    if method == "brute":
        return cube_count(M, s) << s if M <= 4096 else M ** (s + 1)
    return M ** s


def _prepare(funcs):
    arrs = [np.asarray(f) for f in funcs]
    if all(a.dtype == bool or np.issubdtype(a.dtype, np.integer) for a in arrs):
        return [a.astype(np.int64) for a in arrs]
    return [a.astype(np.float64) for a in arrs]


def gowers_inner_sum(funcs, method: str = "nested", workers: int = 1,
                     work_budget: int = DEFAULT_WORK_BUDGET):
    """Sum of prod_w f_w(n + w.h) over all cubes in [0, M).

    ``funcs`` holds 2^s arrays of equal length M. Integer input gives an exact
    Python int; float input gives a float. With ``workers > 1`` the outermost
    side length is split into fixed contiguous chunks and the partial sums are
    added in chunk order, so the result does not depend on scheduling.
    """
    fs = _prepare(funcs)
    s = _order(len(fs))
    M = len(fs[0])
    if any(len(f) != M for f in fs):
        raise ValueError("all functions must have the same length")
    if s > MAX_ORDER:
        raise ValueError(f"s out of supported range (1..{MAX_ORDER})")
    if _work(M, s, method) > work_budget:
        raise WorkBudgetExceeded(f"M={M}, s={s} exceeds work budget {work_budget}")
    if method == "brute":
        return _brute_sum(fs)
    if method != "nested":
        raise ValueError(f"unknown method {method!r}")
    if workers <= 1 or s <= 2 or M < 2:
        return _nested_sum(fs)

    half = len(fs) // 2
    shifts = np.array_split(np.arange(-(M - 1), M), workers)

    def chunk(hs):
        total = 0
        for h in hs:
            lo, hi = max(0, -h), min(M, M - h)
            total += _nested_sum([fs[w][lo:hi] * fs[w + half][lo + h:hi + h] for w in range(half)])
        return total

    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(chunk, shifts))
    return sum(parts)


def _report_from_sum(total, N, s, seq_name, method) -> NormReport:
    den = cube_count(N, s)
    if isinstance(total, float):
        frac = Fraction(total) / den
        power = ExactAverage(frac.numerator, frac.denominator)
    else:
        power = ExactAverage(total, den)
    value = max(power.real_value, 0.0)
    return NormReport(seq_name, s, N, power, value ** (1.0 / (1 << s)), method)


def gowers_norm(signal, s: int, method: str = "nested", name: str = "signal",
                workers: int = 1, work_budget: int = DEFAULT_WORK_BUDGET) -> NormReport:
    """||f||_{U^s[N]} for a signal on [0, N) with values in [-1, 1]."""
    f = np.asarray(signal)
    if f.ndim != 1 or len(f) < 1:
        raise ValueError("signal must be a non-empty 1-d array")
    if not 1 <= s <= MAX_ORDER:
        raise ValueError(f"s out of supported range (1..{MAX_ORDER})")
    if np.abs(f).max() > 1:
        raise ValueError("signal values must lie in [-1, 1]")
    total = gowers_inner_sum([f] * (1 << s), method=method, workers=workers,
                             work_budget=work_budget)
    return _report_from_sum(total, len(f), s, name, method)


def sequence_norm(seq: SequenceLike, s: int, N: int, method: str = "nested",
                  workers: int = 1, work_budget: int = DEFAULT_WORK_BUDGET) -> NormReport:
    """Norm of a named sequence on [0, N).

    ``method="dyadic"`` requires N = 2^L and evaluates A(L, 0) through
    :func:`cube_average`.
    """
    sq = get_sequence(seq)
    if method == "dyadic":
        L = N.bit_length() - 1
        if N != 1 << L:
            raise ValueError("dyadic method needs N a power of two")
        avg = cube_average(sq, CubeSpec(s, L), workers=workers, work_budget=work_budget)
        return _report_from_sum(avg.numerator, N, s, sq.name, "dyadic")
    rep = gowers_norm(block_values(sq, N), s, method=method, name=sq.name,
                      workers=workers, work_budget=work_budget)
    return rep


def _label_indices(seq, labels, s):
    if labels is None:
        return [seq.index[seq.initial]] * (1 << s)
    names = {str(q): i for i, q in enumerate(seq.states)}
    out = []
    for a in labels:
        if isinstance(a, (int, np.integer)):
            out.append(int(a))
        elif isinstance(a, str):
            out.append(names[a])
        else:
            out.append(seq.index[a])
    return out


def cube_average(seq: SequenceLike, spec: CubeSpec, method: str = "nested", workers: int = 1,
                 work_budget: int = DEFAULT_WORK_BUDGET) -> ExactAverage:
    """A(L, a, r): average over cubes in [0, 2^L) of prod_w a_w(n + w.h + r_w)."""
    sq = get_sequence(seq)
    s, L = spec.s, spec.L
    offsets = spec.resolved_offsets()
    if len(offsets) != 1 << s:
        raise ValueError("need one offset per vertex of the cube")
    if min(offsets) < 0:
        raise ValueError("offsets must be nonnegative")
    labels = _label_indices(sq, spec.labels, s)
    M = 1 << L
    if _work(M, s, method) > work_budget:
        raise WorkBudgetExceeded(f"2^L={M}, s={s} exceeds work budget {work_budget}")
    length = M + max(offsets)
    blocks = {i: block_values(sq, length, state=sq.states[i]) for i in set(labels)}
    fs = [blocks[a][r:r + M] for a, r in zip(labels, offsets)]
    total = gowers_inner_sum(fs, method=method, workers=workers, work_budget=work_budget)
    return ExactAverage(total, cube_count(M, s))


def vertex_average(seq: SequenceLike, vertex, L: int, **kw) -> Fraction:
    """A(L, v) = sign * A(L, labels, offsets) for a walk vertex."""
    s = len(vertex.offsets).bit_length() - 1
    avg = cube_average(seq, CubeSpec(s, L, vertex.offsets, vertex.labels), **kw)
    return vertex.sign * avg.fraction


def recursion_residual(seq: SequenceLike, spec: CubeSpec, L: int | None = None,
                       sign: int = 1, **kw) -> float:
    """|A(L, v) - E_e A(L-1, delta(v; e))| over e in {0,1}^(s+1), one step.

    For Thue-Morse with s >= 2 the sign carried by delta is (-1)^{|r|}, so this
    is exactly the one-step recursion for A(L, r); for kernels with several
    elements the labels are rewritten as well.
    """
    from .walk import WalkVertex, delta_l

    sq = get_sequence(seq)
    L = spec.L if L is None else L
    if L < 1:
        raise ValueError("need L >= 1")
    s = spec.s
    v = WalkVertex(tuple(_label_indices(sq, spec.labels, s)), spec.resolved_offsets(), sign)
    lhs = vertex_average(sq, v, L, **kw)
    rhs = Fraction(0)
    for e in product((0, 1), repeat=s + 1):
        rhs += vertex_average(sq, delta_l(sq, v, e, 1), L - 1, **kw)
    rhs /= 1 << (s + 1)
    return float(abs(lhs - rhs))


DyadicInterval = namedtuple("DyadicInterval", "start stop m L")
Decomposition = namedtuple("Decomposition", "intervals remainder")


def _binary_blocks(N: int):
    start = 0
    for L in range(N.bit_length() - 1, -1, -1):
        if N >> L & 1:
            yield DyadicInterval(start, start + (1 << L), start >> L, L)
            start += 1 << L


def dyadic_decompose(N: int, style: str = "tm") -> Decomposition:
    """Split [0, N) into intervals on which the sequence factorises.

    ``tm``: the dyadic blocks [m 2^L, (m+1) 2^L) of the binary expansion of N,
    with strictly decreasing L.

    ``rs``: each dyadic block [E - 2^L', E) is cut into
    [E - 2^k, E - 2^(k-1)) for k = L', ..., 1, which has the form
    [m 2^(L+1), m 2^(L+1) + 2^L) with L = k - 1, plus the singleton {E - 1}
    which goes to the remainder. On such an interval the binary expansion is
    m, a zero bit, then L free bits, so no 11 crosses the junction.
    """
    if N < 1:
        raise ValueError("N must be positive")
    blocks = list(_binary_blocks(N))
    if style == "tm":
        return Decomposition(blocks, [])
    if style != "rs":
        raise ValueError("style must be 'tm' or 'rs'")
    intervals, remainder = [], []
    for blk in blocks:
        end = blk.stop
        for k in range(blk.L, 0, -1):
            start = end - (1 << k)
            intervals.append(DyadicInterval(start, start + (1 << (k - 1)), start >> k, k - 1))
        remainder.append(end - 1)
    return Decomposition(intervals, remainder)


def decomposition_bound(seq: SequenceLike, s: int, N: int) -> float:
    """Triangle-inequality bound sum_j ||1_{I_j} a||_{U^s[N]} over the tm blocks.

    Each term uses the restriction identity: the cubes inside I_j are the
    translates of the cubes inside [0, 2^L), and a factorises on I_j.
    Only valid for Thue-Morse.
    """
    sq = get_sequence(seq)
    if sq.pattern != "1":
        raise ValueError("the block factorisation holds for Thue-Morse only")
    den = cube_count(N, s)
    total = 0.0
    for blk in dyadic_decompose(N, "tm").intervals:
        inner = cube_average(sq, CubeSpec(s, blk.L))
        power = Fraction(inner.numerator, den)
        total += max(float(power), 0.0) ** (1.0 / (1 << s))
    return total
