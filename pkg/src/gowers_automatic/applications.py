"""Arithmetic consequences of Gowers uniformity, checked numerically.

Counts of k-term progressions in {n < N : a(n) = +1}, exponential sums over
a frequency grid, correlations along progressions and with shifts, polynomial
phase correlations, and an evidence table for pattern-counting sequences.
"""
from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .gowers import sequence_norm
from .seqcore import SequenceLike, block_values, check_kernel_symmetry, get_sequence

__all__ = [
    "APCountReport",
    "ExpSumReport",
    "SelfCorrelation",
    "BudgetExceeded",
    "progression_total",
    "ap_count",
    "exp_sum",
    "progression_sum",
    "self_correlation_scan",
    "poly_phase_corr",
    "fit_power_law",
    "conjecture_scan",
    "two_column_data",
    "GELFOND_EXPONENT",
]

GELFOND_EXPONENT = math.log(3) / math.log(4)


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class APCountReport:
    seq: str
    N: int
    k: int
    count: int
    total: int
    expected: float
    deviation: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ExpSumReport:
    seq: str
    N: int
    grid: int
    sup_estimate: float
    alpha: float
    exponent: float
    normalized: float

    def to_dict(self) -> dict:
        return asdict(self)


SelfCorrelation = namedtuple("SelfCorrelation", "M h value")


def progression_total(N: int, k: int) -> int:
    """T_k(N): number of (n, d), d >= 1, with n, ..., n + (k-1) d in [0, N)."""
    D = (N - 1) // (k - 1) if N > 0 else 0
    # sum_{d=1}^{D} (N - (k-1) d)
    return D * N - (k - 1) * D * (D + 1) // 2


def ap_count(seq: SequenceLike, N: int, k: int, work_budget: int = 1 << 34) -> APCountReport:
    """Exact number of k-term progressions with common difference d >= 1 in {a = +1}.

    The density prediction is 2^-k T_k(N); ``deviation`` is count minus that.
    """
    if k < 3:
        raise ValueError("need k >= 3")
    sq = get_sequence(seq)
    total = progression_total(N, k)
    if total * k > work_budget:
        raise BudgetExceeded(f"N={N}, k={k} exceeds work budget")
    plus = block_values(sq, N) == 1
    count = 0
    for d in range(1, max(N - 1, 0) // (k - 1) + 1):
        span = N - (k - 1) * d
        hit = plus[:span].copy()
        for j in range(1, k):
            hit &= plus[j * d:j * d + span]
        count += int(np.count_nonzero(hit))
    expected = Fraction(total, 1 << k)
    return APCountReport(sq.name, N, k, count, total, float(expected), float(count - expected))


def exp_sum(seq: SequenceLike, N: int, grid: int | None = None,
            exponent: float | None = None) -> ExpSumReport:
    """max over alpha in {j / G} of |sum_{n<N} a(n) e(alpha n)|, via one FFT.

    ``normalized`` divides by N^exponent; the default exponent is
    log 3 / log 4 except for Rudin-Shapiro, where it is 1/2.
    """
    sq = get_sequence(seq)
    G = 8 * N if grid is None else grid
    if G < 4 * N:
        raise ValueError("grid must have at least 4N points")
    if exponent is None:
        exponent = 0.5 if sq.pattern == "11" else GELFOND_EXPONENT
    vals = block_values(sq, N).astype(np.float64)
    mods = np.abs(np.fft.fft(vals, n=G))
    j = int(np.argmax(mods))
    sup = float(mods[j])
    # the DFT uses e(-jn/G); for real a the modulus at -j/G is the same
    alpha = ((G - j) % G) / G
    return ExpSumReport(sq.name, N, G, sup, alpha, exponent, sup / N ** exponent)


def progression_sum(seq: SequenceLike, a: int, b: int, M: int) -> int:
    """sum_{n<M} seq(a n + b), exactly."""
    if a < 1 or b < 0 or M < 0:
        raise ValueError("need a >= 1, b >= 0, M >= 0")
    if M == 0:
        return 0
    vals = block_values(seq, a * (M - 1) + b + 1)
    return int(vals[b::a][:M].astype(np.int64).sum())


def self_correlation_scan(seq: SequenceLike, N: int, h_max: int) -> SelfCorrelation:
    """Maximise |sum_{n<M} a(n) a(n+h)| over 1 <= h <= h_max and M + h <= N.

    Prefix sums of a(n) a(n+h) make each shift O(N). Ties go to the smallest
    h, then the smallest M.
    """
    if h_max < 1:
        raise ValueError("h_max must be at least 1")
    vals = block_values(seq, N).astype(np.int64)
    best = SelfCorrelation(0, 0, 0)
    for h in range(1, min(h_max, N - 1) + 1):
        prefix = np.cumsum(vals[:N - h] * vals[h:])
        i = int(np.argmax(np.abs(prefix)))
        if abs(int(prefix[i])) > abs(best.value):
            best = SelfCorrelation(i + 1, h, int(prefix[i]))
    return best


def poly_phase_corr(seq: SequenceLike, N: int, coeffs) -> float:
    """|E_{n<N} a(n) e(p(n))| with p given by coefficients, constant term first."""
    n = np.arange(N, dtype=np.float64)
    phase = np.zeros(N)
    for c in reversed(list(coeffs)):
        phase = np.mod(phase * n + c, 1.0)
    vals = block_values(seq, N).astype(np.float64)
    return float(abs(np.mean(vals * np.exp(2j * np.pi * phase))))


def fit_power_law(xs, ys) -> tuple[float, float]:
    """Least-squares (beta, C) for ys ~ C xs^beta on log-log axes."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    beta, logc = np.polyfit(lx, ly, 1)
    return float(beta), float(math.exp(logc))


def two_column_data(xs, ys) -> str:
    """Whitespace-separated two-column text, one point per line (gnuplot style)."""
    return "".join(f"{x} {float(y)!r}\n" for x, y in zip(xs, ys))


def _max_progression_mean(sq, N: int, q_max: int) -> tuple[float, int, int]:
    vals = block_values(sq, q_max * N).astype(np.int64)
    best = (0.0, 1, 0)
    for q in range(1, q_max + 1):
        for r in range(q):
            m = abs(float(vals[r::q][:N].mean()))
            if m > best[0]:
                best = (m, q, r)
    return best


def conjecture_scan(patterns, s: int = 2, N: int = 1 << 12, q_max: int = 8,
                    ladder=None, vertex_cap: int = 200_000, dense_limit: int = 2000) -> list[dict]:
    """Evidence table for pattern-counting sequences.

    For each pattern: the largest |E_{n<N} a(qn + r)| over q <= q_max, r < q;
    ||a||_{U^s[N']} over a ladder of N' with the fitted log-log slope; and,
    for symmetric kernels, the walk-graph report and spectral rate. Failures
    in one pattern are reported in its row and do not stop the scan.
    """
    from .spectral import spectral_gap
    from .walk import analyze_graph, build_graph, transition_matrix

    if ladder is None:
        top = N.bit_length() - 1
        ladder = [1 << j for j in range(4, top + 1)]
    rows = []
    for bits in patterns:
        seq_id = bits if ":" in bits or bits in ("tm", "rs") else "pattern:" + bits
        row = {"seq": seq_id, "s": s}
        try:
            sq = get_sequence(seq_id)
            row["pattern"] = sq.pattern
            row["kernel_size"] = len(sq.states)
            m, q, r = _max_progression_mean(sq, N, q_max)
            row.update(ap_corr_max=m, ap_corr_q=q, ap_corr_r=r)
            norms = [(n_, sequence_norm(sq, s, n_).norm) for n_ in ladder]
            row["norms"] = norms
            positive = [(x, y) for x, y in norms if y > 0]
            row["norm_slope"] = fit_power_law(*zip(*positive))[0] if len(positive) >= 2 else None
            row["symmetric_kernel"] = check_kernel_symmetry(sq)
            if row["symmetric_kernel"] and s >= 2:
                g = build_graph(sq, s, cap=vertex_cap)
                row["graph"] = analyze_graph(g).to_dict()
                if len(g) <= dense_limit:
                    est = spectral_gap(transition_matrix(g), s)
                    row.update(lambda2=est.lambda2, c=est.c, fit_c=est.fit_c)
        except Exception as exc:  # reported inline by design
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows
