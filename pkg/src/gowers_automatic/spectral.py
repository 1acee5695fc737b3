"""Convergence of the signed walk: stationary law, spectral gap, decay rates.

The quantity that controls the norms is the signed discrepancy

    d(l) = max_v' |P^l(v0, v') - P^l(v0, R v')|,

which tends to zero because the chain mixes while R preserves the
transition probabilities. Its rate is compared with the second largest
eigenvalue modulus of P.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .seqcore import SequenceLike
from .walk import DyadicMatrix, build_graph, graph_period, transition_matrix

__all__ = [
    "NotErgodic",
    "DimensionTooLarge",
    "StationaryDistribution",
    "DecayEstimate",
    "matrix_power",
    "row_powers",
    "stationary",
    "signed_discrepancy",
    "discrepancy_series",
    "spectral_gap",
    "norm_upper_bound",
    "RESIDUAL_CONSTANT",
]

# Single constant C with 2^L |A(L, v) - sum_v' P(v, v') A(L-1, v')| <= C for every
# reachable v and 1 <= L <= 9 (tm with s = 2, 3 and rs with s = 2; measured maximum
# 1.67 at L = 1). See tests/test_calibration.py.
RESIDUAL_CONSTANT = 2.0


class NotErgodic(ValueError):
    pass


class DimensionTooLarge(ValueError):
    pass


@dataclass
class StationaryDistribution:
    pi: np.ndarray
    residual: float
    exact: list[Fraction] | None = None


@dataclass
class DecayEstimate:
    lambda2: float
    c: float
    c_prime: float
    fit_c: float
    samples: list[tuple[int, float]] = field(default_factory=list)
    num_vertices: int = 0

    def to_dict(self) -> dict:
        return {
            "num_vertices": self.num_vertices,
            "lambda2": self.lambda2,
            "c": self.c,
            "c_prime": self.c_prime,
            "fit_c": self.fit_c,
            "samples": [[l, d] for l, d in self.samples],
        }


def matrix_power(P: DyadicMatrix, l: int) -> DyadicMatrix:
    """Exact P^l by repeated squaring over Python integers."""
    if l < 0:
        raise ValueError("l must be nonnegative")
    base = P.dense_num()
    n = base.shape[0]
    result = np.zeros((n, n), dtype=object)
    for i in range(n):
        result[i, i] = 1
    log2_den = 0
    step_den = P.log2_den
    while l:
        if l & 1:
            result = result.dot(base)
            log2_den += step_den
        l >>= 1
        if l:
            base = base.dot(base)
            step_den *= 2
    return DyadicMatrix(result, log2_den, P.reflection)


def row_powers(P: DyadicMatrix, start: int, steps: int):
    """Yield (l, numerators of row ``start`` of P^l) for l = 0..steps, exactly.

    Denominator of step l is 2^(l * log2_den). Uses the sparse one-step
    numerators, so the cost is O(steps * nnz) big-integer operations.
    """
    A = P.num if sparse.issparse(P.num) else sparse.csr_matrix(P.num.astype(np.int64))
    A = A.tocsr()
    n = A.shape[0]
    row = [0] * n
    row[start] = 1
    yield 0, row
    for l in range(1, steps + 1):
        nxt = [0] * n
        for i, x in enumerate(row):
            if x:
                lo, hi = A.indptr[i], A.indptr[i + 1]
                for j, c in zip(A.indices[lo:hi].tolist(), A.data[lo:hi].tolist()):
                    nxt[j] += x * c
        row = nxt
        yield l, row


def _check_ergodic(P: DyadicMatrix):
    adj = P.num if sparse.issparse(P.num) else sparse.csr_matrix((P.to_float() > 0).astype(np.int8))
    ncomp, _ = connected_components(adj, directed=True, connection="strong")
    if ncomp != 1 or graph_period(sparse.csr_matrix(adj), 0) != 1:
        raise NotErgodic("chain is not irreducible and aperiodic")


def _gth(T):
    # Grassmann-Taksar-Heyman elimination on a row-stochastic matrix; works for
    # floats and Fractions alike since it never subtracts
    n = len(T)
    T = [list(row) for row in T]
    for k in range(n - 1, 0, -1):
        sk = sum(T[k][j] for j in range(k))
        for i in range(k):
            T[i][k] = T[i][k] / sk
        for i in range(k):
            if T[i][k]:
                for j in range(k):
                    T[i][j] += T[i][k] * T[k][j]
    pi = [T[0][0] * 0 + 1] + [None] * (n - 1)
    for j in range(1, n):
        pi[j] = sum(pi[i] * T[i][j] for i in range(j))
    total = sum(pi)
    return [x / total for x in pi]


def _gth_numpy(T: np.ndarray) -> np.ndarray:
    T = np.array(T, dtype=np.float64)
    n = T.shape[0]
    for k in range(n - 1, 0, -1):
        sk = T[k, :k].sum()
        T[:k, k] /= sk
        T[:k, :k] += np.outer(T[:k, k], T[k, :k])
    pi = np.zeros(n)
    pi[0] = 1.0
    for j in range(1, n):
        pi[j] = pi[:j] @ T[:j, j]
    return pi / pi.sum()


def stationary(P: DyadicMatrix, exact: bool = False, max_dim: int = 10 ** 4) -> StationaryDistribution:
    """Stationary distribution via GTH elimination.

    ``exact=True`` runs the elimination over Fractions (fine up to a few
    hundred vertices) so symmetries like pi(R v) = pi(v) hold exactly.
    """
    _check_ergodic(P)
    n = P.shape[0]
    if n > max_dim:
        raise DimensionTooLarge(f"{n} vertices exceeds dense limit {max_dim}")
    Pf = P.to_float()
    exact_pi = None
    if exact:
        num = P.dense_num()
        T = [[Fraction(int(x), P.denominator) for x in row] for row in num]
        exact_pi = _gth(T)
        pi = np.array([float(x) for x in exact_pi])
    else:
        pi = _gth_numpy(Pf)
    residual = float(np.abs(pi @ Pf - pi).sum())
    return StationaryDistribution(pi, residual, exact_pi)


def discrepancy_series(P: DyadicMatrix, steps: int, v0: int = 0) -> list[float]:
    """d(l) for l = 0..steps from exact row powers."""
    perm = P.reflection
    if perm is None:
        raise ValueError("matrix carries no reflection; graph is not R-symmetric")
    out = []
    for l, row in row_powers(P, v0, steps):
        diff = max(abs(row[i] - row[perm[i]]) for i in range(len(row)))
        out.append(float(Fraction(diff, 1 << (l * P.log2_den))))
    return out


def signed_discrepancy(P: DyadicMatrix, v0: int, l: int) -> float:
    """max_v' |P^l(v0, v') - P^l(v0, R v')|."""
    return discrepancy_series(P, l, v0)[l]


def _fit_rate(samples) -> float:
    ls = np.array([l for l, _ in samples], dtype=float)
    ys = -np.log2(np.array([d for _, d in samples], dtype=float))
    slope, _ = np.polyfit(ls, ys, 1)
    return float(slope)


def spectral_gap(P: DyadicMatrix, s: int | None = None, fit_window: tuple[int, int] = (10, 30),
                 max_dim: int = 10 ** 4) -> DecayEstimate:
    """Second eigenvalue modulus of P and the fitted decay rate of d(l).

    lambda2 comes from a dense eigenvalue solve; c = -log2(lambda2) and
    c_prime = c / 2^s. fit_c is the least-squares slope of -log2 d(l) over
    the fit window.
    """
    if s is None:
        s = P.log2_den - 1
    n = P.shape[0]
    if n > max_dim:
        raise DimensionTooLarge(f"{n} vertices exceeds dense limit {max_dim}")
    moduli = np.sort(np.abs(np.linalg.eigvals(P.to_float())))[::-1]
    lam2 = float(moduli[1]) if n > 1 else 0.0
    c = -math.log2(lam2) if lam2 > 0 else math.inf
    lo, hi = fit_window
    ds = discrepancy_series(P, hi)
    samples = [(l, ds[l]) for l in range(lo, hi + 1) if ds[l] > 0]
    fit_c = _fit_rate(samples) if len(samples) >= 2 else math.inf
    return DecayEstimate(lam2, c, c / (1 << s), fit_c, samples, n)


def norm_upper_bound(seq: SequenceLike, s: int, L: int, C: float | None = None,
                     P: DyadicMatrix | None = None) -> float:
    """Upper bound for A(L, 0) after l = floor(L/2) steps of the walk.

    Pairs v', R v' contribute P^l(v0, v') - P^l(v0, R v') times an average of
    modulus at most 1; the accumulated recursion error is below
    C 2^-(L-l) when each one-step error is at most C 2^-L'.
    """
    if L < 2:
        raise ValueError("need L >= 2")
    if P is None:
        P = transition_matrix(build_graph(seq, s))
    if C is None:
        C = RESIDUAL_CONSTANT
    l = L // 2
    perm = P.reflection
    row = None
    for _, row in row_powers(P, 0, l):
        pass
    # each pair {v', R v'} counted once
    diff = sum(abs(row[i] - row[perm[i]]) for i in range(len(row))) // 2
    return float(Fraction(diff, 1 << (l * P.log2_den))) + C * 2.0 ** (-(L - l))
