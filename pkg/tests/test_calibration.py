"""Measures the constant C in the one-step recursion error bound.

For every vertex v of the walk graph, 2^L |A(L, v) - sum_v' P(v, v') A(L-1, v')|
should stay below a single constant. The stored constant must dominate every
measured value; the printed maxima document the margin.
"""
import pytest

from gowers_automatic.spectral import RESIDUAL_CONSTANT
from gowers_automatic.walk import build_graph, vertex_residuals


@pytest.mark.parametrize("seq,s,Lmax", [("tm", 2, 9), ("rs", 2, 9), ("tm", 3, 8)])
def test_residual_constant_dominates_all_vertices(seq, s, Lmax):
    g = build_graph(seq, s)
    cache = {}
    worst = []
    for L in range(1, Lmax + 1):
        worst.append(max(vertex_residuals(g, L, cache)))
    print(f"{seq} s={s}: max 2^L residual per L = {[round(float(w), 3) for w in worst]}")
    assert max(worst) <= RESIDUAL_CONSTANT
    # the error does not grow with L
    assert worst[-1] <= worst[0]
