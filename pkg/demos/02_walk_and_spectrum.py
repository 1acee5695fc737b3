"""The signed walk behind the decay, and its spectral gap.

Run: python3 demos/02_walk_and_spectrum.py
"""
import numpy as np

from gowers_automatic.gowers import sequence_norm
from gowers_automatic.spectral import discrepancy_series, norm_upper_bound, spectral_gap, stationary
from gowers_automatic.walk import analyze_graph, build_graph, transition_matrix, witness_path

g = build_graph("tm", 2)
print(len(g), "vertices")
for v in g.vertices:
    print(" ", v.describe())
print(analyze_graph(g))

# The explicit path from (0, +1) to (0, -1).
for v, e, l in witness_path("tm", 2).steps:
    print(v.describe(), "--", e, "->")

P = transition_matrix(g)
print("P(v0, v0) =", P.entry(0, 0))
pi = stationary(P, exact=True)
print("stationary:", [str(x) for x in pi.exact])

est = spectral_gap(P, 2)
print(f"lambda2={est.lambda2:.6f}  c={est.c:.4f}  fitted={est.fit_c:.4f}")

d = discrepancy_series(P, 30)
print("signed discrepancy:", np.array(d[::5]))

# The bound after L/2 steps against the exact value.
for L in range(4, 11):
    exact = sequence_norm("tm", 2, 1 << L).power.real_value
    print(L, f"{exact:.5f}", f"{norm_upper_bound('tm', 2, L, P=P):.5f}")

# Bigger orders and Rudin-Shapiro.
for seq, s in [("tm", 3), ("tm", 4), ("rs", 2), ("rs", 3)]:
    rep = analyze_graph(build_graph(seq, s))
    print(seq, s, rep.num_vertices, rep.strongly_connected, rep.aperiodic, rep.r_symmetric)
