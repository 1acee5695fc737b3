"""Progressions, exponential sums and correlations.

Run: python3 demos/03_arithmetic_consequences.py
"""
import math

from gowers_automatic.applications import (
    ap_count,
    conjecture_scan,
    exp_sum,
    fit_power_law,
    poly_phase_corr,
    progression_sum,
    self_correlation_scan,
)

# 3-term progressions inside {t = +1}, against the density guess T/8.
Ns = [1 << j for j in range(8, 15)]
reps = [ap_count("tm", N, 3) for N in Ns]
for r in reps:
    print(r.N, r.count, r.expected, r.deviation)
print("deviation exponent:", fit_power_law(Ns, [abs(r.deviation) for r in reps])[0])

# Gelfond's exponent log 3 / log 4 for the exponential sum.
for L in range(8, 17, 2):
    rep = exp_sum("tm", 1 << L)
    print(rep.N, round(rep.sup_estimate, 2), round(rep.normalized, 4), rep.alpha)

print("sum t(3n+1), n < 1000:", progression_sum("tm", 3, 1, 1000))

# Large self-correlations: h = 1 for Thue-Morse, h a power of two for Rudin-Shapiro.
print(self_correlation_scan("tm", 4096, 1))
print(self_correlation_scan("rs", 4096, 4095))

print("quadratic phase:", poly_phase_corr("tm", 1024, [0, 0, math.sqrt(2) / 4]))

for row in conjecture_scan(["1", "11", "111", "101"], s=2, N=1 << 11):
    print(row["seq"], row["kernel_size"], round(row["ap_corr_max"], 4),
          round(row["norm_slope"], 3), round(row.get("c", float("nan")), 3))
