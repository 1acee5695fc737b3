"""Gowers norms of Thue-Morse and Rudin-Shapiro on [0, N).

Run: python3 demos/01_norms_of_thue_morse.py
"""
import numpy as np

from gowers_automatic.gowers import CubeSpec, cube_average, gowers_norm, sequence_norm
from gowers_automatic.seqcore import block_values

# First few values. t(n) is the parity of the binary digit sum, r(n) the
# parity of the number of 11 blocks.
print("t:", block_values("tm", 16))
print("r:", block_values("rs", 16))

# The 2^s-th power of the norm is an exact rational; both routes agree.
rep = sequence_norm("tm", 2, 64)
brute = sequence_norm("tm", 2, 64, method="brute")
print(rep.power.fraction, brute.power.fraction, rep.norm)

# A random +-1 sequence has small U^2 norm, a periodic one does not.
rng = np.random.default_rng(0)
print("random :", gowers_norm(rng.choice([-1, 1], 512), 2).norm)
print("period4:", gowers_norm(np.tile([1, 1, -1, -1], 128), 2).norm)

# Thue-Morse and Rudin-Shapiro decay along powers of two.
for L in range(4, 11):
    tm = cube_average("tm", CubeSpec(2, L)).real_value
    rs = cube_average("rs", CubeSpec(2, L)).real_value
    print(f"L={L:2d}  A_tm={tm:.5f}  A_rs={rs:.5f}")

# U^3 as well, on a smaller range.
for N in (64, 128, 256, 512):
    print(N, sequence_norm("tm", 3, N).norm, sequence_norm("rs", 3, N).norm)
