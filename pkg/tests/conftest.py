import itertools

import numpy as np
import pytest


def brute_cube_sum(fs, N):
    """Sum over all (n, h) in Z x Z^s with the cube inside [0, N) of prod f_w(n + w.h).

    Plain enumeration over every h in (-N, N)^s; used only as an oracle.
    """
    s = len(fs).bit_length() - 1
    total = 0
    for h in itertools.product(range(-N + 1, N), repeat=s):
        pts = [sum(h[i] for i in range(s) if (w >> i) & 1) for w in range(1 << s)]
        lo, hi = -min(pts), N - max(pts)
        for n in range(lo, hi):
            prod = 1
            for f, p in zip(fs, pts):
                prod *= f[n + p]
            total += prod
    return total


def brute_cube_count(N, s):
    return brute_cube_sum([[1] * N] * (1 << s), N)


def popcount_sign(n):
    return -1 if bin(n).count("1") % 2 else 1


def window_sign(pattern, n):
    word = bin(n)[2:] if n else ""
    hits = sum(word[i:i + len(pattern)] == pattern for i in range(len(word)))
    return -1 if hits % 2 else 1


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
