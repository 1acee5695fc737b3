"""Signed 2-automatic sequences: Thue-Morse, Rudin-Shapiro and pattern counting.

Every sequence here is a(n) = (-1)^{f(n)} where f counts (overlapping)
occurrences of a binary word in the expansion of n. Thue-Morse is the word
``1`` and Rudin-Shapiro is ``11``.

Elements of the sign-normalised 2-kernel are stored as *suffix-character
tables*: for a word of length p, an element is the function

    n -> chi(n mod 2^(p-1)) * a(n),    chi(0) = +1,

so equality of kernel elements is equality of tables. Peeling the least
significant bit maps such a function to +-(another such function), which is
all the downstream walk construction needs.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Union

import numpy as np

__all__ = [
    "KernelElement",
    "SignedAutomatonSequence",
    "KernelTooLarge",
    "validate_pattern",
    "pattern_occurrences",
    "thue_morse",
    "rudin_shapiro",
    "pattern_sequence",
    "get_sequence",
    "evaluate",
    "direct_value",
    "block_values",
    "lsb_step",
    "kernel_plus",
    "check_kernel_symmetry",
]

SequenceLike = Union[str, "SignedAutomatonSequence"]


class KernelTooLarge(RuntimeError):
    """Raised when the kernel closure grows past the configured cap."""


def validate_pattern(bits: str) -> str:
    if not bits or set(bits) - {"0", "1"}:
        raise ValueError(f"pattern must be a non-empty word over 0/1, got {bits!r}")
    if bits[0] != "1" or bits[-1] != "1":
        raise ValueError(f"pattern must begin and end with 1, got {bits!r}")
    return bits


def pattern_occurrences(pattern: str, n: int) -> int:
    """Number of overlapping occurrences of ``pattern`` in the binary expansion of n.

    The expansion of 0 is empty, so the count is 0 there.
    """
    validate_pattern(pattern)
    if n < 0:
        raise ValueError("n must be nonnegative")
    word = bin(n)[2:] if n else ""
    p = len(pattern)
    return sum(1 for i in range(len(word) - p + 1) if word[i:i + p] == pattern)


def _direct(pattern: str, n: int) -> int:
    return -1 if pattern_occurrences(pattern, n) % 2 else 1


@dataclass(frozen=True)
class KernelElement:
    """n -> table[n mod 2^(p-1)] * (-1)^{f_pattern(n)}, with table[0] == +1."""

    pattern: str
    table: tuple[int, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if len(self.table) != 1 << (len(self.pattern) - 1):
            raise ValueError("table length must be 2^(len(pattern)-1)")
        if self.table[0] != 1 or any(v not in (1, -1) for v in self.table):
            raise ValueError("table must be +-1 valued with table[0] == +1")

    def __call__(self, n: int) -> int:
        return self.table[n % len(self.table)] * _direct(self.pattern, n)

    def __str__(self):
        return self.name or "".join("+" if v > 0 else "-" for v in self.table)


def _eps_table(pattern: str) -> np.ndarray:
    # eps[u, b] = -1 iff appending bit b to a number ending in the (p-1) bits u
    # completes an occurrence of the pattern.
    p = len(pattern)
    width = 1 << (p - 1)
    target = int(pattern, 2)
    eps = np.ones((width, 2), dtype=np.int8)
    for u in range(width):
        for b in (0, 1):
            if ((u << 1) | b) == target:
                eps[u, b] = -1
    return eps


def lsb_step(q: KernelElement, b: int) -> tuple[int, KernelElement]:
    """Return (sign, q') with q(2n + b) = sign * q'(n) for all n >= 0."""
    if b not in (0, 1):
        raise ValueError("b must be a bit")
    width = len(q.table)
    target = int(q.pattern, 2)
    psi = []
    for u in range(width):
        hit = ((u << 1) | b) == target
        psi.append(q.table[((u << 1) | b) % width] * (-1 if hit else 1))
    sign = psi[0]
    table = tuple(sign * v for v in psi)
    return sign, KernelElement(q.pattern, table)


@dataclass
class SignedAutomatonSequence:
    """A +-1 sequence given by LSB-peeling rules a_q(2n + b) = sign * a_{q'}(n).

    ``step`` maps (state, bit) to (sign, next state) and ``base`` gives a_q(0).
    States are arbitrary hashables; for pattern sequences they are
    :class:`KernelElement` instances, i.e. the automaton is the kernel itself.
    """

    name: str
    states: tuple
    step: Mapping[tuple[Hashable, int], tuple[int, Hashable]]
    base: Mapping[Hashable, int]
    initial: Hashable
    pattern: str | None = None

    def __post_init__(self):
        self.index = {q: i for i, q in enumerate(self.states)}
        # integer-coded transition tables used by the vectorised walk code
        k = len(self.states)
        self.step_sign = np.empty((k, 2), dtype=np.int8)
        self.step_next = np.empty((k, 2), dtype=np.int64)
        for q, i in self.index.items():
            for b in (0, 1):
                sg, nxt = self.step[q, b]
                self.step_sign[i, b] = sg
                self.step_next[i, b] = self.index[nxt]

    def value(self, n: int, state=None) -> int:
        q = self.initial if state is None else state
        if n < 0:
            raise ValueError("n must be nonnegative")
        sign = 1
        while n:
            sg, q = self.step[q, n & 1]
            sign *= sg
            n >>= 1
        return sign * self.base[q]

    def __call__(self, n: int) -> int:
        return self.value(n)

    def __repr__(self):
        return f"SignedAutomatonSequence({self.name!r}, {len(self.states)} states)"


_NAMES = {"1": ("tm", {(1,): "t"}), "11": ("rs", {(1, 1): "R0", (1, -1): "R1"})}


def kernel_plus(seq: SequenceLike, cap: int = 4096) -> list:
    """Sign-normalised kernel N_2^+ in BFS discovery order from the base element.

    For pattern sequences the closure is computed from the suffix tables; for a
    hand-built automaton the states themselves are returned.
    """
    if isinstance(seq, SignedAutomatonSequence):
        return list(seq.states)
    pattern = _pattern_of(seq)
    names = _NAMES.get(pattern, (None, {}))[1]
    start = KernelElement(pattern, (1,) * (1 << (len(pattern) - 1)))
    seen = {start: None}
    queue = deque([start])
    while queue:
        q = queue.popleft()
        for b in (0, 1):
            _, nxt = lsb_step(q, b)
            if nxt not in seen:
                if len(seen) >= cap:
                    raise KernelTooLarge(f"kernel of pattern {pattern} exceeds {cap} elements")
                seen[nxt] = None
                queue.append(nxt)
    return [KernelElement(q.pattern, q.table, names.get(q.table, "")) for q in seen]


def pattern_sequence(bits: str, cap: int = 4096) -> SignedAutomatonSequence:
    bits = validate_pattern(bits)
    states = tuple(kernel_plus("pattern:" + bits, cap=cap))
    lookup = {q: q for q in states}  # recover named instances
    step = {}
    for q in states:
        for b in (0, 1):
            sg, nxt = lsb_step(q, b)
            step[q, b] = (sg, lookup[nxt])
    name = _NAMES.get(bits, ("pattern:" + bits,))[0]
    return SignedAutomatonSequence(
        name=name, states=states, step=step, base={q: 1 for q in states},
        initial=states[0], pattern=bits,
    )


def thue_morse() -> SignedAutomatonSequence:
    return pattern_sequence("1")


def rudin_shapiro() -> SignedAutomatonSequence:
    return pattern_sequence("11")


def _pattern_of(seq_id: str) -> str:
    if seq_id == "tm":
        return "1"
    if seq_id == "rs":
        return "11"
    if seq_id.startswith("pattern:"):
        return validate_pattern(seq_id[len("pattern:"):])
    raise ValueError(f"unknown sequence id {seq_id!r} (expected tm, rs or pattern:<bits>)")


_cache: dict[str, SignedAutomatonSequence] = {}


def get_sequence(seq: SequenceLike) -> SignedAutomatonSequence:
    """Resolve ``"tm"``, ``"rs"`` or ``"pattern:<bits>"`` to a sequence object."""
    if isinstance(seq, SignedAutomatonSequence):
        return seq
    pattern = _pattern_of(seq)
    if pattern not in _cache:
        _cache[pattern] = pattern_sequence(pattern)
    return _cache[pattern]


def evaluate(seq: SequenceLike, n: int) -> int:
    """Sequence value at n by repeated LSB peeling."""
    return get_sequence(seq).value(n)


def direct_value(seq: SequenceLike, n: int) -> int:
    """Combinatorial evaluation: popcount parity for tm, window counting otherwise."""
    s = get_sequence(seq)
    if s.pattern is None:
        raise ValueError("direct evaluation needs a pattern sequence")
    if s.pattern == "1":
        return -1 if bin(n).count("1") % 2 else 1
    return _direct(s.pattern, n)


def block_values(seq: SequenceLike, N: int, state=None) -> np.ndarray:
    """Values a_q(n) for 0 <= n < N as an int8 array, in O(N).

    Built by doubling: the block on [0, 2^(k+1)) comes from the block on
    [0, 2^k) through one application of the step rule.
    """
    s = get_sequence(seq)
    q0 = s.index[s.initial if state is None else state]
    if N <= 0:
        return np.zeros(0, dtype=np.int8)
    k = len(s.states)
    # vals[j, n] = a_{state j}(n)
    vals = np.array([[s.base[q]] for q in s.states], dtype=np.int8)
    while vals.shape[1] < N:
        m = vals.shape[1]
        new = np.empty((k, 2 * m), dtype=np.int8)
        for b in (0, 1):
            new[:, b::2] = s.step_sign[:, b, None] * vals[s.step_next[:, b]]
        if m == 1:
            # position 0 appears twice (2*0 + 0 = 0); keep the base value
            new[:, 0] = vals[:, 0]
        vals = new
    return vals[q0, :N].copy()


def check_kernel_symmetry(seq: SequenceLike, verify_below: int = 1 << 12) -> bool:
    """True iff the 2-kernel is closed under negation, re-verified by evaluation.

    Runs a BFS over signed kernel elements from +a, remembering for each signed
    element a witness (l, m) with  sign * q(n) = a(2^l n + m). The kernel is
    symmetric iff every element of N_2^+ is reached with both signs. Every
    witness is then checked numerically for n < ``verify_below``.
    """
    s = get_sequence(seq)
    start = (1, s.initial)
    witness = {start: (0, 0)}
    queue = deque([start])
    while queue:
        sign, q = queue.popleft()
        l, m = witness[sign, q]
        for b in (0, 1):
            sg, nxt = s.step[q, b]
            key = (sign * sg, nxt)
            if key not in witness:
                witness[key] = (l + 1, m + (b << l))
                queue.append(key)
    states = {q for _, q in witness}
    if any((1, q) not in witness or (-1, q) not in witness for q in states):
        return False
    n = np.arange(verify_below)
    for (sign, q), (l, m) in witness.items():
        lhs = block_values(s, (verify_below << l) + m + 1)[(n << l) + m]
        rhs = sign * block_values(s, verify_below, state=q)
        if not np.array_equal(lhs, rhs):
            return False
    return True
