"""Signed random walks driving the recursion for the cube averages.

A vertex (a, r, sigma) stands for the average sigma * A(L, a, r). Writing every
cube in [0, 2^L) as 2 * (cube in [0, 2^(L-1))) + (1, w).e with e in
{0,1}^(s+1) turns A(L, v) into the average over e of A(L-1, delta(v; e)),
up to boundary effects of relative size O(2^-L). The walk picks e uniformly.

Labels are stored as state indices of the sequence automaton; for Thue-Morse
there is one state, so a vertex is effectively (r, sigma).
"""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .seqcore import SequenceLike, check_kernel_symmetry, get_sequence

__all__ = [
    "DEFAULT_VERTEX_CAP",
    "CapExceeded",
    "WitnessInvalid",
    "WalkVertex",
    "WalkGraph",
    "DyadicMatrix",
    "GraphReport",
    "PathWitness",
    "initial_vertex",
    "reflect",
    "delta_offsets",
    "delta_l",
    "build_graph",
    "analyze_graph",
    "graph_period",
    "witness_path",
    "transition_matrix",
    "to_dot",
    "to_json",
    "vertex_residuals",
]

DEFAULT_VERTEX_CAP = 10 ** 6


class CapExceeded(RuntimeError):
    pass


class WitnessInvalid(AssertionError):
    pass


@dataclass(frozen=True)
class WalkVertex:
    labels: tuple[int, ...]
    offsets: tuple[int, ...]
    sign: int

    def describe(self, seq=None) -> str:
        r = ",".join(map(str, self.offsets))
        sg = "+" if self.sign > 0 else "-"
        if seq is None or len(seq.states) == 1:
            return f"({r}|{sg})"
        a = ",".join(str(seq.states[i]) for i in self.labels)
        return f"({a}|{r}|{sg})"


def initial_vertex(seq: SequenceLike, s: int) -> WalkVertex:
    sq = get_sequence(seq)
    return WalkVertex((sq.index[sq.initial],) * (1 << s), (0,) * (1 << s), 1)


def reflect(v: WalkVertex) -> WalkVertex:
    return WalkVertex(v.labels, v.offsets, -v.sign)


def _omegas(s: int) -> np.ndarray:
    # row w holds (1, w_1, ..., w_s)
    return np.array([[1] + [(w >> i) & 1 for i in range(s)] for w in range(1 << s)], dtype=np.int64)


def delta_offsets(r, e) -> tuple[int, ...]:
    """floor((r_w + e_0 + sum_i w_i e_i) / 2) for every w."""
    s = len(e) - 1
    if len(r) != 1 << s:
        raise ValueError("offset vector must have 2^s entries for e of length s+1")
    shifts = _omegas(s) @ np.asarray(e, dtype=np.int64)
    return tuple(int(x) >> 1 for x in np.asarray(r, dtype=np.int64) + shifts)


def delta_l(seq: SequenceLike, v: WalkVertex, e, l: int = 1) -> WalkVertex:
    """The vertex reached from v by the l-step jump with e in [0, 2^l)^(s+1).

    Offsets become floor((r_w + (1,w).e) / 2^l). Label a_w becomes
    n -> a_w(2^l n + m_w) with m_w = (r_w + (1,w).e) mod 2^l, reduced through
    l LSB steps (least significant bit of m_w first); the signs met on the
    way are multiplied into the vertex sign.
    """
    sq = get_sequence(seq)
    s = len(e) - 1
    if any(not 0 <= x < 1 << l for x in e):
        raise ValueError("e entries must lie in [0, 2^l)")
    shifts = _omegas(s) @ np.asarray(e, dtype=np.int64)
    sign = v.sign
    labels, offsets = [], []
    for a, r, sh in zip(v.labels, v.offsets, shifts):
        x = r + int(sh)
        m = x & ((1 << l) - 1)
        for _ in range(l):
            b = m & 1
            sign *= int(sq.step_sign[a, b])
            a = int(sq.step_next[a, b])
            m >>= 1
        labels.append(a)
        offsets.append(x >> l)
    return WalkVertex(tuple(labels), tuple(offsets), sign)


def _row_keys(rows: np.ndarray) -> np.ndarray:
    rows = np.ascontiguousarray(rows)
    return rows.view(np.dtype((np.void, rows.dtype.itemsize * rows.shape[1]))).ravel()


def _row_to_vertex(row, k: int) -> WalkVertex:
    row = row.tolist()
    return WalkVertex(tuple(row[:k]), tuple(row[k:2 * k]), row[2 * k])


def _vertex_to_row(v: WalkVertex) -> np.ndarray:
    return np.array(list(v.labels) + list(v.offsets) + [v.sign], dtype=np.int8)


@dataclass
class WalkGraph:
    """Vertices reachable from v0 in BFS discovery order, with edge multiplicities.

    Vertex i is stored as row i of ``rows``: labels, then offsets, then sign.
    ``counts`` is a CSR matrix whose (i, j) entry is the number of
    e in {0,1}^(s+1) taking vertex i to vertex j.
    """

    seq: object
    s: int
    rows: np.ndarray
    counts: sparse.csr_matrix

    def __post_init__(self):
        keys = _row_keys(self.rows)
        self._order = np.argsort(keys, kind="stable")
        self._sorted = keys[self._order]
        self._vertices = None

    @property
    def v0(self) -> int:
        return 0

    def __len__(self):
        return len(self.rows)

    @property
    def vertices(self) -> list[WalkVertex]:
        if self._vertices is None:
            k = 1 << self.s
            self._vertices = [_row_to_vertex(r, k) for r in self.rows]
        return self._vertices

    def lookup(self, rows: np.ndarray) -> np.ndarray:
        """Indices of the given vertex rows, -1 where absent."""
        keys = _row_keys(rows.astype(np.int8))
        pos = np.searchsorted(self._sorted, keys)
        pos = np.minimum(pos, len(self._sorted) - 1)
        hit = self._sorted[pos] == keys
        return np.where(hit, self._order[pos], -1)

    def find(self, v: WalkVertex) -> int | None:
        i = int(self.lookup(_vertex_to_row(v)[None, :])[0])
        return None if i < 0 else i

    def reflection(self) -> np.ndarray | None:
        """perm[i] = index of R(vertex i), or None if R leaves the vertex set."""
        flipped = self.rows.copy()
        flipped[:, -1] *= -1
        perm = self.lookup(flipped)
        return None if (perm < 0).any() else perm


def _successors(sq, rows, W, k):
    lab = rows[:, :k].astype(np.int64)
    off = rows[:, k:2 * k].astype(np.int64)
    X = off[:, None, :] + W[None, :, :]
    bits = X & 1
    labs = lab[:, None, :]
    new_lab = sq.step_next[labs, bits]
    signs = rows[:, 2 * k, None].astype(np.int64) * np.prod(sq.step_sign[labs, bits], axis=2, dtype=np.int64)
    out = np.concatenate([new_lab, X >> 1, signs[:, :, None]], axis=2)
    return out.reshape(-1, 2 * k + 1).astype(np.int8)


def build_graph(seq: SequenceLike, s: int, cap: int = DEFAULT_VERTEX_CAP,
                require_symmetric: bool = True, chunk: int = 2048) -> WalkGraph:
    """BFS closure of v0 under the one-step map over all e in {0,1}^(s+1).

    Level-synchronous and vectorised; new vertices are numbered by first
    appearance in (frontier order, e order), which is exactly the discovery
    order of a plain queue-based BFS.
    """
    sq = get_sequence(seq)
    if s < 2:
        raise ValueError("the walk is defined for s >= 2")
    if require_symmetric and not check_kernel_symmetry(sq):
        raise ValueError(f"kernel of {sq.name} is not symmetric; walk not defined")
    k = 1 << s
    if len(sq.states) > 127 or s > 6:
        raise ValueError("vertex encoding supports at most 127 kernel states and s <= 6")
    # W[e, w] = (1, w).e over all e in {0,1}^(s+1)
    es = np.array(list(product((0, 1), repeat=s + 1)), dtype=np.int64)
    W = es @ _omegas(s).T
    E = len(es)
    all_rows = [_vertex_to_row(initial_vertex(sq, s))[None, :]]
    sorted_keys = _row_keys(all_rows[0])
    sorted_idx = np.array([0])
    n = 1
    frontier = np.arange(1)
    frontier_rows = all_rows[0]
    src, dst = [], []
    while len(frontier):
        # dedupe within each chunk first to keep memory proportional to the
        # number of distinct successors
        parts, inverses, firsts = [], [], []
        for c in range(0, len(frontier_rows), chunk):
            succ = _successors(sq, frontier_rows[c:c + chunk], W, k)
            _, f, inv = np.unique(_row_keys(succ), return_index=True, return_inverse=True)
            parts.append(succ[f])
            firsts.append(f + c * E)
            inverses.append(inv.ravel())
        cand = np.concatenate(parts)
        cand_first = np.concatenate(firsts)
        uniq, g_first, g_inv = np.unique(_row_keys(cand), return_index=True, return_inverse=True)
        g_inv = g_inv.ravel()
        # first appearance of each distinct successor in flattened (frontier, e) order
        first = np.full(len(uniq), np.iinfo(np.int64).max)
        np.minimum.at(first, g_inv, cand_first)
        offsets_c = np.cumsum([0] + [len(p_) for p_ in parts[:-1]])
        inv = np.concatenate([g_inv[o + iv] for o, iv in zip(offsets_c, inverses)])
        succ_rows = cand[g_first]
        pos = np.minimum(np.searchsorted(sorted_keys, uniq), len(sorted_keys) - 1)
        found = sorted_keys[pos] == uniq
        ids = np.where(found, sorted_idx[pos], -1)
        new = np.flatnonzero(~found)
        new = new[np.argsort(first[new], kind="stable")]
        if n + len(new) > cap:
            raise CapExceeded(f"walk graph exceeds {cap} vertices")
        ids[new] = np.arange(n, n + len(new))
        src.append(np.repeat(frontier, E))
        dst.append(ids[inv])
        new_rows = succ_rows[new]
        all_rows.append(new_rows)
        frontier = np.arange(n, n + len(new))
        frontier_rows = new_rows
        n += len(new)
        merged = np.concatenate([sorted_keys, uniq[new]])
        merged_idx = np.concatenate([sorted_idx, ids[new]])
        order = np.argsort(merged, kind="stable")
        sorted_keys, sorted_idx = merged[order], merged_idx[order]
    rows = np.concatenate(all_rows)
    src, dst = np.concatenate(src), np.concatenate(dst)
    counts = sparse.csr_matrix((np.ones(len(src), dtype=np.int64), (src, dst)), shape=(n, n))
    counts.sum_duplicates()
    return WalkGraph(sq, s, rows, counts)


def graph_period(adj: sparse.csr_matrix, start: int = 0) -> int:
    """Period of the strongly connected component containing ``start``.

    BFS levels inside the component; the period is the gcd of
    level(u) + 1 - level(v) over the component's edges u -> v.
    """
    _, comp = connected_components(adj, directed=True, connection="strong")
    members = comp == comp[start]
    level = np.full(adj.shape[0], -1, dtype=np.int64)
    level[start] = 0
    queue = deque([start])
    g = 0
    while queue:
        u = queue.popleft()
        for v in adj.indices[adj.indptr[u]:adj.indptr[u + 1]]:
            if not members[v]:
                continue
            if level[v] < 0:
                level[v] = level[u] + 1
                queue.append(v)
            else:
                g = math.gcd(g, int(level[u] + 1 - level[v]))
    return g


def _primitive(adj: sparse.csr_matrix) -> bool:
    # A^m > 0 entrywise for m >= (n-1)^2 + 1 iff A is primitive (Wielandt)
    n = adj.shape[0]
    A = (adj.toarray() > 0).astype(np.float64)
    m = 1
    while m < (n - 1) ** 2 + 1:
        A = ((A @ A) > 0).astype(np.float64)
        m *= 2
    return bool(A.all())


@dataclass
class GraphReport:
    num_vertices: int
    finite: bool
    strongly_connected: bool
    aperiodic: bool
    r_symmetric: bool
    period: int
    scc_sizes: list[int]
    reflection_reachable: bool
    primitive_check: bool | None = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def analyze_graph(g: WalkGraph, primitive_limit: int = 400) -> GraphReport:
    """Finiteness, strong connectivity, aperiodicity and R-symmetry of the walk.

    Aperiodicity comes from the BFS-level gcd; for graphs with at most
    ``primitive_limit`` vertices it is cross-checked by testing whether a high
    power of the adjacency matrix is entrywise positive.
    """
    adj = g.counts
    ncomp, comp = connected_components(adj, directed=True, connection="strong")
    sizes = sorted(np.bincount(comp).tolist(), reverse=True)
    period = graph_period(adj, g.v0)
    perm = g.reflection()
    symmetric = False
    if perm is not None:
        permuted = adj[perm][:, perm]
        symmetric = (permuted != adj).nnz == 0
    r0 = g.find(reflect(initial_vertex(g.seq, g.s)))
    prim = None
    if ncomp == 1 and len(g) <= primitive_limit:
        prim = _primitive(adj)
    return GraphReport(
        num_vertices=len(g),
        finite=True,
        strongly_connected=ncomp == 1,
        aperiodic=period == 1,
        r_symmetric=bool(symmetric),
        period=period,
        scc_sizes=sizes,
        reflection_reachable=r0 is not None,
        primitive_check=prim,
    )


@dataclass
class PathWitness:
    """Explicit route from v0 to R(v0): a list of (vertex, e, l) jumps."""

    steps: list[tuple[WalkVertex, tuple[int, ...], int]]
    terminal: WalkVertex
    one_step_chain: list[WalkVertex]


def _check(cond, msg):
    if not cond:
        raise WitnessInvalid(msg)


def _binary_digits(e, l):
    return [tuple((x >> j) & 1 for x in e) for j in range(l)]


def witness_path(seq: SequenceLike, s: int, graph: WalkGraph | None = None) -> PathWitness:
    """Replay the explicit path from v0 to R(v0) and machine-check every step.

    Thue-Morse: offsets r^(0) = 0, r^(j)_w = [w_1 = ... = w_j = 1] for
    1 <= j <= s, r^(s+1) = 0, joined by s + 1 one-step edges; the last one
    flips the sign since |r^(s)| = 1.

    Other pattern sequences (length p): a single jump of length l >= s + p with
    e_i = 2^(i-1) and e_0 chosen so that prod_{m < 2^s} a(m + e_0) = -1. Then
    a(2^l n + m) = a(n) a(m) for every residue m used, so all labels return to
    the base sequence, all offsets to 0, and the sign becomes -1.

    When ``graph`` is given, each one-step edge used must also be an edge of it.
    """
    sq = get_sequence(seq)
    if s < 2:
        raise ValueError("need s >= 2")
    v0 = initial_vertex(sq, s)
    target = reflect(v0)
    steps = []
    chain = [v0]
    if sq.pattern == "1":
        v = v0
        for j in range(s + 1):
            if j == 0:
                e = (1, 1) + (0,) * (s - 1)
            elif j < s:
                e = tuple(1 if i == j + 1 else 0 for i in range(s + 1))
            else:
                e = (0,) * (s + 1)
            if j < s:
                want = tuple(int(all((w >> i) & 1 for i in range(j + 1))) for w in range(1 << s))
                want_sign = 1
            else:
                want, want_sign = (0,) * (1 << s), -1
            nxt = delta_l(sq, v, e, 1)
            _check(nxt.offsets == want and nxt.sign == want_sign,
                   f"step {j}: got {nxt.describe()} expected offsets {want}, sign {want_sign}")
            steps.append((v, e, 1))
            v = nxt
            chain.append(v)
        terminal = v
    else:
        if sq.pattern is None:
            raise ValueError("witness construction needs a pattern sequence")
        p = len(sq.pattern)
        head = tuple(1 << (i - 1) for i in range(1, s + 1))
        # try e0 in [2^(s-1), 2^s) first, then any e0 below 2^(s+p+2); the jump
        # length grows so that every residue m = (1,w).e stays below 2^(l-p+1)
        order = list(range(1 << (s - 1), 1 << s)) + list(range(1 << (s - 1)))
        order += list(range(1 << s, 1 << (s + p + 2)))
        chosen = None
        for e0 in order:
            sigma = math.prod(sq.value(m + e0) for m in range(1 << s))
            if sigma == -1:
                chosen = (e0,) + head
                break
        _check(chosen is not None, "no e0 with sigma(e0) = -1")
        l = max(s + p, p - 1 + (chosen[0] + (1 << s) - 1).bit_length())
        terminal = delta_l(sq, v0, chosen, l)
        steps.append((v0, chosen, l))
        v = v0
        for digit in _binary_digits(chosen, l):
            v = delta_l(sq, v, digit, 1)
            chain.append(v)
        _check(v == terminal, "l-step jump disagrees with its one-step decomposition")
    _check(terminal == target, f"terminal vertex {terminal.describe()} is not R(v0)")
    if graph is not None:
        for a, b in zip(chain, chain[1:]):
            i, j = graph.find(a), graph.find(b)
            _check(i is not None and j is not None and graph.counts[i, j] > 0,
                   f"edge {a.describe()} -> {b.describe()} missing from graph")
    return PathWitness(steps, terminal, chain)


@dataclass
class DyadicMatrix:
    """Exact matrix num / 2^log2_den.

    ``num`` is a scipy CSR integer matrix for one-step matrices and a dense
    object array of Python ints for exact powers. ``reflection`` is the vertex
    permutation induced by R when known.
    """

    num: object
    log2_den: int
    reflection: np.ndarray | None = None

    @property
    def shape(self):
        return self.num.shape

    @property
    def denominator(self) -> int:
        return 1 << self.log2_den

    def dense_num(self) -> np.ndarray:
        if sparse.issparse(self.num):
            return np.array(self.num.toarray().tolist(), dtype=object)
        return self.num

    def to_float(self) -> np.ndarray:
        if sparse.issparse(self.num):
            return self.num.toarray().astype(np.float64) / self.denominator
        return np.array([[float(x) / self.denominator for x in row] for row in self.num])

    def entry(self, i: int, j: int):
        from fractions import Fraction
        return Fraction(int(self.num[i, j]), self.denominator)

    def row_sums_exact(self) -> list[int]:
        """Row sums of the numerators (each equals the denominator when stochastic)."""
        num = self.dense_num()
        return [sum(int(x) for x in row) for row in num]


def transition_matrix(g: WalkGraph) -> DyadicMatrix:
    """P(v, v') = #{e in {0,1}^(s+1) : delta(v; e) = v'} / 2^(s+1)."""
    return DyadicMatrix(g.counts.copy(), g.s + 1, g.reflection())


def to_dot(g: WalkGraph) -> str:
    den = 1 << (g.s + 1)
    lines = [f'digraph "{g.seq.name}_s{g.s}" {{']
    for i, v in enumerate(g.vertices):
        lines.append(f'  {i} [label="{v.describe(g.seq)}"];')
    coo = g.counts.tocoo()
    for i, j, c in sorted(zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist())):
        frac = math.gcd(c, den)
        lines.append(f'  {i} -> {j} [label="{c // frac}/{den // frac}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_json(g: WalkGraph) -> str:
    den = 1 << (g.s + 1)
    coo = g.counts.tocoo()
    edges = [{"from": i, "to": j, "num": c, "den": den}
             for i, j, c in sorted(zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()))]
    verts = [{"labels": [str(g.seq.states[a]) for a in v.labels], "offsets": list(v.offsets),
              "sign": v.sign} for v in g.vertices]
    return json.dumps({"seq": g.seq.name, "s": g.s, "vertices": verts, "edges": edges})


def vertex_residuals(g: WalkGraph, L: int, averages: dict | None = None):
    """2^L |A(L, v) - sum_v' P(v, v') A(L-1, v')| for every vertex v.

    ``averages`` caches exact A(level, v) values by (level, vertex index) and
    is filled in as a side effect, so sweeping L upwards reuses level L - 1.
    """
    from fractions import Fraction

    from .gowers import vertex_average

    if averages is None:
        averages = {}
    for level in (L - 1, L):
        for i, v in enumerate(g.vertices):
            if (level, i) not in averages:
                averages[level, i] = vertex_average(g.seq, v, level)
    den = 1 << (g.s + 1)
    A = g.counts
    out = np.empty(len(g))
    for i in range(len(g)):
        lo, hi = A.indptr[i], A.indptr[i + 1]
        rhs = sum(c * averages[L - 1, j] for j, c in zip(A.indices[lo:hi].tolist(), A.data[lo:hi].tolist()))
        out[i] = float(abs(averages[L, i] - Fraction(rhs, den)) * (1 << L))
    return out
