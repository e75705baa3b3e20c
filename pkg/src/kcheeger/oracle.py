"""Exhaustive ground truth for the classical and k-fold Cheeger constants.

Candidates are scored in floating point in vectorised chunks; every candidate
within a small window of the float minimum is then re-scored with
:class:`fractions.Fraction`, and the exact minimum among those is returned.
The window is far wider than any float rounding error, so the result is the
exact rational optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import numpy as np

from .errors import CapacityError, ParameterError
from .graph import Graph, Partition, VertexSet

__all__ = [
    "OracleResult",
    "restricted_growth_strings",
    "stirling2",
    "exact_classical_cheeger",
    "exact_h_k",
    "exact_h_k_worst",
    "exact_h_k_many",
    "h_avg_exact",
    "h_worst_exact",
    "connected_labeled_graphs",
    "exhaustive_corpus",
    "corpus_size",
    "MAX_CLASSICAL_N",
    "MAX_PARTITION_N",
    "MAX_PARTITIONS",
    "MAX_CORPUS_N",
]

MAX_CLASSICAL_N = 24
MAX_PARTITION_N = 13
MAX_PARTITIONS = 3_000_000
MAX_CORPUS_N = 7
CHUNK = 1 << 16
_WINDOW = 1e-9


@dataclass(frozen=True)
class OracleResult:
    optimum: Fraction
    argmin: object
    enumerated_count: int

    def to_dict(self):
        if isinstance(self.argmin, Partition):
            witness = [sorted(s.members) for s in self.argmin.parts()]
        else:
            witness = sorted(self.argmin.members)
        return {
            "optimum": f"{self.optimum.numerator}/{self.optimum.denominator}",
            "optimum_float": float(self.optimum),
            "witness": witness,
            "enumerated_count": self.enumerated_count,
        }


@lru_cache(maxsize=None)
def stirling2(n: int, k: int) -> int:
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * stirling2(n - 1, k) + stirling2(n - 1, k - 1)


@lru_cache(maxsize=32)
def restricted_growth_strings(n: int, k: int) -> np.ndarray:
    """All length-``n`` restricted-growth strings using exactly labels ``0..k-1``.

    Row order is lexicographic.  Each row is one set partition into ``k``
    nonempty blocks, with no label-permutation duplicates.
    """
    if not 1 <= k <= n:
        raise ParameterError(f"need 1 <= k <= n, got n={n}, k={k}")
    rows = np.zeros((1, 1), dtype=np.int8)
    top = np.zeros(1, dtype=np.int8)
    for pos in range(1, n):
        remaining = n - pos - 1
        new_rows, new_top = [], []
        for label in range(min(pos, k - 1) + 1):
            ok = label <= top + 1
            t = np.maximum(top, label)
            ok &= (t + 1 + remaining) >= k
            if np.any(ok):
                ext = np.empty((int(ok.sum()), pos + 1), dtype=np.int8)
                ext[:, :pos] = rows[ok]
                ext[:, pos] = label
                new_rows.append(ext)
                new_top.append(t[ok])
        rows = np.concatenate(new_rows)
        top = np.concatenate(new_top)
        order = np.lexsort(rows.T[::-1])
        rows, top = rows[order], top[order]
    rows = rows[top == k - 1]
    rows.flags.writeable = False
    return rows


def _check_partition_capacity(g: Graph, k: int):
    if not 2 <= k <= g.n:
        raise ParameterError(f"k must satisfy 2 <= k <= n={g.n}, got {k}")
    if g.n > MAX_PARTITION_N or stirling2(g.n, k) > MAX_PARTITIONS:
        raise CapacityError(
            f"exhaustive k-partition search limited to n <= {MAX_PARTITION_N} and "
            f"{MAX_PARTITIONS} partitions (n={g.n}, k={k}: {stirling2(g.n, k)})"
        )


def _chunk_stats(labels: np.ndarray, adjacency: np.ndarray, degrees: np.ndarray, k: int):
    onehot = (labels[:, :, None] == np.arange(k)).astype(float)
    vols = onehot.transpose(0, 2, 1) @ degrees
    e = onehot.transpose(0, 2, 1) @ adjacency @ onehot
    return vols, e


def _safe_div(num, den):
    out = np.zeros_like(num, dtype=float)
    np.divide(num, den, out=out, where=den > 0)
    return out


def _avg_scores(vols, e, k):
    total = np.zeros(vols.shape[0])
    for i, j in combinations(range(k), 2):
        total += _safe_div(e[:, i, j], np.minimum(vols[:, i], vols[:, j]))
    return total / k


def _worst_scores(vols, e, k, vol_g):
    diag = np.diagonal(e, axis1=1, axis2=2)
    boundary = vols - diag
    den = np.minimum(vols, vol_g - vols)
    return np.max(_safe_div(boundary, den), axis=1)


def _frac(num, den):
    return Fraction(int(num), int(den)) if den else Fraction(0)


def h_avg_exact(g: Graph, labels, k: int) -> Fraction:
    vols = [0] * k
    e = [[0] * k for _ in range(k)]
    for v, d in enumerate(g.degrees):
        vols[labels[v]] += d
    for u, v in g.edges:
        a, b = labels[u], labels[v]
        e[a][b] += 1
        e[b][a] += 1
    total = sum((_frac(e[i][j], min(vols[i], vols[j])) for i, j in combinations(range(k), 2)), Fraction(0))
    return total / k


def h_worst_exact(g: Graph, labels, k: int) -> Fraction:
    vols = [0] * k
    internal = [0] * k
    for v, d in enumerate(g.degrees):
        vols[labels[v]] += d
    for u, v in g.edges:
        if labels[u] == labels[v]:
            internal[labels[u]] += 2
    vol_g = g.volume
    return max(_frac(vols[i] - internal[i], min(vols[i], vol_g - vols[i])) for i in range(k))


def _refine(scores: np.ndarray, keys: np.ndarray, exact):
    """Exact minimum over candidates near the float minimum; ties go to the lowest index.

    ``keys`` holds the integer statistics each score is a function of, so the
    exact value is computed once per distinct key.
    """
    best = float(np.min(scores))
    idx = np.flatnonzero(scores <= best + _WINDOW * max(1.0, abs(best)))
    cache = {}
    winner, vmin = None, None
    for i, row in zip(idx.tolist(), keys[idx].tolist()):
        key = tuple(row)
        val = cache.get(key)
        if val is None:
            val = cache[key] = exact(row)
        if vmin is None or val < vmin:
            winner, vmin = i, val
    return winner, vmin


def _avg_from_key(k):
    pairs = list(combinations(range(k), 2))

    def exact(row):
        vols, e = row[:k], row[k:]
        terms = [(e[i * k + j], min(vols[i], vols[j])) for i, j in pairs]
        terms = [(a, b) for a, b in terms if b]
        den = math.lcm(*(b for _, b in terms)) if terms else 1
        return Fraction(sum(a * (den // b) for a, b in terms), k * den)
    return exact


def _worst_from_key(k, vol_g):
    def exact(row):
        vols, e = row[:k], row[k:]
        best_num, best_den = 0, 1
        for i in range(k):
            den = min(vols[i], vol_g - vols[i])
            if den and (vols[i] - e[i * k + i]) * best_den > best_num * den:
                best_num, best_den = vols[i] - e[i * k + i], den
        return Fraction(best_num, best_den)
    return exact


def _keys(vols, e):
    n_rows = vols.shape[0]
    return np.rint(np.concatenate([vols, e.reshape(n_rows, -1)], axis=1)).astype(np.int64)


def _search_partitions(g: Graph, k: int, objective: str) -> OracleResult:
    _check_partition_capacity(g, k)
    rgs = restricted_growth_strings(g.n, k)
    adj = g.adjacency
    deg = np.asarray(g.degrees, dtype=float)
    scores = np.empty(len(rgs))
    keys = np.empty((len(rgs), k + k * k), dtype=np.int64)
    for start in range(0, len(rgs), CHUNK):
        chunk = rgs[start:start + CHUNK]
        vols, e = _chunk_stats(chunk, adj, deg, k)
        stop = start + len(chunk)
        keys[start:stop] = _keys(vols, e)
        if objective == "avg":
            scores[start:stop] = _avg_scores(vols, e, k)
        else:
            scores[start:stop] = _worst_scores(vols, e, k, float(g.volume))
    exact = _avg_from_key(k) if objective == "avg" else _worst_from_key(k, g.volume)
    i, value = _refine(scores, keys, exact)
    return OracleResult(value, Partition(k, rgs[i].tolist()), len(rgs))


def exact_h_k(g: Graph, k: int) -> OracleResult:
    """Exact minimum of h_avg over partitions into exactly ``k`` nonempty parts."""
    return _search_partitions(g, k, "avg")


def exact_h_k_worst(g: Graph, k: int) -> OracleResult:
    """Exact minimum over k-partitions of the largest part Cheeger ratio."""
    return _search_partitions(g, k, "worst")


def exact_h_k_many(graphs, k: int, worst: bool = False) -> list[OracleResult]:
    """:func:`exact_h_k` (or :func:`exact_h_k_worst`) for many graphs sharing one vertex count.

    Scores all graphs against the shared partition list in one batched pass.
    """
    graphs = list(graphs)
    if not graphs:
        return []
    n = graphs[0].n
    if any(h.n != n for h in graphs):
        raise ParameterError("all graphs must have the same vertex count")
    _check_partition_capacity(graphs[0], k)
    rgs = restricted_growth_strings(n, k)
    onehot = (rgs[:, :, None] == np.arange(k)).astype(float)
    step = max(1, 4_000_000 // (len(rgs) * k * k))
    out = []
    for start in range(0, len(graphs), step):
        batch = graphs[start:start + step]
        adj = np.stack([h.adjacency for h in batch])
        deg = adj.sum(axis=2)
        vols = np.einsum("pvk,gv->gpk", onehot, deg)
        e = np.einsum("pvk,gvw,pwl->gpkl", onehot, adj, onehot, optimize=True)
        for gi, h in enumerate(batch):
            if worst:
                scores = _worst_scores(vols[gi], e[gi], k, float(h.volume))
            else:
                scores = _avg_scores(vols[gi], e[gi], k)
            exact = _worst_from_key(k, h.volume) if worst else _avg_from_key(k)
            i, value = _refine(scores, _keys(vols[gi], e[gi]), exact)
            out.append(OracleResult(value, Partition(k, rgs[i].tolist()), len(rgs)))
    return out


def exact_classical_cheeger(g: Graph) -> OracleResult:
    """Exact ``min h(S)`` over nonempty proper subsets; only sets containing vertex 0 are scanned.

    A disconnected graph returns 0 with its first component as witness.
    """
    n = g.n
    if n < 2:
        raise ParameterError("classical Cheeger constant needs at least 2 vertices")
    if n > MAX_CLASSICAL_N:
        raise CapacityError(f"subset enumeration limited to n <= {MAX_CLASSICAL_N}, got {n}")
    comps = g.components()
    if len(comps) > 1:
        return OracleResult(Fraction(0), VertexSet(n, comps[0]), 0)
    deg = np.asarray(g.degrees, dtype=np.int64)
    edges = np.asarray(g.edges, dtype=np.int64).reshape(-1, 2)
    count = (1 << (n - 1)) - 1
    vol_g = g.volume
    scores = np.empty(count)
    keys = np.empty((count, 2), dtype=np.int64)
    # mask m (0..count-1) encodes S = {0} + {v : bit (v-1) of m set}; m = count is S = V
    for start in range(0, count, CHUNK):
        masks = np.arange(start, min(start + CHUNK, count), dtype=np.int64)
        bits = np.ones((len(masks), n), dtype=bool)
        for v in range(1, n):
            bits[:, v] = (masks >> (v - 1)) & 1
        vol = bits @ deg
        cut = np.sum(bits[:, edges[:, 0]] != bits[:, edges[:, 1]], axis=1)
        small = np.minimum(vol, vol_g - vol)
        stop = start + len(masks)
        keys[start:stop, 0] = cut
        keys[start:stop, 1] = small
        scores[start:stop] = _safe_div(cut.astype(float), small.astype(float))

    def members(i):
        return [0] + [v for v in range(1, n) if (i >> (v - 1)) & 1]

    i, value = _refine(scores, keys, lambda row: _frac(row[0], row[1]))
    return OracleResult(value, VertexSet(n, members(i)), count)


# --- corpus -------------------------------------------------------------------------

def _connected_mask(n: int, edge_list, mask: int) -> bool:
    adj = [0] * n
    for b, (u, v) in enumerate(edge_list):
        if mask >> b & 1:
            adj[u] |= 1 << v
            adj[v] |= 1 << u
    seen = frontier = 1
    while frontier:
        nxt = 0
        f = frontier
        while f:
            low = f & -f
            nxt |= adj[low.bit_length() - 1]
            f ^= low
        frontier = nxt & ~seen
        seen |= nxt
    return seen == (1 << n) - 1


def connected_labeled_graphs(n: int):
    """Every connected labelled graph on exactly ``n`` vertices, by edge bitmask order."""
    if n > MAX_CORPUS_N:
        raise CapacityError(f"labelled corpus limited to n <= {MAX_CORPUS_N}, got {n}")
    if n < 1:
        return
    pairs = list(combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        if _connected_mask(n, pairs, mask):
            yield Graph(n, [e for b, e in enumerate(pairs) if mask >> b & 1])


def exhaustive_corpus(n_max: int, n_min: int = 2):
    """Connected labelled graphs for ``n_min <= n <= n_max``, ordered by ``n`` then edge mask."""
    if n_max > MAX_CORPUS_N:
        raise CapacityError(f"labelled corpus limited to n <= {MAX_CORPUS_N}, got {n_max}")
    for n in range(n_min, n_max + 1):
        yield from connected_labeled_graphs(n)


def corpus_size(n: int) -> int:
    """Number of connected labelled graphs on ``n`` vertices (standard recurrence)."""
    total = [0, 1]
    for m in range(2, n + 1):
        all_m = 2 ** math.comb(m, 2)
        disconnected = sum(math.comb(m - 1, j - 1) * total[j] * 2 ** math.comb(m - j, 2) for j in range(1, m))
        total.append(all_m - disconnected)
    return total[n]
