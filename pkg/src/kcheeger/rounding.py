"""Randomised spectral rounding into k parts, with exact expectations and Monte Carlo checks.

Parts are labelled ``0..k-1``.  Part ``j < k-1`` is driven by the harmonic
eigenvector ``x_{j+1}``: vertex ``v`` joins it with probability

    (1 - 2*delta) / (2(k-1)) + x_{j+1}(v) / (2(k-1) * D_j)

where ``D_j = ||x_{j+1}||_inf`` for the ``main`` variant and
``D_j = sum_i ||x_i||_inf`` for the ``nonpos`` variant.  Part ``k-1`` takes the
remaining mass.  Entries the rule would make negative are clamped to 0 and
their deficit moves to part ``k-1``; ``clamped_count`` records how often.

Random numbers come from numpy's Philox4x64 counter-based generator keyed by
the seed.  Trial ``t`` consumes the doubles at stream positions
``[t * stride, t * stride + n)`` with ``stride = 4 * ceil(n / 4)``, so any
range of trials can be regenerated independently and chunked runs reproduce
one-shot runs exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError, SearchFailure
from .graph import Graph, Partition
from .metrics import EIGEN_SLACK, PartitionQuality, h_k_partition
from .spectral import Spectrum, harmonic_basis

__all__ = [
    "VARIANTS",
    "RoundingConfig",
    "ProbabilityTable",
    "ExpectationReport",
    "ConcentrationReport",
    "SearchResult",
    "default_delta",
    "default_variant",
    "probability_table",
    "clamp_free_delta_limit",
    "trial_uniforms",
    "sample_labels",
    "sample_partition",
    "sample_statistics",
    "expected_volumes",
    "expected_internal_edges",
    "closed_form_internal",
    "expected_quadratic_form",
    "expectation_report",
    "concentration_diagnostic",
    "best_partition_search",
]

VARIANTS = ("main", "nonpos")
_U64 = 1 << 64
_CELL_BUDGET = 4_000_000
SMALL_GRAPH_DELTA = 0.25


def default_delta(n: int) -> float:
    """``n ** (-1/3)``; graphs with ``n <= 8`` would give ``delta >= 1/2`` and get 1/4 instead."""
    if n < 1:
        raise ParameterError("default delta needs n >= 1")
    delta = n ** (-1.0 / 3.0)
    return delta if delta < 0.5 else SMALL_GRAPH_DELTA


def default_variant(spectrum: Spectrum, k: int) -> str:
    """``main`` when ``lambda_{k-1} <= 1`` (with slack), otherwise ``nonpos``."""
    return "main" if spectrum.eigenvalues[k - 1] <= 1.0 + EIGEN_SLACK else "nonpos"


@dataclass(frozen=True)
class RoundingConfig:
    k: int
    delta: float
    variant: str = "main"
    trials: int = 1
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.k, bool) or not isinstance(self.k, (int, np.integer)) or self.k < 2:
            raise ParameterError(f"k must be an integer >= 2, got {self.k!r}")
        if not (isinstance(self.delta, (int, float)) and 0.0 <= self.delta < 0.5):
            raise ParameterError(f"delta must lie in [0, 1/2), got {self.delta!r}")
        if self.variant not in VARIANTS:
            raise ParameterError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if isinstance(self.trials, bool) or not isinstance(self.trials, (int, np.integer)) or self.trials < 1:
            raise ParameterError(f"trials must be a positive integer, got {self.trials!r}")
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < _U64:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")

    def to_dict(self):
        return dict(k=self.k, delta=self.delta, variant=self.variant, trials=self.trials, seed=self.seed)


@dataclass(frozen=True)
class ProbabilityTable:
    probs: np.ndarray
    clamped_count: int
    delta: float
    variant: str
    divisors: np.ndarray
    eigenvalues: np.ndarray

    @property
    def n(self) -> int:
        return self.probs.shape[0]

    @property
    def k(self) -> int:
        return self.probs.shape[1]

    @property
    def base(self) -> float:
        return (1.0 - 2.0 * self.delta) / (2.0 * (self.k - 1))

    @classmethod
    def from_probs(cls, probs, delta=0.0, variant="main"):
        """Table with explicit rows (no eigenvector data); used for point masses and tests."""
        p = np.array(probs, dtype=float)
        if p.ndim != 2 or p.shape[1] < 2:
            raise ParameterError("probability table must be n x k with k >= 2")
        if np.any(p < 0) or np.any(p > 1) or np.any(np.abs(p.sum(axis=1) - 1) > 1e-12):
            raise ParameterError("rows must be probability vectors")
        p.flags.writeable = False
        k = p.shape[1]
        return cls(p, 0, delta, variant, np.full(k - 1, np.nan), np.full(k - 1, np.nan))


def probability_table(spectrum: Spectrum, g: Graph, cfg: RoundingConfig) -> ProbabilityTable:
    k = cfg.k
    if k > g.n:
        raise ParameterError(f"k={k} exceeds n={g.n}")
    x = harmonic_basis(spectrum, g, k)[:, 1:]
    norms = np.max(np.abs(x), axis=0) if g.n else np.zeros(k - 1)
    if np.any(norms == 0):
        j = int(np.flatnonzero(norms == 0)[0]) + 1
        raise DomainError(f"harmonic eigenvector x_{j} is identically zero")
    divisors = norms.copy() if cfg.variant == "main" else np.full(k - 1, math.fsum(norms))
    base = (1.0 - 2.0 * cfg.delta) / (2.0 * (k - 1))
    raw = base + x / (2.0 * (k - 1) * divisors)
    negative = raw < 0
    head = np.where(negative, 0.0, raw)
    probs = np.empty((g.n, k))
    probs[:, :-1] = head
    probs[:, -1] = 1.0 - head.sum(axis=1)
    probs.flags.writeable = False
    divisors.flags.writeable = False
    lam = np.array(spectrum.eigenvalues[1:k], dtype=float)
    lam.flags.writeable = False
    return ProbabilityTable(probs, int(negative.sum()), cfg.delta, cfg.variant, divisors, lam)


def clamp_free_delta_limit(spectrum: Spectrum, g: Graph, k: int, variant: str) -> float:
    """Largest delta for which the assignment rule yields no negative entry.

    Entry ``(v, j)`` is nonnegative iff ``1 - 2 delta + x(v) / D_j >= 0``.
    """
    x = harmonic_basis(spectrum, g, k)[:, 1:]
    norms = np.max(np.abs(x), axis=0)
    if np.any(norms == 0):
        raise DomainError("harmonic eigenvector is identically zero")
    divisors = norms if variant == "main" else np.full(k - 1, math.fsum(norms))
    return float(np.min(1.0 + np.min(x, axis=0) / divisors) / 2.0)


def _stride(n: int) -> int:
    return 4 * ((n + 3) // 4)


def trial_uniforms(seed: int, n: int, start: int, count: int) -> np.ndarray:
    """Uniforms for trials ``start .. start+count-1`` as a ``(count, n)`` array."""
    stride = _stride(n)
    bitgen = np.random.Philox(key=int(seed))
    if start:
        bitgen = bitgen.advance(start * stride // 4)
    draws = np.random.Generator(bitgen).random(count * stride)
    return draws.reshape(count, stride)[:, :n]


def sample_labels(table: ProbabilityTable, seed: int, start: int = 0, count: int = 1) -> np.ndarray:
    """Independent per-vertex part labels for a range of trials, shape ``(count, n)``."""
    u = trial_uniforms(seed, table.n, start, count)
    cum = np.cumsum(table.probs, axis=1)[:, :-1]
    return np.sum(u[:, :, None] >= cum[None, :, :], axis=2).astype(np.int64)


def sample_partition(table: ProbabilityTable, seed: int, trial: int = 0) -> Partition:
    labels = sample_labels(table, seed, trial, 1)[0]
    return Partition(table.k, labels.tolist(), allow_empty=True)


def _chunks(trials: int, g: Graph, k: int):
    size = max(1, _CELL_BUDGET // max(1, g.n * k, 2 * g.num_edges))
    for start in range(0, trials, size):
        yield start, min(size, trials - start)


def sample_statistics(labels: np.ndarray, g: Graph, k: int, cross: bool = True):
    """Per-trial part volumes ``(T, k)`` and ordered-incidence edge counts.

    With ``cross=True`` the second result is the full ``(T, k, k)`` matrix;
    otherwise only the diagonal ``e(S_j, S_j)`` as ``(T, k)``.
    """
    t = labels.shape[0]
    deg = np.asarray(g.degrees, dtype=np.int64)
    vols = np.zeros((t, k), dtype=np.int64)
    for j in range(k):
        vols[:, j] = (labels == j) @ deg
    edges = np.asarray(g.edges, dtype=np.int64).reshape(-1, 2)
    a = labels[:, edges[:, 0]]
    b = labels[:, edges[:, 1]]
    rows = np.arange(t)[:, None]
    if cross:
        flat = np.concatenate([(rows * k * k + a * k + b).ravel(), (rows * k * k + b * k + a).ravel()])
        return vols, np.bincount(flat, minlength=t * k * k).reshape(t, k, k)
    slot = np.where(a == b, a, k)
    internal = np.bincount((rows * (k + 1) + slot).ravel(), minlength=t * (k + 1)).reshape(t, k + 1)
    return vols, 2 * internal[:, :k]


def expected_volumes(table: ProbabilityTable, g: Graph) -> np.ndarray:
    """``E[Vol S_j] = sum_v P(v in S_j) d_v`` for every part."""
    return np.asarray(g.degrees, dtype=float) @ table.probs


def expected_quadratic_form(matrix, means) -> float:
    """``mu^T A mu``, the expectation of ``x^T A x`` for independent entries and hollow symmetric ``A``."""
    a = np.asarray(matrix, dtype=float)
    if not np.allclose(a, a.T, atol=0) or np.any(np.diag(a) != 0):
        raise ParameterError("expectation identity needs a symmetric matrix with zero diagonal")
    mu = np.asarray(means, dtype=float)
    return float(mu @ a @ mu)


def expected_internal_edges(table: ProbabilityTable, g: Graph) -> np.ndarray:
    """``E[e(S_j, S_j)] = m_j^T A m_j`` with ``m_j(v) = P(v in S_j)`` (ordered incidence)."""
    a = g.adjacency
    return np.einsum("vj,vw,wj->j", table.probs, a, table.probs)


def closed_form_internal(table: ProbabilityTable, g: Graph, literal: bool = False) -> np.ndarray:
    """Closed-form ``E[e(S_j, S_j)]`` for parts ``j < k-1`` of an unclamped table.

    The mean indicator is ``c 1 + x / (2(k-1) D_j)``, giving
    ``c^2 Vol(G) + (1 - lambda) / (4 (k-1)^2 D_j^2)``.  With ``literal=True``
    the ``(k-1)^2`` factor is dropped, matching the commonly quoted form; the
    two agree only for ``k = 2``.  Valid when ``x`` is orthogonal to ``D 1``
    (connected graphs) and nothing was clamped.
    """
    k = table.k
    scale = 4.0 * table.divisors ** 2 * (1.0 if literal else (k - 1) ** 2)
    return table.base ** 2 * g.volume + (1.0 - table.eigenvalues) / scale


@dataclass(frozen=True)
class ExpectationReport:
    mu: float
    expected_volumes: tuple
    exact_expected_internal: tuple
    closed_form_expected_internal: tuple | None
    closed_form_literal: tuple | None
    monte_carlo_vol: tuple
    monte_carlo_internal: tuple
    trials: int
    clamped_count: int

    def to_dict(self):
        return {
            "mu": self.mu,
            "expected_volumes": list(self.expected_volumes),
            "exact_expected_internal": list(self.exact_expected_internal),
            "closed_form_expected_internal": None if self.closed_form_expected_internal is None else list(self.closed_form_expected_internal),
            "closed_form_literal": None if self.closed_form_literal is None else list(self.closed_form_literal),
            "monte_carlo_vol": [dict(mean=m, stderr=s) for m, s in self.monte_carlo_vol],
            "monte_carlo_internal": [dict(mean=m, stderr=s) for m, s in self.monte_carlo_internal],
            "trials": self.trials,
            "clamped_count": self.clamped_count,
        }


def _moments(sums, sq_sums, t):
    mean = sums / t
    var = np.maximum(sq_sums / t - mean ** 2, 0.0) * (t / (t - 1) if t > 1 else 0.0)
    return mean, np.sqrt(var / t)


def expectation_report(table: ProbabilityTable, g: Graph, trials: int, seed: int) -> ExpectationReport:
    k = table.k
    s_vol = np.zeros(k)
    s_vol2 = np.zeros(k)
    s_int = np.zeros(k)
    s_int2 = np.zeros(k)
    for start, count in _chunks(trials, g, k):
        vols, internal = sample_statistics(sample_labels(table, seed, start, count), g, k, cross=False)
        internal = internal.astype(float)
        vols = vols.astype(float)
        s_vol += vols.sum(axis=0)
        s_vol2 += (vols ** 2).sum(axis=0)
        s_int += internal.sum(axis=0)
        s_int2 += (internal ** 2).sum(axis=0)
    mv, sv = _moments(s_vol, s_vol2, trials)
    mi, si = _moments(s_int, s_int2, trials)
    clean = table.clamped_count == 0 and not np.isnan(table.divisors).any()
    return ExpectationReport(
        mu=table.base * g.volume,
        expected_volumes=tuple(float(x) for x in expected_volumes(table, g)),
        exact_expected_internal=tuple(float(x) for x in expected_internal_edges(table, g)),
        closed_form_expected_internal=tuple(float(x) for x in closed_form_internal(table, g)) if clean else None,
        closed_form_literal=tuple(float(x) for x in closed_form_internal(table, g, literal=True)) if clean else None,
        monte_carlo_vol=tuple(zip(mv.tolist(), sv.tolist())),
        monte_carlo_internal=tuple(zip(mi.tolist(), si.tolist())),
        trials=trials,
        clamped_count=table.clamped_count,
    )


@dataclass(frozen=True)
class ConcentrationReport:
    epsilon: float
    trials: int
    parts: tuple
    passed: bool

    def to_dict(self):
        return dict(epsilon=self.epsilon, trials=self.trials, parts=list(self.parts), passed=self.passed)


def concentration_diagnostic(table: ProbabilityTable, g: Graph, epsilon: float, trials: int, seed: int) -> ConcentrationReport:
    """Empirical ``P(|Vol S_j - E| > eps E)`` against ``2 exp(-eps^2 E / (3 Delta))``.

    Covers parts ``j < k-1`` with positive expected volume.  A part passes when
    the empirical frequency is at most the ceiling plus three binomial
    standard errors (evaluated at the ceiling, capped at 1).
    """
    if epsilon <= 0:
        raise ParameterError("epsilon must be positive")
    if trials < 1:
        raise ParameterError("trials must be positive")
    k = table.k
    ev = expected_volumes(table, g)
    parts = [j for j in range(k - 1) if ev[j] > 0]
    hits = np.zeros(k)
    for start, count in _chunks(trials, g, k):
        vols, _ = sample_statistics(sample_labels(table, seed, start, count), g, k, cross=False)
        hits += np.sum(np.abs(vols - ev) > epsilon * ev, axis=0)
    delta_max = g.max_degree
    rows = []
    for j in parts:
        freq = hits[j] / trials
        ceiling = 2.0 * math.exp(-epsilon ** 2 * ev[j] / (3.0 * delta_max))
        c = min(ceiling, 1.0)
        se = math.sqrt(c * (1.0 - c) / trials)
        rows.append(dict(part=j, mu=float(ev[j]), frequency=float(freq), ceiling=ceiling, stderr=se,
                         passed=bool(freq <= ceiling + 3 * se)))
    return ConcentrationReport(epsilon, trials, tuple(rows), all(r["passed"] for r in rows))


@dataclass(frozen=True)
class SearchResult:
    partition: Partition
    quality: PartitionQuality
    trial_index: int
    discarded: int
    clamped_count: int

    def to_dict(self):
        return {
            "partition": [sorted(s.members) for s in self.partition.parts()],
            "quality": self.quality.to_dict(),
            "trial_index": self.trial_index,
            "discarded": self.discarded,
            "clamped_count": self.clamped_count,
        }


def _h_avg_batch(vols, e, k):
    total = np.zeros(vols.shape[0])
    bad = np.zeros(vols.shape[0], dtype=bool)
    for i in range(k):
        for j in range(i + 1, k):
            m = np.minimum(vols[:, i], vols[:, j])
            bad |= (m == 0) & (e[:, i, j] > 0)
            r = np.zeros(vols.shape[0])
            np.divide(e[:, i, j], m, out=r, where=m > 0)
            total += r
    return total / k, bad


def best_partition_search(spectrum: Spectrum, g: Graph, cfg: RoundingConfig) -> SearchResult:
    """Best of ``cfg.trials`` sampled partitions by h_avg.

    Samples with an empty part are discarded; ties go to the lowest trial index.
    """
    table = probability_table(spectrum, g, cfg)
    k = cfg.k
    best_val, best_idx, best_labels = math.inf, -1, None
    discarded = 0
    for start, count in _chunks(cfg.trials, g, k):
        labels = sample_labels(table, cfg.seed, start, count)
        vols, e = sample_statistics(labels, g, k)
        h, bad = _h_avg_batch(vols, e, k)
        sizes = np.stack([(labels == j).sum(axis=1) for j in range(k)], axis=1)
        bad |= np.any(sizes == 0, axis=1)
        discarded += int(bad.sum())
        h = np.where(bad, np.inf, h)
        i = int(np.argmin(h))
        if h[i] < best_val:
            best_val, best_idx, best_labels = float(h[i]), start + i, labels[i].copy()
    if best_labels is None:
        raise SearchFailure(
            f"all {cfg.trials} samples had an empty part; raise trials or change delta", discarded
        )
    part = Partition(k, best_labels.tolist())
    return SearchResult(part, h_k_partition(g, part), best_idx, discarded, table.clamped_count)
