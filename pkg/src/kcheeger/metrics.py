"""Cheeger ratios, average-case k-fold partition quality, and spectral bound expressions.

Two readings of the eigenvalue aggregate are kept side by side:

* ``lambda_lower = (1/k) * sum_{i=0}^{k-1} (1 - lambda_i)`` drives the lower
  bound ``1/2 - lambda_lower/2 = (1/2k) * sum_{i<k} lambda_i``.  Including the
  trivial eigenvalue is what the Courant-Fischer argument actually needs.
* ``lambda_upper = (1/k) * sum_{i=1}^{k-1} (1 - lambda_i)`` enters the upper
  bound expressions.

Plugging ``lambda_upper`` into the lower bound overshoots the true constant
(``K_4``, ``k=2``: 7/12 against 1/3); :attr:`CheegerBoundsReport.lower_bound_statement`
keeps that value around so the discrepancy stays visible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError, ParameterError
from .graph import Graph, Partition, VertexSet, edge_count_between, volume
from .spectral import Spectrum, build_laplacian

__all__ = [
    "PartitionQuality",
    "CheegerBoundsReport",
    "ClassicalCheck",
    "cheeger_ratio",
    "h_k_partition",
    "part_volumes_and_edges",
    "partition_energy",
    "bounds_report",
    "classical_cheeger_check",
    "complete_graph_h_k",
    "EIGEN_SLACK",
]

EIGEN_SLACK = 1e-9


def _ratio(edges: float, vol_a: float, vol_b: float) -> float:
    m = min(vol_a, vol_b)
    if m == 0:
        if edges:
            raise DomainError("positive edge count against a zero-volume side")
        return 0.0
    return edges / m


def cheeger_ratio(g: Graph, s: VertexSet) -> float:
    """``e(S, S^c) / min(Vol S, Vol S^c)``.

    A zero-volume side carries no edges, so the ratio is taken as 0 there;
    only an edgeless graph (both sides zero) is rejected.
    """
    if len(s) == 0 or len(s) == g.n:
        raise DomainError("Cheeger ratio needs a nonempty proper subset")
    comp = s.complement()
    vs, vc = volume(g, s), volume(g, comp)
    if vs == 0 and vc == 0:
        raise DomainError("both sides have zero volume")
    return _ratio(edge_count_between(g, s, comp), vs, vc)


@dataclass(frozen=True)
class PartitionQuality:
    h_avg: float
    h_worst: float
    per_pair_ratios: dict = field(default_factory=dict)
    part_ratios: tuple = ()

    def to_dict(self):
        return {
            "h_avg": self.h_avg,
            "h_worst": self.h_worst,
            "per_pair_ratios": {f"{i},{j}": r for (i, j), r in sorted(self.per_pair_ratios.items())},
            "part_ratios": list(self.part_ratios),
        }


def part_volumes_and_edges(g: Graph, p: Partition) -> tuple[np.ndarray, np.ndarray]:
    """Per-part volumes and the ``k x k`` ordered-incidence edge matrix."""
    if p.n != g.n:
        raise ParameterError(f"partition covers {p.n} vertices, graph has {g.n}")
    k = p.k
    lab = p.assignment
    vols = np.zeros(k, dtype=np.int64)
    for v, d in enumerate(g.degrees):
        vols[lab[v]] += d
    e = np.zeros((k, k), dtype=np.int64)
    for u, v in g.edges:
        e[lab[u], lab[v]] += 1
        e[lab[v], lab[u]] += 1
    return vols, e


def h_k_partition(g: Graph, p: Partition) -> PartitionQuality:
    """Average-case k-fold Cheeger value of a fixed partition.

    ``h_avg = (1/k) * sum over unordered pairs {i, j} of e(S_i, S_j) / min(Vol S_i, Vol S_j)``;
    ``h_worst`` is the largest single-part Cheeger ratio.
    """
    vols, e = part_volumes_and_edges(g, p)
    k = p.k
    total = g.volume
    pairs = {}
    for i in range(k):
        for j in range(i + 1, k):
            pairs[(i, j)] = _ratio(float(e[i, j]), float(vols[i]), float(vols[j]))
    part_ratios = tuple(
        _ratio(float(vols[i] - e[i, i]), float(vols[i]), float(total - vols[i])) for i in range(k)
    )
    return PartitionQuality(
        h_avg=math.fsum(pairs.values()) / k,
        h_worst=max(part_ratios),
        per_pair_ratios=pairs,
        part_ratios=part_ratios,
    )


def partition_energy(g: Graph, p: Partition, laplacian=None) -> float:
    """``sum_i g_i^T L g_i`` for the orthonormal vectors ``g_i = D^{1/2} 1_{S_i} / sqrt(Vol S_i)``."""
    lap = laplacian if laplacian is not None else build_laplacian(g)
    sqrt_d = np.sqrt(np.asarray(g.degrees, dtype=float))
    total = 0.0
    for s in p.parts():
        vol = volume(g, s)
        if vol == 0:
            raise DomainError("partition energy undefined for a zero-volume part")
        gi = sqrt_d * s.indicator / math.sqrt(vol)
        total += float(gi @ (lap.matrix @ gi))
    return total


@dataclass(frozen=True)
class CheegerBoundsReport:
    k: int
    eigenvalues: tuple
    lambda_lower: float
    lambda_upper: float
    alpha_max: float
    alpha_sum: float
    lower_bound: float
    lower_bound_statement: float
    upper_bound_main: float
    upper_bound_nonpos: float
    main_variant_applies: bool
    multi_component: bool
    asymptotic_only: bool = True

    def to_dict(self):
        return {
            "k": self.k,
            "eigenvalues": list(self.eigenvalues),
            "lambda_lower": self.lambda_lower,
            "lambda_upper": self.lambda_upper,
            "alpha_max": self.alpha_max,
            "alpha_sum": self.alpha_sum,
            "lower_bound": self.lower_bound,
            "lower_bound_statement": self.lower_bound_statement,
            "upper_bound_main": self.upper_bound_main,
            "upper_bound_nonpos": self.upper_bound_nonpos,
            "flags": {
                "main_variant_applies": self.main_variant_applies,
                "lambda_k_minus_1_above_1": not self.main_variant_applies,
                "multi_component": self.multi_component,
                "asymptotic_only": self.asymptotic_only,
            },
        }


def _upper(k, lam, vol, alpha):
    if alpha == 0 or vol == 0:
        return math.nan
    return 0.5 - 1.0 / (4 * k) - (k - 1) * lam / (4.0 * vol * alpha * alpha)


def bounds_report(spectrum: Spectrum, g: Graph, k: int) -> CheegerBoundsReport:
    """Evaluate both lambda readings, both alpha readings and the raw bound expressions.

    No ``(1 + o(1))`` factor is applied to the upper bounds.
    """
    if not 2 <= k <= g.n:
        raise ParameterError(f"k must satisfy 2 <= k <= n={g.n}, got {k}")
    if spectrum.size < k:
        raise ParameterError(f"spectrum holds {spectrum.size} eigenpairs, k={k} needed")
    lam = np.asarray(spectrum.eigenvalues[:k], dtype=float)
    lambda_lower = math.fsum(1.0 - lam) / k
    lambda_upper = math.fsum(1.0 - lam[1:]) / k
    norms = spectrum.harmonic_sup_norms()[1:k]
    alpha_max = float(np.max(norms))
    alpha_sum = math.fsum(norms)
    vol = float(g.volume)
    return CheegerBoundsReport(
        k=k,
        eigenvalues=tuple(float(x) for x in lam),
        lambda_lower=lambda_lower,
        lambda_upper=lambda_upper,
        alpha_max=alpha_max,
        alpha_sum=alpha_sum,
        lower_bound=math.fsum(lam) / (2 * k),
        lower_bound_statement=0.5 - lambda_upper / 2,
        upper_bound_main=_upper(k, lambda_upper, vol, alpha_max),
        upper_bound_nonpos=_upper(k, lambda_upper, vol, alpha_sum),
        main_variant_applies=bool(lam[k - 1] <= 1.0 + EIGEN_SLACK),
        multi_component=not g.is_connected(),
    )


@dataclass(frozen=True)
class ClassicalCheck:
    lower: float
    h: float
    upper: float
    passed: bool
    lower_tight: bool

    def to_dict(self):
        return dict(lower=self.lower, h=self.h, upper=self.upper, passed=self.passed, lower_tight=self.lower_tight)


def classical_cheeger_check(spectrum: Spectrum, h: float, slack: float = 1e-9) -> ClassicalCheck:
    """Check ``lambda_1 / 2 <= h <= sqrt(2 lambda_1)`` for an exact classical constant ``h``."""
    lam1 = max(float(spectrum.eigenvalues[1]), 0.0)
    lower, upper = lam1 / 2, math.sqrt(2 * lam1)
    h = float(h)
    passed = lower - slack <= h <= upper + slack
    return ClassicalCheck(lower, h, upper, passed, abs(h - lower) <= slack)


def complete_graph_h_k(n: int, k: int):
    """Closed-form minimum of h_avg on ``K_n`` (near-equal part sizes), as a Fraction."""
    if not 2 <= k <= n:
        raise ParameterError(f"need 2 <= k <= n, got n={n}, k={k}")
    q, r = divmod(n, k)
    hi = q + (r > 0)
    c = math.comb
    num = c(r, 2) * hi + c(k - r, 2) * q + (c(k, 2) - c(r, 2) - c(k - r, 2)) * hi
    return Fraction(num, k * (n - 1))
