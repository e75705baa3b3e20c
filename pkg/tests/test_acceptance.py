"""Acceptance criteria 1-10, each at its stated tolerance.

Every test records a one-line verdict that is echoed in the pytest terminal
summary under "acceptance criteria".
"""

import math
import time
from collections import defaultdict
from fractions import Fraction

import numpy as np
import pytest

from kcheeger.graph import Graph, Partition, VertexSet, block_labels, disjoint_union, edge_count_between, edge_count_quadform, generate
from kcheeger.metrics import bounds_report, classical_cheeger_check, complete_graph_h_k, partition_energy
from kcheeger.oracle import exact_classical_cheeger, exact_h_k, exact_h_k_many, exhaustive_corpus
from kcheeger.rounding import (
    RoundingConfig,
    clamp_free_delta_limit,
    closed_form_internal,
    concentration_diagnostic,
    default_delta,
    default_variant,
    expectation_report,
    expected_internal_edges,
    probability_table,
)
from kcheeger.spectral import (
    build_laplacian,
    complete_graph_spectrum,
    eigendecompose,
    num_zero_eigenvalues,
    spectrum_from_basis,
)
from kcheeger.verify import verify_graph

from conftest import random_connected

LOWER_TOL = 1e-9


@pytest.fixture(scope="module")
def corpus():
    """Connected labelled graphs with 2 <= n <= 6 and their spectra."""
    t0 = time.perf_counter()
    graphs = list(exhaustive_corpus(6))
    spectra = [eigendecompose(build_laplacian(g)) for g in graphs]
    return graphs, spectra, time.perf_counter() - t0


def test_criterion_1_lower_bound_on_corpus(corpus, criterion):
    graphs, spectra, setup = corpus
    t0 = time.perf_counter()
    by_n = defaultdict(list)
    for i, g in enumerate(graphs):
        by_n[g.n].append(i)
    pairs, violations, tight = 0, [], 0
    for n, idx in sorted(by_n.items()):
        for k in (2, 3, 4):
            if k > n:
                continue
            for i, res in zip(idx, exact_h_k_many([graphs[i] for i in idx], k)):
                bound = bounds_report(spectra[i], graphs[i], k).lower_bound
                pairs += 1
                tight += abs(bound - float(res.optimum)) <= LOWER_TOL
                if float(res.optimum) < bound - LOWER_TOL:
                    violations.append((graphs[i].edges, k, str(res.optimum), bound))
    elapsed = setup + time.perf_counter() - t0
    ok = not violations and elapsed < 300
    criterion(1, ok, f"{len(graphs)} graphs, {pairs} (graph, k) pairs, {len(violations)} violations, "
                     f"{tight} tight, {elapsed:.1f}s")
    assert not violations, violations[:5]
    assert elapsed < 300


def test_criterion_2_statement_reading_erratum(criterion):
    k4 = generate("complete", n=4)
    opt = exact_h_k(k4, 2).optimum
    rep = bounds_report(eigendecompose(build_laplacian(k4)), k4, 2)
    statement = verify_graph(k4, [2], reading="statement")
    check = next(c for c in statement["checks"] if c["check"] == "lower_bound")
    proof = verify_graph(k4, [2], reading="proof")
    ok = (
        opt == Fraction(1, 3)
        and abs(rep.lower_bound_statement - 7 / 12) <= 1e-12
        and check.get("tag") == "known-erratum"
        and any(e["kind"] == "lambda_statement_reading" for e in statement["errata"])
        and abs(rep.lower_bound - 1 / 3) <= 1e-12
        and proof["passed"]
    )
    criterion(2, ok, f"statement bound {rep.lower_bound_statement:.6f} vs h={opt}; proof bound {rep.lower_bound:.15f}")
    assert ok


def test_criterion_3_complete_graph_closed_form(criterion):
    mismatches = []
    for n in range(4, 13):
        for k in (2, 3, 4):
            if exact_h_k(generate("complete", n=n), k).optimum != complete_graph_h_k(n, k):
                mismatches.append((n, k))
    trend = {k: abs(float(complete_graph_h_k(200, k)) - (0.5 - 0.5 / k)) / (0.5 - 0.5 / k) for k in (2, 3, 4)}
    ok = not mismatches and max(trend.values()) <= 0.03
    criterion(3, ok, f"27 exact matches; n=200 relative gaps " + ", ".join(f"k={k}: {v:.4f}" for k, v in trend.items()))
    assert not mismatches
    assert max(trend.values()) <= 0.03


def test_criterion_4_complete_graph_upper_bound(criterion):
    t0 = time.perf_counter()
    rows, failures = [], []
    for n in (50, 100, 200, 400):
        g = generate("complete", n=n)
        lap = build_laplacian(g)
        for k in (2, 3, 4):
            lam, vecs = complete_graph_spectrum(n, k)
            spec = spectrum_from_basis(lap, vecs, eigenvalues=lam)
            ub = bounds_report(spec, g, k).upper_bound_nonpos
            exact = float(complete_graph_h_k(n, k))
            target = 0.5 - 1 / (4 * k)
            if ub <= exact:
                failures.append(("not above exact", n, k, ub, exact))
            if n == 400:
                gap = abs(ub - target) / target
                rows.append(gap)
                if gap > 0.02:
                    failures.append(("trend", n, k, ub, target))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 120
    criterion(4, ok, f"max relative gap at n=400: {max(rows):.2e}; above exact h at all 12 points; {elapsed:.2f}s")
    assert not failures, failures
    assert elapsed < 120


def _clamp_free_configs(count, seed):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(10, 41))
        g = random_connected(rng, n, float(rng.uniform(0.15, 0.6)))
        spec = eigendecompose(build_laplacian(g))
        k = 2 + len(out) % 3
        variant = default_variant(spec, k)
        delta = min(default_delta(n), clamp_free_delta_limit(spec, g, k, variant) / 2)
        table = probability_table(spec, g, RoundingConfig(k, delta, variant))
        if table.clamped_count == 0:
            out.append((g, table))
    return out


@pytest.fixture(scope="module")
def expectation_configs():
    return _clamp_free_configs(50, seed=2024)


def test_criterion_5_expectation_identities(expectation_configs, criterion):
    closed_err, literal_k2_err, worst_z = 0.0, 0.0, 0.0
    for idx, (g, table) in enumerate(expectation_configs):
        exact = expected_internal_edges(table, g)[: table.k - 1]
        closed_err = max(closed_err, float(np.max(np.abs(exact - closed_form_internal(table, g)))))
        if table.k == 2:
            literal_k2_err = max(literal_k2_err, float(np.max(np.abs(exact - closed_form_internal(table, g, literal=True)))))
        rep = expectation_report(table, g, trials=100_000, seed=idx)
        for (mean, se), expect in zip(rep.monte_carlo_vol, rep.expected_volumes):
            worst_z = max(worst_z, abs(mean - expect) / se)
        for (mean, se), expect in zip(rep.monte_carlo_internal, rep.exact_expected_internal):
            worst_z = max(worst_z, abs(mean - expect) / se)
    ok = closed_err <= 1e-9 and literal_k2_err <= 1e-9 and worst_z <= 4
    criterion(5, ok, f"closed form with (k-1)^2 factor: max error {closed_err:.1e}; literal form at k=2: "
                     f"{literal_k2_err:.1e}; worst Monte Carlo z {worst_z:.2f}")
    assert closed_err <= 1e-9
    assert literal_k2_err <= 1e-9
    assert worst_z <= 4


@pytest.mark.xfail(strict=True, reason="literal closed form lacks the (k-1)^2 divisor; correct only for k = 2")
def test_criterion_5_literal_closed_form_for_k_above_2(expectation_configs, criterion):
    worst = 0.0
    for g, table in expectation_configs:
        if table.k > 2:
            exact = expected_internal_edges(table, g)[: table.k - 1]
            worst = max(worst, float(np.max(np.abs(exact - closed_form_internal(table, g, literal=True)))))
    ok = worst <= 1e-9
    criterion("5 (literal form, k>2)", ok, f"max error {worst:.3e}; known erratum, see README")
    assert ok


def test_criterion_6_quadform_identity(criterion):
    rng = np.random.default_rng(6)
    worst, kinds = 0.0, defaultdict(int)
    for trial in range(1000):
        n = int(rng.integers(2, 13))
        g = generate("gnp", seed=int(rng.integers(2**32)), n=n, p=float(rng.uniform(0.1, 0.9)))
        lap = build_laplacian(g)
        s = VertexSet(n, np.flatnonzero(rng.random(n) < 0.5))
        mode = trial % 3
        if mode == 0:
            t = s
        elif mode == 1 and len(s):
            extra = np.flatnonzero(rng.random(n) < 0.5)
            t = VertexSet(n, set(extra) | {next(iter(s))})
        else:
            t = VertexSet(n, np.flatnonzero(rng.random(n) < 0.5))
        kinds["S=T" if s == t else "overlap" if s.members & t.members else "disjoint"] += 1
        worst = max(worst, abs(edge_count_quadform(g, lap, s, t) - edge_count_between(g, s, t)))
    ok = worst <= 1e-9 and kinds["S=T"] and kinds["overlap"]
    criterion(6, ok, f"1000 triples {dict(kinds)}, max error {worst:.1e}")
    assert ok


def test_criterion_7_courant_fischer_floor(criterion):
    rng = np.random.default_rng(7)
    worst = math.inf
    for k in (2, 3, 4):
        done = 0
        while done < 100:
            g = random_connected(rng, int(rng.integers(max(k, 3), 11)), 0.4)
            labels = rng.integers(0, k, g.n)
            if len(set(labels.tolist())) < k:
                continue
            part = Partition(k, labels.tolist())
            spec = eigendecompose(build_laplacian(g))
            slack = partition_energy(g, part) - math.fsum(spec.eigenvalues[:k])
            worst = min(worst, slack)
            done += 1
    k4 = generate("complete", n=4)
    energy = partition_energy(k4, Partition(2, [0, 0, 1, 1]))
    floor = math.fsum(eigendecompose(build_laplacian(k4)).eigenvalues[:2])
    equality = abs(energy - 4 / 3) <= 1e-12 and abs(floor - 4 / 3) <= 1e-12
    ok = worst >= -1e-8 and equality
    criterion(7, ok, f"300 partitions, min slack {worst:.3e}; K_4 equipartition energy {energy:.15f} floor {floor:.15f}")
    assert ok


def test_criterion_8_concentration(criterion):
    graphs = {
        "K_50": generate("complete", n=50),
        "planted": generate("planted_partition", seed=7, n=30, k=3, p_in=0.9, p_out=0.05),
    }
    failures, worst_margin = [], -math.inf
    for name, g in graphs.items():
        spec = eigendecompose(build_laplacian(g))
        for k in (2, 3):
            table = probability_table(spec, g, RoundingConfig(k, default_delta(g.n), default_variant(spec, k)))
            for eps in (0.25, 0.5, 1.0):
                rep = concentration_diagnostic(table, g, eps, trials=10_000, seed=100 * k + int(eps * 4))
                for row in rep.parts:
                    worst_margin = max(worst_margin, row["frequency"] - row["ceiling"] - 3 * row["stderr"])
                if not rep.passed:
                    failures.append((name, k, eps))
    ok = not failures
    criterion(8, ok, f"2 graphs x k in {{2,3}} x 3 epsilons, worst frequency minus allowance {worst_margin:.3f}")
    assert ok, failures


def test_criterion_9_classical_cheeger(corpus, criterion):
    graphs, spectra, _ = corpus
    failures, tight = [], 0
    for g, spec in zip(graphs, spectra):
        res = classical_cheeger_check(spec, exact_classical_cheeger(g).optimum, slack=1e-9)
        tight += res.lower_tight
        if not res.passed:
            failures.append((g.edges, res))
    criterion(9, not failures, f"{len(graphs)} graphs, {len(failures)} failures, {tight} with tight lower bound")
    assert not failures, failures[:3]


def test_criterion_10_spectral_correctness(criterion):
    rng = np.random.default_rng(10)
    worst_res = worst_orth = 0.0
    zero_ok = True
    blocks = [generate("complete", n=3), generate("path", n=4), generate("cycle", n=5), generate("grid", rows=2, cols=3),
              generate("complete", n=1), generate("complete", n=2)]
    for trial in range(60):
        c = 1 + trial % 4
        parts = [blocks[int(i)] for i in rng.integers(0, len(blocks), c)]
        g = disjoint_union(*parts)
        lap = build_laplacian(g)
        spec = eigendecompose(lap)
        worst_res = max(worst_res, float(spec.residuals(lap).max()))
        worst_orth = max(worst_orth, spec.orthonormality_error())
        zero_ok &= num_zero_eigenvalues(spec) == c == g.num_components()
    kn_err = 0.0
    for n in range(2, 51):
        lap = build_laplacian(generate("complete", n=n))
        spec = eigendecompose(lap)
        expect = np.array([0.0] + [n / (n - 1)] * (n - 1))
        kn_err = max(kn_err, float(np.max(np.abs(spec.eigenvalues - expect))))
        worst_res = max(worst_res, float(spec.residuals(lap).max()))
        worst_orth = max(worst_orth, spec.orthonormality_error())
    ok = worst_res <= 1e-8 and worst_orth <= 1e-8 and zero_ok and kn_err <= 1e-8
    criterion(10, ok, f"residual {worst_res:.1e}, orthonormality {worst_orth:.1e}, K_n error {kn_err:.1e}, "
                      f"zero counts {'match' if zero_ok else 'MISMATCH'}")
    assert ok
