"""Command-line entry point: ``kcheeger <subcommand> ...``.

Every subcommand prints one JSON report on stdout.  Exit codes: 0 success,
1 verification failure, 2 parameter error, 3 capacity error, 4 numerical error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np

from . import __version__
from .errors import (
    CapacityError,
    DomainError,
    KCheegerError,
    NumericalError,
    ParameterError,
    ParseError,
    SearchFailure,
    ValidationError,
)
from .graph import Graph, generate, read_edge_list, write_edge_list
from .metrics import bounds_report
from .oracle import exact_classical_cheeger, exact_h_k, exact_h_k_worst, exhaustive_corpus
from .rounding import RoundingConfig, best_partition_search, default_delta, default_variant, probability_table
from .spectral import (
    build_laplacian,
    complete_graph_spectrum,
    eigendecompose,
    num_zero_eigenvalues,
    read_basis,
    spectrum_from_basis,
    write_basis,
)
from .verify import READINGS, summarize, thread_count, verify_graphs

REPORT_VERSION = 1

EXIT_OK, EXIT_VERIFY, EXIT_PARAM, EXIT_CAPACITY, EXIT_NUMERIC = 0, 1, 2, 3, 4


class CliParameterError(Exception):
    pass


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    return obj


def _float_text(x: float) -> str:
    text = format(x, ".17g")
    return text if any(c in text for c in ".en") else text + ".0"


def dumps(obj) -> str:
    """JSON text with every float written to 17 significant digits."""
    if obj is None or isinstance(obj, (bool, int, str)):
        return json.dumps(obj)
    if isinstance(obj, float):
        return _float_text(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    return "[" + ", ".join(dumps(v) for v in obj) + "]"


class _Timer:
    def __init__(self):
        self.phases = {}

    @contextmanager
    def phase(self, name):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.phases[name] = round((time.perf_counter() - t0) * 1000.0, 3)


def _read_text(path):
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write_text(path, text):
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def graph_summary(g: Graph) -> dict:
    return {
        "n": g.n,
        "edges": g.num_edges,
        "volume": g.volume,
        "max_degree": g.max_degree,
        "components": g.num_components(),
    }


def _config(args):
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def _report(args, payload, timer, graph=None):
    return {
        "report_version": REPORT_VERSION,
        "command": {
            "subcommand": args.command,
            "config": _config(args),
            "seed": getattr(args, "seed", None),
            "version": __version__,
        },
        "graph": graph_summary(graph) if graph is not None else None,
        "payload": payload,
        "timing_ms": timer.phases,
    }


def _load_graph(args, timer):
    with timer.phase("read"):
        return read_edge_list(_read_text(args.input))


def _spectrum(args, g, timer, k=None):
    lap = build_laplacian(g)
    if getattr(args, "basis_file", None):
        with timer.phase("basis"):
            n, vecs = read_basis(_read_text(args.basis_file))
            if n != g.n:
                raise ValidationError(f"basis file is for n={n}, graph has n={g.n}")
            return lap, spectrum_from_basis(lap, vecs)
    with timer.phase("eigendecompose"):
        return lap, eigendecompose(lap)


# --- subcommands -------------------------------------------------------------------

def _parse_parts(text):
    graphs = []
    for item in text.split(","):
        kind, _, size = item.strip().partition(":")
        try:
            graphs.append(generate(kind, n=int(size)))
        except ValueError:
            raise CliParameterError(f"--parts entry {item!r} must look like 'complete:3'") from None
    return graphs


def cmd_gen(args, timer):
    kind = {"planted": "planted_partition", "union": "disjoint_union"}.get(args.kind, args.kind)
    names = {
        "complete": ["n"], "path": ["n"], "cycle": ["n"], "grid": ["rows", "cols"],
        "gnp": ["n", "p"], "planted_partition": ["n", "k", "p_in", "p_out"], "disjoint_union": ["parts"],
    }[kind]
    params = {}
    for name in names:
        value = getattr(args, name)
        if value is None:
            raise CliParameterError(f"--{name.replace('_', '-')} is required for '{args.kind}'")
        params[name] = _parse_parts(value) if name == "parts" else value
    with timer.phase("generate"):
        g = generate(kind, seed=args.seed, **params)
    text = write_edge_list(g)
    _write_text(args.out, text)
    return _report(args, {"kind": kind, "out": args.out}, timer, g), EXIT_OK


def cmd_spectrum(args, timer):
    g = _load_graph(args, timer)
    lap, spec = _spectrum(args, g, timer)
    k = args.k if args.k is not None else spec.size
    if not 1 <= k <= spec.size:
        raise CliParameterError(f"--k must lie in 1..{spec.size}")
    payload = {
        "eigenvalues": spec.eigenvalues[:k],
        "residuals": spec.residuals(lap)[:k],
        "orthonormality_error": spec.orthonormality_error(),
        "zero_eigenvalues": num_zero_eigenvalues(spec),
        "harmonic_sup_norms": spec.harmonic_sup_norms()[:k],
    }
    return _report(args, payload, timer, g), EXIT_OK


def cmd_bounds(args, timer):
    g = _load_graph(args, timer)
    _, spec = _spectrum(args, g, timer)
    with timer.phase("bounds"):
        rep = bounds_report(spec, g, args.k)
    payload = rep.to_dict()
    payload["basis"] = "injected" if args.basis_file else "computed"
    return _report(args, payload, timer, g), EXIT_OK


def cmd_exact(args, timer):
    g = _load_graph(args, timer)
    with timer.phase("oracle"):
        if args.classical:
            res = exact_classical_cheeger(g)
            objective = "classical"
        elif args.worst:
            res = exact_h_k_worst(g, args.k)
            objective = "worst"
        else:
            res = exact_h_k(g, args.k)
            objective = "average"
    payload = {"objective": objective, "k": None if args.classical else args.k, **res.to_dict()}
    return _report(args, payload, timer, g), EXIT_OK


def cmd_round(args, timer):
    g = _load_graph(args, timer)
    _, spec = _spectrum(args, g, timer)
    if not 2 <= args.k <= g.n:
        raise CliParameterError(f"--k must lie in 2..{g.n}")
    delta = args.delta if args.delta is not None else default_delta(g.n)
    if not 0.0 <= delta < 0.5:
        raise CliParameterError(f"--delta must lie in [0, 1/2), got {delta}")
    variant = args.variant or default_variant(spec, args.k)
    cfg = RoundingConfig(args.k, delta, variant, args.trials, args.seed)
    with timer.phase("search"):
        try:
            res = best_partition_search(spec, g, cfg)
        except SearchFailure as exc:
            payload = {"config": cfg.to_dict(), "error": str(exc), "discarded": exc.discarded}
            return _report(args, payload, timer, g), EXIT_VERIFY
    payload = {"config": cfg.to_dict(), **res.to_dict()}
    return _report(args, payload, timer, g), EXIT_OK


def _k_range(text):
    lo, sep, hi = text.partition("..")
    try:
        ks = range(int(lo), int(hi) + 1) if sep else [int(lo)]
    except ValueError:
        raise CliParameterError(f"--k-range must look like '2..4', got {text!r}") from None
    ks = list(ks)
    if not ks or min(ks) < 2:
        raise CliParameterError("--k-range values must be >= 2")
    return ks


def cmd_verify(args, timer):
    ks = _k_range(args.k_range)
    graph = None
    with timer.phase("load"):
        if args.corpus is not None:
            graphs = list(exhaustive_corpus(args.corpus))
        elif args.input:
            graph = read_edge_list(_read_text(args.input))
            graphs = [graph]
        else:
            raise CliParameterError("give an input path or --corpus N")
    threads = args.threads if args.threads else thread_count()
    with timer.phase("verify"):
        results = verify_graphs(graphs, ks, reading=args.lambda_reading, threads=threads)
    summary = summarize(results)
    payload = {"k_range": ks, "lambda_reading": args.lambda_reading, "summary": summary}
    if args.details or len(results) <= 50:
        payload["graphs"] = results
    if graph is not None:
        payload["multi_component"] = not graph.is_connected()
    code = EXIT_OK if summary["passed"] else EXIT_VERIFY
    return _report(args, payload, timer, graph), code


def cmd_kn_basis(args, timer):
    lam, vecs = complete_graph_spectrum(args.n, args.k)
    _write_text(args.out, write_basis(vecs))
    return _report(args, {"n": args.n, "k": args.k, "eigenvalues": lam, "out": args.out}, timer), EXIT_OK


# --- parser -------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="kcheeger", description="Average-case k-fold Cheeger toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a graph as an edge list")
    p.add_argument("kind", choices=["complete", "path", "cycle", "grid", "gnp", "planted", "union"])
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--p-in", type=float)
    p.add_argument("--p-out", type=float)
    p.add_argument("--rows", type=int)
    p.add_argument("--cols", type=int)
    p.add_argument("--parts", help="comma list like 'complete:2,cycle:4' (union only)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-", help="edge-list destination ('-' = stdout)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("spectrum", help="normalized Laplacian spectrum")
    p.add_argument("input")
    p.add_argument("--k", type=int)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("bounds", help="k-fold Cheeger bound expressions")
    p.add_argument("input")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--basis-file")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("exact", help="exhaustive Cheeger constants")
    p.add_argument("input")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--k", type=int)
    group.add_argument("--classical", action="store_true")
    p.add_argument("--worst", action="store_true", help="minimise the largest part ratio instead")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("round", help="randomised spectral rounding, best of N samples")
    p.add_argument("input")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--delta", type=float)
    p.add_argument("--variant", choices=["main", "nonpos"])
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--basis-file")
    p.set_defaults(func=cmd_round)

    p = sub.add_parser("verify", help="check bounds and identities against the oracle")
    p.add_argument("input", nargs="?")
    p.add_argument("--corpus", type=int, metavar="N_MAX")
    p.add_argument("--k-range", default="2..4")
    p.add_argument("--lambda-reading", choices=READINGS, default="proof")
    p.add_argument("--threads", type=int, default=0)
    p.add_argument("--details", action="store_true", help="include per-graph rows for large runs")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("kn-basis", help="write the paired-vertex eigenbasis of K_n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_kn_basis)
    return parser


def _human(report, stream):
    payload = report.get("payload") or {}
    stream.write(f"kcheeger {report['command']['subcommand']}\n")
    if report.get("graph"):
        stream.write("  graph: " + ", ".join(f"{k}={v}" for k, v in report["graph"].items()) + "\n")
    for key, value in payload.items():
        if isinstance(value, (list, dict)) and len(json.dumps(value)) > 120:
            continue
        stream.write(f"  {key}: {value}\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    timer = _Timer()
    err = sys.stderr
    try:
        report, code = args.func(args, timer)
    except (CliParameterError, ParameterError, ParseError, ValidationError, DomainError) as exc:
        param = getattr(exc, "param", None)
        prefix = f"invalid --{param.replace('_', '-')}: " if param else ""
        err.write(f"kcheeger: error: {prefix}{exc}\n")
        return EXIT_PARAM
    except CapacityError as exc:
        err.write(f"kcheeger: capacity error: {exc}\n")
        return EXIT_CAPACITY
    except NumericalError as exc:
        err.write(f"kcheeger: numerical error: {exc}\n")
        return EXIT_NUMERIC
    except (OSError, KCheegerError) as exc:
        err.write(f"kcheeger: error: {exc}\n")
        return EXIT_PARAM
    report = _jsonable(report)
    out = sys.stderr if args.command in ("gen", "kn-basis") and args.out == "-" else sys.stdout
    out.write(dumps(report) + "\n")
    if err.isatty():
        _human(report, err)
    return code


if __name__ == "__main__":
    sys.exit(main())
