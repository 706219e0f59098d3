"""Command-line surface: graph generation, index construction, queries,
oracle-backed verification, division-error statistics, and benchmarks.

Exit codes: 0 success, 1 usage error, 2 data error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import random
import sys
from dataclasses import dataclass, field

from .decompose import decompose
from .graph import (
    GraphParseError,
    UncertainGraph,
    fingerprint,
    k_max,
    parse_edge_list,
    write_edge_list,
)
from .index import IndexFormatError, UcfIndex, build_ucf_index
from .kprob import bounds, kprob_value
from .oracle import MAX_ENUM_EDGES, direct_core, enumerate_kprob
from .synth import random_graph

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_VERIFY = 3

_LOWER_MODE = {"both": "both", "topk-only": "topk", "beta-only": "beta"}


class UsageError(Exception):
    """Invalid parameter combination; exits with code 1."""


class DataError(Exception):
    """Input the command cannot work with; exits with code 2."""


class VerifyFailure(Exception):
    """First counterexample found by the verification suite; exits with code 3."""


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    output: str | None = None
    index: str | None = None
    algo: str = "opstar"
    algos: list[str] = field(default_factory=list)
    bounds: str = "both"
    k: int = 1
    eta: float = 0.0
    seed: int = 0
    model: str = "gnm"
    n: int = 0
    m: int = 0
    band: tuple[float, float] | None = None
    fractions: list[float] = field(default_factory=list)
    audit: bool = False

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must be in [0, 1]")
        if self.algo == "ec" and self.command not in ("build", "errstat"):
            raise ValueError("algo=ec is only valid for build and errstat")
        if "ec" in self.algos:
            raise ValueError("algo=ec is only valid for build and errstat")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fraction_list(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad fraction list {text!r}")
    if any(not 0.0 <= f <= 1.0 for f in vals):
        raise argparse.ArgumentTypeError("fractions must lie in [0, 1]")
    return vals


def _algo_list(text: str) -> list[str]:
    vals = [x for x in text.split(",") if x != ""]
    for a in vals:
        if a not in ("bc", "op", "opstar"):
            raise argparse.ArgumentTypeError(f"bad algorithm {a!r} for benchmarking")
    return vals


def _eta(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError("eta must be in [0, 1]")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ucfcore", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic uncertain graph")
    gen.add_argument("--model", choices=("gnm", "ba"), default="gnm")
    gen.add_argument("-n", type=int, required=True, help="vertex count")
    gen.add_argument("-m", type=int, required=True, help="edge count (gnm) or edges per vertex (ba)")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--band", type=float, nargs=2, metavar=("LO", "HI"),
                     help="draw probabilities uniformly from [LO, HI] instead of (0, 1]")
    gen.add_argument("-o", "--output", required=True)

    build = sub.add_parser("build", help="construct the index for a graph file")
    build.add_argument("-i", "--input", required=True)
    build.add_argument("-x", "--index", required=True, help="index output path")
    build.add_argument("--algo", choices=("bc", "op", "opstar", "ec"), default="opstar")
    build.add_argument("--bounds", choices=tuple(_LOWER_MODE), default="both")
    build.add_argument("--audit", action="store_true", help="shadow-DP soundness checks while peeling")

    query = sub.add_parser("query", help="list the (k, eta)-cores from an index file")
    query.add_argument("-x", "--index", required=True)
    query.add_argument("-k", type=int, required=True)
    query.add_argument("--eta", type=_eta, required=True)

    verify = sub.add_parser("verify", help="check a graph (and optional index) against the oracles")
    verify.add_argument("-i", "--input", required=True)
    verify.add_argument("-x", "--index")
    verify.add_argument("--seed", type=int, default=0)

    errstat = sub.add_parser("errstat", help="per-k error ratio of the division-based mode")
    errstat.add_argument("-i", "--input", required=True)
    errstat.add_argument("--algo", choices=("bc", "opstar"), default="opstar",
                         help="correct reference algorithm")

    for name, default_fracs in (("bench", "1.0"), ("sample", "0.2,0.4,0.6,0.8,1.0")):
        b = sub.add_parser(name, help="timing table over vertex-sampled subgraphs")
        b.add_argument("-i", "--input", required=True)
        b.add_argument("--algo", type=_algo_list, default=_algo_list("bc,opstar"),
                       help="comma-separated list of algorithms")
        b.add_argument("--bounds", choices=tuple(_LOWER_MODE), default="both")
        b.add_argument("--fractions", type=_fraction_list, default=_fraction_list(default_fracs))
        b.add_argument("--seed", type=int, default=0)
    return p


def _config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    for name in ("input", "output", "index", "bounds", "k", "eta", "seed",
                 "model", "n", "m", "fractions", "audit"):
        if getattr(args, name, None) is not None:
            setattr(cfg, name, getattr(args, name))
    if args.command in ("bench", "sample"):
        cfg.algos = args.algo
    elif getattr(args, "algo", None) is not None:
        cfg.algo = args.algo
    if getattr(args, "band", None) is not None:
        lo, hi = args.band
        if not 0.0 < lo <= hi <= 1.0:
            raise DataError(f"band [{lo}, {hi}] must satisfy 0 < LO <= HI <= 1")
        cfg.band = (lo, hi)
    cfg.__post_init__()
    return cfg


def _load_graph(path: str) -> UncertainGraph:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            g = parse_edge_list(fh)
    except OSError as exc:
        raise DataError(str(exc))
    if g.dropped_edges:
        print(
            f"warning: dropped {g.dropped_edges} zero-probability edge(s)",
            file=sys.stderr,
        )
    return g


def _load_index(path: str) -> UcfIndex:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return UcfIndex.from_text(fh.read())
    except OSError as exc:
        raise DataError(str(exc))


def cmd_gen(cfg: RunConfig) -> int:
    try:
        g = random_graph(cfg.n, cfg.m, cfg.seed, model=cfg.model, band=cfg.band)
    except ValueError as exc:
        raise UsageError(str(exc))
    with open(cfg.output, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(write_edge_list(g))
    return EXIT_OK


def cmd_build(cfg: RunConfig) -> int:
    g = _load_graph(cfg.input)
    if cfg.algo == "ec" and any(p == 1.0 for _, _, p in g.edges):
        raise DataError("ec mode rejects graphs containing probability-1 edges")
    index, stats = build_ucf_index(
        g, algo=cfg.algo, lower=_LOWER_MODE[cfg.bounds], audit=cfg.audit
    )
    for st in stats:
        print(st.report_line())
    with open(cfg.index, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(index.to_text())
    return EXIT_OK


def cmd_query(cfg: RunConfig) -> int:
    index = _load_index(cfg.index)
    result = index.query(cfg.k, cfg.eta)
    for comp in result.components:
        print(" ".join(str(v) for v in sorted(comp)))
    return EXIT_OK


def cmd_errstat(cfg: RunConfig) -> int:
    g = _load_graph(cfg.input)
    if any(p == 1.0 for _, _, p in g.edges):
        raise DataError("errstat requires all edge probabilities below 1 (ec is undefined at 1)")
    rows = errstat_rows(g, reference=cfg.algo)
    print("k,vertices,errors,ratio")
    for k, vertices, errors, ratio in rows:
        print(f"{k},{vertices},{errors},{ratio:.6f}")
    return EXIT_OK


def errstat_rows(g: UncertainGraph, reference: str = "opstar"):
    """Per-k (k, vertices, errors, ratio) of EC thresholds vs the reference."""
    ref = decompose(g, algo=reference)
    ec = decompose(g, algo="ec")
    rows = []
    for k in sorted(ref):
        ref_t = ref[k].thresholds
        ec_t = ec[k].thresholds
        errors = sum(1 for v, t in ref_t.items() if abs(ec_t[v] - t) > 1e-6)
        rows.append((k, len(ref_t), errors, errors / len(ref_t)))
    return rows


def cmd_verify(cfg: RunConfig) -> int:
    g = _load_graph(cfg.input)
    index = _load_index(cfg.index) if cfg.index else None
    try:
        verify_graph(g, index, seed=cfg.seed)
    except VerifyFailure as exc:
        print(f"FAIL {exc}")
        return EXIT_VERIFY
    print("PASS")
    return EXIT_OK


def verify_graph(g: UncertainGraph, index: UcfIndex | None, seed: int = 0) -> None:
    """Oracle-backed property suite; raises VerifyFailure at the first counterexample."""
    if g.n > 2000:
        raise DataError(f"graph too large for the verification budget ({g.n} vertices)")
    rng = random.Random(seed)

    if index is not None and index.graph_fingerprint != fingerprint(g):
        raise VerifyFailure("fingerprint mismatch: index was not built from this graph")
    if index is None:
        index, _ = build_ucf_index(g, algo="opstar")
    km = k_max(g)

    # Exhaustive possible-world enumeration against the DP, where affordable.
    candidates = [u for u in range(g.n) if 1 <= len(g.adj[u]) <= min(14, MAX_ENUM_EDGES)]
    for u in rng.sample(candidates, min(60, len(candidates))):
        probs = [p for _, p in g.adj[u]]
        for k in range(1, min(len(probs), 6) + 1):
            dp = kprob_value(probs, k)
            ref = enumerate_kprob(probs, k)
            if abs(dp - ref) > 1e-12:
                raise VerifyFailure(
                    f"oracle equivalence: vertex {g.labels[u]} k={k} "
                    f"dp={dp!r} enumeration={ref!r}"
                )

    for u in range(g.n):
        probs = [p for _, p in g.adj[u]]
        for k in range(1, min(km + 1, 12) + 1):
            b = bounds(probs, k)
            kp = kprob_value(probs, k)
            if not b.lb <= kp <= b.ub:
                raise VerifyFailure(
                    f"bound sandwich: vertex {g.labels[u]} k={k} "
                    f"lb={b.lb!r} kprob={kp!r} ub={b.ub!r}"
                )

    for k in range(1, km + 1):
        tree = index.trees.get(k)
        stored = sorted({n.threshold for n in tree.nodes}) if tree else []
        etas = {0.0, 1.0}
        for t in stored:
            etas.update((t, max(0.0, t - 1e-9), min(1.0, t + 1e-9)))
        etas = sorted(etas)
        if len(etas) > 40:
            etas = sorted(rng.sample(etas, 40) + [0.0, 1.0])
        for eta in etas:
            got = {frozenset(c) for c in index.query(k, eta).components}
            want = {
                frozenset(g.labels[v] for v in c)
                for c in direct_core(g, k, eta).components
            }
            if got != want:
                raise VerifyFailure(
                    f"query mismatch at k={k} eta={eta!r}: "
                    f"index gave {sorted(map(sorted, got))}, "
                    f"direct search gave {sorted(map(sorted, want))}"
                )

    # Containment across parameter pairs: larger (k, eta) cores nest inside smaller.
    thresholds = sorted(
        {n.threshold for t in index.trees.values() for n in t.nodes} | {0.0, 0.5, 1.0}
    )
    for _ in range(30):
        if km < 1:
            break
        k1 = rng.randint(1, km)
        k2 = rng.randint(k1, km)
        e1, e2 = sorted((rng.choice(thresholds), rng.choice(thresholds)))
        outer = index.query(k1, e1).components
        inner = index.query(k2, e2).components
        for comp in inner:
            if not any(comp <= big for big in outer):
                raise VerifyFailure(
                    f"nesting violated: ({k2},{e2!r})-core {sorted(comp)} not inside "
                    f"any ({k1},{e1!r})-core"
                )


def _bench_rows(cfg: RunConfig):
    g = _load_graph(cfg.input)
    rng = random.Random(cfg.seed)
    rows = []
    for f in cfg.fractions:
        if f >= 1.0:
            sub = g
        else:
            count = int(round(f * g.n))
            sub = g.induced_subgraph(rng.sample(range(g.n), count))
        for algo in cfg.algos:
            results = decompose(sub, algo=algo, lower=_LOWER_MODE[cfg.bounds])
            wall = sum(r.stats.wall_ms for r in results.values())
            refreshes = sum(r.stats.refreshes for r in results.values())
            rows.append((f, algo, wall, refreshes))
    return rows


def cmd_bench(cfg: RunConfig) -> int:
    print("fraction,algo,wall_ms,refreshes")
    for f, algo, wall, refreshes in _bench_rows(cfg):
        print(f"{f},{algo},{wall:.3f},{refreshes}")
    return EXIT_OK


_COMMANDS = {
    "gen": cmd_gen,
    "build": cmd_build,
    "query": cmd_query,
    "verify": cmd_verify,
    "errstat": cmd_errstat,
    "bench": cmd_bench,
    "sample": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        cfg = _config(args)
    except ValueError as exc:
        print(f"ucfcore: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"ucfcore: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    try:
        return _COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"ucfcore: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, GraphParseError, IndexFormatError) as exc:
        print(f"ucfcore: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
