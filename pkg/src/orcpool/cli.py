"""Command-line interface: ``orcpool <command> ...``.

Exit status is 0 on success, 1 on bad input (flags, files, schema) and 2 on
numerical failure. Errors are printed as one line, ``orcpool: error: <kind>: ...``.
"""

from __future__ import annotations

import argparse
import datetime
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import io
from .curvature import orc_all
from .errors import NumericError, OrcPoolError, ParameterError, StateError, ValidationError
from .flow import NORMALIZATIONS, ricci_flow
from .graph import BRIDGE, HUB_INTERNAL, INTERNAL, generate_dumbbell, generate_gab, generate_sbm
from .metrics import MODULARITY_CONVENTIONS, NMI_VARIANTS, modularity_report, nmi_report
from .pooling import PoolConfig, hierarchical_pool, pool
from .theory import verify_gab

log = logging.getLogger("orcpool")

PROG = "orcpool"
TYPE_NAMES = {BRIDGE: "bridge", HUB_INTERNAL: "hub_internal", INTERNAL: "internal"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _nonneg_int(s: str) -> int:
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {s}")
    return v


def _int_list(s: str) -> list[int]:
    try:
        return [int(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from None


def _add_curvature_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=("exact", "sinkhorn", "combinatorial"), default="exact",
                   help="curvature method (default: exact)")
    p.add_argument("--alpha", type=float, default=0.0,
                   help="mass kept at the anchor node, in [0, 1) (default: 0)")
    p.add_argument("--epsilon", type=float, default=1e-3,
                   help="Sinkhorn regularization (default: 1e-3)")
    p.add_argument("--max-iter", type=_positive_int, default=10_000,
                   help="Sinkhorn iteration cap (default: 10000)")
    p.add_argument("--workers", type=_positive_int, default=1,
                   help="processes for per-edge curvature (default: 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=PROG, description="Curvature-based graph pooling toolkit.")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="log at DEBUG level")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="log errors only")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    gen = sub.add_parser("generate", help="write a synthetic graph")
    gsub = gen.add_subparsers(dest="kind", metavar="KIND", parser_class=_Parser)
    gsub.required = True
    gab = gsub.add_parser("gab", help="b cliques of a+1 nodes with hubs forming K_b")
    gab.add_argument("--a", type=int, required=True)
    gab.add_argument("--b", type=int, required=True)
    sbm = gsub.add_parser("sbm", help="stochastic block model")
    sbm.add_argument("--sizes", type=_int_list, required=True, help="block sizes, e.g. 25,25")
    sbm.add_argument("--p-in", type=float, required=True)
    sbm.add_argument("--p-out", type=float, required=True)
    sbm.add_argument("--seed", type=int, default=0)
    dumb = gsub.add_parser("dumbbell", help="two cliques joined by disjoint bridges")
    dumb.add_argument("--clique-size", type=int, required=True)
    dumb.add_argument("--bridges", type=int, default=1)
    for p in (gab, sbm, dumb):
        p.add_argument("-o", "--output", required=True, help="graph JSON path")
        p.add_argument("--labels", help="also write the planted partition as node,label CSV")

    curv = sub.add_parser("curvature", help="per-edge Ollivier-Ricci curvature")
    curv.add_argument("-i", "--input", required=True, help="graph JSON or edge CSV")
    curv.add_argument("-o", "--output", required=True, help="CSV u,v,kappa[,kappa_low,kappa_up]")
    _add_curvature_flags(curv)

    flow = sub.add_parser("flow", help="run discrete Ricci flow")
    flow.add_argument("-i", "--input", required=True)
    flow.add_argument("-o", "--output", required=True, help="graph JSON with evolved weights")
    flow.add_argument("--iters", type=_nonneg_int, default=4, help="flow iterations T (default: 4)")
    flow.add_argument("--normalization", choices=NORMALIZATIONS, default="sum")
    flow.add_argument("--history", help="write per-iteration weights as CSV t,u,v,w")
    _add_curvature_flags(flow)

    pl = sub.add_parser("pool", help="flow, select, reduce and connect")
    pl.add_argument("-i", "--input", required=True)
    pl.add_argument("-o", "--output", required=True, help="coarse graph JSON")
    ks = pl.add_mutually_exclusive_group(required=True)
    ks.add_argument("--k", type=_positive_int, help="number of supernodes")
    ks.add_argument("--ks", type=_int_list, help="strictly decreasing sizes for a hierarchy, e.g. 4,2")
    pl.add_argument("--iters", type=_nonneg_int, default=4, help="flow iterations T (default: 4)")
    pl.add_argument("--mode", choices=("spectral", "trained"), default="spectral")
    pl.add_argument("--assignment", help="write node,cluster CSV (first level)")
    pl.add_argument("--seed", type=int, default=0)
    pl.add_argument("--restarts", type=_positive_int, default=10, help="k-means restarts")
    pl.add_argument("--epochs", type=_nonneg_int, default=500, help="trained mode epochs")
    pl.add_argument("--lr", type=float, default=1e-3, help="Adam learning rate (default: 1e-3)")
    pl.add_argument("--features", choices=("auto", "attributes", "identity", "constant"),
                    default="auto", help="trained-mode input features (default: auto)")
    _add_curvature_flags(pl)

    ev = sub.add_parser("eval", help="NMI or modularity of a partition")
    ev.add_argument("--metric", choices=("nmi", "modularity"), required=True)
    ev.add_argument("--pred", required=True, help="partition CSV node,label")
    ev.add_argument("-i", "--input", help="graph JSON (for modularity or stored labels)")
    ev.add_argument("--truth", help="reference partition CSV (nmi; default: graph labels)")
    ev.add_argument("--variant", choices=NMI_VARIANTS, default="standard")
    ev.add_argument("--convention", choices=MODULARITY_CONVENTIONS, default="ordered")
    ev.add_argument("-o", "--output", help="metric report JSON")

    ver = sub.add_parser("verify", help="check closed-form claims on model graphs")
    vsub = ver.add_subparsers(dest="kind", metavar="KIND", parser_class=_Parser)
    vsub.required = True
    vg = vsub.add_parser("gab", help="flow matrix, eigenstructure and modularity checks")
    vg.add_argument("--a", type=int, required=True)
    vg.add_argument("--b", type=int, required=True)
    vg.add_argument("--iters", type=_positive_int, default=10)
    vg.add_argument("--method", choices=("exact", "sinkhorn", "combinatorial"), default="exact")
    vg.add_argument("-o", "--output", help="report JSON")

    pd = sub.add_parser("plot-data", help="tidy t,key,value CSV for plotting")
    src = pd.add_mutually_exclusive_group(required=True)
    src.add_argument("--history", help="flow history CSV t,u,v,w")
    src.add_argument("--series", help="series CSV t,<name>")
    pd.add_argument("-o", "--output", required=True)
    return parser


def _setup_logging(args) -> None:
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.ERROR
    else:
        name = os.environ.get("ORCPOOL_LOG", "WARNING").upper()
        level = getattr(logging, name, None)
        if not isinstance(level, int):
            raise ValidationError(f"ORCPOOL_LOG={name!r} is not a log level")
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s", force=True)


def _write_echo(args, argv: Sequence[str]) -> None:
    out = getattr(args, "output", None)
    if not out:
        return
    resolved = {k: v for k, v in vars(args).items()}
    echo = {
        "argv": list(argv),
        "config": resolved,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    Path(f"{out}.config.json").write_text(json.dumps(echo, indent=1, default=str) + "\n")


def _cmd_generate(args) -> int:
    extra = {}
    if args.kind == "gab":
        g, labels, types = generate_gab(args.a, args.b)
        extra["edge_types"] = types.tolist()
    elif args.kind == "sbm":
        g, labels, isolated = generate_sbm(args.sizes, args.p_in, args.p_out, args.seed)
        if isolated.size:
            log.warning("SBM sample has %d isolated nodes: %s", isolated.size, isolated.tolist())
    else:
        g, labels = generate_dumbbell(args.clique_size, args.bridges)
    io.save_graph(g.with_labels(labels), args.output, **extra)
    if args.labels:
        io.write_partition_csv(labels, args.labels)
    print(f"wrote {args.output}: {g.n} nodes, {g.num_edges} edges")
    return 0


def _curvature_opts(args) -> dict:
    return {"epsilon": args.epsilon, "max_iter": args.max_iter} if args.method == "sinkhorn" else {}


def _check_alpha(alpha: float) -> None:
    if not 0.0 <= alpha < 1.0:
        raise ParameterError(f"--alpha must be in [0, 1), got {alpha}")


def _cmd_curvature(args) -> int:
    _check_alpha(args.alpha)
    g = io.load_graph(args.input)
    curv = orc_all(g, alpha=args.alpha, method=args.method, workers=args.workers,
                   **_curvature_opts(args))
    io.write_curvature_csv(curv, args.output)
    if curv.values.size:
        print(f"wrote {args.output}: {curv.values.size} edges, "
              f"kappa in [{curv.values.min():.6g}, {curv.values.max():.6g}]")
    else:
        print(f"wrote {args.output}: no edges")
    return 0


def _cmd_flow(args) -> int:
    _check_alpha(args.alpha)
    g = io.load_graph(args.input)
    C = ricci_flow(g, args.iters, method=args.method, alpha=args.alpha,
                   record_history=bool(args.history), normalization=args.normalization,
                   workers=args.workers, **_curvature_opts(args))
    io.save_graph(C.graph, args.output)
    if args.history:
        io.write_history_csv(g, C.history, args.history)
    print(f"wrote {args.output}: T={args.iters}")
    return 0


def _cmd_pool(args) -> int:
    _check_alpha(args.alpha)
    if args.method == "sinkhorn":
        raise ParameterError("pool supports --method exact or combinatorial")
    g = io.load_graph(args.input)
    config = PoolConfig(method=args.method, alpha=args.alpha, seed=args.seed,
                        kmeans_restarts=args.restarts, epochs=args.epochs, lr=args.lr,
                        features=args.features, workers=args.workers)
    if args.k is not None:
        levels = [pool(g, args.k, args.iters, args.mode, config)]
    else:
        levels = hierarchical_pool(g, args.ks, args.iters, args.mode, config)
    last = levels[-1]
    provenance = dict(last.provenance)
    provenance["levels"] = [
        {"K": lvl.K, "labels": lvl.assignment.labels.tolist(), **lvl.provenance}
        for lvl in levels
    ]
    extra = {"provenance": provenance, "intra_mass": last.intra_mass.tolist()}
    io.save_graph(last.graph, args.output, **extra)
    if args.assignment:
        io.write_partition_csv(levels[0].assignment.labels, args.assignment, column="cluster")
    print(f"wrote {args.output}: {last.K} supernodes, {last.graph.num_edges} superedges")
    return 0


def _cmd_eval(args) -> int:
    pred = io.read_partition_csv(args.pred)
    g = io.load_graph(args.input) if args.input else None
    if args.metric == "modularity":
        if g is None:
            raise ValidationError("modularity needs the graph (-i)")
        report = modularity_report(g, pred, args.convention, pred=args.pred, graph=args.input)
    else:
        if args.truth:
            truth = io.read_partition_csv(args.truth)
        elif g is not None and g.labels is not None:
            truth = g.labels
        else:
            raise ValidationError("nmi needs --truth or a graph with stored labels (-i)")
        report = nmi_report(pred, truth, args.variant, pred=args.pred,
                            truth=args.truth or args.input)
    if args.output:
        io.save_json(report.to_dict(), args.output)
    print(f"{report.name} ({report.convention}) = {report.value!r}")
    return 0


def _cmd_verify(args) -> int:
    report = verify_gab(args.a, args.b, args.iters, method=args.method)
    for name, claim in report["claims"].items():
        print(f"{'PASS' if claim['passed'] else 'FAIL'} {name}")
    if args.output:
        io.save_json(report, args.output)
    return 0


def _cmd_plot_data(args) -> int:
    if args.history:
        rows = [(t, f"{u}-{v}", w) for t, u, v, w in io.read_history_csv(args.history)]
    else:
        raw = io.read_rows(args.series)
        if not raw:
            raise ValidationError(f"{args.series}: empty series")
        header, body = raw[0], raw[1:]
        key = header[1] if len(header) > 1 else "value"
        try:
            rows = [(int(r[0]), key, float(r[1])) for r in body]
        except (ValueError, IndexError):
            raise ValidationError(f"{args.series}: rows must be t,value") from None
    if not rows:
        raise ValidationError("input series is empty")
    n = io.write_tidy_csv(rows, args.output)
    print(f"wrote {args.output}: {n} rows")
    return 0


COMMANDS = {
    "generate": _cmd_generate, "curvature": _cmd_curvature, "flow": _cmd_flow,
    "pool": _cmd_pool, "eval": _cmd_eval, "verify": _cmd_verify, "plot-data": _cmd_plot_data,
}


def _fail(kind: str, msg: str, code: int) -> int:
    msg = " ".join(str(msg).split())
    print(f"{PROG}: error: {kind}: {msg}", file=sys.stderr)
    return code


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        _setup_logging(args)
        code = COMMANDS[args.command](args)
        _write_echo(args, argv)
        return code
    except UsageError as exc:
        return _fail("usage", exc, 1)
    except NumericError as exc:
        return _fail("numeric", exc, 2)
    except (ValidationError, StateError) as exc:
        return _fail("validation", exc, 1)
    except OrcPoolError as exc:
        return _fail("error", exc, 1)
    except OSError as exc:
        return _fail("io", exc, 1)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
