"""Command-line pipeline runner.

Subcommands: ``pagerank``, ``cc``, ``coarsen``, ``pipeline`` and ``bench``.
Engine flags may also come from ``GRAPHENE_*`` environment variables; an
explicit flag wins.  Exit status: 0 ok, 1 usage, 2 data error, 3 internal.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Optional, TextIO

from .algorithms import coarsen, connected_components, page_rank
from .collection import Collection
from .context import Context, EngineConfig
from .errors import ConfigError, CorruptBlockError, DataError
from .graph import build_graph
from .io import load_edges, load_titles
from .partition import EdgeKind, EdgePartitioner
from .plan import NEITHER

log = logging.getLogger("graphene")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3
ENV_PREFIX = "GRAPHENE_"
RANK_FORMAT = ".12g"


class UsageError(Exception):
    pass


class StageError(Exception):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _env(name: str, default=None):
    return os.environ.get(ENV_PREFIX + name, default)


def _env_bool(name: str, default: bool) -> bool:
    raw = _env(name)
    if raw is None:
        return default
    return raw.strip().lower() not in ("0", "false", "no", "off", "")


def _env_int(name: str, default: int) -> int:
    raw = _env(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{ENV_PREFIX}{name} must be an integer, got {raw!r}") from None


def _engine_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("engine")
    g.add_argument("--partitions", type=int, help="vertex and edge partitions (default 4)")
    g.add_argument("--partitioner", choices=[k.value for k in EdgeKind],
                   help="edge partitioner (default hash2d)")
    g.add_argument("--seed", type=int, help="partitioner seed (default 42)")
    g.add_argument("--workers", type=int, help="worker threads (default: logical cores)")
    g.add_argument("--no-incremental", action="store_true",
                   help="rebuild vertex views in full on every use")
    g.add_argument("--no-join-elim", action="store_true",
                   help="always ship both endpoint attributes")
    g.add_argument("--scan", choices=["auto", "seq", "index"], help="edge scan strategy")
    g.add_argument("--metrics", metavar="PATH", help="write communication metrics here")
    g.add_argument("--metrics-format", choices=["csv", "json"], default="csv")
    g.add_argument("-o", "--output", metavar="PATH", help="result file (default stdout)")
    g.add_argument("--lenient", action="store_true", help="skip malformed input lines")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def engine_config(args: Optional[argparse.Namespace] = None, overrides: Optional[dict] = None) -> EngineConfig:
    """Flags > config-file values > environment > defaults."""
    cfg: dict[str, Any] = {
        "num_partitions": _env_int("PARTITIONS", 4),
        "partitioner": _env("PARTITIONER", "hash2d"),
        "seed": _env_int("SEED", 42),
        "workers": _env_int("WORKERS", os.cpu_count() or 1),
        "incremental": _env_bool("INCREMENTAL", True),
        "join_elimination": _env_bool("JOIN_ELIM", True),
        "scan": _env("SCAN", "auto"),
    }
    for key, value in (overrides or {}).items():
        key = {"partitions": "num_partitions"}.get(key, key)
        if key not in cfg and key not in ("scan_threshold", "scan_scope"):
            raise ConfigError(f"unknown engine setting {key!r}")
        cfg[key] = value
    if args is not None:
        for flag, key in (("partitions", "num_partitions"), ("partitioner", "partitioner"),
                          ("seed", "seed"), ("workers", "workers"), ("scan", "scan")):
            if getattr(args, flag, None) is not None:
                cfg[key] = getattr(args, flag)
        if getattr(args, "no_incremental", False):
            cfg["incremental"] = False
        if getattr(args, "no_join_elim", False):
            cfg["join_elimination"] = False
    EdgePartitioner.parse(cfg["partitioner"], cfg["num_partitions"], cfg["seed"])
    return EngineConfig(**cfg)


def build_parser() -> argparse.ArgumentParser:
    parent = _engine_parent()
    parser = _Parser(prog="graphene", description="Run graph pipelines on the in-process engine.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pr = sub.add_parser("pagerank", parents=[parent], help="PageRank over an edge list")
    pr.add_argument("edges")
    pr.add_argument("--iterations", type=int, default=20)
    pr.add_argument("--reset-prob", type=float, default=0.15)
    pr.add_argument("--tolerance", type=float, help="run until changes fall below this")
    pr.add_argument("--top", type=int, help="only the K highest ranks")
    pr.add_argument("--titles", help="id/title file joined onto the top ranks")

    cc = sub.add_parser("cc", parents=[parent], help="weakly connected components")
    cc.add_argument("edges")

    co = sub.add_parser("coarsen", parents=[parent],
                        help="merge vertices joined by edges whose weight is below a threshold")
    co.add_argument("edges")
    co.add_argument("--threshold", type=float, default=0.5)

    pl = sub.add_parser("pipeline", parents=[parent], help="run a JSON pipeline config")
    pl.add_argument("config")

    be = sub.add_parser("bench", help="kernel backend and optimization benchmarks")
    be.add_argument("--vertices", type=int, default=2000)
    be.add_argument("--edges", type=int, default=20000)
    be.add_argument("--repeat", type=int, default=3)
    be.add_argument("--seed", type=int, default=42)
    be.add_argument("--json", action="store_true", help="machine-readable output")
    return parser


# -- pipeline -------------------------------------------------------------------

ALGORITHMS = ("pagerank", "cc", "coarsen")


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (StageError, ConfigError):
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def _weight_pred(spec: dict):
    lo = spec.get("min_weight")
    hi = spec.get("max_weight")

    def pred(t):
        w = t.attr
        return (lo is None or w >= lo) and (hi is None or w < hi)
    pred.access_spec = NEITHER
    return pred


def format_rows(rows, kind: str) -> str:
    out = []
    for row in rows:
        if kind == "rank":
            vid, rank, *title = row
            line = f"{vid}\t{format(rank, RANK_FORMAT)}"
            if title:
                line += f"\t{'' if title[0] is None else title[0]}"
        else:
            line = "\t".join(str(x) for x in row)
        out.append(line)
    return "".join(line + "\n" for line in out)


def run_pipeline(config: dict, out: Optional[TextIO] = None, ctx: Optional[Context] = None,
                 base_dir: Optional[Path] = None) -> str:
    """Execute a pipeline config in-process and return the result text.

    ``config`` keys: ``stages`` (list of ``{"op": ...}``), optional ``engine``
    settings, ``output`` and ``metrics`` paths.  Stage ops: ``load`` (path,
    strict), ``titles`` (path), ``graph``, ``subgraph`` (min_weight /
    max_weight), ``pagerank`` (iterations, reset_prob, tolerance), ``cc``,
    ``coarsen`` (threshold) and ``top`` (k).  Relative paths resolve against
    ``base_dir``.
    """
    base = Path(base_dir or ".")
    stages = config.get("stages")
    if not isinstance(stages, list) or not stages:
        raise ConfigError("config needs a non-empty 'stages' list")
    own_ctx = ctx is None
    ctx = ctx or Context(engine_config(overrides=config.get("engine", {})))
    cfg = ctx.config
    partitioner = EdgePartitioner.parse(cfg.partitioner, cfg.num_partitions, cfg.seed)

    def path_of(p):
        q = Path(p)
        return q if q.is_absolute() else base / q

    edges = titles = graph = scores = None
    kind = None
    rows: list = []
    try:
        for i, stage in enumerate(stages):
            op = stage.get("op") if isinstance(stage, dict) else None
            name = f"{i}:{op}"
            if op == "load":
                edges = _stage(name, load_edges, path_of(stage["path"]),
                               strict=stage.get("strict", True), ctx=ctx)
            elif op == "titles":
                titles = _stage(name, load_titles, path_of(stage["path"]), ctx=ctx)
            elif op == "graph":
                if edges is None:
                    raise ConfigError(f"stage {name} needs a preceding load stage")
                graph = _stage(name, build_graph, titles, edges, ctx=ctx, partitioner=partitioner)
            elif op == "subgraph":
                if graph is None:
                    raise ConfigError(f"stage {name} needs a graph")
                graph = _stage(name, graph.subgraph, epred=_weight_pred(stage))
            elif op in ALGORITHMS:
                if graph is None:
                    if edges is None:
                        raise ConfigError(f"stage {name} needs a preceding load stage")
                    graph = _stage(name, build_graph, titles, edges, ctx=ctx, partitioner=partitioner)
                if op == "pagerank":
                    scores = _stage(name, page_rank, graph, stage.get("iterations", 20),
                                    stage.get("reset_prob", 0.15), stage.get("tolerance"))
                    kind = "rank"
                    rows = sorted(scores, key=lambda r: (-r[1], r[0]))
                elif op == "cc":
                    scores = _stage(name, connected_components, graph).vertices
                    kind = "cc"
                    rows = sorted(scores)
                else:
                    threshold = stage.get("threshold", 0.5)
                    g1 = graph.map_v(lambda _, v: 1)
                    coarse = _stage(name, coarsen, g1, _weight_pred({"max_weight": threshold}),
                                    lambda a, b: a + b)
                    kind = "coarsen"
                    rows = ([("v", vid, size) for vid, size in sorted(coarse.vertices)]
                            + [("e", s, d, w) for (s, d), w in sorted(coarse.edges.collect(),
                                                                      key=lambda e: (e[0], repr(e[1])))])
            elif op == "top":
                if scores is None or kind != "rank":
                    raise ConfigError(f"stage {name} needs a preceding pagerank stage")
                k = int(stage.get("k", 20))
                best = _stage(name, scores.top, k, lambda r: (r[1], -r[0]))
                if titles is not None:
                    joined = Collection.from_iterable(best, ctx=ctx).left_join(titles)
                    rows = sorted(((vid, r, t) for vid, (r, t) in joined), key=lambda r: (-r[1], r[0]))
                else:
                    rows = sorted(best, key=lambda r: (-r[1], r[0]))
            else:
                raise ConfigError(f"unknown stage op {op!r} at position {i}")

        text = format_rows(rows, kind)
        if config.get("output"):
            path_of(config["output"]).write_text(text)
        elif out is not None:
            out.write(text)
        if config.get("metrics"):
            ctx.meter.export(path_of(config["metrics"]), config.get("metrics_format", "csv"))
        return text
    finally:
        if own_ctx:
            ctx.close()


def _single_stage_config(args) -> dict:
    strict = not args.lenient
    stages: list[dict] = [{"op": "load", "path": str(Path(args.edges).resolve()), "strict": strict}]
    if args.command == "pagerank":
        if args.titles:
            stages.append({"op": "titles", "path": str(Path(args.titles).resolve())})
        stages.append({"op": "pagerank", "iterations": args.iterations,
                       "reset_prob": args.reset_prob, "tolerance": args.tolerance})
        if args.top is not None:
            stages.append({"op": "top", "k": args.top})
    elif args.command == "cc":
        stages.append({"op": "cc"})
    else:
        stages.append({"op": "coarsen", "threshold": args.threshold})
    return {"stages": stages}


def _apply_io_flags(config: dict, args) -> dict:
    if args.output:
        config["output"] = str(Path(args.output).resolve())
    if args.metrics:
        config["metrics"] = str(Path(args.metrics).resolve())
        config["metrics_format"] = args.metrics_format
    if args.lenient:
        for stage in config["stages"]:
            if stage.get("op") == "load":
                stage["strict"] = False
    return config


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"graphene: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    logging.basicConfig(level=logging.DEBUG if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "bench":
            from . import bench
            return bench.run(vertices=args.vertices, edges=args.edges, repeat=args.repeat,
                             seed=args.seed, as_json=args.json)
        if args.command == "pipeline":
            cfg_path = Path(args.config)
            try:
                config = json.loads(cfg_path.read_text())
            except OSError as exc:
                raise DataError(f"cannot read config {cfg_path}: {exc.strerror or exc}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc}") from exc
            base_dir = cfg_path.resolve().parent
        else:
            config, base_dir = _single_stage_config(args), Path.cwd()
        config = _apply_io_flags(config, args)
        engine = engine_config(args, config.get("engine", {}))
        with Context(engine) as ctx:
            run_pipeline(config, out=sys.stdout, ctx=ctx, base_dir=base_dir)
        return EXIT_OK
    except (UsageError, ConfigError) as exc:
        print(f"graphene: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as exc:
        print(f"graphene: {exc}", file=sys.stderr)
        if isinstance(exc.cause, (DataError, CorruptBlockError, ValueError)):
            return EXIT_DATA
        return EXIT_INTERNAL
    except DataError as exc:
        print(f"graphene: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - last resort
        log.debug("internal error", exc_info=True)
        print(f"graphene: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
