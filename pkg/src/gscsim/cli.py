"""Command-line entry points.

Subcommands:
  run       execute a sweep from a JSON config and write CSV/JSON rows
  validate  load a corpus file and report its contents
  ged       exact edit distance between two labelled graphs in JSON files

Exit codes: 0 success, 2 configuration error, 3 corpus error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .experiment_harness import (
    ConfigError,
    ExperimentConfig,
    METHODS,
    emit_csv,
    emit_json,
    run_sweep,
)
from .graph_edit import GedCosts, LabelledGraph, ged
from .phy_link.channel import ChannelKind
from .phy_link.link import LinkConfig
from .scene_source import CorpusError, DeviceProfile, load_bundled_corpus, load_corpus
from .semantic_ranker import RankerConfig

BUNDLED = "bundled"


def _parse_ntop(value) -> int | None:
    if value is None or value == "all":
        return None
    return int(value)


def _parse_channel(value) -> ChannelKind:
    try:
        return ChannelKind(value)
    except ValueError as exc:
        raise ConfigError(f"unknown channel {value!r}") from exc


def _build_config(doc: dict, args: argparse.Namespace) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be an object")
    known = {"corpus", "methods", "channels", "snr_db", "n_top", "trials",
             "seed", "ranker", "link", "device"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    corpus_path = doc.get("corpus", BUNDLED)

    methods = tuple(args.methods or doc.get("methods", list(METHODS)))
    channels = tuple(
        _parse_channel(c)
        for c in (args.channels or doc.get("channels", ["AWGN", "Rayleigh"]))
    )
    snr_db = tuple(
        float(s) for s in (args.snr if args.snr is not None else doc.get("snr_db", [8.0]))
    )
    ntop_raw = args.ntop if args.ntop is not None else doc.get("n_top", [9])
    n_top = tuple(_parse_ntop(n) for n in ntop_raw)
    trials = int(args.trials if args.trials is not None else doc.get("trials", 1))
    seed = int(args.seed if args.seed is not None else doc.get("seed", 0))

    try:
        ranker = RankerConfig(
            **{**doc.get("ranker", {}),
               **({"ged_costs": GedCosts(**doc["ranker"]["ged_costs"])}
                  if "ged_costs" in doc.get("ranker", {}) else {})})
        link = LinkConfig(**doc.get("link", {}))
        device = DeviceProfile(**doc.get("device", {}))
        return ExperimentConfig(
            corpus_path=corpus_path,
            methods=methods,
            channels=channels,
            snr_db=snr_db,
            n_top=n_top,
            trials=trials,
            master_seed=seed,
            ranker=ranker,
            link=link,
            device=device,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        doc = json.loads(Path(args.config).read_text())
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"config error: not valid JSON: {exc}", file=sys.stderr)
        return 2
    try:
        config = _build_config(doc, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        if str(config.corpus_path) == BUNDLED:
            corpus = load_bundled_corpus()
        else:
            corpus = load_corpus(config.corpus_path)
    except CorpusError as exc:
        print(f"corpus error: {exc}", file=sys.stderr)
        return 3

    rows = run_sweep(config, corpus=corpus)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.format == "json":
        path = emit_json(rows, out_dir / "results.json")
    else:
        path = emit_csv(rows, out_dir / "results.csv")
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    try:
        if args.corpus == BUNDLED:
            corpus = load_bundled_corpus()
        else:
            corpus = load_corpus(Path(args.corpus))
    except CorpusError as exc:
        print(f"corpus error: {exc}", file=sys.stderr)
        return 3
    n_trip = sum(len(s.triplets) for s in corpus.scenes.values())
    print(
        f"{args.corpus}: {len(corpus.scenes)} scenes, {len(corpus.questions)} questions, "
        f"{n_trip} triplets, {corpus.stats.distinct_labels()} distinct labels"
    )
    return 0


def _load_graph(path: str) -> LabelledGraph:
    try:
        doc = json.loads(Path(path).read_text())
        nodes = tuple(doc["nodes"])
        edges = tuple((int(s), int(o), lab) for s, lab, o in doc.get("edges", []))
        return LabelledGraph(node_labels=nodes, edges=edges)
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"cannot read graph {path}: {exc}") from exc


def _cmd_ged(args: argparse.Namespace) -> int:
    try:
        g1 = _load_graph(args.g1)
        g2 = _load_graph(args.g2)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    print(ged(g1, g2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gscsim",
        description="Goal-oriented semantic communication simulator for edge VQA.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a sweep and write result rows")
    run_p.add_argument("--config", required=True, help="JSON config file")
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--methods", nargs="+", default=None, metavar="METHOD")
    run_p.add_argument("--channels", nargs="+", default=None, metavar="CHANNEL")
    run_p.add_argument("--snr", nargs="+", type=float, default=None, metavar="DB")
    run_p.add_argument("--ntop", nargs="+", default=None, metavar="N",
                       help="payload depths; integers or 'all'")
    run_p.add_argument("--trials", type=int, default=None)
    run_p.add_argument("--format", choices=("csv", "json"), default="csv")
    run_p.set_defaults(func=_cmd_run)

    val_p = sub.add_parser("validate", help="check a corpus file")
    val_p.add_argument("--corpus", required=True,
                       help=f"corpus path or '{BUNDLED}'")
    val_p.set_defaults(func=_cmd_validate)

    ged_p = sub.add_parser("ged", help="edit distance between two graph files")
    ged_p.add_argument("--g1", required=True)
    ged_p.add_argument("--g2", required=True)
    ged_p.set_defaults(func=_cmd_ged)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
