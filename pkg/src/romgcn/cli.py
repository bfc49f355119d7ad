"""Command-line interface.

Subcommands::

    romgcn featurize      --manifest m.jsonl --descriptor dnp --out graphs.jsonl
    romgcn gen-synthetic  orientation --n 100 --seed 7 --out graphs.jsonl
    romgcn train          --archive graphs.jsonl --out rundir [model/train flags]
    romgcn eval           --archive graphs.jsonl --checkpoint rundir/checkpoint.json --json
    romgcn check          invariance --trials 10000 --seed 0

Exit codes: 0 success, 1 property/eval failure, 2 usage or configuration
error, 3 I/O or parse error. All primary outputs are written atomically
(temp file + rename) and are byte-identical across reruns with the same
flags and seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict

import numpy as np

from . import checks
from .errors import CheckpointError, ConfigError, ParseError, RomGcnError
from .evaluation import (
    cross_validate,
    gen_chirality_dataset,
    gen_orientation_dataset,
)
from .molgraph import (
    Dataset,
    build_molecule_graph,
    build_protein_graph,
    featurize_edges,
    graph_to_record,
    load_archive,
    parse_molecule,
    parse_pdb,
)
from .network import (
    ModelConfig,
    TrainOptions,
    evaluate,
    load_checkpoint,
    save_checkpoint,
    train,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3

DESCRIPTOR_CHOICES = ("dnp", "distance", "distance-theta", "ppf")


def _descriptor_kind(flag_value: str) -> str:
    return flag_value.replace("-", "_")


def _atomic_write(path: str, data: str) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _write_archive(graphs, path: str) -> None:
    lines = [json.dumps(graph_to_record(g), separators=(",", ":")) for g in graphs]
    _atomic_write(path, "\n".join(lines) + "\n")


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--descriptor", choices=DESCRIPTOR_CHOICES, default="dnp")
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--no-edge-in-node-update", action="store_true")
    p.add_argument("--no-edge-update", action="store_true")
    p.add_argument("--no-edge-in-readout", action="store_true")
    p.add_argument("--norm", choices=("batch", "none"), default="batch")


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--folds", type=int, default=0, help="k-fold CV metrics before the final fit (0 = off)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="romgcn")
    sub = parser.add_subparsers(dest="command", required=True)

    p_feat = sub.add_parser("featurize", help="parse structures and compute edge features")
    p_feat.add_argument("--manifest", required=True)
    p_feat.add_argument("--descriptor", choices=DESCRIPTOR_CHOICES, default="dnp")
    p_feat.add_argument("--out", required=True)

    p_gen = sub.add_parser("gen-synthetic", help="generate a synthetic labeled archive")
    p_gen.add_argument("task", choices=("orientation", "chirality"))
    p_gen.add_argument("--n", type=int, default=100, help="graphs per class")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True)

    p_train = sub.add_parser("train", help="train a model on a feature archive")
    p_train.add_argument("--archive", required=True)
    p_train.add_argument("--out", required=True)
    p_train.add_argument("--seed", type=int, default=0)
    _add_model_flags(p_train)
    _add_train_flags(p_train)

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint on an archive")
    p_eval.add_argument("--archive", required=True)
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.add_argument("--json", action="store_true")

    p_check = sub.add_parser("check", help="run a property suite")
    p_check.add_argument("suite", choices=sorted(checks.SUITES))
    p_check.add_argument("--trials", type=int, default=None)
    p_check.add_argument("--seed", type=int, default=0)

    return parser


# ---------------------------------------------------------------------------
# commands

def cmd_featurize(args) -> int:
    kind = _descriptor_kind(args.descriptor)
    try:
        with open(args.manifest) as fh:
            entries = [json.loads(line) for line in fh if line.strip()]
    except OSError as exc:
        print(f"error: cannot read manifest: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"error: bad manifest JSON: {exc}", file=sys.stderr)
        return EXIT_IO

    base = os.path.dirname(os.path.abspath(args.manifest))
    resolved = []
    for entry in entries:
        if not isinstance(entry, dict) or "path" not in entry or "kind" not in entry:
            print(f"error: manifest entry needs path/kind/label: {entry!r}", file=sys.stderr)
            return EXIT_USAGE
        path = entry["path"]
        if not os.path.isabs(path):
            path = os.path.join(base, path)
        if not os.path.exists(path):
            print(f"error: manifest references missing file: {path}", file=sys.stderr)
            return EXIT_USAGE
        resolved.append((path, entry))

    graphs = []
    for path, entry in resolved:
        try:
            with open(path) as fh:
                text = fh.read()
            if entry["kind"] == "protein":
                graph = build_protein_graph(parse_pdb(text))
            elif entry["kind"] == "molecule":
                graph = build_molecule_graph(parse_molecule(text))
            else:
                print(f"error: unknown kind {entry['kind']!r} for {path}", file=sys.stderr)
                return EXIT_USAGE
            graph.label = entry.get("label")
            graph.graph_id = os.path.basename(path)
            graphs.append(featurize_edges(graph, kind))
        except (ParseError, ValueError, RomGcnError) as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            return EXIT_IO
        except OSError as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            return EXIT_IO
    _write_archive(graphs, args.out)
    print(f"wrote {len(graphs)} graphs to {args.out}")
    return EXIT_OK


def cmd_gen_synthetic(args) -> int:
    gen = gen_orientation_dataset if args.task == "orientation" else gen_chirality_dataset
    dataset = gen(args.n, seed=args.seed)
    _write_archive(dataset.graphs, args.out)
    print(f"wrote {len(dataset.graphs)} graphs ({args.task}, seed {args.seed}) to {args.out}")
    return EXIT_OK


def _config_from_args(args, dataset: Dataset) -> ModelConfig:
    return ModelConfig(
        node_input_width=dataset.feature_width,
        class_count=dataset.class_count,
        width=args.width,
        depth=args.depth,
        norm=args.norm,
        edge_in_node_update=not args.no_edge_in_node_update,
        edge_update=not args.no_edge_update,
        edge_in_readout=not args.no_edge_in_readout,
    )


def _metrics_jsonable(metrics: dict) -> dict:
    out = {}
    for key, value in metrics.items():
        if isinstance(value, np.ndarray):
            out[key] = value.tolist()
        else:
            out[key] = value
    return out


def cmd_train(args) -> int:
    kind = _descriptor_kind(args.descriptor)
    graphs = load_archive(args.archive)
    graphs = [featurize_edges(g, kind) for g in graphs]
    dataset = Dataset.from_graphs(graphs)
    config = _config_from_args(args, dataset)
    opts = TrainOptions(
        epochs=args.epochs, batch_size=args.batch_size, lr=args.lr, seed=args.seed
    )

    os.makedirs(args.out, exist_ok=True)
    run_config = {
        "command": "train",
        "archive": args.archive,
        "descriptor": kind,
        "model": asdict(config),
        "train": asdict(opts),
        "folds": args.folds,
        "seed": args.seed,
    }
    _atomic_write(os.path.join(args.out, "runconfig.json"), json.dumps(run_config, indent=2) + "\n")

    cv_summary = None
    if args.folds:
        report = cross_validate(dataset, config, opts, k=args.folds, seed=args.seed)
        cv_summary = report.summary()

    params, history = train(dataset.graphs, config, opts, class_weights=dataset.class_weights)

    csv_lines = ["epoch,lr,loss,accuracy"]
    for row in history:
        csv_lines.append(f"{row['epoch']},{row['lr']!r},{row['loss']!r},{row['accuracy']!r}")
    _atomic_write(os.path.join(args.out, "metrics.csv"), "\n".join(csv_lines) + "\n")

    checkpoint = save_checkpoint(params, extra_config={"descriptor": kind})
    _atomic_write(os.path.join(args.out, "checkpoint.json"), checkpoint)

    final_metrics = evaluate(params, dataset.graphs, dataset.class_weights)
    final_metrics.pop("scores", None)
    final_metrics.pop("predictions", None)
    final_metrics.pop("labels", None)
    payload = {"final": _metrics_jsonable(final_metrics)}
    if cv_summary is not None:
        payload["cross_validation"] = cv_summary
    _atomic_write(os.path.join(args.out, "metrics.json"), json.dumps(payload, indent=2) + "\n")
    print(f"trained {args.epochs} epochs; outputs in {args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    try:
        with open(args.checkpoint) as fh:
            params, extra = load_checkpoint(fh.read())
    except OSError as exc:
        print(f"error: cannot read checkpoint: {exc}", file=sys.stderr)
        return EXIT_IO
    graphs = load_archive(args.archive)
    kind = extra.get("descriptor", "dnp")
    graphs = [featurize_edges(g, kind) for g in graphs]
    dataset = Dataset.from_graphs(graphs)
    if dataset.feature_width != params.config.node_input_width:
        print(
            "error: archive feature width "
            f"{dataset.feature_width} != checkpoint width {params.config.node_input_width}",
            file=sys.stderr,
        )
        return EXIT_USAGE
    if dataset.class_count > params.config.class_count:
        print(
            f"error: archive has {dataset.class_count} classes, checkpoint supports "
            f"{params.config.class_count}",
            file=sys.stderr,
        )
        return EXIT_USAGE
    metrics = evaluate(params, dataset.graphs, dataset.class_weights)
    metrics.pop("scores", None)
    metrics.pop("predictions", None)
    metrics.pop("labels", None)
    if args.json:
        print(json.dumps(_metrics_jsonable(metrics)))
    else:
        for key in sorted(metrics):
            print(f"{key}: {metrics[key]!r}")
    return EXIT_OK


_SUITE_DEFAULT_TRIALS = {
    "invariance": 10_000,
    "injectivity": 10_000,
    "chirality": 1_000,
    "gradients": 20,
}


def cmd_check(args) -> int:
    trials = args.trials if args.trials is not None else _SUITE_DEFAULT_TRIALS[args.suite]
    results = checks.run_suite(args.suite, trials=trials, seed=args.seed)
    failed = False
    for result in results:
        print(result.line())
        if not result.passed:
            failed = True
            if result.counterexample:
                print(f"  counterexample: {result.counterexample}")
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "featurize": cmd_featurize,
        "gen-synthetic": cmd_gen_synthetic,
        "train": cmd_train,
        "eval": cmd_eval,
        "check": cmd_check,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, CheckpointError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
