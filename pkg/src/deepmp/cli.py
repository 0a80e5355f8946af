"""Command-line entry point for reproducible runs.

Subcommands: gen-dict, gen-data, train, eval, ecdf. Every command reads an
optional INI config (defaults reproduce the full-scale reference setting),
applies --seed / --scale / --out overrides, writes its outputs under the run
directory, and records a manifest with content hashes of everything it read
and wrote. Exit codes: 0 success, 1 numerical failure, 2 bad input or config.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict, replace

import numpy as np

from . import datagen, metrics, network, training
from .config import RunConfig, load_config, parse_k_range
from .errors import InputError, MissingModel, NumericalError
from .seeding import DICT_STREAM, child_seed
from .solvers import ProjectionMode
from .types import Dictionary, load_dictionary_csv, save_dictionary_csv


def blob_hash(path) -> str:
    """Git-style content hash: sha1 over a blob header plus the file bytes."""
    with open(path, "rb") as fh:
        data = fh.read()
    digest = hashlib.sha1()
    digest.update(f"blob {len(data)}\0".encode("ascii"))
    digest.update(data)
    return digest.hexdigest()


def _write_manifest(out_dir, command, config: RunConfig, inputs, outputs) -> None:
    manifest = {
        "command": command,
        "config": asdict(config),
        "inputs": {os.path.relpath(p, out_dir): blob_hash(p) for p in inputs},
        "outputs": {os.path.relpath(p, out_dir): blob_hash(p) for p in outputs},
    }
    path = os.path.join(out_dir, f"manifest_{command.replace('-', '_')}.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _dictionary_path(config: RunConfig) -> str:
    return os.path.join(config.out_dir, "dictionary.csv")


def _model_path(config: RunConfig, k: int) -> str:
    return os.path.join(config.out_dir, "models", f"model_k{k}.dmp")


def _projection(config: RunConfig) -> ProjectionMode:
    return (ProjectionMode.POSITIVE_ORTHANT if config.projection == "positive"
            else ProjectionMode.IDENTITY)


def _build_dictionary(config: RunConfig) -> tuple[Dictionary, dict]:
    if config.source == "synthetic":
        dictionary = datagen.generate_synthetic_dictionary(
            config.signal_dim, config.num_atoms,
            child_seed(config.seed, DICT_STREAM),
        )
    elif config.source == "surrogate":
        dictionary = datagen.generate_raman_surrogate(
            config.signal_dim, config.num_atoms, config.peaks_per_atom,
            child_seed(config.seed, DICT_STREAM),
        )
    else:
        dictionary = datagen.load_raman_library(config.raman_path)
    meta = {
        "source": config.source,
        "signal_dim": dictionary.signal_dim,
        "num_atoms": dictionary.num_atoms,
        "seed": config.seed,
    }
    return dictionary, meta


def cmd_gen_dict(config: RunConfig) -> None:
    os.makedirs(config.out_dir, exist_ok=True)
    dictionary, meta = _build_dictionary(config)
    csv_path = _dictionary_path(config)
    save_dictionary_csv(dictionary, csv_path)
    meta_path = os.path.join(config.out_dir, "dictionary.json")
    with open(meta_path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    inputs = [config.raman_path] if config.source == "raman" else []
    _write_manifest(config.out_dir, "gen-dict", config, inputs,
                    [csv_path, meta_path])
    print(f"wrote {csv_path} ({meta['signal_dim']}x{meta['num_atoms']})")


def cmd_gen_data(config: RunConfig) -> None:
    csv_path = _dictionary_path(config)
    dictionary = load_dictionary_csv(csv_path)
    outputs = []
    for k in config.k_range:
        directory = os.path.join(config.out_dir, "data", f"k{k}")

        def stream(k=k):
            for _, shard in training.stream_shards(
                    dictionary, k, config.seed, config.shard_size,
                    config.num_train_samples):
                yield from shard

        datagen.write_dataset(
            stream(), directory, dictionary=dictionary, sparsity=k,
            seed=config.seed, shard_size=config.shard_size,
        )
        outputs.extend(
            os.path.join(directory, name) for name in sorted(os.listdir(directory))
        )
        print(f"wrote {config.num_train_samples} samples at sparsity {k} "
              f"to {directory}")
    _write_manifest(config.out_dir, "gen-data", config, [csv_path], outputs)


def cmd_train(config: RunConfig) -> None:
    csv_path = _dictionary_path(config)
    dictionary = load_dictionary_csv(csv_path)
    os.makedirs(os.path.join(config.out_dir, "models"), exist_ok=True)
    outputs = []
    for k in config.k_range:
        model, rows = training.train_model(
            dictionary, k, config.num_train_samples,
            epochs=config.resolved_epochs, batch_size=config.batch_size,
            hyper=config.hyper(), proj=_projection(config), seed=config.seed,
            shard_size=config.shard_size, val_fraction=config.val_fraction,
        )
        model_path = _model_path(config, k)
        network.save_model(model, model_path)
        log_path = os.path.join(config.out_dir, f"train_log_k{k}.csv")
        training.write_train_log(rows, log_path)
        outputs.extend([model_path, log_path])
        last = rows[-1].mean_loss if rows else float("nan")
        print(f"trained depth-{k} model ({config.resolved_epochs} epochs, "
              f"final mean loss {last:.6g}) -> {model_path}")
    _write_manifest(config.out_dir, "train", config, [csv_path], outputs)


def cmd_eval(config: RunConfig) -> None:
    csv_path = _dictionary_path(config)
    dictionary = load_dictionary_csv(csv_path)
    models = {}
    for k in config.k_range:
        path = _model_path(config, k)
        if not os.path.exists(path):
            raise MissingModel(f"no trained model for sparsity {k} at {path}")
        models[k] = network.load_model(path)
    solvers = {
        "nnmp": metrics.nnmp_runner(dictionary, _projection(config)),
        "nnomp": metrics.nnomp_runner(dictionary),
        "deepmp": metrics.deepmp_runner(models),
    }
    grid = np.linspace(0.0, 1.0, config.ecdf_grid_points)
    reports = metrics.run_sweep(
        dictionary, solvers, config.k_range, config.z_test, config.seed,
        ecdf_grid=grid,
    )
    outputs = []
    metrics_csv = os.path.join(config.out_dir, "metrics.csv")
    metrics_json = os.path.join(config.out_dir, "metrics.json")
    metrics.write_metrics_csv(reports, metrics_csv)
    metrics.write_metrics_json(reports, metrics_json)
    outputs.extend([metrics_csv, metrics_json])
    dict_ecdf = os.path.join(config.out_dir, "ecdf_dictionary.csv")
    metrics.write_ecdf_csv(metrics.coherence_ecdf(dictionary.atoms, grid),
                           dict_ecdf)
    outputs.append(dict_ecdf)
    deepest = max(config.k_range)
    for layer, weights in enumerate(models[deepest].selection_weights):
        path = os.path.join(config.out_dir,
                            f"ecdf_model_k{deepest}_layer{layer}.csv")
        metrics.write_ecdf_csv(metrics.coherence_ecdf(weights, grid), path)
        outputs.append(path)
    inputs = [csv_path] + [_model_path(config, k) for k in config.k_range]
    _write_manifest(config.out_dir, "eval", config, inputs, outputs)
    for label in sorted(reports):
        rep = reports[label]
        summary = ", ".join(
            f"k={k}: {rep.recovery[k]:.3f}" for k in sorted(rep.recovery)
        )
        print(f"{label} recovery  {summary}")
    print(f"wrote {metrics_csv}")


def cmd_ecdf(config: RunConfig, source_path: str) -> None:
    grid = np.linspace(0.0, 1.0, config.ecdf_grid_points)
    os.makedirs(config.out_dir, exist_ok=True)
    outputs = []
    base = os.path.splitext(os.path.basename(source_path))[0]
    if source_path.endswith(".dmp"):
        model = network.load_model(source_path)
        for layer, weights in enumerate(model.selection_weights):
            path = os.path.join(config.out_dir, f"ecdf_{base}_layer{layer}.csv")
            metrics.write_ecdf_csv(metrics.coherence_ecdf(weights, grid), path)
            outputs.append(path)
    else:
        dictionary = load_dictionary_csv(source_path)
        path = os.path.join(config.out_dir, f"ecdf_{base}.csv")
        metrics.write_ecdf_csv(metrics.coherence_ecdf(dictionary.atoms, grid),
                               path)
        outputs.append(path)
    _write_manifest(config.out_dir, "ecdf", config, [source_path], outputs)
    for path in outputs:
        print(f"wrote {path}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deepmp",
        description="Non-negative sparse decomposition: data, training, evaluation.",
    )
    parser.add_argument("--config", metavar="PATH",
                        help="INI config file (defaults are full scale)")
    parser.add_argument("--seed", type=int, metavar="U64",
                        help="master seed override")
    parser.add_argument("--scale", type=float, metavar="FLOAT",
                        help="shrink sample counts by this factor")
    parser.add_argument("--out", metavar="DIR", help="run directory override")
    parser.add_argument("--k-range", metavar="SPEC",
                        help="sparsity levels, e.g. 1-5 or 3 or 1,2,4")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("gen-dict", help="generate or load the dictionary")
    sub.add_parser("gen-data", help="export training mixtures as CSV shards")
    sub.add_parser("train", help="train one model per sparsity level")
    sub.add_parser("eval", help="run the metric sweep over all solvers")
    ecdf = sub.add_parser("ecdf", help="coherence ECDF of a matrix or model")
    ecdf.add_argument("source", help="dictionary CSV or .dmp model file")
    return parser


def resolve_config(args) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out_dir"] = args.out
    if args.k_range is not None:
        overrides["k_range"] = parse_k_range(args.k_range)
    if overrides:
        config = replace(config, **overrides)
    if args.scale is not None:
        config = config.scaled(args.scale)
    return config.validate()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
        if args.command == "gen-dict":
            cmd_gen_dict(config)
        elif args.command == "gen-data":
            cmd_gen_data(config)
        elif args.command == "train":
            cmd_train(config)
        elif args.command == "eval":
            cmd_eval(config)
        elif args.command == "ecdf":
            cmd_ecdf(config, args.source)
    except (InputError, FileNotFoundError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
