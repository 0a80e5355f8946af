#!/usr/bin/env python3
"""End-to-end desk-scale experiment: dictionary, training, evaluation curves.

Runs the full pipeline (gen-dict -> train -> eval) for sparsity levels 1..5
and prints the recovery / reconstruction-error table for NNMP, NNOMP, and the
trained model. Defaults shrink the full-scale setting by --scale (0.1) so the
whole run finishes in minutes on a laptop.

Usage:
  python scripts/run_synthetic_experiment.py --out runs/synthetic --seed 0
  python scripts/run_synthetic_experiment.py --dataset surrogate --scale 0.05
"""

import argparse
import json
import os
import sys

from deepmp.cli import main as deepmp_main


def run(argv: list[str]) -> None:
    code = deepmp_main(argv)
    if code != 0:
        sys.exit(code)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="runs/synthetic", help="run directory")
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--scale", type=float, default=0.1,
                        help="sample-count scale factor (1.0 = full scale)")
    parser.add_argument("--dataset", choices=["synthetic", "surrogate"],
                        default="synthetic")
    parser.add_argument("--k-range", default="1-5")
    args = parser.parse_args()

    config_path = os.path.join(args.out, "experiment.ini")
    os.makedirs(args.out, exist_ok=True)
    with open(config_path, "w", encoding="utf-8") as fh:
        fh.write("[dictionary]\n")
        fh.write(f"source = {args.dataset}\n")
        if args.dataset == "surrogate":
            fh.write("signal_dim = 503\nnum_atoms = 600\n")

    common = ["--config", config_path, "--seed", str(args.seed),
              "--scale", str(args.scale), "--out", args.out,
              "--k-range", args.k_range]
    run(common + ["gen-dict"])
    run(common + ["train"])
    run(common + ["eval"])

    with open(os.path.join(args.out, "metrics.json"), encoding="utf-8") as fh:
        reports = json.load(fh)
    ks = sorted(int(k) for k in next(iter(reports.values()))["recovery"])
    print("\nsupport recovery (fraction of true atoms found)")
    print("solver  " + "  ".join(f"k={k}" for k in ks))
    for label in sorted(reports):
        row = reports[label]["recovery"]
        print(f"{label:7s} " + "  ".join(f"{row[str(k)]:.3f}" for k in ks))
    print("\nrelative reconstruction error")
    print("solver  " + "  ".join(f"k={k}" for k in ks))
    for label in sorted(reports):
        row = reports[label]["epsilon"]
        print(f"{label:7s} " + "  ".join(f"{row[str(k)]:.3f}" for k in ks))


if __name__ == "__main__":
    main()
