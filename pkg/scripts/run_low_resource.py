#!/usr/bin/env python3
"""Run the low-resource comparison grid for one dataset and print the table.

Reproduces the evaluation protocol: for each method, subsample n examples
per class (train and dev), fine-tune, evaluate on the full test split,
repeat, and report Mean (STD) accuracy in percent.

Micro-backend demo (no downloads):

    python3 scripts/make_demo_dataset.py --out demo_data
    python3 scripts/run_low_resource.py --dataset demo_data/dataset.toml \
        --methods none eda text_smoothing --reps 3 --epochs 10 \
        --learning-rate 2e-2 --out runs/demo

Full protocol against a staged pretrained checkpoint:

    python3 scripts/run_low_resource.py --dataset cfg/sst2.toml \
        --backend cfg/bert.toml --methods none eda text_smoothing \
        --compose eda --reps 15 --out runs/sst2
"""

import argparse

from textsmooth.backends import build_backend, load_backend_config
from textsmooth.datasets import load_dataset_spec
from textsmooth.experiment import ExperimentConfig, run_experiment
from textsmooth.tables import emit_table


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dataset", required=True, help="dataset spec TOML")
    parser.add_argument("--backend", default=None, help="backend config TOML (default: micro)")
    parser.add_argument("--methods", nargs="+", default=["none", "text_smoothing"],
                        help="base methods to run")
    parser.add_argument("--compose", nargs="*", default=[],
                        help="discrete methods to additionally run composed with smoothing")
    parser.add_argument("--n-per-class", type=int, default=10)
    parser.add_argument("--reps", type=int, default=15)
    parser.add_argument("--lambda", dest="lam", type=float, default=0.1)
    parser.add_argument("--master-seed", type=int, default=0)
    parser.add_argument("--epochs", type=int, default=8)
    parser.add_argument("--batch-size", type=int, default=8)
    parser.add_argument("--learning-rate", type=float, default=4e-5)
    parser.add_argument("--external-file", default=None)
    parser.add_argument("--out", required=True)
    args = parser.parse_args()

    backend = build_backend(
        load_backend_config(args.backend) if args.backend else {"kind": "micro"})
    spec = load_dataset_spec(args.dataset)

    jobs = [(method, False) for method in args.methods]
    jobs += [(method, True) for method in args.compose]
    results = []
    for method, composed in jobs:
        cfg = ExperimentConfig(
            dataset=spec, method=method, compose_smoothing=composed,
            n_per_class=args.n_per_class, repetitions=args.reps, lam=args.lam,
            master_seed=args.master_seed, epochs=args.epochs,
            batch_size=args.batch_size, learning_rate=args.learning_rate,
            external_path=args.external_file,
        )
        print(f"== {spec.name} / {cfg.method_label} ({args.reps} repetitions)")
        result = run_experiment(cfg, backend, out_dir=args.out)
        print(f"   mean {result.mean * 100:.2f} std {result.std * 100:.2f}")
        results.append(result)

    rendered, _ = emit_table(results, fmt="text")
    print()
    print(rendered)


if __name__ == "__main__":
    main()
