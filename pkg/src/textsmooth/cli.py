"""Command-line interface.

    textsmooth run --dataset spec.toml --method text_smoothing --lambda 0.1 \
        --n-per-class 10 --reps 15 --master-seed 0 --backend backend.toml --out runs/
    textsmooth table --in runs/ --format text
    textsmooth augment --method eda --in train.tsv --out train.aug.tsv --seed 1

Exit codes: 0 success, 2 config error, 3 data error, 4 backend error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from .augmenters import EdaConfig, eda_augment, import_external, mlm_replace_augment, write_augmented_tsv
from .backends import build_backend, load_backend_config
from .datasets import load_dataset_spec
from .errors import BackendError, ConfigError, DataError, TextSmoothError
from .experiment import ExperimentConfig, load_results, run_experiment
from .seeding import stable_seed
from .tables import emit_table

EXIT_CONFIG, EXIT_DATA, EXIT_BACKEND = 2, 3, 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="textsmooth",
        description="Soft-label text augmentation experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment configuration")
    run.add_argument("--dataset", required=True, help="dataset spec TOML path")
    run.add_argument("--method", required=True,
                     help="none | text_smoothing | eda | mlm_replace | external:<name>")
    run.add_argument("--compose-smoothing", action="store_true",
                     help="route the augmented stream through smoothing")
    run.add_argument("--lambda", dest="lam", type=float, default=0.1,
                     help="interpolation weight toward the one-hot input (default 0.1)")
    run.add_argument("--n-per-class", type=int, default=10)
    run.add_argument("--reps", type=int, default=15)
    run.add_argument("--master-seed", type=int, default=0)
    run.add_argument("--backend", default=None,
                     help="backend config TOML (defaults to the bundled micro backend)")
    run.add_argument("--external-file", default=None,
                     help="exchange TSV for external:<name> methods")
    run.add_argument("--epochs", type=int, default=8)
    run.add_argument("--batch-size", type=int, default=8)
    run.add_argument("--learning-rate", type=float, default=4e-5)
    run.add_argument("--mask-ratio", type=float, default=0.15)
    run.add_argument("--out", required=True, help="results directory")

    table = sub.add_parser("table", help="render a comparison table from run files")
    table.add_argument("--in", dest="in_dir", required=True)
    table.add_argument("--format", choices=("text", "csv", "json"), default="text")
    table.add_argument("--out", default=None, help="also write the table to this path")

    augment = sub.add_parser("augment", help="produce an offline augmented-data TSV")
    augment.add_argument("--method", required=True, choices=("eda", "mlm_replace"))
    augment.add_argument("--in", dest="in_path", required=True, help="input exchange TSV")
    augment.add_argument("--out", required=True, help="output exchange TSV")
    augment.add_argument("--seed", type=int, default=0)
    augment.add_argument("--num-aug", type=int, default=1)
    augment.add_argument("--alpha", type=float, default=0.1)
    augment.add_argument("--mask-ratio", type=float, default=0.15)
    augment.add_argument("--backend", default=None,
                         help="backend config TOML (mlm_replace only)")
    return parser


def _load_backend(path: Optional[str]):
    if path is None:
        return build_backend({"kind": "micro"})
    return build_backend(load_backend_config(path))


def _cmd_run(args: argparse.Namespace) -> int:
    backend = _load_backend(args.backend)
    spec = load_dataset_spec(args.dataset)
    cfg = ExperimentConfig(
        dataset=spec,
        method=args.method,
        compose_smoothing=args.compose_smoothing,
        n_per_class=args.n_per_class,
        repetitions=args.reps,
        lam=args.lam,
        master_seed=args.master_seed,
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        external_path=args.external_file,
        mask_ratio=args.mask_ratio,
    )
    result = run_experiment(cfg, backend, out_dir=args.out)
    print(f"{spec.name} / {cfg.method_label}: "
          f"mean {result.mean * 100:.2f} std {result.std * 100:.2f} "
          f"({len(result.per_seed_accuracy)} repetitions)")
    print(f"persisted under {args.out} (fingerprint {result.config_fingerprint})")
    return 0


def _cmd_table(args: argparse.Namespace) -> int:
    results = load_results(args.in_dir)
    rendered, written = emit_table(results, out_path=args.out, fmt=args.format)
    print(rendered, end="" if rendered.endswith("\n") else "\n")
    if written is not None:
        print(f"wrote {written}", file=sys.stderr)
    return 0


def _cmd_augment(args: argparse.Namespace) -> int:
    examples = import_external(args.in_path, "source")
    out = []
    if args.method == "eda":
        cfg = EdaConfig(alpha=args.alpha, num_aug_per_example=args.num_aug)
        for idx, ex in enumerate(examples):
            out.extend(eda_augment(ex.base, cfg, stable_seed(args.seed, idx)))
    else:
        backend = _load_backend(args.backend)
        for idx, ex in enumerate(examples):
            out.append(mlm_replace_augment(
                ex.base, args.mask_ratio, stable_seed(args.seed, idx), backend))
    count = write_augmented_tsv(out, args.out)
    print(f"wrote {count} augmented examples to {args.out}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = _build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "table": _cmd_table, "augment": _cmd_augment}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except BackendError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except TextSmoothError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
