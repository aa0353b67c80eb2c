#!/usr/bin/env python3
"""Regenerate the checked-in micro-backend weight archive.

The archive is deterministic given the seed, so re-running this script
after a clean checkout is a no-op. Run from the repository root:

    python scripts/make_micro_weights.py
"""

import argparse

from textsmooth.backends.micro import DEFAULT_WEIGHTS_SEED, write_default_archive


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=DEFAULT_WEIGHTS_SEED)
    parser.add_argument("--out", default=None, help="target path (defaults to the package asset)")
    args = parser.parse_args()
    path = write_default_archive(args.out, seed=args.seed)
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
