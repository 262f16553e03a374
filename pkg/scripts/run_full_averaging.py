#!/usr/bin/env python3
"""Full-scale run: 1000 Monte-Carlo averages over every default scenario.

Uses the shipped configs/defaults.json (36 cells x 1000 runs x up to 5000
iterations; takes a few minutes). Outputs land in results/full/.
"""

import pathlib
import sys

from sparse_nlms.cli import cli_main

CONFIG = pathlib.Path(__file__).resolve().parent.parent / "configs" / "defaults.json"

if __name__ == "__main__":
    sys.exit(
        cli_main(
            [
                "mse-curves",
                "--config", str(CONFIG),
                "--out", "results/full",
                *sys.argv[1:],
            ]
        )
    )
