#!/usr/bin/env python3
"""Desk-scale mean-MSE learning curves for every default scenario.

Runs 100 Monte-Carlo trials per (sparsity, SNR, algorithm) cell and writes
one CSV/SVG pair per scenario plus the BER table into results/mse/.
Pass-through arguments go to the `sparse-nlms mse-curves` subcommand, e.g.

    python scripts/run_mse_curves.py --runs 1000 --snr-db 10
"""

import sys

from sparse_nlms.cli import cli_main

if __name__ == "__main__":
    sys.exit(cli_main(["mse-curves", "--out", "results/mse", *sys.argv[1:]]))
