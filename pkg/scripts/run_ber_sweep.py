#!/usr/bin/env python3
"""BER versus Es/N0 for all modulations and algorithms.

Estimates the steady-state channel MSE of the reference scenario (K=3 at
5 dB) with 100 desk-scale runs, then maps it through the effective-SNR and
closed-form BER approximations over the 12..30 dB grid. Extra arguments go
to the `sparse-nlms ber-sweep` subcommand.
"""

import sys

from sparse_nlms.cli import cli_main

if __name__ == "__main__":
    sys.exit(cli_main(["ber-sweep", "--out", "results/ber", *sys.argv[1:]]))
