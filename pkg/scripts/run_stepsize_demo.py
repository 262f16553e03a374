#!/usr/bin/env python3
"""Step size versus estimation error, one adaptive run.

Runs a single VSS trial with step ceiling 1 next to a fixed step of 0.5,
showing the step shrinking as the error shrinks. Extra arguments go to the
`sparse-nlms stepsize-demo` subcommand (e.g. --snr-db 20).
"""

import sys

from sparse_nlms.cli import cli_main

if __name__ == "__main__":
    sys.exit(cli_main(["stepsize-demo", "--out", "results/stepsize", *sys.argv[1:]]))
