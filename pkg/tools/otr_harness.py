#!/usr/bin/env python3

# Runs online transportation algorithms, bound sweeps, ratio tables and the SD benchmark.
#
# Exit codes: 0 when every checked bound holds, 1 on a violation (the witness instance is written
# to the JSON report), 2 on usage or parse errors, 3 on an unknown algorithm.

import sys

from transport.cli import main

if __name__ == "__main__":
    sys.exit(main(sys.argv))
