#!/usr/bin/env python3
"""Thin wrapper around the spaceform-areas experiment runner.

Example:
    python3 scripts/run_experiment.py --experiment cp-area-cf --out out/cp \
        --seed 31337 --threads 2 --override paths=20000
"""

import sys

from spaceform_areas.cli import main

if __name__ == "__main__":
    sys.exit(main())
