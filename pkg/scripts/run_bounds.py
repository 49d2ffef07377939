#!/usr/bin/env python3
"""Run the bounds experiment with its default config."""

import sys
from pathlib import Path

from tiltdiff.cli import main

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "bounds_coin.json"

if __name__ == "__main__":
    sys.exit(main(["--config", str(CONFIG), *sys.argv[1:], "bounds"]))
