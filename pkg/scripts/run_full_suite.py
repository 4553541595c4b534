#!/usr/bin/env python3
"""Run every experiment verb and collect reports under one output directory."""

import sys
from pathlib import Path

from symkit.cli import main

VERBS = ["verify", "refine", "spectral", "stability", "choquard", "probe-continuity"]

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "symkit-out"
    worst = 0
    for verb in VERBS:
        print(f"== symkit {verb} ==")
        code = main(["--out", str(Path(out) / verb), verb])
        worst = max(worst, code)
    raise SystemExit(worst)
