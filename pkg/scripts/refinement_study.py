#!/usr/bin/env python3
"""Print the refinement-ladder violation tables for the contracted inequalities."""

from symkit.experiments import run_refine
from symkit.report import SuiteConfig

if __name__ == "__main__":
    config = SuiteConfig()
    for rep in run_refine(config):
        print(f"{rep.experiment_id:30s} {rep.verdict}")
        if "violations" in rep.series:
            for k, (v, s) in enumerate(zip(rep.series["violations"], rep.series["scales"])):
                print(f"    rung {k}: violation {v:.3e}   scale {s:.3e}")
        if "quotients" in rep.series:
            print(f"    quotients: {['%.6f' % q for q in rep.series['quotients']]}")
