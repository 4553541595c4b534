"""Experiment configuration and machine-readable reports.

Config files are JSON with a version tag ``symkit-config 1``.  Each
experiment produces one JSON document plus a row in a flat CSV summary
(id, verdict, value, tolerance).  Report payloads are deterministic for a
fixed config and seed except for the wall-time field, which auditors strip
before byte comparison.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict, dataclass, field as dc_field
from pathlib import Path

__all__ = ["SCHEMA_TAG", "SuiteConfig", "ExperimentReport", "write_reports", "load_config"]

SCHEMA_TAG = "symkit-config 1"

VERDICT_PASS = "pass"
VERDICT_FAIL = "fail"
VERDICT_TREND = "trend-pass"


@dataclass(frozen=True)
class SuiteConfig:
    """Suite parameters; the ladder is a list of (d, n, h) triples, h halving per d."""

    seed: int = 20260808
    ladder: tuple[tuple[int, int, float], ...] = (
        (1, 128, 8.0 / 128),
        (1, 256, 8.0 / 256),
        (1, 512, 8.0 / 512),
        (2, 32, 4.0 / 32),
        (2, 64, 4.0 / 64),
        (2, 128, 4.0 / 128),
    )
    verify_cases: int = 200
    verify_shape_1d: int = 64
    verify_shape_2d: int = 16
    support_fraction: float = 0.6
    n_bumps: int = 6
    mc_samples: int = 200_000
    contraction_factor: float = 0.7
    final_violation_fraction: float = 1e-3
    out_dir: str = "symkit-out"
    jobs: int = 1

    def __post_init__(self):
        ladder = tuple((int(d), int(n), float(h)) for d, n, h in self.ladder)
        object.__setattr__(self, "ladder", ladder)
        for d in {d for d, _, _ in ladder}:
            rungs = [(n, h) for dd, n, h in ladder if dd == d]
            for (n1, h1), (n2, h2) in zip(rungs, rungs[1:]):
                if not (n2 == 2 * n1 and abs(h2 - h1 / 2) <= 1e-12 * h1):
                    raise ValueError(f"ladder for d={d} must refine by halving h: {rungs}")
        if not 0 < self.support_fraction <= 1:
            raise ValueError("support_fraction must be in (0, 1]")
        if self.mc_samples <= 0 or self.verify_cases < 0 or self.jobs < 1:
            raise ValueError("counts must be positive")

    def rungs(self, d: int) -> list[tuple[int, float]]:
        return [(n, h) for dd, n, h in self.ladder if dd == d]

    def to_dict(self) -> dict:
        out = asdict(self)
        out["schema"] = SCHEMA_TAG
        out["ladder"] = [list(r) for r in self.ladder]
        return out


def load_config(path) -> SuiteConfig:
    with open(path) as fh:
        raw = json.load(fh)
    tag = raw.pop("schema", None)
    if tag != SCHEMA_TAG:
        raise ValueError(f"config schema must be {SCHEMA_TAG!r}, got {tag!r}")
    if "ladder" in raw:
        raw["ladder"] = tuple(tuple(r) for r in raw["ladder"])
    known = {f for f in SuiteConfig.__dataclass_fields__}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return SuiteConfig(**raw)


@dataclass
class ExperimentReport:
    """Auditable record: the verdict is derivable from the recorded numbers alone."""

    experiment_id: str
    inputs_digest: str = ""
    values: dict = dc_field(default_factory=dict)
    deficits: dict = dc_field(default_factory=dict)
    standard_errors: dict = dc_field(default_factory=dict)
    tolerances: dict = dc_field(default_factory=dict)
    series: dict = dc_field(default_factory=dict)
    warnings: list = dc_field(default_factory=list)
    verdict: str = VERDICT_PASS
    wall_time_s: float = 0.0

    def primary_value(self) -> float | None:
        for v in self.values.values():
            return v
        return None

    def primary_tolerance(self) -> float | None:
        for v in self.tolerances.values():
            return v
        return None

    def to_dict(self) -> dict:
        return {
            "experiment_id": self.experiment_id,
            "inputs_digest": self.inputs_digest,
            "values": self.values,
            "deficits": self.deficits,
            "standard_errors": self.standard_errors,
            "tolerances": self.tolerances,
            "series": self.series,
            "warnings": self.warnings,
            "verdict": self.verdict,
            "wall_time_s": self.wall_time_s,
        }


def digest_inputs(*parts) -> str:
    """Stable hash of configuration scalars, strings, and arrays."""
    hasher = hashlib.sha256()
    for p in parts:
        if hasattr(p, "tobytes"):
            hasher.update(p.tobytes())
        else:
            hasher.update(repr(p).encode())
    return hasher.hexdigest()[:16]


def write_reports(reports: list[ExperimentReport], out_dir) -> Path:
    """Write one JSON per report plus the flat CSV summary; returns the directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for rep in reports:
        path = out / f"{rep.experiment_id}.json"
        with open(path, "w") as fh:
            json.dump(rep.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")
    with open(out / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "verdict", "value", "tolerance"])
        for rep in reports:
            writer.writerow(
                [rep.experiment_id, rep.verdict, rep.primary_value(), rep.primary_tolerance()]
            )
    return out
