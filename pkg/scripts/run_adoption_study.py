#!/usr/bin/env python3
"""Before/after adoption study over the shipped behavior baselines.

For each persona, computes the stationary distribution of the baseline
chain and of the chain with the adoption overrides applied, and prints the
per-state shift with the watched states flagged. Writes a JSON document
next to this script unless --out is given.

Usage: python3 scripts/run_adoption_study.py [--out study.json]
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

from greenbasket.chain import apply_transform, compare, load_matrix, load_transform, stationary

REPO_ROOT = Path(__file__).resolve().parents[1]
CHAINS = REPO_ROOT / "data" / "chains"
WATCH = ("S6", "S9", "S12", "S14")


def study(persona: str) -> dict:
    base = load_matrix(CHAINS / f"{persona}_baseline.txt")
    transform = load_transform(CHAINS / f"{persona}_adoption.txt")
    before = stationary(base)
    after = stationary(apply_transform(base, transform))
    report = compare(before, after, watch=WATCH)

    print(f"\n== {persona} ({transform.name})")
    print(f"{'state':>6} {'before':>10} {'after':>10} {'delta':>11}")
    for label in report.labels:
        mark = " <- watched" if label in WATCH else ""
        print(f"{label:>6} {report.before[label]:>10.6f} "
              f"{report.after[label]:>10.6f} {report.delta[label]:>+11.6f}{mark}")
    verdict = "yes" if report.all_watched_increased else "NO"
    print(f"all watched states increased: {verdict}")

    return {
        "persona": persona,
        "transform": transform.name,
        "iterations": {"before": before.iterations_used, "after": after.iterations_used},
        "watched_increased": report.all_watched_increased,
        "states": [
            {
                "state": label,
                "before": report.before[label],
                "after": report.after[label],
                "delta": report.delta[label],
                "watched": label in WATCH,
            }
            for label in report.labels
        ],
    }


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(Path(__file__).parent / "adoption_study.json"))
    args = parser.parse_args()

    results = [study(persona) for persona in ("maria", "olivia")]
    Path(args.out).write_text(json.dumps(results, indent=2), encoding="utf-8")
    print(f"\nwrote {args.out}")


if __name__ == "__main__":
    main()
