#!/usr/bin/env python3
"""Scaling experiment: hybrid annealing vs the exact oracle across model
sizes from ~100 to ~20,000 variables under equal per-size time budgets.

Writes sweep.csv and sweep_plotdata.txt next to the chosen output stem and
prints the csv; the plotdata file carries (num_variables, wall_time) and
(num_variables, objective) series per solver for external plotting.
"""

import argparse
from pathlib import Path

from linehaul.harness import emit_report, run_scaling_sweep


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=5)
    parser.add_argument("--out-stem", default="sweep")
    args = parser.parse_args()

    records = run_scaling_sweep(seed=args.seed)
    csv_text = emit_report(records, "csv")
    Path(f"{args.out_stem}.csv").write_text(csv_text)
    Path(f"{args.out_stem}_plotdata.txt").write_text(emit_report(records, "plotdata"))
    print(csv_text, end="")

    hybrid = [r for r in records if r.solver_name == "hybrid"]
    best = {
        r.num_variables: min(
            x.objective for x in records if x.num_variables == r.num_variables
        )
        for r in hybrid
    }
    print()
    for r in hybrid:
        print(
            f"vars={r.num_variables:>6}  hybrid_time={r.wall_time:7.2f}s  "
            f"objective_ratio={r.objective / best[r.num_variables]:.3f}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
