#!/usr/bin/env python3
"""The adaptive family: first copy always pays, repeats follow a geometric law."""

from gmesim import ProtocolConfig
from gmesim.protocols import run_sigma_adaptive, sigma_scan


def main():
    # a few seeded trajectories at p = 0.3
    print("adaptive runs at p = 0.3 (first outcome free):")
    for seed in range(6):
        rep = run_sigma_adaptive(ProtocolConfig(p=0.3, seed=seed, max_copies=21))
        route = rep.steps[-1].measurement.split(":")[0] if rep.success else "exhausted"
        print(
            f"  seed {seed}: success = {str(rep.success):<5} "
            f"copies = {rep.copies_consumed:2d}  finish = {route}"
        )

    # the repeat phase success law, empirically
    print("\nsuccess within n repeat copies, empirical vs 1-(1-p)^n:")
    rows = sigma_scan([0.1, 0.5], n_max=8, shots=100_000, seed=42)
    print("  p     n   analytic   empirical  |err|")
    for row in rows:
        if row.n == 0:
            continue
        print(
            f"  {row.p:.1f}  {row.n:2d}   {row.analytic:.6f}   "
            f"{row.empirical:.6f}  {row.abs_error:.6f}"
        )


if __name__ == "__main__":
    main()
