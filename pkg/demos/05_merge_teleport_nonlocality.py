#!/usr/bin/env python3
"""Merging pairs into GHZ states, teleporting them apart, and testing nonlocality.

Three vignettes:
  1. the middle party fuses two Bell pairs into GHZ(3); every measurement
     branch works once its recorded Pauli correction is applied;
  2. the same merge with partially entangled pairs: the branch amplitudes
     follow the parity outcomes;
  3. a GHZ state prepared locally and distributed by teleportation, then fed
     to the three-party nonlocality functional.
"""

import math

from gmesim import bell_pair, fidelity_pure, ghz_state, ket
from gmesim.entanglement import (
    SVETLICHNY_CLASSICAL_BOUND,
    ghz_optimal_settings,
    svetlichny_value,
)
from gmesim.protocols import distribute_via_teleportation, merge_chain_to_ghz


def main():
    print("1) merging two Bell pairs at the middle party\n")
    result = merge_chain_to_ghz([bell_pair("phi+"), bell_pair("phi+")])
    for br in result.branches:
        fix = ",".join(br.corrections) if br.corrections else "(none)"
        print(
            f"  parity {br.parity_pattern[0]}, sign {br.sign_pattern[0]}: "
            f"prob = {br.probability:.4f}  F(GHZ3) = "
            f"{fidelity_pure(br.state, ghz_state(3)):.6f}  corrections: {fix}"
        )

    print("\n2) partially entangled pairs (a, b) = (0.8, 0.6)\n")
    pair = ket([0.8, 0.0, 0.0, 0.6], (2, 2))
    result = merge_chain_to_ghz([pair, pair])
    for br in result.branches:
        amps = br.state.amplitudes
        print(
            f"  parity {br.parity_pattern[0]}, sign {br.sign_pattern[0]}: "
            f"prob = {br.probability:.4f}  state = "
            f"{amps[0].real:.4f}|000> + {amps[-1].real:.4f}|111>"
        )
    print("  correlated parity keeps (a^2, b^2); anticorrelated flattens to uniform.")

    print("\n3) GHZ prepared at B, legs teleported to A and C\n")
    shipped = distribute_via_teleportation(
        ghz_state(3), [(0, bell_pair("phi+")), (2, bell_pair("phi+"))]
    )
    print(f"  arrival fidelity with GHZ(3): {fidelity_pure(shipped, ghz_state(3)):.9f}")
    value = svetlichny_value(shipped, ghz_optimal_settings())
    print(
        f"  nonlocality functional: {value:.6f} "
        f"(classical bound {SVETLICHNY_CLASSICAL_BOUND}, quantum max {4 * math.sqrt(2):.6f})"
    )


if __name__ == "__main__":
    main()
