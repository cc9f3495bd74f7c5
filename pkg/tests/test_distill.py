"""Purification pipeline: filters, twirling, and the two-copy recurrence."""

import math

import numpy as np
import pytest

from gmesim.distill import (
    DISTILLABLE_FIDELITY,
    FilterPair,
    distill_pipeline,
    identity_filter,
    isotropic_state,
    local_filter,
    procrustean_filter,
    recurrence_round,
    twirl_to_isotropic,
)
from gmesim.entanglement import Bipartition, negativity
from gmesim.protocols import build_prop1_example, run_prop1_step
from gmesim.qcore import (
    DensityOperator,
    PartyDims,
    basis_ket,
    bell_pair,
    fidelity_pure,
    ket,
    mix,
)

from helpers import random_density, recurrence_accept_prob, recurrence_map

CUT = Bipartition(frozenset({0}), 2)


def prop1_residual(p=0.5):
    """Kept branch of the single-step protocol; F = 2/3 at p = 1/2."""
    branches = run_prop1_step(build_prop1_example(p), basis_ket((2,), (0,)))
    return branches[0].pair_state


class TestFilters:
    def test_filter_pair_must_be_complete(self):
        k = np.diag([1.0, 0.5]).astype(complex)
        with pytest.raises(ValueError):
            FilterPair(k, k)  # k0^2 + k1^2 != 1

    def test_identity_filter_is_trivial(self):
        f = identity_filter(2)
        branches = local_filter(bell_pair("phi+").density(), 0, f)
        assert abs(branches[0][0] - 1.0) < 1e-12

    @pytest.mark.parametrize("a,b", [(0.8, 0.6), (0.6, 0.8), (0.95, math.sqrt(1 - 0.95**2))])
    def test_procrustean_success_probability(self, a, b):
        st = ket([a, 0, 0, b], (2, 2))
        prob, out = local_filter(st.density(), 0, procrustean_filter(a, b))[0]
        assert abs(prob - 2 * min(a * a, b * b)) < 1e-12
        assert abs(fidelity_pure(out, bell_pair("phi+")) - 1.0) < 1e-12

    def test_filter_branch_probabilities_sum_to_one(self):
        rng = np.random.default_rng(41)
        rho = DensityOperator(PartyDims((2, 2)), random_density((2, 2), rng))
        branches = local_filter(rho, 1, procrustean_filter(0.7, math.sqrt(0.51)))
        assert abs(sum(p for p, _ in branches) - 1.0) < 1e-12

    def test_filtering_can_raise_negativity(self):
        """A one-sided filter strictly improves the kept single-step branch."""
        rho = prop1_residual()
        before = negativity(rho, CUT)
        k0 = np.diag([1.0, 0.55]).astype(complex)
        k1 = np.diag([0.0, math.sqrt(1 - 0.55**2)]).astype(complex)
        prob, kept = local_filter(rho, 0, FilterPair(k0, k1))[0]
        assert prob < 1.0
        assert negativity(kept, CUT) > before + 0.04


class TestTwirl:
    def test_preserves_target_fidelity_and_isotropizes(self):
        rng = np.random.default_rng(43)
        rho = DensityOperator(PartyDims((2, 2)), random_density((2, 2), rng))
        f = fidelity_pure(rho, bell_pair("phi+"))
        iso = twirl_to_isotropic(rho)
        assert abs(fidelity_pure(iso, bell_pair("phi+")) - f) < 1e-12
        np.testing.assert_allclose(iso.matrix, isotropic_state(f).matrix, atol=1e-12)

    def test_isotropic_is_fixed_point(self):
        iso = isotropic_state(0.8)
        np.testing.assert_allclose(twirl_to_isotropic(iso).matrix, iso.matrix, atol=1e-12)

    def test_isotropic_state_bounds(self):
        with pytest.raises(ValueError):
            isotropic_state(1.2)
        with pytest.raises(ValueError):
            isotropic_state(-0.1)


class TestRecurrence:
    @pytest.mark.parametrize("f", [0.55, 0.6, 2 / 3, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95])
    def test_matches_closed_form(self, f):
        prob, out = recurrence_round(isotropic_state(f))
        assert abs(prob - recurrence_accept_prob(f)) < 1e-12
        assert abs(fidelity_pure(out, bell_pair("phi+")) - recurrence_map(f)) < 1e-12

    def test_fixed_points(self):
        _, out = recurrence_round(isotropic_state(1.0))
        assert abs(fidelity_pure(out, bell_pair("phi+")) - 1.0) < 1e-12
        _, out = recurrence_round(isotropic_state(0.5))
        assert abs(fidelity_pure(out, bell_pair("phi+")) - 0.5) < 1e-12

    def test_improves_above_threshold(self):
        for f in (0.55, 0.7, 0.9):
            _, out = recurrence_round(isotropic_state(f))
            assert fidelity_pure(out, bell_pair("phi+")) > f


class TestPipeline:
    def test_rejects_bad_round_count(self):
        with pytest.raises(ValueError):
            distill_pipeline(isotropic_state(0.7), 0)

    def test_trajectory_strictly_increases(self):
        result = distill_pipeline(prop1_residual(), 3)
        assert result.status == "ok"
        fids = result.fidelities
        assert len(fids) == 4  # initial + three rounds
        assert all(b > a for a, b in zip(fids, fids[1:]))
        probs = [q for _, q in result.trajectory]
        assert all(b < a for a, b in zip(probs, probs[1:]))

    def test_not_distillable_below_threshold(self):
        result = distill_pipeline(isotropic_state(0.3), 2)
        assert result.status == "not_distillable"
        assert result.fidelities[0] <= DISTILLABLE_FIDELITY

    def test_pure_nonmaximal_is_filtered_to_unit_fidelity(self):
        st = ket([0.8, 0, 0, 0.6], (2, 2))
        result = distill_pipeline(st.density(), 1)
        assert result.filtered
        assert abs(result.filter_probability - 2 * 0.36) < 1e-9
        assert abs(result.fidelities[0] - 1.0) < 1e-9

    def test_separable_input_reports_not_distillable(self):
        rho = mix([
            (0.5, basis_ket((2, 2), (0, 0)).density()),
            (0.5, basis_ket((2, 2), (1, 1)).density()),
        ])
        assert distill_pipeline(rho, 2).status == "not_distillable"
