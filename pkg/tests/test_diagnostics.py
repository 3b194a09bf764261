import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from annealdiag.diagnostics import (
    arrhenius_factor,
    beta_sensitivity_sweep,
    classify,
    conditional_gibbs_reference,
    estimate_beta_eff,
    gibbs_vector,
    memory_order_parameter,
    sampling_floor,
    tvd,
)
from annealdiag.distributions import SubsystemDistribution, config_to_index
from annealdiag.errors import DegenerateProbeError
from annealdiag.model import make_instance
from annealdiag.samplers import SamplerRequest, glauber_sample
from annealdiag.distributions import empirical_subsystem_distribution


def dist(probs, subsystem=(0,)):
    return SubsystemDistribution(probs=np.asarray(probs, float), subsystem=subsystem)


class TestTVD:
    def test_identical_is_zero(self):
        p = dist([0.3, 0.7])
        assert tvd(p, p) == 0.0

    def test_disjoint_deltas(self):
        assert tvd(dist([1.0, 0.0]), dist([0.0, 1.0])) == 1.0

    def test_direct_value(self):
        assert tvd(dist([0.75, 0.25]), dist([0.25, 0.75])) == pytest.approx(0.5)

    def test_symmetry(self):
        p, q = dist([0.6, 0.4]), dist([0.1, 0.9])
        assert tvd(p, q) == tvd(q, p)

    def test_support_mismatch(self):
        with pytest.raises(ValueError):
            tvd(np.array([1.0]), np.array([0.5, 0.5]))

    @given(st.integers(min_value=0, max_value=10**9))
    @settings(max_examples=200, deadline=None)
    def test_triangle_inequality(self, seed):
        rng = np.random.default_rng(seed)
        p, q, r = rng.dirichlet(np.ones(8), size=3)
        assert tvd(p, r) <= tvd(p, q) + tvd(q, r) + 1e-12


class TestMemoryOrderParameter:
    def test_identical_distributions(self):
        d = dist([1.0, 0.0])
        reads = [np.zeros(100, dtype=np.int64)] * 3  # identical constant reads
        res = memory_order_parameter([d, d, d], reads)
        assert res.m == 0.0
        assert res.bootstrap_std == 0.0

    def test_orthogonal_deltas(self):
        res = memory_order_parameter([dist([1.0, 0.0]), dist([0.0, 1.0])])
        assert res.m == 1.0

    def test_max_of_pairwise(self):
        # engineered so pairwise TVDs are 0.2, 0.5, 0.3
        a = dist([0.7, 0.3, 0.0, 0.0], (0, 1))
        b = dist([0.5, 0.3, 0.2, 0.0], (0, 1))
        c = dist([0.2, 0.3, 0.5, 0.0], (0, 1))
        res = memory_order_parameter([a, b, c])
        assert res.pairwise[(0, 1)] == pytest.approx(0.2)
        assert res.pairwise[(0, 2)] == pytest.approx(0.5)
        assert res.pairwise[(1, 2)] == pytest.approx(0.3)
        assert res.m == pytest.approx(0.5)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(3)
        dists = [dist(rng.dirichlet(np.ones(4)), (0, 1)) for _ in range(4)]
        m0 = memory_order_parameter(dists).m
        for perm in ([3, 1, 0, 2], [2, 3, 1, 0]):
            assert memory_order_parameter([dists[i] for i in perm]).m == pytest.approx(m0)

    def test_needs_two(self):
        with pytest.raises(ValueError):
            memory_order_parameter([dist([1.0, 0.0])])

    def test_bootstrap_deterministic(self):
        rng = np.random.default_rng(0)
        reads = [rng.integers(0, 4, size=500) for _ in range(3)]
        dists = [
            dist(np.bincount(r, minlength=4) / 500, (0, 1)) for r in reads
        ]
        a = memory_order_parameter(dists, reads, seed=5)
        b = memory_order_parameter(dists, reads, seed=5)
        assert a.bootstrap_std == b.bootstrap_std
        assert a.n_resamples == 200


class TestBetaEstimator:
    def test_balanced_counts(self):
        beta, _ = estimate_beta_eff([(100, 100)], h=0.5)
        assert beta == 0.0

    def test_closed_form_ratio(self):
        beta, _ = estimate_beta_eff([(100, 100 * math.e)], h=0.25)
        assert beta == pytest.approx(2.0)

    def test_exact_inversion(self):
        # expected frequencies plugged back recover beta to 1e-12
        for beta in (0.5, 4.289, 7.219):
            h = 0.5
            p_up = 1.0 / (1.0 + math.exp(2 * beta * h))
            n = 5000.0
            counts = [(n * p_up, n * (1 - p_up))] * 3
            got, std = estimate_beta_eff(counts, h)
            assert got == pytest.approx(beta, abs=1e-12)
            assert std == 0.0

    def test_zero_count_degenerate(self):
        with pytest.raises(DegenerateProbeError):
            estimate_beta_eff([(0, 5000)], h=0.5)

    def test_zero_bias_rejected(self):
        with pytest.raises(ValueError):
            estimate_beta_eff([(10, 10)], h=0.0)


class TestConditionalGibbs:
    def test_beta_zero_uniform(self):
        inst = make_instance(8, 4, 0.5, 1.0, 0.5, seed=0)
        ref = conditional_gibbs_reference(inst, 0.0, np.ones(4, dtype=np.int8))
        assert np.allclose(ref.probs, 1 / 16)

    def test_huge_beta_conditional_ground(self):
        inst = make_instance(8, 4, 0.5, 0.0, 0.0, seed=0)
        ref = conditional_gibbs_reference(inst, 1e6, np.ones(4, dtype=np.int8))
        assert ref.probs[0] == pytest.approx(1.0)  # all-up subsystem string

    def test_enumeration_matches_full_gibbs_slice(self):
        # oracle: slice the full 2^n Gibbs vector on the clamped sigma_E
        inst = make_instance(8, 4, 0.5, 1.0, 0.5, seed=5)
        beta = 1.1
        sigma_e = np.array([1, -1, 1, 1], dtype=np.int8)
        full = gibbs_vector(inst, beta)
        env = [q for q in range(8) if q not in inst.subsystem]
        probs = np.zeros(16)
        for z in range(256):
            ok = all(
                ((z >> q) & 1) == (1 if s < 0 else 0) for q, s in zip(env, sigma_e)
            )
            if ok:
                loc = sum(((z >> q) & 1) << k for k, q in enumerate(inst.subsystem))
                probs[loc] += full[z]
        probs /= probs.sum()
        ref = conditional_gibbs_reference(inst, beta, sigma_e)
        assert np.abs(ref.probs - probs).max() < 1e-12

    def test_z2_covariance_without_fields(self):
        inst = make_instance(8, 4, 0.5, 0.0, 0.5, seed=2)
        sigma_e = np.array([1, 1, -1, 1], dtype=np.int8)
        a = conditional_gibbs_reference(inst, 1.3, sigma_e)
        b = conditional_gibbs_reference(inst, 1.3, -sigma_e)
        assert np.allclose(a.probs, b.probs[::-1], atol=1e-12)

    def test_matches_clamped_glauber(self):
        inst = make_instance(12, 4, 0.5, 1.0, 0.5, seed=7)
        sigma_e = np.ones(8, dtype=np.int8)
        req = SamplerRequest(
            instance=inst, beta=1.0, initial=np.ones(12, dtype=np.int8),
            sweeps=50_000, n_samples=25_000, seed=3, clamp_environment=True,
        )
        emp = empirical_subsystem_distribution(glauber_sample(req).reads, inst.subsystem)
        ref = conditional_gibbs_reference(inst, 1.0, sigma_e)
        assert tvd(emp, ref) < 0.02


class TestFloorAndClassification:
    def test_paper_floor_value(self):
        assert sampling_floor(16, 6000) == pytest.approx(0.02582, abs=5e-4)

    def test_trivial_floors(self):
        assert sampling_floor(4, 4) == 0.5
        assert sampling_floor(2, 8) == 0.25

    def test_invalid(self):
        with pytest.raises(ValueError):
            sampling_floor(0, 10)
        with pytest.raises(ValueError):
            sampling_floor(4, 0)

    @pytest.mark.parametrize(
        "m,d,want",
        [
            (0.01, 0.001, "relaxed-thermal"),
            (0.01, 0.95, "relaxed-trapped"),
            (0.5, 0.35, "memory-retaining"),
            (0.5, 0.01, "memory-retaining-aliased"),
            (0.05, 0.049, "relaxed-thermal"),
            (0.05, 0.05, "relaxed-trapped"),
        ],
    )
    def test_classify(self, m, d, want):
        assert classify(m, d) == want

    def test_classify_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            classify(1.2, 0.1)


class TestBetaSensitivity:
    def test_zero_at_center_when_measured_is_reference(self):
        inst = make_instance(8, 4, 0.5, 1.0, 0.5, seed=1)
        sigma_e = np.ones(4, dtype=np.int8)
        beta = 2.0
        measured = conditional_gibbs_reference(inst, beta, sigma_e)
        curve = beta_sensitivity_sweep(measured, inst, sigma_e, beta)
        assert len(curve) == 9
        center = min(curve, key=lambda p: abs(p[0] - beta))
        assert center[1] == pytest.approx(0.0, abs=1e-12)
        assert min(p[1] for p in curve) == center[1]

    def test_flat_for_near_deterministic(self):
        inst = make_instance(12, 4, 0.5, 0.0, 0.0, seed=0)
        sigma_e = np.ones(8, dtype=np.int8)
        measured = conditional_gibbs_reference(inst, 7.219, sigma_e)
        curve = beta_sensitivity_sweep(measured, inst, sigma_e, 7.219)
        values = [d for _, d in curve]
        assert max(values) - min(values) < 0.01

    def test_minimum_at_generating_temperature(self):
        # measured data generated at a hotter temperature on a soft
        # instance: the curve minimum sits at the grid point nearest the
        # generating beta (chosen here to lie on the grid exactly)
        inst = make_instance(8, 4, 0.5, 1.0, 0.5, seed=4)
        sigma_e = np.ones(4, dtype=np.int8)
        beta = 1.0
        generating = beta * 3**0.5  # a log-grid point of the 9-point sweep
        measured = conditional_gibbs_reference(inst, generating, sigma_e)
        curve = beta_sensitivity_sweep(measured, inst, sigma_e, beta)
        best_beta = min(curve, key=lambda p: p[1])[0]
        nearest = min(curve, key=lambda p: abs(p[0] - generating))[0]
        assert best_beta == nearest
        assert best_beta == pytest.approx(generating, rel=1e-9)


class TestArrhenius:
    def test_device_value(self):
        x = arrhenius_factor(7.219, 1.93)
        assert x == pytest.approx(13.93, abs=0.01)
        assert 13.5 <= x <= 14.5

    def test_zero_gap(self):
        assert arrhenius_factor(5.0, 0.0) == 0.0

    def test_second_device(self):
        assert arrhenius_factor(4.289, 1.93) == pytest.approx(8.28, abs=0.01)
